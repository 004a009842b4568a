#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace wgmgyro {

// Philox4x32-10 counter-based generator. Chosen because the stochastic
// trajectories must be reproducible bit-for-bit for a given seed regardless
// of how trajectories are scheduled across threads: every Gaussian draw is a
// pure function of (seed, trajectory, step, draw index), so there is no
// generator state to hand between workers.

namespace philox {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline Counter round10(Counter c, Key k) {
    for (int r = 0; r < 10; ++r) {
        const std::uint64_t p0 = std::uint64_t(kMul0) * c[0];
        const std::uint64_t p1 = std::uint64_t(kMul1) * c[2];
        c = {std::uint32_t(p1 >> 32) ^ c[1] ^ k[0], std::uint32_t(p1),
             std::uint32_t(p0 >> 32) ^ c[3] ^ k[1], std::uint32_t(p0)};
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    return c;
}

} // namespace philox

// One logical stream per (seed, trajectory). step/draw index the counter, so
// any draw can be regenerated in isolation.
class NoiseStream {
  public:
    NoiseStream(std::uint64_t seed, std::uint32_t trajectory)
        : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)}, traj_(trajectory) {}

    // two independent uniform doubles in [0,1) from one Philox block
    std::array<double, 2> uniform_pair(std::uint64_t step, std::uint32_t draw) const {
        const philox::Counter out = philox::round10(
            {std::uint32_t(step), std::uint32_t(step >> 32), draw, traj_}, key_);
        const std::uint64_t u0 = (std::uint64_t(out[0]) << 32) | out[1];
        const std::uint64_t u1 = (std::uint64_t(out[2]) << 32) | out[3];
        constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
        return {double(u0 >> 11) * scale, double(u1 >> 11) * scale};
    }

    // standard normal pair via Box-Muller
    std::array<double, 2> normal_pair(std::uint64_t step, std::uint32_t draw) const {
        const auto [u0, u1] = uniform_pair(step, draw);
        const double r = std::sqrt(-2.0 * std::log(1.0 - u0));  // 1-u0 in (0,1], log finite
        const double phi = 6.283185307179586476925287 * u1;
        return {r * std::cos(phi), r * std::sin(phi)};
    }

    // circular complex normal with E|z|^2 = 1
    std::complex<double> complex_normal(std::uint64_t step, std::uint32_t draw) const {
        const auto [x, y] = normal_pair(step, draw);
        return {0.7071067811865475244 * x, 0.7071067811865475244 * y};
    }

  private:
    philox::Key key_;
    std::uint32_t traj_;
};

} // namespace wgmgyro
