#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "wgmgyro/params.hpp"
#include "wgmgyro/rng.hpp"
#include "wgmgyro/spectrum.hpp"
#include "wgmgyro/steady.hpp"

using namespace wgmgyro;

namespace {

// Residual of the mean-field fixed point, written out independently of the
// library's solve.
double fixed_point_residual(const SystemParams& p, const Drive& d, const SteadyState& s) {
    const cplx i(0.0, 1.0);
    const double dbar = detuning_bar(p, d);
    const cplx da = -(i * (dbar - p.delta) - p.res_a.net_gain() / 2.0) * s.alpha -
                    i * p.J * s.beta - i * d.eta_a;
    const cplx db = -(i * dbar + p.res_b.kappa() / 2.0) * s.beta - i * p.J * s.alpha -
                    i * d.eta_b;
    return std::abs(da) + std::abs(db);
}

struct Curve {
    std::vector<double> x;
    std::vector<double> y;
};

Curve na_curve(const SystemParams& p, const Drive& base, double lo, double hi, int n) {
    Curve c;
    c.x.reserve(n);
    c.y.reserve(n);
    for (int k = 0; k < n; ++k) {
        const double d = lo + (hi - lo) * k / double(n - 1);
        Drive drv = base;
        drv.omega_d = p.omega_bar() + d;
        const SteadyState s = steady_state(p, drv);
        c.x.push_back(d);
        c.y.push_back(s.n_a());
    }
    return c;
}

int count_local_maxima(const std::vector<double>& y) {
    int n = 0;
    for (std::size_t i = 1; i + 1 < y.size(); ++i)
        if (y[i] > y[i - 1] && y[i] >= y[i + 1]) ++n;
    return n;
}

} // namespace

TEST_CASE("closed form is a fixed point of the equations of motion") {
    const NoiseStream rng(41, 0);
    for (std::uint64_t i = 0; i < 100; ++i) {
        const auto [u0, u1] = rng.uniform_pair(i, 0);
        const auto [u2, u3] = rng.uniform_pair(i, 1);
        SystemParams p;
        p.res_a.gain = 1.4 * u0; // keep a stability margin
        p.J = 1.0 + 8.0 * u1;
        p.delta = 3.0 * u2;
        Drive d{0.3 * u3, 0.1, 1.0};
        if (!is_stable(p).stable) continue;
        const SteadyState s = steady_state(p, d);
        CHECK(fixed_point_residual(p, d, s) < 1e-12 * (1.0 + std::abs(s.alpha) + std::abs(s.beta)));
    }
}

TEST_CASE("uncoupled resonators have textbook lorentzian amplitudes") {
    SystemParams p;
    p.J = 0.0;
    p.res_a.gain = 0.5; // net gain -0.5: effective half-width 0.25
    p.delta = 0.0;
    Drive d{0.2, 0.2, 0.0}; // resonant drive
    const SteadyState s = steady_state(p, d);
    // alpha = -i eta / (effective half width), beta likewise with kappa_b/2
    CHECK(s.n_a() == doctest::Approx(0.64).epsilon(1e-12));
    CHECK(s.n_b() == doctest::Approx(0.16).epsilon(1e-12));
    CHECK(std::abs(s.alpha - cplx(0.0, -0.8)) < 1e-12);
    CHECK(std::abs(s.beta - cplx(0.0, -0.4)) < 1e-12);
}

TEST_CASE("ode endpoint agrees with the algebraic steady state") {
    const NoiseStream rng(42, 0);
    int checked = 0;
    for (std::uint64_t i = 0; checked < 50; ++i) {
        REQUIRE(i < 1000);
        const auto [u0, u1] = rng.uniform_pair(i, 0);
        const auto [u2, u3] = rng.uniform_pair(i, 1);
        const auto [u4, u5] = rng.uniform_pair(i, 2);
        SystemParams p;
        p.res_a.kappa_ex = 0.2 + 0.6 * u0;
        p.res_a.kappa_0 = 1.0 - p.res_a.kappa_ex;
        p.res_a.gain = 1.9 * u1;
        p.J = 0.5 + 8.0 * u2;
        p.delta = 4.0 * u3;
        if (!is_stable(p).stable) continue;
        ++checked;
        const Drive d{0.5 * u4, 0.5 * u5, p.omega_bar() + (u0 - 0.5) * 10.0};
        const SteadyState s = steady_state(p, d);
        const MeanFieldResult m = integrate_mean_field(p, d);
        CHECK(std::abs(s.alpha - m.alpha) < 1e-8);
        CHECK(std::abs(s.beta - m.beta) < 1e-8);
    }
}

TEST_CASE("integrator refuses to pick a horizon for an unstable system") {
    SystemParams p;
    p.J = 0.0;
    p.res_a.gain = 2.5; // net gain positive, uncoupled: runaway
    const Drive d{0.1, 0.0, 0.0};
    CHECK_THROWS_AS(integrate_mean_field(p, d), UnstableSystemError);
    // an explicit horizon is allowed; amplitudes just grow
    const MeanFieldResult m = integrate_mean_field(p, d, 0.0, 0.0, 1.0);
    CHECK(std::isfinite(std::abs(m.alpha)));
    CHECK(m.t_end == 1.0);
}

TEST_CASE("driven response shows the two supermode peaks") {
    const FigureSetup fs = canonical_figure_params(FigureId::Fig3a); // eta_a only, delta 2
    const Curve c = na_curve(fs.params, fs.drive, -10.0, 10.0, 8001);
    CHECK(count_local_maxima(c.y) == 2);

    double left = 0.0, right = 0.0, left_x = 0.0, right_x = 0.0;
    for (std::size_t i = 0; i < c.x.size(); ++i) {
        if (c.x[i] < 0.0 && c.y[i] > left) { left = c.y[i]; left_x = c.x[i]; }
        if (c.x[i] >= 0.0 && c.y[i] > right) { right = c.y[i]; right_x = c.x[i]; }
    }
    // narrow pumped peak at the lower supermode, broad dim one at the upper
    CHECK(left == doctest::Approx(5.486).epsilon(0.02));
    CHECK(right == doctest::Approx(0.166).epsilon(0.02));
    CHECK(left_x == doctest::Approx(-6.085).epsilon(0.002));
    CHECK(right_x == doctest::Approx(4.085).epsilon(0.002));
}

TEST_CASE("symmetric drive starves the lower supermode") {
    const FigureSetup fs = canonical_figure_params(FigureId::Fig3b); // eta_a = eta_b = 0.2
    const Curve c = na_curve(fs.params, fs.drive, -10.0, 10.0, 8001);

    double left = 0.0, right = 0.0;
    for (std::size_t i = 0; i < c.x.size(); ++i) {
        if (c.x[i] < 0.0) left = std::max(left, c.y[i]);
        else right = std::max(right, c.y[i]);
    }
    CHECK(left == doctest::Approx(0.210).epsilon(0.03));
    CHECK(right == doctest::Approx(0.810).epsilon(0.03));
    CHECK(left > 0.01);     // residual peak survives
    CHECK(left < right);    // but the weight has moved to the upper supermode
}

TEST_CASE("sweep marks unstable operating points instead of lying") {
    SystemParams base = canonical_figure_params(FigureId::Fig4).params;
    const Drive drive{0.2, 0.0, 0.0};
    std::vector<double> offsets;
    for (int i = 0; i <= 40; ++i) offsets.push_back(-10.0 + 0.5 * i);
    // delta = 4 is past the stability edge for this gain; delta = 2 is fine
    const auto rows = photon_number_sweep(base, drive, offsets, {2.0, 4.0});
    REQUIRE(rows.size() == 2 * offsets.size());
    for (const PhotonRow& r : rows) {
        if (r.delta == 2.0) {
            CHECK(r.valid);
            CHECK(std::isfinite(r.n_a));
        } else {
            CHECK_FALSE(r.valid);
            CHECK(std::isnan(r.n_a));
        }
    }
    // detuning column carries the drive offset, not the internal frame
    CHECK(rows.front().detuning == doctest::Approx(-10.0));
    CHECK(rows[offsets.size() - 1].detuning == doctest::Approx(10.0));
}

TEST_CASE("steady state demands validity and stability") {
    SystemParams p;
    p.J = -1.0;
    CHECK_THROWS_AS(steady_state(p, Drive{}), ValidationError);
    SystemParams q;
    q.J = 0.0;
    q.res_a.gain = 3.0;
    CHECK_THROWS_AS(steady_state(q, Drive{}), UnstableSystemError);
}
