#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "wgmgyro/noise.hpp"
#include "wgmgyro/params.hpp"
#include "wgmgyro/twobytwo.hpp"

namespace wgmgyro {

// Time-domain Monte-Carlo oracle for the fluctuation spectra. The dynamics
// are linear and we only ever compare symmetrized second moments, so every
// quantum noise port (vacuum or inverted gain reservoir) maps to a classical
// complex white noise of strength 1/2 per unit rate. The frequency-domain
// formulas in noise.hpp then follow term for term; this module recomputes
// them by brute-force integration so the two routes check each other.

enum class SdeBackend {
    EulerMaruyama,  // plain first-order stochastic stepper
    ExactOu,        // exact one-step law of the linear system (validation route)
};

const char* backend_name(SdeBackend b);
SdeBackend backend_from_name(const std::string& name);

enum class WindowKind { Rect, Hann };

inline constexpr std::size_t kAutoBurnIn = std::numeric_limits<std::size_t>::max();

struct SimOptions {
    double dt = 1e-3;
    std::size_t n_steps = std::size_t(1) << 14;  // recorded samples per trajectory
    std::size_t n_traj = 16;
    std::uint64_t seed = 1;
    std::size_t burn_in = kAutoBurnIn;  // steps discarded up front; auto = 10 relaxation times
    SdeBackend backend = SdeBackend::EulerMaruyama;
    unsigned threads = 1;  // worker threads; sink order stays deterministic regardless
};

// One stochastic input channel of the pair of resonators. The symmetrized
// strength is 1/2 for every port: vacuum ports from below, the inverted gain
// reservoir from above, same second moment either way.
struct NoisePort {
    enum class Label { AWaveguide, AEnvironment, AGain, BWaveguide, BEnvironment };
    Label label;
    int mode;     // 0 = a, 1 = b
    double rate;  // kappa_ex_a, kappa_0_a, g, kappa_ex_b, kappa_0_b respectively
    static constexpr double symmetrized_strength = 0.5;
};

std::array<NoisePort, 5> noise_ports(const SystemParams& p);

// Half the total noise influx per mode: diag((kappa_a + g)/2, kappa_b/2).
// The stationary covariance V solves  M V + V M^H + symmetrized_diffusion = 0.
Mat2 symmetrized_diffusion(const SystemParams& p);

// V from the Lyapunov equation above (requires a stable drift). V.m00 is the
// stationary symmetrized variance of mode a, the Parseval partner of the
// intracavity spectral integral.
Mat2 stationary_covariance(const SystemParams& p);

double max_drift_rate(const SystemParams& p);          // max |drift eigenvalue|
double max_step_size(const SystemParams& p);           // 0.01 / max_drift_rate
std::size_t auto_burn_in(const SystemParams& p, double dt);

// Exact one-step law of x_{k+1} = E x_k + eta_k for the linear system,
// exposed so tests can verify it against the Lyapunov route:
//   Q = V - E V E^H  exactly, for any dt.
struct OuStep {
    Mat2 propagator;          // E = expm(M dt)
    Mat2 increment_integral;  // A = integral_0^dt expm(M s) ds
    Mat2 noise_cov;           // Q = Cov(eta)
    Mat2 residual_cov;        // Q minus the part explained by the port increments
};

OuStep ou_step(const SystemParams& p, double dt);

// Per-trajectory sample paths. a/b hold the intracavity state at the start of
// each step; a_out/b_out hold the matching input-output samples
//   a_out_k = xi_wg_k / dt + sqrt(kappa_ex_a) a_k
// with xi_wg_k the waveguide noise increment of that same step, so the
// correlated reflection term is exact rather than re-sampled.
struct Trajectory {
    std::vector<cplx> a, b, a_out, b_out;
};

struct TrajectoryBatch {
    double dt = 0.0;
    std::size_t n_steps = 0;
    std::size_t n_traj = 0;
    std::uint64_t seed = 0;
    SdeBackend backend = SdeBackend::EulerMaruyama;
    std::vector<Trajectory> records;
};

// Streaming form: trajectories are handed to the sink in index order and can
// be dropped immediately, so estimator-scale runs never hold the whole batch
// (64 bytes per step per trajectory adds up). Throws UnstableSystemError for
// an unstable drift and StepSizeError when dt exceeds max_step_size. The
// degenerate all-rates-zero system short-circuits to exact zero trajectories.
void simulate_stream(const SystemParams& p, const SimOptions& opt,
                     const std::function<void(std::size_t traj, const Trajectory& tr)>& sink);

// Convenience wrapper that keeps everything. Mind the memory note above.
TrajectoryBatch simulate(const SystemParams& p, const SimOptions& opt);

// Bartlett-averaged periodogram estimate of the symmetrized output spectrum.
//   P_j = |sum_k w_k x_k e^{+i omega_j t_k}|^2 dt / sum_k w_k^2
// normalized so that discretized white input noise lands exactly on the
// vacuum floor 1/2. se is the per-bin standard error across segments.
struct SpectrumEstimate {
    OutputField field;
    std::vector<double> omega;  // ascending, fftshifted
    std::vector<double> s;
    std::vector<double> se;
    std::size_t n_segments = 0;
    double dt = 0.0;
};

// Incremental segment accumulator so streaming simulations can estimate
// without materializing the batch. Segment length below 4096 and fewer than
// 16 total segments are rejected (InsufficientDataError).
class SpectrumAccumulator {
  public:
    SpectrumAccumulator(std::size_t segment_len, double dt, WindowKind window = WindowKind::Rect);
    ~SpectrumAccumulator();
    SpectrumAccumulator(const SpectrumAccumulator&) = delete;
    SpectrumAccumulator& operator=(const SpectrumAccumulator&) = delete;

    // consumes floor(x.size() / segment_len) whole segments, remainder ignored
    void add_series(const std::vector<cplx>& x);
    std::size_t n_segments() const { return n_seg_; }
    SpectrumEstimate finalize(OutputField field) const;

  private:
    void add_segment(const cplx* x);

    std::size_t len_;
    double dt_;
    std::vector<double> window_;
    double window_norm_;  // sum w_k^2
    void* buf_;           // fftw buffer, opaque here to keep fftw out of the header
    void* plan_;
    std::vector<double> mean_, m2_;  // Welford accumulators per bin, fft order
    std::size_t n_seg_ = 0;
};

// segment_len = 0 means one segment per trajectory.
SpectrumEstimate estimate_spectrum(const TrajectoryBatch& batch, OutputField field,
                                   std::size_t segment_len = 0,
                                   WindowKind window = WindowKind::Rect);

struct OracleSpectra {
    SpectrumEstimate a;
    SpectrumEstimate b;
};

// One streaming pass, both output fields.
OracleSpectra oracle_spectra(const SystemParams& p, const SimOptions& opt,
                             std::size_t segment_len = 0, WindowKind window = WindowKind::Rect);

// Mean squared moduli over all recorded samples, with standard errors across
// trajectories. var_a estimates the stationary symmetrized variance of a.
struct BatchMoments {
    double var_a, var_b;
    double se_a, se_b;
    std::size_t n_traj;
};

BatchMoments batch_moments(const TrajectoryBatch& batch);

// Little-endian binary dump: 8-byte magic, dt/n_steps/n_traj/seed/backend
// header, then the four complex series per trajectory.
void dump_trajectories(const TrajectoryBatch& batch, const std::string& path);
TrajectoryBatch load_trajectories(const std::string& path);

} // namespace wgmgyro
