#pragma once

#include <vector>

#include "wgmgyro/params.hpp"
#include "wgmgyro/spectrum.hpp"

namespace wgmgyro {

// Mean-field amplitudes of the driven system in the drive rotating frame.
struct SteadyState {
    cplx alpha;  // spinning resonator
    cplx beta;   // stationary resonator

    double n_a() const { return std::norm(alpha); }
    double n_b() const { return std::norm(beta); }
};

// Closed-form fixed point:
//   alpha = ((Dbar - i kappa_b/2) eta_a - J eta_b) / Dn
//   beta  = ((Dbar - delta + i g_a/2) eta_b - J eta_a) / Dn
//   Dn    = J^2 - (Dbar - delta + i g_a/2)(Dbar - i kappa_b/2)
// Throws UnstableSystemError when the fixed point is not an attractor and
// SingularDenominatorError when |Dn| < 1e-14 (operating point degenerate).
SteadyState steady_state(const SystemParams& p, const Drive& d);

// Denominator above, exposed for diagnostics and tests.
cplx steady_denominator(const SystemParams& p, double delta_bar);

struct PhotonRow {
    double delta;
    double detuning;  // drive frequency offset omega_d - omega_bar
    double n_a;
    double n_b;
    bool valid;       // false when the row's operating point is unstable/singular
};

// Intracavity photon numbers as a function of drive frequency, one block per
// delta value. The x axis is the drive offset d = omega_d - omega_bar (the
// frequency axis a swept-laser measurement would produce); internally
// Dbar = -d. Rows at unstable operating points are marked invalid and carry
// NaN photon numbers; the sweep keeps going.
std::vector<PhotonRow> photon_number_sweep(const SystemParams& base, const Drive& drive,
                                           const std::vector<double>& drive_offsets,
                                           const std::vector<double>& deltas);

struct MeanFieldResult {
    cplx alpha;
    cplx beta;
    double t_end;
    std::size_t n_steps;
    std::size_t n_rejected;
};

// Integrates the mean-field equations
//   d alpha/dt = -[i(Dbar - delta) - g_a/2] alpha - i J beta  - i eta_a
//   d beta/dt  = -[i Dbar + kappa_b/2] beta   - i J alpha - i eta_b
// from (alpha0, beta0) with an adaptive embedded Dormand-Prince RK4(5) pair.
// t_end <= 0 selects 50 / |slowest drift decay rate| (requires stability);
// an explicit positive t_end works for unstable systems too.
MeanFieldResult integrate_mean_field(const SystemParams& p, const Drive& d,
                                     cplx alpha0 = 0.0, cplx beta0 = 0.0,
                                     double t_end = 0.0, double rel_tol = 1e-10);

} // namespace wgmgyro
