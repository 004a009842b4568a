#pragma once

#include <functional>
#include <vector>

#include "wgmgyro/params.hpp"
#include "wgmgyro/twobytwo.hpp"

namespace wgmgyro {

enum class OutputField { A, B };

// Frequency-domain response bookkeeping in the resonant drive frame
// (delta_bar = 0 unless stated):
//   F_a(w) = dbar - delta - w + i g_a / 2
//   F_b(w) = dbar - w - i kappa_b / 2
//   N(w)   = J^2 - F_a(w) F_b(w)
struct ResponseFunctions {
    cplx f_a;
    cplx f_b;
    cplx n;
};

ResponseFunctions response_at(const SystemParams& p, double omega, double delta_bar = 0.0);

// Symmetrized output noise spectral density, split into its physical pieces:
//   field a: s1 reflected vacuum + intrinsic loss, s2 gain port, s3 noise
//            arriving through resonator b,
//   field b: s1 reflected vacuum + intrinsic loss, s2 everything arriving
//            through resonator a (including the gain port).
// The vacuum floor is 1/2; total = sum of terms pointwise.
struct SpectrumSeries {
    OutputField field;
    std::vector<double> omega;
    std::vector<double> total;
    std::vector<double> s1;
    std::vector<double> s2;
    std::vector<double> s3;  // empty for field b
};

double spectrum_a_at(const SystemParams& p, double omega);
double spectrum_b_at(const SystemParams& p, double omega);

SpectrumSeries spectrum_a(const SystemParams& p, const std::vector<double>& omega_grid);
SpectrumSeries spectrum_b(const SystemParams& p, const std::vector<double>& omega_grid);

// Intracavity (not output) spectral density of mode a; its frequency integral
// equals the stationary symmetrized variance, used for Parseval checks.
double intracavity_spectrum_a_at(const SystemParams& p, double omega);

// 4001 points covering [-2(J+delta), +2(J+delta)]: wide enough for both
// peaks plus tails for any delta in the sweeps.
std::vector<double> default_omega_grid(const SystemParams& p, std::size_t n_points = 4001);

// Hybridized-mode peak positions ignoring gain-induced pulling:
//   left  = -delta/2 - sqrt(delta^2 + 4 J^2)/2
//   right = -delta/2 + sqrt(delta^2 + 4 J^2)/2
double left_peak_closed_form(const SystemParams& p);
double right_peak_closed_form(const SystemParams& p);

// Golden-section maximization of S(w) within +-1 kappa_b of the closed form,
// resolved to 1e-6 kappa_b. Works for unstable parameter points too (the
// algebraic spectrum still has a well-defined maximum).
double refine_peak(const SystemParams& p, OutputField f, double closed_form_omega);
double left_peak_frequency(const SystemParams& p, OutputField f = OutputField::A);

struct PeakInfo {
    double omega_peak;        // refined numerical location
    double height;            // S at the refined peak
    double fwhm;              // full width at floor + (height - floor)/2
    double closed_form_omega; // seed used for refinement
};

// floor defaults to the vacuum level 1/2; pass 0 for photon-number curves.
PeakInfo measure_peak(const std::function<double(double)>& density, double omega_seed,
                      double refine_halfwidth = 1.0, double floor = 0.5);
PeakInfo measure_peak(const SystemParams& p, OutputField f, double closed_form_omega);

struct SmaxRow {
    double delta;
    double omega_left;  // refined left-peak location (field a)
    double smax_a;      // S_a at its refined left peak
    double smax_b;      // S_b at its refined left peak
    bool stable;
};

// Left-peak height vs rotation shift. Unstable rows are marked and carry NaN
// heights: the fluctuation spectrum only exists in the stable regime.
std::vector<SmaxRow> smax_sweep(const SystemParams& base, const std::vector<double>& deltas);

// Largest delta in [0, delta_hi] with a stable drift spectrum, bisected to tol.
double stability_boundary(const SystemParams& base, double delta_hi = 8.0, double tol = 1e-9);

struct GainComparison {
    SpectrumSeries a_with_gain, a_without_gain;
    SpectrumSeries b_with_gain, b_without_gain;
    PeakInfo peaks_with_gain[4];     // [a-left, a-right, b-left, b-right]
    PeakInfo peaks_without_gain[4];
    bool higher_with_gain_everywhere;
    bool narrower_with_gain_everywhere;
};

// Same system with the pump on vs off. Both parameter sets must agree in
// everything except the gain rate.
GainComparison gain_comparison(const SystemParams& with_gain, const SystemParams& without_gain,
                               const std::vector<double>& omega_grid);

} // namespace wgmgyro
