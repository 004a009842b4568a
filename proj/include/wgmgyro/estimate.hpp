#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "wgmgyro/noise.hpp"
#include "wgmgyro/oracle.hpp"
#include "wgmgyro/params.hpp"
#include "wgmgyro/sagnac.hpp"

namespace wgmgyro {

// Rotation readout: recover the frequency shift of the spinning resonator
// (and through the sagnac map the mechanical rotation rate) from a measured
// output spectrum, with the coupling and damping rates treated as calibrated
// constants.

enum class Channel {
    PeakFrequency,  // invert the left-peak location, then refine by model fit
    SMax,           // invert the monotone left-peak-height curve
};

const char* channel_name(Channel c);
Channel channel_from_name(const std::string& name);

struct EstimationResult {
    double delta_hat = 0.0;
    double omega_hat_rad_s = 0.0;  // NaN unless a sagnac config was supplied
    double residual = 0.0;         // rms misfit over the fit window
    double responsivity = 0.0;     // d(left peak)/d(shift) at delta_hat
    double sigma_delta = 0.0;      // 1-sigma from the fit curvature; NaN for noise-free input
    Channel channel = Channel::PeakFrequency;
};

// Exact algebraic inverse of the left-peak closed form
//   omega_l = -delta/2 - sqrt(delta^2 + 4 J^2)/2.
// Requires omega_l <= -J (the closed-form range for a nonnegative shift).
double delta_from_left_peak(double omega_l, double j);

// d omega_l / d delta = -1/2 - delta / (2 sqrt(delta^2 + 4 J^2)).
double responsivity(double delta, double j);

// A spectrum as measured: frequency grid, values, and per-bin standard errors
// when the curve came from a stochastic estimate (empty means noise-free).
struct SpectrumData {
    OutputField field = OutputField::A;
    std::vector<double> omega;
    std::vector<double> s;
    std::vector<double> se;
};

SpectrumData as_spectrum_data(const SpectrumSeries& s);
SpectrumData as_spectrum_data(const SpectrumEstimate& e);

// Exact expectation of the rectangular-window Bartlett periodogram of the
// sampled output field: finite segment length, sampling, and the correlated
// reflection term are all accounted for (stable systems only). Stochastic
// estimates are fitted against this instead of the continuous spectrum, which
// removes the segment-bandwidth smearing bias at narrow peaks.
std::vector<double> expected_periodogram(const SystemParams& p, OutputField field,
                                         std::size_t segment_len, double dt,
                                         const std::vector<double>& omega);

struct EstimateOptions {
    Channel channel = Channel::PeakFrequency;
    double fit_window = 2.0;             // half width of the model-fit window
    double analytic_min_height = 0.05;   // peak resolvability floor, noise-free curves
    double stochastic_min_sigmas = 5.0;  // peak resolvability, stochastic curves
    std::optional<SagnacConfig> sagnac;  // supply to get omega_hat_rad_s
    // segment geometry of a stochastic estimate; 0 means derive from the grid
    // (assumes the grid is the full untrimmed fft layout)
    std::size_t segment_len = 0;
    double dt = 0.0;
};

// Locates the left-half-plane peak (NoPeakError when nothing clears the
// resolvability floor, AmbiguousPeakError when two well-separated candidates
// are within 10% of each other), then inverts it through the chosen channel.
// calibration.delta is ignored; every other field is trusted.
EstimationResult estimate_from_spectrum(const SpectrumData& data,
                                        const SystemParams& calibration,
                                        const EstimateOptions& opt = {});

// Convenience overloads wiring the segment geometry through automatically.
EstimationResult estimate_from_spectrum(const SpectrumSeries& series,
                                        const SystemParams& calibration,
                                        EstimateOptions opt = {});
EstimationResult estimate_from_spectrum(const SpectrumEstimate& est,
                                        const SystemParams& calibration,
                                        EstimateOptions opt = {});

// Monotone lookup table for the SMax channel: left-peak height of the
// noise-free spectrum vs shift, over the stable range (step 0.05).
struct SmaxTable {
    OutputField field = OutputField::A;
    std::vector<double> delta;
    std::vector<double> height;
};

SmaxTable build_smax_table(const SystemParams& calibration, OutputField field);

// Inverse lookup by bisection + linear interpolation. EstimationError when
// the height falls outside the calibrated range.
double delta_from_peak_height(const SmaxTable& table, double height);

std::string estimation_to_json(const EstimationResult& r);

} // namespace wgmgyro
