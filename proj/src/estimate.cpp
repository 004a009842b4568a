#include "wgmgyro/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "wgmgyro/errors.hpp"
#include "wgmgyro/spectrum.hpp"

namespace wgmgyro {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kFloor = 0.5; // vacuum level of every output spectrum

} // namespace

const char* channel_name(Channel c) {
    return c == Channel::PeakFrequency ? "peak_frequency" : "smax";
}

Channel channel_from_name(const std::string& name) {
    if (name == "peak_frequency") return Channel::PeakFrequency;
    if (name == "smax") return Channel::SMax;
    throw ValidationError("unknown channel '" + name + "' (expected peak_frequency or smax)");
}

double delta_from_left_peak(double omega_l, double j) {
    if (!(j > 0.0)) throw ValidationError("J must be positive");
    if (!(omega_l <= -j))
        throw EstimationError("left-peak frequency must be at or below -J for a nonnegative shift");
    const double s = -2.0 * omega_l;
    return (s * s - 4.0 * j * j) / (2.0 * s);
}

double responsivity(double delta, double j) {
    if (!(j > 0.0)) throw ValidationError("J must be positive");
    return -0.5 - delta / (2.0 * std::sqrt(delta * delta + 4.0 * j * j));
}

SpectrumData as_spectrum_data(const SpectrumSeries& s) {
    return {s.field, s.omega, s.total, {}};
}

SpectrumData as_spectrum_data(const SpectrumEstimate& e) {
    return {e.field, e.omega, e.s, e.se};
}

std::vector<double> expected_periodogram(const SystemParams& p, OutputField field,
                                         std::size_t segment_len, double dt,
                                         const std::vector<double>& omega) {
    require_valid(p);
    require_stable(p);
    if (segment_len < 2) throw ValidationError("segment length must be at least 2");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive and finite");

    const Mat2 m = drift_matrix(p, 0.0);
    const auto [l1, l2] = eigenvalues(m);
    if (std::abs(l1 - l2) < 1e-9 * (std::abs(l1) + std::abs(l2) + 1e-300))
        throw EstimationError("drift spectrum degenerate; periodogram model undefined here");
    const Mat2 eye = Mat2::identity();
    const Mat2 pr1 = (m - eye * l2) * (1.0 / (l1 - l2));
    const Mat2 pr2 = (m - eye * l1) * (1.0 / (l2 - l1));
    const OuStep st = ou_step(p, dt);
    const Mat2 v = stationary_covariance(p);

    const int fi = field == OutputField::A ? 0 : 1;
    const double kex = field == OutputField::A ? p.res_a.kappa_ex : p.res_b.kappa_ex;
    auto elem = [fi](const Mat2& mm) { return fi == 0 ? mm.m00 : mm.m11; };

    // Sampled covariance of the output y_k = xi_k/dt + sqrt(kex) x_k:
    //   r_0     = 1/(2 dt) + kex V_ff
    //   r_m>0   = sum_i (alpha_i + beta_i / lambda_i) (lambda_i)^m
    // with lambda_i the step-propagator eigenvalues; alpha from the state
    // autocovariance, beta from the state-noise cross term of the shared
    // waveguide port.
    const cplx le1 = std::exp(l1 * dt), le2 = std::exp(l2 * dt);
    const cplx alpha1 = kex * elem(pr1 * v), alpha2 = kex * elem(pr2 * v);
    const cplx beta1 = elem(pr1 * st.increment_integral) * (kex / (2.0 * dt));
    const cplx beta2 = elem(pr2 * st.increment_integral) * (kex / (2.0 * dt));
    const double r0 = 1.0 / (2.0 * dt) + kex * std::real(elem(v));

    // Tent-weighted geometric sum sum_{m=1}^{L-1} (1 - m/L) q^m, the Bartlett
    // triangle in closed form.
    const double dl = double(segment_len);
    const auto tent = [dl](cplx q) {
        const cplx qp = std::exp(std::log(q) * (dl - 1.0)); // q^(L-1)
        const cplx one_q = 1.0 - q;
        const cplx s1 = q * (1.0 - qp) / one_q;
        const cplx s2 = q * (1.0 - dl * qp + (dl - 1.0) * qp * q) / (one_q * one_q);
        return s1 - s2 / dl;
    };

    std::vector<double> out(omega.size());
    const cplx w1 = alpha1 + beta1 / le1;
    const cplx w2 = alpha2 + beta2 / le2;
    for (std::size_t i = 0; i < omega.size(); ++i) {
        const cplx rot = std::exp(cplx(0.0, omega[i] * dt));
        const cplx sum = w1 * tent(le1 * rot) + w2 * tent(le2 * rot);
        out[i] = dt * r0 + 2.0 * dt * std::real(sum);
    }
    return out;
}

namespace {

template <class F>
double golden_min(const F& f, double lo, double hi, double tol) {
    const double r = 0.6180339887498949;
    double x1 = hi - r * (hi - lo);
    double x2 = lo + r * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > tol) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    return 0.5 * (lo + hi);
}

struct LocatedPeak {
    double omega;
    double height; // absolute spectral value at the interpolated vertex
};

// Local maxima in the negative-frequency half that clear the resolvability
// floor; maxima closer than 1 kappa_b merge into one peak (noise splits a
// single peak into several bin-level maxima).
LocatedPeak locate_left_peak(const SpectrumData& d, const EstimateOptions& opt) {
    const bool stochastic = !d.se.empty();
    struct Cand {
        std::size_t idx;
        double above; // height above the vacuum floor
    };
    std::vector<Cand> cands;
    for (std::size_t i = 1; i + 1 < d.omega.size(); ++i) {
        if (d.omega[i] >= 0.0) break;
        if (!(d.s[i] > d.s[i - 1] && d.s[i] >= d.s[i + 1])) continue;
        const double above = d.s[i] - kFloor;
        const double gate = stochastic ? opt.stochastic_min_sigmas * d.se[i] : opt.analytic_min_height;
        if (above >= gate) cands.push_back({i, above});
    }
    if (cands.empty()) throw NoPeakError("no resolvable peak in the negative-frequency half");
    std::sort(cands.begin(), cands.end(),
              [](const Cand& a, const Cand& b) { return a.above > b.above; });
    std::vector<Cand> kept;
    for (const Cand& c : cands) {
        bool absorbed = false;
        for (const Cand& k : kept)
            if (std::abs(d.omega[c.idx] - d.omega[k.idx]) < 1.0) absorbed = true;
        if (!absorbed) kept.push_back(c);
    }
    if (kept.size() >= 2 && kept[1].above >= 0.9 * kept[0].above) {
        std::ostringstream os;
        os << "two peak candidates within 10% height: omega = " << d.omega[kept[0].idx]
           << " and " << d.omega[kept[1].idx];
        throw AmbiguousPeakError(os.str());
    }

    // quadratic interpolation through the top bin and neighbors
    const std::size_t i = kept[0].idx;
    const double sm = d.s[i - 1], s0 = d.s[i], sp = d.s[i + 1];
    const double d2 = sm - 2.0 * s0 + sp;
    if (!(d2 < 0.0)) return {d.omega[i], s0};
    const double step = 0.5 * (d.omega[i + 1] - d.omega[i - 1]);
    const double shift = 0.5 * (sm - sp) / d2;
    return {d.omega[i] + shift * step, s0 - 0.125 * (sm - sp) * (sm - sp) / d2};
}

EstimationResult estimate_peak_frequency(const SpectrumData& d, const SystemParams& calibration,
                                         const EstimateOptions& opt, const LocatedPeak& peak,
                                         std::size_t segment_len, double dt) {
    const bool stochastic = !d.se.empty();
    EstimationResult res;
    res.channel = Channel::PeakFrequency;

    const double j = calibration.J;
    const double seed = peak.omega <= -j ? delta_from_left_peak(peak.omega, j) : 0.0;

    // fit window around the located peak
    std::vector<double> w_omega, w_s, w_se;
    for (std::size_t i = 0; i < d.omega.size(); ++i) {
        if (std::abs(d.omega[i] - peak.omega) > opt.fit_window) continue;
        w_omega.push_back(d.omega[i]);
        w_s.push_back(d.s[i]);
        if (stochastic) w_se.push_back(std::max(d.se[i], 1e-300));
    }

    const auto model = [&](double delta_cand) -> std::vector<double> {
        SystemParams q = calibration;
        q.delta = delta_cand;
        if (stochastic) {
            if (!is_stable(q).stable) return {};
            return expected_periodogram(q, d.field, segment_len, dt, w_omega);
        }
        std::vector<double> m(w_omega.size());
        for (std::size_t i = 0; i < w_omega.size(); ++i)
            m[i] = d.field == OutputField::A ? spectrum_a_at(q, w_omega[i])
                                             : spectrum_b_at(q, w_omega[i]);
        return m;
    };
    const auto misfit = [&](double delta_cand) -> double {
        const std::vector<double> m = model(delta_cand);
        if (m.empty()) return 1e300;
        double chi2 = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double r = (w_s[i] - m[i]) / (stochastic ? w_se[i] : 1.0);
            chi2 += r * r;
        }
        return chi2;
    };

    if (w_omega.size() < 5) {
        // not enough points for a fit; fall back to the raw inversion
        res.delta_hat = seed;
        res.residual = 0.0;
        res.sigma_delta = kNan;
    } else {
        double lo = std::max(0.0, seed - 0.5);
        double hi = seed + 0.5;
        double dhat = seed;
        for (int round = 0; round < 4; ++round) {
            // The misfit valley is as narrow as the peak itself, which near a
            // lasing threshold is far narrower than the bracket; golden
            // section alone steps straight over it and slides down the
            // surrounding plateau. Scan the bracket first, polish the best
            // cell.
            constexpr int n_scan = 200;
            double best_f = 1e300, best_x = lo;
            for (int k = 0; k <= n_scan; ++k) {
                const double x = lo + (hi - lo) * double(k) / n_scan;
                const double f = misfit(x);
                if (f < best_f) {
                    best_f = f;
                    best_x = x;
                }
            }
            const double cell = (hi - lo) / n_scan;
            dhat = golden_min(misfit, std::max(lo, best_x - cell),
                              std::min(hi, best_x + cell), 1e-7);
            if (hi - dhat < 1e-3) {
                lo = hi - 0.1;
                hi += 1.0;
                continue;
            }
            if (dhat - lo < 1e-3 && lo > 0.0) {
                hi = lo + 0.1;
                lo = std::max(0.0, lo - 1.0);
                continue;
            }
            break;
        }
        res.delta_hat = dhat;
        const std::vector<double> m = model(dhat);
        double ss = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) ss += (w_s[i] - m[i]) * (w_s[i] - m[i]);
        res.residual = m.empty() ? kNan : std::sqrt(ss / double(m.size()));
        if (stochastic) {
            // Gauss-Newton curvature of the weighted fit
            const double h = 1e-4 * std::max(1.0, dhat);
            const double dlo = std::max(0.0, dhat - h);
            const double dhi = dhat + h;
            const std::vector<double> mlo = model(dlo), mhi = model(dhi);
            if (mlo.empty() || mhi.empty()) {
                res.sigma_delta = kNan;
            } else {
                double info = 0.0;
                for (std::size_t i = 0; i < mlo.size(); ++i) {
                    const double g = (mhi[i] - mlo[i]) / ((dhi - dlo) * w_se[i]);
                    info += g * g;
                }
                res.sigma_delta = info > 0.0 ? 1.0 / std::sqrt(info) : kNan;
            }
        } else {
            res.sigma_delta = kNan;
        }
    }
    return res;
}

EstimationResult estimate_smax(const SpectrumData& d, const SystemParams& calibration,
                               const LocatedPeak& peak) {
    EstimationResult res;
    res.channel = Channel::SMax;
    const SmaxTable table = build_smax_table(calibration, d.field);
    res.delta_hat = delta_from_peak_height(table, peak.height);
    // honest residual: rebuild the noise-free peak at the inverted shift
    SystemParams q = calibration;
    q.delta = res.delta_hat;
    const double h_model = measure_peak(q, d.field, left_peak_closed_form(q)).height;
    res.residual = std::abs(h_model - peak.height);
    if (!d.se.empty()) {
        // propagate the peak-bin standard error through the local table slope
        std::size_t k = 1;
        while (k + 1 < table.delta.size() && table.height[k] < peak.height) ++k;
        const double slope =
            (table.height[k] - table.height[k - 1]) / (table.delta[k] - table.delta[k - 1]);
        double se_peak = 0.0;
        double best = 1e300;
        for (std::size_t i = 0; i < d.omega.size(); ++i) {
            const double dist = std::abs(d.omega[i] - peak.omega);
            if (dist < best) {
                best = dist;
                se_peak = d.se[i];
            }
        }
        res.sigma_delta = slope > 0.0 ? se_peak / slope : kNan;
    } else {
        res.sigma_delta = kNan;
    }
    return res;
}

} // namespace

EstimationResult estimate_from_spectrum(const SpectrumData& data,
                                        const SystemParams& calibration,
                                        const EstimateOptions& opt) {
    require_valid(calibration);
    const std::size_t n = data.omega.size();
    if (n < 16 || data.s.size() != n)
        throw ValidationError("spectrum data needs at least 16 matching (omega, s) samples");
    if (!data.se.empty() && data.se.size() != n)
        throw ValidationError("per-bin standard errors must match the grid size");
    for (std::size_t i = 1; i < n; ++i)
        if (!(data.omega[i] > data.omega[i - 1]))
            throw ValidationError("frequency grid must be strictly ascending");

    // segment geometry for the stochastic model; derive from the grid when
    // not supplied (valid for an untrimmed fft layout)
    std::size_t segment_len = opt.segment_len;
    double dt = opt.dt;
    if (!data.se.empty() && (segment_len == 0 || !(dt > 0.0))) {
        segment_len = n;
        const double spacing = data.omega[1] - data.omega[0];
        dt = 2.0 * 3.14159265358979323846 / (double(n) * spacing);
    }

    const LocatedPeak peak = locate_left_peak(data, opt);
    EstimationResult res = opt.channel == Channel::PeakFrequency
                               ? estimate_peak_frequency(data, calibration, opt, peak,
                                                         segment_len, dt)
                               : estimate_smax(data, calibration, peak);
    res.responsivity = responsivity(res.delta_hat, calibration.J);
    res.omega_hat_rad_s =
        opt.sagnac ? rotation_from_shift_kappa_b(*opt.sagnac, res.delta_hat) : kNan;
    return res;
}

EstimationResult estimate_from_spectrum(const SpectrumSeries& series,
                                        const SystemParams& calibration, EstimateOptions opt) {
    return estimate_from_spectrum(as_spectrum_data(series), calibration, opt);
}

EstimationResult estimate_from_spectrum(const SpectrumEstimate& est,
                                        const SystemParams& calibration, EstimateOptions opt) {
    opt.segment_len = est.omega.size();
    opt.dt = est.dt;
    return estimate_from_spectrum(as_spectrum_data(est), calibration, opt);
}

SmaxTable build_smax_table(const SystemParams& calibration, OutputField field) {
    require_valid(calibration);
    SmaxTable t;
    t.field = field;
    SystemParams q = calibration;
    for (int i = 0; i <= 80; ++i) { // shift 0 .. 4 in steps of 0.05
        q.delta = 0.05 * i;
        if (!is_stable(q).stable) break;
        const double h = measure_peak(q, field, left_peak_closed_form(q)).height;
        if (!t.height.empty() && h <= t.height.back()) break; // monotone prefix only
        t.delta.push_back(q.delta);
        t.height.push_back(h);
    }
    if (t.delta.size() < 2)
        throw EstimationError("peak-height lookup table degenerate for this calibration");
    return t;
}

double delta_from_peak_height(const SmaxTable& table, double height) {
    if (table.delta.size() < 2 || table.delta.size() != table.height.size())
        throw EstimationError("peak-height lookup table too small");
    if (height < table.height.front() || height > table.height.back()) {
        std::ostringstream os;
        os << "peak height " << height << " outside the calibrated range ["
           << table.height.front() << ", " << table.height.back() << "]";
        throw EstimationError(os.str());
    }
    const auto it = std::lower_bound(table.height.begin(), table.height.end(), height);
    std::size_t k = std::size_t(it - table.height.begin());
    if (k == 0) k = 1;
    const double f =
        (height - table.height[k - 1]) / (table.height[k] - table.height[k - 1]);
    return table.delta[k - 1] + f * (table.delta[k] - table.delta[k - 1]);
}

std::string estimation_to_json(const EstimationResult& r) {
    nlohmann::json doc;
    doc["schema"] = 1;
    doc["delta_hat"] = r.delta_hat;
    doc["omega_hat_rad_s"] = r.omega_hat_rad_s;
    doc["residual"] = r.residual;
    doc["responsivity"] = r.responsivity;
    doc["sigma_delta"] = r.sigma_delta;
    doc["channel"] = channel_name(r.channel);
    return doc.dump(2) + "\n";
}

} // namespace wgmgyro
