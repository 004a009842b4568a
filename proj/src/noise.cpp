#include "wgmgyro/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wgmgyro/spectrum.hpp"

namespace wgmgyro {

ResponseFunctions response_at(const SystemParams& p, double omega, double delta_bar) {
    const cplx i(0.0, 1.0);
    const cplx fa = delta_bar - p.delta - omega + 0.5 * i * p.res_a.net_gain();
    const cplx fb = delta_bar - omega - 0.5 * i * p.res_b.kappa();
    return {fa, fb, p.J * p.J - fa * fb};
}

namespace {

struct Terms3 {
    double s1, s2, s3;
};

Terms3 spectrum_a_terms(const SystemParams& p, double omega) {
    const cplx i(0.0, 1.0);
    const ResponseFunctions r = response_at(p, omega);
    const double n2 = std::norm(r.n);
    const double fb2 = std::norm(r.f_b);
    const double kex = p.res_a.kappa_ex;
    const double s1 = (std::norm(r.n + i * kex * r.f_b) + p.res_a.kappa_0 * kex * fb2) / (2.0 * n2);
    const double s2 = p.res_a.gain * kex * fb2 / (2.0 * n2);
    const double s3 = p.J * p.J * kex * p.res_b.kappa() / (2.0 * n2);
    return {s1, s2, s3};
}

struct Terms2 {
    double s1, s2;
};

Terms2 spectrum_b_terms(const SystemParams& p, double omega) {
    const cplx i(0.0, 1.0);
    const ResponseFunctions r = response_at(p, omega);
    const double n2 = std::norm(r.n);
    const double fa2 = std::norm(r.f_a);
    const double kex = p.res_b.kappa_ex;
    const double s1 = (std::norm(r.n + i * kex * r.f_a) + p.res_b.kappa_0 * kex * fa2) / (2.0 * n2);
    const double s2 = p.J * p.J * kex * (p.res_a.kappa() + p.res_a.gain) / (2.0 * n2);
    return {s1, s2};
}

} // namespace

double spectrum_a_at(const SystemParams& p, double omega) {
    const Terms3 t = spectrum_a_terms(p, omega);
    return t.s1 + t.s2 + t.s3;
}

double spectrum_b_at(const SystemParams& p, double omega) {
    const Terms2 t = spectrum_b_terms(p, omega);
    return t.s1 + t.s2;
}

double intracavity_spectrum_a_at(const SystemParams& p, double omega) {
    const ResponseFunctions r = response_at(p, omega);
    const double n2 = std::norm(r.n);
    const double pump_side = std::norm(r.f_b) * (p.res_a.kappa() + p.res_a.gain);
    const double via_b = p.J * p.J * p.res_b.kappa();
    return (pump_side + via_b) / (2.0 * n2);
}

SpectrumSeries spectrum_a(const SystemParams& p, const std::vector<double>& omega_grid) {
    require_valid(p);
    SpectrumSeries s;
    s.field = OutputField::A;
    s.omega = omega_grid;
    s.total.reserve(omega_grid.size());
    s.s1.reserve(omega_grid.size());
    s.s2.reserve(omega_grid.size());
    s.s3.reserve(omega_grid.size());
    for (double w : omega_grid) {
        const Terms3 t = spectrum_a_terms(p, w);
        s.s1.push_back(t.s1);
        s.s2.push_back(t.s2);
        s.s3.push_back(t.s3);
        s.total.push_back(t.s1 + t.s2 + t.s3);
    }
    return s;
}

SpectrumSeries spectrum_b(const SystemParams& p, const std::vector<double>& omega_grid) {
    require_valid(p);
    SpectrumSeries s;
    s.field = OutputField::B;
    s.omega = omega_grid;
    s.total.reserve(omega_grid.size());
    s.s1.reserve(omega_grid.size());
    s.s2.reserve(omega_grid.size());
    for (double w : omega_grid) {
        const Terms2 t = spectrum_b_terms(p, w);
        s.s1.push_back(t.s1);
        s.s2.push_back(t.s2);
        s.total.push_back(t.s1 + t.s2);
    }
    return s;
}

std::vector<double> default_omega_grid(const SystemParams& p, std::size_t n_points) {
    const double half = 2.0 * (p.J + std::fabs(p.delta));
    std::vector<double> grid(n_points);
    for (std::size_t i = 0; i < n_points; ++i)
        grid[i] = -half + 2.0 * half * double(i) / double(n_points - 1);
    return grid;
}

double left_peak_closed_form(const SystemParams& p) {
    return -0.5 * p.delta - 0.5 * std::sqrt(p.delta * p.delta + 4.0 * p.J * p.J);
}

double right_peak_closed_form(const SystemParams& p) {
    return -0.5 * p.delta + 0.5 * std::sqrt(p.delta * p.delta + 4.0 * p.J * p.J);
}

namespace {

double golden_max(const std::function<double(double)>& f, double lo, double hi, double xtol) {
    const double gr = 0.6180339887498949;  // 1/phi
    double a = lo, b = hi;
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > xtol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

std::function<double(double)> density_of(const SystemParams& p, OutputField f) {
    if (f == OutputField::A) return [p](double w) { return spectrum_a_at(p, w); };
    return [p](double w) { return spectrum_b_at(p, w); };
}

} // namespace

double refine_peak(const SystemParams& p, OutputField f, double closed_form_omega) {
    require_valid(p);
    return golden_max(density_of(p, f), closed_form_omega - 1.0, closed_form_omega + 1.0, 1e-6);
}

double left_peak_frequency(const SystemParams& p, OutputField f) {
    return refine_peak(p, f, left_peak_closed_form(p));
}

PeakInfo measure_peak(const std::function<double(double)>& density, double omega_seed,
                      double refine_halfwidth, double floor) {
    const double w0 = golden_max(density, omega_seed - refine_halfwidth,
                                 omega_seed + refine_halfwidth, 1e-6);
    const double h = density(w0);
    const double target = floor + 0.5 * (h - floor);

    // walk outward until the curve drops through the half level, then bisect
    const auto crossing = [&](double dir) {
        double step = 1e-3;
        double inner = w0;
        double outer = w0 + dir * step;
        while (density(outer) > target) {
            inner = outer;
            step *= 2.0;
            outer = w0 + dir * step;
            if (step > 1e6) return std::numeric_limits<double>::quiet_NaN();
        }
        for (int it = 0; it < 200 && std::fabs(outer - inner) > 1e-9; ++it) {
            const double mid = 0.5 * (inner + outer);
            (density(mid) > target ? inner : outer) = mid;
        }
        return 0.5 * (inner + outer);
    };
    const double right = crossing(+1.0);
    const double left = crossing(-1.0);
    return {w0, h, right - left, omega_seed};
}

PeakInfo measure_peak(const SystemParams& p, OutputField f, double closed_form_omega) {
    PeakInfo info = measure_peak(density_of(p, f), closed_form_omega, 1.0, 0.5);
    info.closed_form_omega = closed_form_omega;
    return info;
}

std::vector<SmaxRow> smax_sweep(const SystemParams& base, const std::vector<double>& deltas) {
    require_valid(base);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<SmaxRow> rows;
    rows.reserve(deltas.size());
    for (double d : deltas) {
        SystemParams p = base;
        p.delta = d;
        if (!is_stable(p).stable) {
            rows.push_back({d, nan, nan, nan, false});
            continue;
        }
        const double seed = left_peak_closed_form(p);
        const double wl_a = refine_peak(p, OutputField::A, seed);
        const double wl_b = refine_peak(p, OutputField::B, seed);
        rows.push_back({d, wl_a, spectrum_a_at(p, wl_a), spectrum_b_at(p, wl_b), true});
    }
    return rows;
}

double stability_boundary(const SystemParams& base, double delta_hi, double tol) {
    SystemParams p = base;
    p.delta = 0.0;
    if (!is_stable(p).stable) return 0.0;
    p.delta = delta_hi;
    if (is_stable(p).stable) return delta_hi;
    double lo = 0.0, hi = delta_hi;
    while (hi - lo > tol) {
        p.delta = 0.5 * (lo + hi);
        (is_stable(p).stable ? lo : hi) = p.delta;
    }
    return 0.5 * (lo + hi);
}

GainComparison gain_comparison(const SystemParams& with_gain, const SystemParams& without_gain,
                               const std::vector<double>& omega_grid) {
    require_valid(with_gain);
    require_valid(without_gain);
    const SystemParams &g = with_gain, &n = without_gain;
    const bool same = g.res_a.omega == n.res_a.omega && g.res_a.kappa_ex == n.res_a.kappa_ex &&
                      g.res_a.kappa_0 == n.res_a.kappa_0 && g.res_b.omega == n.res_b.omega &&
                      g.res_b.kappa_ex == n.res_b.kappa_ex && g.res_b.kappa_0 == n.res_b.kappa_0 &&
                      g.J == n.J && g.delta == n.delta;
    if (!same)
        throw ValidationError("gain comparison requires parameter sets differing only in gain");

    GainComparison cmp{spectrum_a(g, omega_grid), spectrum_a(n, omega_grid),
                       spectrum_b(g, omega_grid), spectrum_b(n, omega_grid),
                       {}, {}, true, true};
    const double wl = left_peak_closed_form(g);
    const double wr = right_peak_closed_form(g);
    const OutputField fields[4] = {OutputField::A, OutputField::A, OutputField::B, OutputField::B};
    const double seeds[4] = {wl, wr, wl, wr};
    for (int k = 0; k < 4; ++k) {
        cmp.peaks_with_gain[k] = measure_peak(g, fields[k], seeds[k]);
        cmp.peaks_without_gain[k] = measure_peak(n, fields[k], seeds[k]);
        cmp.higher_with_gain_everywhere &=
            cmp.peaks_with_gain[k].height > cmp.peaks_without_gain[k].height;
        cmp.narrower_with_gain_everywhere &=
            cmp.peaks_with_gain[k].fwhm < cmp.peaks_without_gain[k].fwhm;
    }
    return cmp;
}

} // namespace wgmgyro
