#include "wgmgyro/steady.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wgmgyro {

cplx steady_denominator(const SystemParams& p, double delta_bar) {
    const cplx i(0.0, 1.0);
    const cplx fa = delta_bar - p.delta + 0.5 * i * p.res_a.net_gain();
    const cplx fb = delta_bar - 0.5 * i * p.res_b.kappa();
    return p.J * p.J - fa * fb;
}

namespace {

SteadyState steady_state_unchecked(const SystemParams& p, const Drive& d) {
    const cplx i(0.0, 1.0);
    const double dbar = detuning_bar(p, d);
    const cplx dn = steady_denominator(p, dbar);
    if (std::abs(dn) < 1e-14)
        throw SingularDenominatorError("steady-state denominator vanishes at this operating point");
    const cplx fa = dbar - p.delta + 0.5 * i * p.res_a.net_gain();
    const cplx fb = dbar - 0.5 * i * p.res_b.kappa();
    return {(fb * d.eta_a - p.J * d.eta_b) / dn,
            (fa * d.eta_b - p.J * d.eta_a) / dn};
}

} // namespace

SteadyState steady_state(const SystemParams& p, const Drive& d) {
    require_valid(p, d);
    require_stable(p);
    return steady_state_unchecked(p, d);
}

std::vector<PhotonRow> photon_number_sweep(const SystemParams& base, const Drive& drive,
                                           const std::vector<double>& drive_offsets,
                                           const std::vector<double>& deltas) {
    require_valid(base, drive);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<PhotonRow> rows;
    rows.reserve(drive_offsets.size() * deltas.size());
    for (double delta : deltas) {
        SystemParams p = base;
        p.delta = delta;
        // stability does not depend on the drive frame, so one check covers
        // the whole frequency scan at this delta
        const bool stable = is_stable(p).stable;
        for (double off : drive_offsets) {
            Drive d = drive;
            d.omega_d = p.omega_bar() + off;
            if (!stable) {
                rows.push_back({delta, off, nan, nan, false});
                continue;
            }
            try {
                const SteadyState ss = steady_state_unchecked(p, d);
                rows.push_back({delta, off, ss.n_a(), ss.n_b(), true});
            } catch (const SingularDenominatorError&) {
                rows.push_back({delta, off, nan, nan, false});
            }
        }
    }
    return rows;
}

namespace {

struct State {
    cplx a, b;
    State operator+(const State& o) const { return {a + o.a, b + o.b}; }
    State operator*(double s) const { return {a * s, b * s}; }
};

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// embedded 4th-order weights
constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640, e5 = -92097.0 / 339200,
                 e6 = 187.0 / 2100, e7 = 1.0 / 40;

} // namespace

MeanFieldResult integrate_mean_field(const SystemParams& p, const Drive& d,
                                     cplx alpha0, cplx beta0, double t_end, double rel_tol) {
    require_valid(p, d);
    const cplx i(0.0, 1.0);
    const double dbar = detuning_bar(p, d);
    const Mat2 m = drift_matrix(p, dbar);
    const cplx fa = -i * d.eta_a;
    const cplx fb = -i * d.eta_b;
    const auto rhs = [&](const State& s) -> State {
        return {m.m00 * s.a + m.m01 * s.b + fa, m.m10 * s.a + m.m11 * s.b + fb};
    };

    const StabilityReport st = is_stable(p);
    if (t_end <= 0.0) {
        if (!st.stable)
            throw UnstableSystemError("automatic integration horizon needs a stable system");
        const double slow = std::min(std::fabs(std::real(st.lambda_plus)),
                                     std::fabs(std::real(st.lambda_minus)));
        t_end = 50.0 / std::max(slow, 1e-12);
    }

    const double abs_tol = 1e-12;
    const double fastest = std::max({std::abs(st.lambda_plus), std::abs(st.lambda_minus), 1.0});
    double h = std::min(0.1 / fastest, t_end);
    double t = 0.0;
    State y{alpha0, beta0};
    State k1 = rhs(y);
    std::size_t n_steps = 0, n_rejected = 0;

    while (t < t_end) {
        if (t + h > t_end) h = t_end - t;
        const State k2 = rhs(y + k1 * (h * a21));
        const State k3 = rhs(y + k1 * (h * a31) + k2 * (h * a32));
        const State k4 = rhs(y + k1 * (h * a41) + k2 * (h * a42) + k3 * (h * a43));
        const State k5 = rhs(y + k1 * (h * a51) + k2 * (h * a52) + k3 * (h * a53) + k4 * (h * a54));
        const State k6 =
            rhs(y + k1 * (h * a61) + k2 * (h * a62) + k3 * (h * a63) + k4 * (h * a64) + k5 * (h * a65));
        const State y5 = y + k1 * (h * b1) + k3 * (h * b3) + k4 * (h * b4) + k5 * (h * b5) + k6 * (h * b6);
        const State k7 = rhs(y5);  // FSAL
        const State y4 =
            y + k1 * (h * e1) + k3 * (h * e3) + k4 * (h * e4) + k5 * (h * e5) + k6 * (h * e6) + k7 * (h * e7);

        const double sc_a = abs_tol + rel_tol * std::max(std::abs(y.a), std::abs(y5.a));
        const double sc_b = abs_tol + rel_tol * std::max(std::abs(y.b), std::abs(y5.b));
        const double err = std::sqrt(0.5 * (std::norm(y5.a - y4.a) / (sc_a * sc_a) +
                                            std::norm(y5.b - y4.b) / (sc_b * sc_b)));

        if (err <= 1.0) {
            t += h;
            y = y5;
            k1 = k7;
            ++n_steps;
        } else {
            ++n_rejected;
        }
        const double grow = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(grow, 0.2, 5.0);
        if (!(h > 1e-14)) throw std::runtime_error("mean-field integrator step collapsed");
    }
    return {y.a, y.b, t_end, n_steps, n_rejected};
}

} // namespace wgmgyro
