#include "wgmgyro/spectrum.hpp"

#include <cmath>
#include <sstream>

namespace wgmgyro {

const char* convention_name(DampingConvention c) {
    switch (c) {
        case DampingConvention::PaperH: return "paperH";
        case DampingConvention::FullH: return "fullH";
        case DampingConvention::Drift: return "drift";
    }
    return "?";
}

DampingConvention convention_from_name(const std::string& name) {
    if (name == "paperH") return DampingConvention::PaperH;
    if (name == "fullH") return DampingConvention::FullH;
    if (name == "drift") return DampingConvention::Drift;
    throw ValidationError("unknown damping convention: " + name);
}

Mat2 drift_matrix(const SystemParams& p, double delta_bar) {
    const cplx i(0.0, 1.0);
    const double ga = p.res_a.net_gain();
    return {-i * (delta_bar - p.delta) + 0.5 * ga, -i * p.J,
            -i * p.J, -i * delta_bar - 0.5 * p.res_b.kappa()};
}

Mat2 effective_matrix(const SystemParams& p, DampingConvention c) {
    const cplx i(0.0, 1.0);
    const double wbar = p.omega_bar();
    const double ga = p.res_a.net_gain();
    switch (c) {
        case DampingConvention::PaperH:
            return {wbar - p.delta + i * ga, p.J, p.J, wbar};
        case DampingConvention::FullH:
            return {wbar - p.delta + i * ga, p.J, p.J, wbar - i * p.res_b.kappa()};
        case DampingConvention::Drift: {
            // report as E = i*lambda in the resonant frame so Re E is a
            // frequency and Im E a growth rate, consistent with the other two
            const Mat2 m = drift_matrix(p, 0.0);
            return {i * m.m00, i * m.m01, i * m.m10, i * m.m11};
        }
    }
    return {};
}

namespace {

ModeSpectrum ordered(cplx a, cplx b) {
    const bool swap = (std::real(b) > std::real(a)) ||
                      (std::real(b) == std::real(a) && std::imag(b) > std::imag(a));
    return swap ? ModeSpectrum{b, a} : ModeSpectrum{a, b};
}

} // namespace

ModeSpectrum eigenvalues(const SystemParams& p, DampingConvention c) {
    require_valid(p);
    auto [e1, e2] = wgmgyro::eigenvalues(effective_matrix(p, c));
    return ordered(e1, e2);
}

ModeSpectrum closed_form_eigenvalues(const SystemParams& p) {
    require_valid(p);
    const cplx i(0.0, 1.0);
    const double ga = p.res_a.net_gain();
    const cplx root = std::sqrt((p.delta - i * ga) * (p.delta - i * ga) + 4.0 * p.J * p.J);
    const cplx base = 2.0 * p.omega_bar() - p.delta + i * ga;
    return ordered(0.5 * (base + root), 0.5 * (base - root));
}

std::vector<SweepRow> real_imag_sweep(const SystemParams& base,
                                      const std::vector<double>& delta_grid,
                                      DampingConvention c) {
    std::vector<SweepRow> rows;
    rows.reserve(delta_grid.size());
    for (double d : delta_grid) {
        SystemParams p = base;
        p.delta = d;
        const ModeSpectrum ms = eigenvalues(p, c);
        if (rows.empty()) {
            rows.push_back({d, ms.e_plus, ms.e_minus});
            continue;
        }
        // nearest-neighbor continuation against the previous row
        const SweepRow& prev = rows.back();
        const double keep = std::abs(ms.e_plus - prev.e_plus) + std::abs(ms.e_minus - prev.e_minus);
        const double swap = std::abs(ms.e_minus - prev.e_plus) + std::abs(ms.e_plus - prev.e_minus);
        if (swap < keep)
            rows.push_back({d, ms.e_minus, ms.e_plus});
        else
            rows.push_back({d, ms.e_plus, ms.e_minus});
    }
    return rows;
}

StabilityReport is_stable(const SystemParams& p) {
    require_valid(p);
    auto [l1, l2] = wgmgyro::eigenvalues(drift_matrix(p, 0.0));
    if (std::real(l2) > std::real(l1)) std::swap(l1, l2);
    return {std::real(l1) < 0.0 && std::real(l2) < 0.0, l1, l2};
}

void require_stable(const SystemParams& p) {
    const StabilityReport r = is_stable(p);
    if (!r.stable) {
        std::ostringstream msg;
        msg << "system is dynamically unstable (max Re drift eigenvalue = "
            << std::real(r.lambda_plus) << ")";
        throw UnstableSystemError(msg.str());
    }
}

SupermodeDrive supermode_drive(const Drive& d) {
    const double inv_sqrt2 = 0.7071067811865475244;
    return {(d.eta_a + d.eta_b) * inv_sqrt2, (d.eta_a - d.eta_b) * inv_sqrt2};
}

} // namespace wgmgyro
