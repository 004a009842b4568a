#include "wgmgyro/params.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace wgmgyro {

namespace {

void check_rate(std::vector<Diagnostic>& out, const char* name, double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
        out.push_back({Diagnostic::Severity::error, "negative-rate",
                       std::string(name) + " must be a finite nonnegative rate"});
    }
}

} // namespace

std::vector<Diagnostic> validate(const SystemParams& p) {
    std::vector<Diagnostic> out;
    check_rate(out, "kappa_ex_a", p.res_a.kappa_ex);
    check_rate(out, "kappa_0_a", p.res_a.kappa_0);
    check_rate(out, "gain", p.res_a.gain);
    check_rate(out, "kappa_ex_b", p.res_b.kappa_ex);
    check_rate(out, "kappa_0_b", p.res_b.kappa_0);
    if (!std::isfinite(p.res_a.omega) || !std::isfinite(p.res_b.omega) ||
        !std::isfinite(p.J) || !std::isfinite(p.delta)) {
        out.push_back({Diagnostic::Severity::error, "non-finite",
                       "omega/J/delta must be finite"});
        return out;
    }
    if (p.res_a.omega != p.res_b.omega) {
        out.push_back({Diagnostic::Severity::error, "unequal-frequencies",
                       "bare resonance frequencies must match (the model assumes "
                       "identical resonators before rotation)"});
    }
    if (p.J < 0.0) {
        out.push_back({Diagnostic::Severity::error, "negative-coupling",
                       "coupling J must be nonnegative"});
    }
    if (p.res_b.kappa() <= 0.0) {
        out.push_back({Diagnostic::Severity::error, "no-b-damping",
                       "resonator b needs a positive total linewidth"});
    } else if (std::fabs(p.res_b.kappa() - 1.0) > 1e-12) {
        out.push_back({Diagnostic::Severity::warning, "non-canonical",
                       "kappa_b != 1: parameters are not in the canonical unit system"});
    }
    if (p.delta < 0.0) {
        out.push_back({Diagnostic::Severity::warning, "clockwise",
                       "delta < 0 corresponds to the opposite rotation sense"});
    }
    return out;
}

std::vector<Diagnostic> validate(const SystemParams& p, const Drive& d) {
    auto out = validate(p);
    if (!(d.eta_a >= 0.0) || !(d.eta_b >= 0.0) ||
        !std::isfinite(d.eta_a) || !std::isfinite(d.eta_b) || !std::isfinite(d.omega_d)) {
        out.push_back({Diagnostic::Severity::error, "bad-drive",
                       "drive amplitudes must be finite and nonnegative"});
    }
    return out;
}

namespace {

void throw_on_errors(const std::vector<Diagnostic>& diags) {
    if (is_valid(diags)) return;
    std::ostringstream msg;
    msg << "invalid parameters:";
    for (const auto& d : diags)
        if (d.severity == Diagnostic::Severity::error) msg << " [" << d.code << "] " << d.message << ";";
    throw ValidationError(msg.str());
}

} // namespace

void require_valid(const SystemParams& p) { throw_on_errors(validate(p)); }
void require_valid(const SystemParams& p, const Drive& d) { throw_on_errors(validate(p, d)); }

FigureSetup canonical_figure_params(FigureId id) {
    // Shared frame: g_a = 0.5, J = 5, resonant drive. The eigenvalue and
    // steady-state datasets only pin the net gain g_a; the split
    // kappa_ex_a = kappa_0_a = 0.5 (so g = 1.5) is a modeling default chosen
    // to match the spectrum dataset, which does pin every port rate.
    FigureSetup f;
    f.params.res_a = {0.0, 0.5, 0.5, 1.5};
    f.params.res_b = {0.0, 0.5, 0.5};
    f.params.J = 5.0;
    f.params.delta = 0.0;
    f.drive = {0.0, 0.0, 0.0};
    switch (id) {
        case FigureId::Fig2:
            break;
        case FigureId::Fig3a:
            f.params.delta = 2.0;
            f.drive.eta_a = 0.2;
            break;
        case FigureId::Fig3b:
            f.params.delta = 2.0;
            f.drive.eta_a = 0.2;
            f.drive.eta_b = 0.2;
            break;
        case FigureId::Fig4:
            f.params.delta = 2.0;
            break;
        case FigureId::Fig5Gain:
            f.params.delta = 2.0;
            break;
        case FigureId::Fig5NoGain:
            f.params.delta = 2.0;
            f.params.res_a.gain = 0.0;  // pump off; g_a = -1
            break;
    }
    return f;
}

const char* figure_name(FigureId id) {
    switch (id) {
        case FigureId::Fig2: return "fig2";
        case FigureId::Fig3a: return "fig3a";
        case FigureId::Fig3b: return "fig3b";
        case FigureId::Fig4: return "fig4";
        case FigureId::Fig5Gain: return "fig5_gain";
        case FigureId::Fig5NoGain: return "fig5_nogain";
    }
    return "?";
}

FigureId figure_from_name(const std::string& name) {
    for (FigureId id : {FigureId::Fig2, FigureId::Fig3a, FigureId::Fig3b, FigureId::Fig4,
                        FigureId::Fig5Gain, FigureId::Fig5NoGain})
        if (name == figure_name(id)) return id;
    throw ValidationError("unknown figure id: " + name);
}

namespace {

using nlohmann::json;

constexpr const char* kKeys[] = {"omega_bar", "kappa_ex_a", "kappa_0_a", "gain",
                                 "kappa_ex_b", "kappa_0_b", "J", "delta",
                                 "eta_a", "eta_b", "omega_d"};

ParamFile from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("parameter file must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : kKeys) known = known || (it.key() == k);
        if (!known) throw ValidationError("unknown parameter key: " + it.key());
    }
    for (const char* k : kKeys) {
        if (!j.contains(k)) throw ValidationError(std::string("missing parameter key: ") + k);
        if (!j.at(k).is_number()) throw ValidationError(std::string("parameter ") + k + " must be a number");
    }
    ParamFile pf;
    pf.params.res_a.omega = j.at("omega_bar").get<double>();
    pf.params.res_b.omega = pf.params.res_a.omega;
    pf.params.res_a.kappa_ex = j.at("kappa_ex_a").get<double>();
    pf.params.res_a.kappa_0 = j.at("kappa_0_a").get<double>();
    pf.params.res_a.gain = j.at("gain").get<double>();
    pf.params.res_b.kappa_ex = j.at("kappa_ex_b").get<double>();
    pf.params.res_b.kappa_0 = j.at("kappa_0_b").get<double>();
    pf.params.J = j.at("J").get<double>();
    pf.params.delta = j.at("delta").get<double>();
    pf.drive.eta_a = j.at("eta_a").get<double>();
    pf.drive.eta_b = j.at("eta_b").get<double>();
    pf.drive.omega_d = j.at("omega_d").get<double>();
    return pf;
}

} // namespace

ParamFile parse_params_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("parameter JSON parse error: ") + e.what());
    }
    return from_json(j);
}

ParamFile load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open parameter file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_params_json(buf.str());
}

std::string params_to_json(const SystemParams& p, const Drive& d) {
    json j;
    j["omega_bar"] = p.omega_bar();
    j["kappa_ex_a"] = p.res_a.kappa_ex;
    j["kappa_0_a"] = p.res_a.kappa_0;
    j["gain"] = p.res_a.gain;
    j["kappa_ex_b"] = p.res_b.kappa_ex;
    j["kappa_0_b"] = p.res_b.kappa_0;
    j["J"] = p.J;
    j["delta"] = p.delta;
    j["eta_a"] = d.eta_a;
    j["eta_b"] = d.eta_b;
    j["omega_d"] = d.omega_d;
    return j.dump(2) + "\n";
}

void save_params(const std::string& path, const SystemParams& p, const Drive& d) {
    std::ofstream out(path);
    if (!out) throw std::ios_base::failure("cannot write parameter file: " + path);
    out << params_to_json(p, d);
}

void apply_override(ParamFile& pf, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ValidationError("override must look like key=value: " + spec);
    const std::string key = spec.substr(0, eq);
    const std::string val = spec.substr(eq + 1);
    double x = 0.0;
    try {
        size_t used = 0;
        x = std::stod(val, &used);
        if (used != val.size()) throw std::invalid_argument(val);
    } catch (const std::exception&) {
        throw ValidationError("override value is not a number: " + spec);
    }
    if (key == "omega_bar") { pf.params.res_a.omega = x; pf.params.res_b.omega = x; }
    else if (key == "kappa_ex_a") pf.params.res_a.kappa_ex = x;
    else if (key == "kappa_0_a") pf.params.res_a.kappa_0 = x;
    else if (key == "gain") pf.params.res_a.gain = x;
    else if (key == "kappa_ex_b") pf.params.res_b.kappa_ex = x;
    else if (key == "kappa_0_b") pf.params.res_b.kappa_0 = x;
    else if (key == "J") pf.params.J = x;
    else if (key == "delta") pf.params.delta = x;
    else if (key == "eta_a") pf.drive.eta_a = x;
    else if (key == "eta_b") pf.drive.eta_b = x;
    else if (key == "omega_d") pf.drive.omega_d = x;
    else throw ValidationError("unknown parameter key: " + key);
}

namespace {

ParamFile scaled(const ParamFile& pf, double s) {
    ParamFile out = pf;
    out.params.res_a.omega *= s;
    out.params.res_a.kappa_ex *= s;
    out.params.res_a.kappa_0 *= s;
    out.params.res_a.gain *= s;
    out.params.res_b.omega *= s;
    out.params.res_b.kappa_ex *= s;
    out.params.res_b.kappa_0 *= s;
    out.params.J *= s;
    out.params.delta *= s;
    out.drive.eta_a *= s;
    out.drive.eta_b *= s;
    out.drive.omega_d *= s;
    return out;
}

} // namespace

ParamFile params_to_si(const ParamFile& pf, double kappa_b_si) {
    if (!(kappa_b_si > 0.0)) throw ValidationError("reference kappa_b must be positive");
    return scaled(pf, kappa_b_si);
}

ParamFile params_from_si(const ParamFile& pf, double kappa_b_si) {
    if (!(kappa_b_si > 0.0)) throw ValidationError("reference kappa_b must be positive");
    return scaled(pf, 1.0 / kappa_b_si);
}

} // namespace wgmgyro
