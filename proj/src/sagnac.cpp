#include "wgmgyro/sagnac.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace wgmgyro {

double dispersion_factor(const SagnacConfig& cfg) {
    return 1.0 - 1.0 / (cfg.n * cfg.n) - (cfg.lambda_m / cfg.n) * cfg.dn_dlambda;
}

double optical_omega(const SagnacConfig& cfg) {
    if (cfg.omega_a_rad_s > 0.0) return cfg.omega_a_rad_s;
    return 2.0 * std::numbers::pi * kSpeedOfLight / cfg.lambda_m;
}

namespace {

void check(const SagnacConfig& cfg) {
    if (!(cfg.n > 0.0) || !(cfg.radius_m > 0.0) || !(cfg.lambda_m > 0.0) ||
        !(cfg.kappa_b_si > 0.0) || !std::isfinite(cfg.dn_dlambda))
        throw ValidationError("sagnac config needs positive n, R, lambda, kappa_b_SI");
}

double shift_per_rotation(const SagnacConfig& cfg) {
    return cfg.n * cfg.radius_m * optical_omega(cfg) / kSpeedOfLight * dispersion_factor(cfg);
}

} // namespace

SagnacShift shift_from_rotation(const SagnacConfig& cfg, double omega_rot_rad_s) {
    check(cfg);
    const double rad_s = shift_per_rotation(cfg) * omega_rot_rad_s;
    return {rad_s, rad_s / cfg.kappa_b_si};
}

double rotation_from_shift(const SagnacConfig& cfg, double shift_rad_s) {
    check(cfg);
    if (std::fabs(dispersion_factor(cfg)) < 1e-15)
        throw DegenerateDispersionError(
            "dispersion factor is numerically zero; rotation is unobservable in the shift");
    return shift_rad_s / shift_per_rotation(cfg);
}

namespace {

using nlohmann::json;

} // namespace

SagnacConfig parse_sagnac_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("sagnac JSON parse error: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("sagnac config must be a JSON object");
    const char* keys[] = {"n", "R_m", "lambda_m", "dn_dlambda", "omega_a_rad_s", "kappa_b_SI"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys) known = known || (it.key() == k);
        if (!known) throw ValidationError("unknown sagnac config key: " + it.key());
    }
    SagnacConfig cfg;
    if (j.contains("n")) cfg.n = j.at("n").get<double>();
    if (j.contains("R_m")) cfg.radius_m = j.at("R_m").get<double>();
    if (j.contains("lambda_m")) cfg.lambda_m = j.at("lambda_m").get<double>();
    if (j.contains("dn_dlambda")) cfg.dn_dlambda = j.at("dn_dlambda").get<double>();
    if (j.contains("omega_a_rad_s")) cfg.omega_a_rad_s = j.at("omega_a_rad_s").get<double>();
    if (j.contains("kappa_b_SI")) cfg.kappa_b_si = j.at("kappa_b_SI").get<double>();
    check(cfg);
    return cfg;
}

SagnacConfig load_sagnac_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open sagnac config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_sagnac_json(buf.str());
}

std::string sagnac_to_json(const SagnacConfig& cfg) {
    json j;
    j["n"] = cfg.n;
    j["R_m"] = cfg.radius_m;
    j["lambda_m"] = cfg.lambda_m;
    j["dn_dlambda"] = cfg.dn_dlambda;
    j["omega_a_rad_s"] = optical_omega(cfg);
    j["kappa_b_SI"] = cfg.kappa_b_si;
    return j.dump(2) + "\n";
}

} // namespace wgmgyro
