#pragma once

#include <string>
#include <vector>

#include "wgmgyro/errors.hpp"

namespace wgmgyro {

// All frequencies and rates below are dimensionless, measured in units of the
// stationary resonator's total linewidth kappa_b (canonical unit system,
// kappa_b = 1). The sagnac module owns every SI quantity.

// Spinning resonator: pumped, so it carries a gain rate on top of its two
// loss channels.
struct ResonatorA {
    double omega = 0.0;     // bare resonance frequency
    double kappa_ex = 0.5;  // waveguide coupling rate
    double kappa_0 = 0.5;   // intrinsic loss rate
    double gain = 1.5;      // pump-induced gain rate g

    double kappa() const { return kappa_ex + kappa_0; }
    double net_gain() const { return gain - kappa(); }  // g_a = g - kappa_a
};

// Stationary resonator: passive, loss only.
struct ResonatorB {
    double omega = 0.0;
    double kappa_ex = 0.5;
    double kappa_0 = 0.5;

    double kappa() const { return kappa_ex + kappa_0; }
};

struct Drive {
    double eta_a = 0.0;   // drive amplitude into resonator a
    double eta_b = 0.0;   // drive amplitude into resonator b
    double omega_d = 0.0; // drive frequency (same for both ports)
};

struct SystemParams {
    ResonatorA res_a;
    ResonatorB res_b;
    double J = 5.0;      // evanescent coupling rate
    double delta = 0.0;  // rotation-induced shift of resonator a

    // Both bare frequencies are required equal; validate() flags violations.
    double omega_bar() const { return res_b.omega; }
};

// Detuning of the common drive from the shared bare frequency.
inline double detuning_bar(const SystemParams& p, const Drive& d) {
    return p.omega_bar() - d.omega_d;
}

struct Diagnostic {
    enum class Severity { error, warning };
    Severity severity;
    std::string code;     // short machine-friendly tag
    std::string message;
};

// Full diagnostic scan. Errors are nonphysical configurations; warnings flag
// unusual but mathematically serviceable ones (clockwise rotation delta < 0,
// non-canonical kappa_b != 1).
std::vector<Diagnostic> validate(const SystemParams& p);
std::vector<Diagnostic> validate(const SystemParams& p, const Drive& d);

inline bool is_valid(const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags)
        if (d.severity == Diagnostic::Severity::error) return false;
    return true;
}

// Throws ValidationError listing every error-severity diagnostic.
void require_valid(const SystemParams& p);
void require_valid(const SystemParams& p, const Drive& d);

// Canonical parameter sets for the datasets the CLI can reproduce.
enum class FigureId { Fig2, Fig3a, Fig3b, Fig4, Fig5Gain, Fig5NoGain };

struct FigureSetup {
    SystemParams params;
    Drive drive;
};

FigureSetup canonical_figure_params(FigureId id);

const char* figure_name(FigureId id);
FigureId figure_from_name(const std::string& name);  // ValidationError on unknown

// JSON parameter files: a flat object with exactly the keys
//   omega_bar, kappa_ex_a, kappa_0_a, gain, kappa_ex_b, kappa_0_b,
//   J, delta, eta_a, eta_b, omega_d
// Missing and unknown keys are both rejected.
struct ParamFile {
    SystemParams params;
    Drive drive;
};

ParamFile load_params(const std::string& path);
ParamFile parse_params_json(const std::string& text);  // for tests / in-memory use
std::string params_to_json(const SystemParams& p, const Drive& d);
void save_params(const std::string& path, const SystemParams& p, const Drive& d);

// "key=value" override with the same key names as the JSON file.
void apply_override(ParamFile& pf, const std::string& spec);

// Rescale between the canonical system and SI rad/s given the reference
// linewidth. Round trip is exact to ~1e-16 relative (multiply/divide).
ParamFile params_to_si(const ParamFile& pf, double kappa_b_si);
ParamFile params_from_si(const ParamFile& pf, double kappa_b_si);

} // namespace wgmgyro
