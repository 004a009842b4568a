#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace wgmgyro::cli {

enum class Command { Eigen, Steady, Noise, Smax, Oracle, Estimate, Figures, SelfTest };
enum class OutputFormat { Csv, Json };

// Fully resolved invocation. Commands read the fields they care about and
// ignore the rest; parse() fills it from argv. Building one by hand is the
// test entry point that skips argument parsing.
struct RunConfig {
    Command command = Command::SelfTest;
    std::string params_path;             // empty: built-in defaults
    std::vector<std::string> overrides;  // key=value, applied after the file load
    std::string output_path;             // empty or "-": stdout
    OutputFormat format = OutputFormat::Csv;

    std::string figure;     // canonical parameter set to start from
    double delta = std::numeric_limits<double>::quiet_NaN();  // NaN: keep params value
    std::string grid;       // "start:stop:count" sweep override
    std::uint64_t seed = 1;
    std::size_t n_traj = 256;
    std::size_t n_steps = std::size_t(1) << 14;
    double dt = 1e-3;
    std::string backend = "exact_ou";
    unsigned threads = 1;
    std::string resonator = "a";         // output field for spectra: "a" or "b"
    std::string convention = "paperH";
    std::string input_path;              // estimate: spectrum table to invert
    std::string channel = "peak_frequency";
    std::string sagnac_path;             // optional rotation-platform config
    bool all_figures = false;
    bool inject_fault = false;           // selftest negative control
};

// "start:stop:count" -> uniform grid, inclusive endpoints. count >= 2 except
// that count == 1 requires start == stop.
std::vector<double> parse_grid(const std::string& spec);

// Executes one resolved invocation. Returns the process exit code: 0 success,
// 1 I/O failure, 2 validation/usage, 3 instability, 4 estimation failure.
// Error text goes to err; command output goes to output_path or out.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// argv front end (CLI11 underneath): parse, then run. Same exit codes; parse
// problems are validation failures (2), --help exits 0.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Fast invariant suite: closed form vs eigensolver, steady state vs ODE,
// vacuum floor, left-peak round trip. Prints one line per check. Returns the
// number of failed checks; inject_fault breaks the eigensolver cross-check
// route on purpose so the harness itself is tested.
int self_test(bool inject_fault, std::ostream& out);

} // namespace wgmgyro::cli
