#pragma once

#include <stdexcept>
#include <string>

namespace wgmgyro {

// Error taxonomy mirrors the CLI exit codes: validation problems (bad
// parameters, bad config, undersized estimator input) -> 2, dynamical
// instability -> 3, estimation failures -> 4. Plain I/O failures use
// std::ios_base::failure / std::runtime_error and map to 1.

struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Requested SDE step exceeds the resolution bound for the drift spectrum.
struct StepSizeError : ValidationError {
    explicit StepSizeError(const std::string& msg) : ValidationError(msg) {}
};

// Too few samples or segments for a meaningful spectral estimate.
struct InsufficientDataError : ValidationError {
    explicit InsufficientDataError(const std::string& msg) : ValidationError(msg) {}
};

struct UnstableSystemError : std::runtime_error {
    explicit UnstableSystemError(const std::string& msg) : std::runtime_error(msg) {}
};

// Steady-state denominator collapsed (operating point at or next to an
// exceptional point); the linear solve is meaningless there.
struct SingularDenominatorError : std::runtime_error {
    explicit SingularDenominatorError(const std::string& msg) : std::runtime_error(msg) {}
};

struct EstimationError : std::runtime_error {
    explicit EstimationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NoPeakError : EstimationError {
    explicit NoPeakError(const std::string& msg) : EstimationError(msg) {}
};

struct AmbiguousPeakError : EstimationError {
    explicit AmbiguousPeakError(const std::string& msg) : EstimationError(msg) {}
};

// Rotation cannot be recovered when the dispersion factor is (numerically) zero.
struct DegenerateDispersionError : ValidationError {
    explicit DegenerateDispersionError(const std::string& msg) : ValidationError(msg) {}
};

} // namespace wgmgyro
