#pragma once

#include <vector>

#include "wgmgyro/params.hpp"
#include "wgmgyro/twobytwo.hpp"

namespace wgmgyro {

// Three ways to dress the coupled-mode matrix with damping. They answer
// different questions and are kept explicit so no call site silently mixes
// them up:
//   PaperH - gain on a only, loss on b ignored; the textbook anti-crossing
//            picture of the mode branches.
//   FullH  - gain on a and loss on b, lab frame; the complete non-Hermitian
//            effective Hamiltonian.
//   Drift  - half-rate drift matrix of the equations of motion in the drive
//            frame; this one owns stability and the observable linewidths.
enum class DampingConvention { PaperH, FullH, Drift };

const char* convention_name(DampingConvention c);
DampingConvention convention_from_name(const std::string& name);

// Complex mode frequencies, ordered by descending real part (ties: descending
// imaginary part). Under Drift the values are reported as E = i*lambda in the
// resonant frame (Dbar = 0): Re E is the peak frequency relative to
// omega_bar, Im E > 0 means growth.
struct ModeSpectrum {
    cplx e_plus;
    cplx e_minus;
};

// The 2x2 matrix whose eigenvalues define the branches for a convention.
// delta_bar only affects Drift (a global -i*delta_bar on the diagonal).
Mat2 effective_matrix(const SystemParams& p, DampingConvention c);
Mat2 drift_matrix(const SystemParams& p, double delta_bar);

// Generic route: characteristic polynomial of effective_matrix.
ModeSpectrum eigenvalues(const SystemParams& p, DampingConvention c);

// Closed-form route for PaperH:
//   E_+/- = (2 omega_bar - delta + i g_a +/- sqrt((delta - i g_a)^2 + 4 J^2)) / 2
// Principal branch; kept separate from the generic route on purpose (the two
// are cross-checked against each other).
ModeSpectrum closed_form_eigenvalues(const SystemParams& p);

struct SweepRow {
    double delta;
    cplx e_plus;
    cplx e_minus;
};

// Branch-continued sweep over delta: the first row is ordered by the
// ModeSpectrum rule, every following row picks the pairing that minimizes
// total displacement from the previous row, so branches stay smooth through
// near-degeneracies instead of re-sorting.
std::vector<SweepRow> real_imag_sweep(const SystemParams& base,
                                      const std::vector<double>& delta_grid,
                                      DampingConvention c);

struct StabilityReport {
    bool stable;
    cplx lambda_plus;   // drift eigenvalues, descending real part
    cplx lambda_minus;
};

// Lyapunov stability of the fluctuation dynamics: both drift eigenvalues in
// the open left half plane. Independent of delta_bar (frame shifts move only
// the imaginary parts), asserted in tests.
StabilityReport is_stable(const SystemParams& p);

void require_stable(const SystemParams& p);  // UnstableSystemError otherwise

// Drive amplitudes seen by the symmetric (A) and antisymmetric (B)
// superpositions of the two modes.
struct SupermodeDrive {
    double amp_symmetric;      // (eta_a + eta_b) / sqrt(2)
    double amp_antisymmetric;  // (eta_a - eta_b) / sqrt(2)
};

SupermodeDrive supermode_drive(const Drive& d);

} // namespace wgmgyro
