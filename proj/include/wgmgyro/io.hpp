#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "wgmgyro/estimate.hpp"
#include "wgmgyro/noise.hpp"
#include "wgmgyro/oracle.hpp"
#include "wgmgyro/params.hpp"
#include "wgmgyro/spectrum.hpp"
#include "wgmgyro/steady.hpp"

namespace wgmgyro {

// Plot-ready dataset emission. Every CSV starts with `# key = value` comment
// lines recording the full parameter set (and whatever extras the caller
// adds), then one header line, then rows at full double precision, so a file
// regenerated from the same configuration is byte-identical.

using MetaList = std::vector<std::pair<std::string, std::string>>;

std::string format_full(double v);  // shortest round-trippable decimal (17 digits)

MetaList params_metadata(const SystemParams& p, const Drive& d);

void write_metadata(std::ostream& os, const MetaList& meta);

// delta,reE_plus,imE_plus,reE_minus,imE_minus
void write_eigen_csv(std::ostream& os, const std::vector<SweepRow>& rows, const MetaList& meta);

// delta,detuning,n_a,n_b,valid
void write_photon_csv(std::ostream& os, const std::vector<PhotonRow>& rows, const MetaList& meta);

// omega,S_total,S1,S2,S3 (no S3 column for field b, which has two terms)
void write_spectrum_csv(std::ostream& os, const SpectrumSeries& s, const MetaList& meta);

// delta,omega,S_total,... stacked blocks, one per (delta, series) entry
void write_spectrum_stack_csv(std::ostream& os,
                              const std::vector<std::pair<double, SpectrumSeries>>& blocks,
                              const MetaList& meta);

// omega,S_a,S_b for two series on a shared grid
void write_spectrum_pair_csv(std::ostream& os, const SpectrumSeries& a, const SpectrumSeries& b,
                             const MetaList& meta);

// omega,S_est,stderr
void write_estimate_csv(std::ostream& os, const SpectrumEstimate& e, const MetaList& meta);

// delta,omega_left,smax_a,smax_b,stable
void write_smax_csv(std::ostream& os, const std::vector<SmaxRow>& rows, const MetaList& meta);

// omega,S_with_gain,S_without_gain for the chosen output field
void write_gain_comparison_csv(std::ostream& os, const GainComparison& g, OutputField field,
                               const MetaList& meta);

// JSON mirrors of the tables above: a single document
//   {"schema": 1, "kind": ..., "meta": {...}, "columns": [...], "rows": [[...]]}
// NaN (invalid rows) serializes as null.
std::string eigen_json(const std::vector<SweepRow>& rows, const MetaList& meta);
std::string photon_json(const std::vector<PhotonRow>& rows, const MetaList& meta);
std::string spectrum_json(const SpectrumSeries& s, const MetaList& meta);
std::string estimate_series_json(const SpectrumEstimate& e, const MetaList& meta);
std::string smax_json(const std::vector<SmaxRow>& rows, const MetaList& meta);

// Reads a spectrum table back for estimation. Accepts the files written by
// write_spectrum_csv and write_estimate_csv as well as bare numeric tables:
// `#` comments and non-numeric header lines are skipped, the first column is
// omega and the second the spectral value; a uniform three-column table is
// read as (omega, value, stderr); wider tables keep the first two columns. A
// `# field = b` comment line selects the b output field.
SpectrumData read_spectrum_csv(std::istream& is);
SpectrumData load_spectrum_csv(const std::string& path);  // std::runtime_error on open failure

} // namespace wgmgyro
