#include "wgmgyro/io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "wgmgyro/errors.hpp"

namespace wgmgyro {

std::string format_full(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

MetaList params_metadata(const SystemParams& p, const Drive& d) {
    return {
        {"omega_bar", format_full(p.res_a.omega)},
        {"kappa_ex_a", format_full(p.res_a.kappa_ex)},
        {"kappa_0_a", format_full(p.res_a.kappa_0)},
        {"gain", format_full(p.res_a.gain)},
        {"kappa_ex_b", format_full(p.res_b.kappa_ex)},
        {"kappa_0_b", format_full(p.res_b.kappa_0)},
        {"J", format_full(p.J)},
        {"delta", format_full(p.delta)},
        {"eta_a", format_full(d.eta_a)},
        {"eta_b", format_full(d.eta_b)},
        {"omega_d", format_full(d.omega_d)},
    };
}

void write_metadata(std::ostream& os, const MetaList& meta) {
    for (const auto& [k, v] : meta) os << "# " << k << " = " << v << "\n";
}

namespace {

struct Fmt {
    std::ostream& os;
    explicit Fmt(std::ostream& s) : os(s) { os << std::setprecision(17); }
};

nlohmann::json meta_object(const MetaList& meta) {
    nlohmann::json m = nlohmann::json::object();
    for (const auto& [k, v] : meta) m[k] = v;
    return m;
}

std::string table_json(const char* kind, const MetaList& meta,
                       std::initializer_list<const char*> columns,
                       const std::vector<std::vector<double>>& rows) {
    nlohmann::json doc;
    doc["schema"] = 1;
    doc["kind"] = kind;
    doc["meta"] = meta_object(meta);
    nlohmann::json jc = nlohmann::json::array();
    for (const char* c : columns) jc.push_back(c);
    doc["columns"] = std::move(jc);
    nlohmann::json jr = nlohmann::json::array();
    for (const auto& row : rows) jr.push_back(row);
    doc["rows"] = std::move(jr);
    return doc.dump(2) + "\n";
}

} // namespace

void write_eigen_csv(std::ostream& os, const std::vector<SweepRow>& rows, const MetaList& meta) {
    Fmt f(os);
    write_metadata(os, meta);
    os << "delta,reE_plus,imE_plus,reE_minus,imE_minus\n";
    for (const SweepRow& r : rows)
        os << r.delta << ',' << r.e_plus.real() << ',' << r.e_plus.imag() << ','
           << r.e_minus.real() << ',' << r.e_minus.imag() << '\n';
}

void write_photon_csv(std::ostream& os, const std::vector<PhotonRow>& rows, const MetaList& meta) {
    Fmt f(os);
    write_metadata(os, meta);
    os << "delta,detuning,n_a,n_b,valid\n";
    for (const PhotonRow& r : rows)
        os << r.delta << ',' << r.detuning << ',' << r.n_a << ',' << r.n_b << ','
           << (r.valid ? 1 : 0) << '\n';
}

namespace {

void spectrum_rows(std::ostream& os, const SpectrumSeries& s, const double* delta) {
    const bool three = !s.s3.empty();
    for (std::size_t i = 0; i < s.omega.size(); ++i) {
        if (delta) os << *delta << ',';
        os << s.omega[i] << ',' << s.total[i] << ',' << s.s1[i] << ',' << s.s2[i];
        if (three) os << ',' << s.s3[i];
        os << '\n';
    }
}

const char* spectrum_header(const SpectrumSeries& s) {
    return s.s3.empty() ? "omega,S_total,S1,S2" : "omega,S_total,S1,S2,S3";
}

} // namespace

void write_spectrum_csv(std::ostream& os, const SpectrumSeries& s, const MetaList& meta) {
    Fmt f(os);
    write_metadata(os, meta);
    os << "# field = " << (s.field == OutputField::A ? 'a' : 'b') << '\n';
    os << spectrum_header(s) << '\n';
    spectrum_rows(os, s, nullptr);
}

void write_spectrum_stack_csv(std::ostream& os,
                              const std::vector<std::pair<double, SpectrumSeries>>& blocks,
                              const MetaList& meta) {
    Fmt f(os);
    write_metadata(os, meta);
    if (blocks.empty()) return;
    os << "# field = " << (blocks.front().second.field == OutputField::A ? 'a' : 'b') << '\n';
    os << "delta," << spectrum_header(blocks.front().second) << '\n';
    for (const auto& [delta, series] : blocks) spectrum_rows(os, series, &delta);
}

void write_spectrum_pair_csv(std::ostream& os, const SpectrumSeries& a, const SpectrumSeries& b,
                             const MetaList& meta) {
    if (a.omega.size() != b.omega.size())
        throw ValidationError("paired spectra must share one frequency grid");
    Fmt f(os);
    write_metadata(os, meta);
    os << "omega,S_a,S_b\n";
    for (std::size_t i = 0; i < a.omega.size(); ++i)
        os << a.omega[i] << ',' << a.total[i] << ',' << b.total[i] << '\n';
}

void write_estimate_csv(std::ostream& os, const SpectrumEstimate& e, const MetaList& meta) {
    Fmt f(os);
    write_metadata(os, meta);
    os << "# field = " << (e.field == OutputField::A ? 'a' : 'b') << '\n';
    os << "# n_segments = " << e.n_segments << '\n';
    os << "# dt = " << e.dt << '\n';
    os << "omega,S_est,stderr\n";
    for (std::size_t i = 0; i < e.omega.size(); ++i)
        os << e.omega[i] << ',' << e.s[i] << ',' << e.se[i] << '\n';
}

void write_smax_csv(std::ostream& os, const std::vector<SmaxRow>& rows, const MetaList& meta) {
    Fmt f(os);
    write_metadata(os, meta);
    os << "delta,omega_left,smax_a,smax_b,stable\n";
    for (const SmaxRow& r : rows)
        os << r.delta << ',' << r.omega_left << ',' << r.smax_a << ',' << r.smax_b << ','
           << (r.stable ? 1 : 0) << '\n';
}

void write_gain_comparison_csv(std::ostream& os, const GainComparison& g, OutputField field,
                               const MetaList& meta) {
    const SpectrumSeries& with = field == OutputField::A ? g.a_with_gain : g.b_with_gain;
    const SpectrumSeries& without = field == OutputField::A ? g.a_without_gain : g.b_without_gain;
    Fmt f(os);
    write_metadata(os, meta);
    os << "# field = " << (field == OutputField::A ? 'a' : 'b') << '\n';
    os << "omega,S_with_gain,S_without_gain\n";
    for (std::size_t i = 0; i < with.omega.size(); ++i)
        os << with.omega[i] << ',' << with.total[i] << ',' << without.total[i] << '\n';
}

std::string eigen_json(const std::vector<SweepRow>& rows, const MetaList& meta) {
    std::vector<std::vector<double>> r;
    r.reserve(rows.size());
    for (const SweepRow& w : rows)
        r.push_back({w.delta, w.e_plus.real(), w.e_plus.imag(), w.e_minus.real(),
                     w.e_minus.imag()});
    return table_json("eigen_sweep", meta,
                      {"delta", "reE_plus", "imE_plus", "reE_minus", "imE_minus"}, r);
}

std::string photon_json(const std::vector<PhotonRow>& rows, const MetaList& meta) {
    std::vector<std::vector<double>> r;
    r.reserve(rows.size());
    for (const PhotonRow& w : rows)
        r.push_back({w.delta, w.detuning, w.n_a, w.n_b, w.valid ? 1.0 : 0.0});
    return table_json("photon_sweep", meta, {"delta", "detuning", "n_a", "n_b", "valid"}, r);
}

std::string spectrum_json(const SpectrumSeries& s, const MetaList& meta) {
    std::vector<std::vector<double>> r;
    r.reserve(s.omega.size());
    const bool three = !s.s3.empty();
    for (std::size_t i = 0; i < s.omega.size(); ++i) {
        std::vector<double> row = {s.omega[i], s.total[i], s.s1[i], s.s2[i]};
        if (three) row.push_back(s.s3[i]);
        r.push_back(std::move(row));
    }
    return three ? table_json("spectrum", meta, {"omega", "S_total", "S1", "S2", "S3"}, r)
                 : table_json("spectrum", meta, {"omega", "S_total", "S1", "S2"}, r);
}

std::string estimate_series_json(const SpectrumEstimate& e, const MetaList& meta) {
    std::vector<std::vector<double>> r;
    r.reserve(e.omega.size());
    for (std::size_t i = 0; i < e.omega.size(); ++i) r.push_back({e.omega[i], e.s[i], e.se[i]});
    return table_json("spectrum_estimate", meta, {"omega", "S_est", "stderr"}, r);
}

std::string smax_json(const std::vector<SmaxRow>& rows, const MetaList& meta) {
    std::vector<std::vector<double>> r;
    r.reserve(rows.size());
    for (const SmaxRow& w : rows)
        r.push_back({w.delta, w.omega_left, w.smax_a, w.smax_b, w.stable ? 1.0 : 0.0});
    return table_json("smax_sweep", meta, {"delta", "omega_left", "smax_a", "smax_b", "stable"},
                      r);
}

SpectrumData read_spectrum_csv(std::istream& is) {
    SpectrumData d;
    std::string line;
    std::vector<std::vector<double>> rows;
    bool uniform_three = true;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        if (line[start] == '#') {
            // pick up the field marker; other metadata is informational only
            std::istringstream ms(line.substr(start + 1));
            std::string key, eq, value;
            if (ms >> key >> eq >> value && key == "field" && eq == "=")
                d.field = value == "b" ? OutputField::B : OutputField::A;
            continue;
        }
        std::vector<double> cols;
        std::istringstream ls(line.substr(start));
        std::string cell;
        bool numeric = true;
        while (std::getline(ls, cell, ',')) {
            try {
                std::size_t used = 0;
                const double v = std::stod(cell, &used);
                while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used])))
                    ++used;
                if (used != cell.size()) throw std::invalid_argument(cell);
                cols.push_back(v);
            } catch (const std::exception&) {
                numeric = false;
                break;
            }
        }
        if (!numeric || cols.size() < 2) continue; // header or stray text line
        if (cols.size() != 3) uniform_three = false;
        rows.push_back(std::move(cols));
    }
    if (rows.size() < 2) throw ValidationError("spectrum table has no data rows");
    d.omega.reserve(rows.size());
    d.s.reserve(rows.size());
    for (const auto& row : rows) {
        d.omega.push_back(row[0]);
        d.s.push_back(row[1]);
        if (uniform_three) d.se.push_back(row[2]);
    }
    return d;
}

SpectrumData load_spectrum_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open '" + path + "' for reading");
    return read_spectrum_csv(is);
}

} // namespace wgmgyro
