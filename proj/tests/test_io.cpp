#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "wgmgyro/errors.hpp"
#include "wgmgyro/io.hpp"
#include "wgmgyro/params.hpp"
#include "wgmgyro/rng.hpp"

using namespace wgmgyro;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) out.push_back(line);
    return out;
}

} // namespace

TEST_CASE("full-precision formatting survives a text round trip") {
    CHECK(format_full(0.5) == "0.5");
    CHECK(format_full(0.1) == "0.10000000000000001");
    const NoiseStream rng(31337, 0);
    for (int k = 0; k < 200; ++k) {
        const auto [u0, u1] = rng.uniform_pair(k, 0);
        const double v = (u0 - 0.5) * std::pow(10.0, 40.0 * (u1 - 0.5));
        CHECK(std::stod(format_full(v)) == v);
    }
    CHECK(std::stod(format_full(-6.0990195135927845)) == -6.0990195135927845);
}

TEST_CASE("parameter metadata lists every knob") {
    const SystemParams p = canonical_figure_params(FigureId::Fig3a).params;
    const Drive d = canonical_figure_params(FigureId::Fig3a).drive;
    const MetaList meta = params_metadata(p, d);
    REQUIRE(meta.size() == 11);
    CHECK(meta.front().first == "omega_bar");
    CHECK(meta.back().first == "omega_d");
    bool saw_j = false, saw_eta = false;
    for (const auto& [k, v] : meta) {
        if (k == "J") {
            saw_j = true;
            CHECK(v == "5");
        }
        if (k == "eta_a") {
            saw_eta = true;
            CHECK(v == format_full(d.eta_a));
        }
    }
    CHECK(saw_j);
    CHECK(saw_eta);

    std::ostringstream os;
    write_metadata(os, meta);
    const auto ls = lines_of(os.str());
    REQUIRE(ls.size() == 11);
    for (const auto& l : ls) CHECK(l.rfind("# ", 0) == 0);
    CHECK(ls[6] == "# J = 5");
}

TEST_CASE("eigenvalue table layout") {
    const std::vector<SweepRow> rows = {{-1.0, cplx(0.25, 5.1), cplx(-0.5, -4.9)},
                                        {0.0, cplx(0.1, 0.2), cplx(0.3, 0.4)}};
    std::ostringstream os;
    write_eigen_csv(os, rows, {{"run", "demo"}});
    const auto ls = lines_of(os.str());
    REQUIRE(ls.size() == 4);
    CHECK(ls[0] == "# run = demo");
    CHECK(ls[1] == "delta,reE_plus,imE_plus,reE_minus,imE_minus");
    CHECK(ls[2] == "-1,0.25,5.0999999999999996,-0.5,-4.9000000000000004");
    CHECK(ls[3] == "0,0.10000000000000001,0.20000000000000001,0.29999999999999999,"
                   "0.40000000000000002");
}

TEST_CASE("photon table marks invalid rows without poisoning the layout") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const std::vector<PhotonRow> rows = {{2.0, -1.5, 5.25, 0.125, true},
                                         {4.0, -1.5, nan, nan, false}};
    std::ostringstream os;
    write_photon_csv(os, rows, {});
    const auto ls = lines_of(os.str());
    REQUIRE(ls.size() == 3);
    CHECK(ls[0] == "delta,detuning,n_a,n_b,valid");
    CHECK(ls[1] == "2,-1.5,5.25,0.125,1");
    CHECK(ls[2] == "4,-1.5,nan,nan,0");
}

TEST_CASE("spectrum tables: three terms for a, two for b, field marker") {
    const SystemParams p = canonical_figure_params(FigureId::Fig4).params;
    const std::vector<double> grid = {-6.1, -6.0, 0.0, 4.0, 4.1};
    const SpectrumSeries sa = spectrum_a(p, grid);
    const SpectrumSeries sb = spectrum_b(p, grid);

    std::ostringstream oa;
    write_spectrum_csv(oa, sa, {});
    const auto la = lines_of(oa.str());
    CHECK(la[0] == "# field = a");
    CHECK(la[1] == "omega,S_total,S1,S2,S3");
    CHECK(la.size() == 2 + grid.size());

    std::ostringstream ob;
    write_spectrum_csv(ob, sb, {});
    const auto lb = lines_of(ob.str());
    CHECK(lb[0] == "# field = b");
    CHECK(lb[1] == "omega,S_total,S1,S2");

    // reading back keeps the field tag, the grid and the totals exactly
    std::istringstream back(ob.str());
    const SpectrumData d = read_spectrum_csv(back);
    CHECK(d.field == OutputField::B);
    CHECK(d.omega == sb.omega);
    CHECK(d.s == sb.total);
    CHECK(d.se.empty()); // four columns is not the stderr layout
}

TEST_CASE("stacked and paired spectrum tables") {
    const SystemParams p = canonical_figure_params(FigureId::Fig4).params;
    const std::vector<double> grid = {-1.0, 0.0, 1.0};
    const SpectrumSeries sa = spectrum_a(p, grid);
    const SpectrumSeries sb = spectrum_b(p, grid);

    std::ostringstream os;
    write_spectrum_stack_csv(os, {{0.0, sa}, {2.0, sa}}, {});
    const auto ls = lines_of(os.str());
    CHECK(ls[1] == "delta,omega,S_total,S1,S2,S3");
    REQUIRE(ls.size() == 2 + 6);
    CHECK(ls[2].rfind("0,", 0) == 0);
    CHECK(ls[5].rfind("2,", 0) == 0);

    std::ostringstream op;
    write_spectrum_pair_csv(op, sa, sb, {});
    const auto lp = lines_of(op.str());
    CHECK(lp[0] == "omega,S_a,S_b");
    CHECK(lp.size() == 1 + grid.size());

    SpectrumSeries short_b = sb;
    short_b.omega.pop_back();
    CHECK_THROWS_AS(write_spectrum_pair_csv(os, sa, short_b, {}), ValidationError);
}

TEST_CASE("sampled-spectrum table round trips with error bars") {
    SpectrumEstimate e;
    e.field = OutputField::B;
    e.omega = {-1.0, 0.0, 1.0, 2.0};
    e.s = {0.5, 0.75, 1.5, 0.625};
    e.se = {0.01, 0.0125, 0.5, 0.25};
    e.n_segments = 16;
    e.dt = 1e-3;

    std::ostringstream os;
    write_estimate_csv(os, e, {{"seed", "7"}});
    const std::string text = os.str();
    CHECK(text.find("# seed = 7\n") != std::string::npos);
    CHECK(text.find("# field = b\n") != std::string::npos);
    CHECK(text.find("# n_segments = 16\n") != std::string::npos);
    CHECK(text.find("# dt = 0.001") != std::string::npos);
    CHECK(text.find("omega,S_est,stderr\n") != std::string::npos);

    std::istringstream back(text);
    const SpectrumData d = read_spectrum_csv(back);
    CHECK(d.field == OutputField::B);
    CHECK(d.omega == e.omega);
    CHECK(d.s == e.s);
    CHECK(d.se == e.se);
}

TEST_CASE("peak-height sweep table") {
    const std::vector<SmaxRow> rows = {{0.0, -5.0, 14.5, 9.25, true},
                                       {3.9, std::numeric_limits<double>::quiet_NaN(),
                                        std::numeric_limits<double>::quiet_NaN(),
                                        std::numeric_limits<double>::quiet_NaN(), false}};
    std::ostringstream os;
    write_smax_csv(os, rows, {});
    const auto ls = lines_of(os.str());
    CHECK(ls[0] == "delta,omega_left,smax_a,smax_b,stable");
    CHECK(ls[1] == "0,-5,14.5,9.25,1");
    CHECK(ls[2] == "3.8999999999999999,nan,nan,nan,0");
}

TEST_CASE("gain comparison table") {
    const SystemParams p = canonical_figure_params(FigureId::Fig4).params;
    const std::vector<double> grid = {-6.0, 0.0, 4.0};
    GainComparison g{};
    g.a_with_gain = spectrum_a(p, grid);
    SystemParams off = p;
    off.res_a.gain = 0.0;
    g.a_without_gain = spectrum_a(off, grid);

    std::ostringstream os;
    write_gain_comparison_csv(os, g, OutputField::A, {});
    const auto ls = lines_of(os.str());
    CHECK(ls[0] == "# field = a");
    CHECK(ls[1] == "omega,S_with_gain,S_without_gain");
    REQUIRE(ls.size() == 2 + grid.size());
}

TEST_CASE("json documents carry schema, columns and nulls for NaN") {
    const std::vector<SweepRow> rows = {{0.0, cplx(1.0, 2.0), cplx(3.0, 4.0)}};
    const nlohmann::json eig = nlohmann::json::parse(eigen_json(rows, {{"run", "demo"}}));
    CHECK(eig.at("schema").get<int>() == 1);
    CHECK(eig.at("kind").get<std::string>() == "eigen_sweep");
    CHECK(eig.at("meta").at("run").get<std::string>() == "demo");
    REQUIRE(eig.at("columns").size() == 5);
    CHECK(eig.at("columns")[0].get<std::string>() == "delta");
    CHECK(eig.at("rows")[0][1].get<double>() == 1.0);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    const nlohmann::json ph =
        nlohmann::json::parse(photon_json({{4.0, -1.0, nan, nan, false}}, {}));
    CHECK(ph.at("kind").get<std::string>() == "photon_sweep");
    CHECK(ph.at("rows")[0][2].is_null());
    CHECK(ph.at("rows")[0][4].get<double>() == 0.0);

    const SystemParams p = canonical_figure_params(FigureId::Fig4).params;
    const nlohmann::json sp =
        nlohmann::json::parse(spectrum_json(spectrum_b(p, {0.0, 1.0}), {}));
    CHECK(sp.at("columns").size() == 4); // no third term for field b

    SpectrumEstimate e;
    e.omega = {0.0, 1.0};
    e.s = {0.5, 0.5};
    e.se = {0.1, 0.1};
    const nlohmann::json es = nlohmann::json::parse(estimate_series_json(e, {}));
    CHECK(es.at("kind").get<std::string>() == "spectrum_estimate");

    const nlohmann::json sm = nlohmann::json::parse(smax_json({{0.0, -5.0, 1.0, 0.5, true}}, {}));
    CHECK(sm.at("kind").get<std::string>() == "smax_sweep");
    CHECK(sm.at("columns")[4].get<std::string>() == "stable");
}

TEST_CASE("the reader shrugs off headers, comments and ragged junk") {
    std::istringstream messy(
        "free-form description line\n"
        "omega,S\n"
        "# some = note\n"
        "\n"
        "0,1\n"
        "   \t\n"
        "1,2\n"
        "1.5,2abc\n"  // unparseable cell, whole line dropped
        "2,3,0.5\n"); // ragged width, still first two columns
    const SpectrumData d = read_spectrum_csv(messy);
    CHECK(d.field == OutputField::A);
    CHECK(d.omega == std::vector<double>{0.0, 1.0, 2.0});
    CHECK(d.s == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(d.se.empty()); // widths were mixed, so no stderr column

    std::istringstream uniform("0,1,0.1\n1,2,0.2\n");
    const SpectrumData u = read_spectrum_csv(uniform);
    CHECK(u.se == std::vector<double>{0.1, 0.2});

    std::istringstream tagged("# field = b\n0,1\n1,2\n");
    CHECK(read_spectrum_csv(tagged).field == OutputField::B);

    std::istringstream spaced("0, 1\n1, 2\n");
    CHECK(read_spectrum_csv(spaced).s == std::vector<double>{1.0, 2.0});

    std::istringstream one_row("0,1\n");
    CHECK_THROWS_AS(read_spectrum_csv(one_row), ValidationError);
    std::istringstream no_rows("just prose\nno numbers here\n");
    CHECK_THROWS_AS(read_spectrum_csv(no_rows), ValidationError);
}

TEST_CASE("file-level loading") {
    const std::string path = "/tmp/wgm_io_spectrum.csv";
    {
        std::ofstream os(path);
        os << "# field = b\n-1,0.5,0.01\n0,2.5,0.02\n1,0.5,0.01\n";
    }
    const SpectrumData d = load_spectrum_csv(path);
    CHECK(d.field == OutputField::B);
    CHECK(d.omega.size() == 3);
    CHECK(d.se.size() == 3);
    std::remove(path.c_str());

    CHECK_THROWS_AS(load_spectrum_csv("/tmp/wgm_io_definitely_missing.csv"), std::runtime_error);
}
