#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "wgmgyro/errors.hpp"
#include "wgmgyro/noise.hpp"
#include "wgmgyro/oracle.hpp"
#include "wgmgyro/params.hpp"
#include "wgmgyro/rng.hpp"
#include "wgmgyro/spectrum.hpp"

using namespace wgmgyro;

namespace {

// Strongly damped point: short relaxation time keeps the Monte-Carlo cases
// cheap while every rate stays in play.
SystemParams damped_toy() {
    SystemParams p;
    p.res_a.kappa_ex = 0.5;
    p.res_a.kappa_0 = 0.5;
    p.res_a.gain = 0.2;
    p.res_b.kappa_ex = 0.5;
    p.res_b.kappa_0 = 0.5;
    p.J = 0.5;
    p.delta = 0.3;
    return p;
}

double mat_abs(const Mat2& m) {
    return std::abs(m.m00) + std::abs(m.m01) + std::abs(m.m10) + std::abs(m.m11);
}

bool batches_equal(const TrajectoryBatch& x, const TrajectoryBatch& y) {
    if (x.records.size() != y.records.size()) return false;
    for (std::size_t t = 0; t < x.records.size(); ++t) {
        const Trajectory &a = x.records[t], &b = y.records[t];
        if (a.a != b.a || a.b != b.b || a.a_out != b.a_out || a.b_out != b.b_out) return false;
    }
    return true;
}

} // namespace

TEST_CASE("five ports, one per physical rate, all of strength one half") {
    const SystemParams p = canonical_figure_params(FigureId::Fig4).params;
    const auto ports = noise_ports(p);
    using L = NoisePort::Label;
    CHECK(ports[0].label == L::AWaveguide);
    CHECK(ports[1].label == L::AEnvironment);
    CHECK(ports[2].label == L::AGain);
    CHECK(ports[3].label == L::BWaveguide);
    CHECK(ports[4].label == L::BEnvironment);
    CHECK(ports[0].rate == 0.5);
    CHECK(ports[1].rate == 0.5);
    CHECK(ports[2].rate == 1.5);
    CHECK(ports[3].rate == 0.5);
    CHECK(ports[4].rate == 0.5);
    for (int k = 0; k < 5; ++k) CHECK(ports[k].mode == (k < 3 ? 0 : 1));
    CHECK(NoisePort::symmetrized_strength == 0.5);

    // per-mode influx is the sum of rate * strength over that mode's ports
    const Mat2 d = symmetrized_diffusion(p);
    CHECK(std::real(d.m00) == doctest::Approx(1.25).epsilon(1e-15));
    CHECK(std::real(d.m11) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std::abs(d.m01) == 0.0);
}

TEST_CASE("stationary covariance solves the steady Lyapunov equation") {
    const SystemParams p = canonical_figure_params(FigureId::Fig4).params;
    const Mat2 v = stationary_covariance(p);
    const Mat2 m = drift_matrix(p, 0.0);
    const Mat2 resid = m * v + v * m.adjoint() + symmetrized_diffusion(p);
    CHECK(mat_abs(resid) < 1e-10 * mat_abs(v));
    CHECK(std::abs(v.m01 - std::conj(v.m10)) < 1e-12 * mat_abs(v));
    CHECK(std::real(v.m00) > 0.0);
    CHECK(std::real(v.m11) > 0.0);
    CHECK(std::abs(std::imag(v.m00)) < 1e-12 * std::real(v.m00));

    SystemParams bad = p;
    bad.delta = 4.0;
    CHECK_THROWS_AS(stationary_covariance(bad), UnstableSystemError);
}

TEST_CASE("one-step law: propagator, increment integral and noise covariance") {
    const SystemParams p = canonical_figure_params(FigureId::Fig4).params;
    const Mat2 m = drift_matrix(p, 0.0);
    const Mat2 v = stationary_covariance(p);
    const Mat2 d_sym = symmetrized_diffusion(p);

    for (double dt : {1e-4, 1e-3, 0.3}) {
        CAPTURE(dt);
        const OuStep st = ou_step(p, dt);
        // E = expm(M dt) and A = int_0^dt expm(M s) ds, tied by E = I + M A
        CHECK(mat_abs(st.propagator - expm(m * cplx(dt))) < 1e-12 * mat_abs(st.propagator));
        const Mat2 ima = Mat2::identity() + m * st.increment_integral;
        CHECK(mat_abs(st.propagator - ima) < 1e-12 * mat_abs(st.propagator));
        // exact-step noise must reproduce the stationary law: Q = V - E V E^H
        const Mat2& e = st.propagator;
        const Mat2 q_ref = v - e * v * e.adjoint();
        CHECK(mat_abs(st.noise_cov - q_ref) < 1e-10 * mat_abs(v));
        // the residual part is hermitian PSD (up to rounding)
        const Mat2& r = st.residual_cov;
        CHECK(std::abs(r.m01 - std::conj(r.m10)) < 1e-12 * mat_abs(st.noise_cov) + 1e-300);
        CHECK(std::real(r.m00) > -1e-12);
        CHECK(std::real(r.m11) > -1e-12);
        CHECK(std::real(r.m00) * std::real(r.m11) - std::norm(r.m10) > -1e-12);
    }

    // small-step behaviour: Q -> D dt, residual is third order in dt
    const OuStep tiny = ou_step(p, 1e-4);
    CHECK(mat_abs(tiny.noise_cov - d_sym * cplx(1e-4)) < 1e-2 * mat_abs(d_sym * cplx(1e-4)));
    CHECK(mat_abs(tiny.residual_cov) < 1e-9);

    CHECK_THROWS_AS(ou_step(p, 0.0), ValidationError);
    CHECK_THROWS_AS(ou_step(p, -1.0), ValidationError);
}

TEST_CASE("step bound and relaxation bookkeeping") {
    const SystemParams p = canonical_figure_params(FigureId::Fig4).params;
    CHECK(max_drift_rate(p) == doctest::Approx(6.0855).epsilon(1e-3));
    CHECK(max_step_size(p) == doctest::Approx(0.01 / max_drift_rate(p)).epsilon(1e-15));

    // slowest decay at this point is about 19.5 time units, burn-in is 10 of those
    const std::size_t b1 = auto_burn_in(p, 1e-3);
    CHECK(b1 > 190000);
    CHECK(b1 < 200000);
    const std::size_t b2 = auto_burn_in(p, 5e-4);
    CHECK(std::llabs(std::int64_t(b2) - 2 * std::int64_t(b1)) <= 2);

    SystemParams bad = p;
    bad.delta = 4.0;
    CHECK_THROWS_AS(auto_burn_in(bad, 1e-3), UnstableSystemError);
}

TEST_CASE("simulation gates: step size, stability, validity, shape") {
    const SystemParams p = canonical_figure_params(FigureId::Fig4).params;
    SimOptions opt;
    opt.n_steps = 32;
    opt.n_traj = 1;
    opt.burn_in = 0;
    const auto drop = [](std::size_t, const Trajectory&) {};

    opt.dt = 2e-3; // above 0.01 / max drift rate at this point
    CHECK_THROWS_AS(simulate_stream(p, opt, drop), StepSizeError);

    opt.dt = 1e-3;
    SystemParams unstable = p;
    unstable.delta = 4.0;
    CHECK_THROWS_AS(simulate_stream(unstable, opt, drop), UnstableSystemError);

    SystemParams invalid = p;
    invalid.res_b.kappa_ex = -1.0;
    CHECK_THROWS_AS(simulate_stream(invalid, opt, drop), ValidationError);

    opt.n_steps = 0;
    CHECK_THROWS_AS(simulate_stream(p, opt, drop), ValidationError);
    opt.n_steps = 32;
    opt.dt = 0.0;
    CHECK_THROWS_AS(simulate_stream(p, opt, drop), ValidationError);

    CHECK_THROWS_AS(backend_from_name("bogus"), ValidationError);
    CHECK(backend_from_name(backend_name(SdeBackend::ExactOu)) == SdeBackend::ExactOu);
    CHECK(backend_from_name(backend_name(SdeBackend::EulerMaruyama)) == SdeBackend::EulerMaruyama);
}

TEST_CASE("a system with every port closed produces exact zeros") {
    SystemParams p;
    p.res_a.kappa_ex = 0.0;
    p.res_a.kappa_0 = 0.0;
    p.res_a.gain = 0.0;
    p.res_b.kappa_ex = 0.0;
    p.res_b.kappa_0 = 0.0;
    p.J = 2.0; // undamped drift; the origin is still an exact solution

    SimOptions opt;
    opt.dt = 1e-3;
    opt.n_steps = 40;
    opt.n_traj = 3;
    std::size_t calls = 0;
    simulate_stream(p, opt, [&](std::size_t t, const Trajectory& tr) {
        CHECK(t == calls++);
        REQUIRE(tr.a.size() == 40);
        for (const auto* series : {&tr.a, &tr.b, &tr.a_out, &tr.b_out})
            for (const cplx& z : *series) CHECK(z == cplx(0.0));
    });
    CHECK(calls == 3);
}

TEST_CASE("draw bookkeeping: first recorded sample and burn-in offset") {
    const SystemParams p = damped_toy();
    SimOptions opt;
    opt.dt = 5e-3;
    opt.n_steps = 8;
    opt.n_traj = 2;
    opt.seed = 77;
    opt.burn_in = 0;
    const TrajectoryBatch batch = simulate(p, opt);

    // state starts at the origin; the first output sample is purely the
    // same-step waveguide noise increment
    const double amp = std::sqrt(0.5 * opt.dt);
    for (std::size_t t = 0; t < 2; ++t) {
        const NoiseStream rng(opt.seed, std::uint32_t(t));
        CHECK(batch.records[t].a[0] == cplx(0.0));
        CHECK(batch.records[t].b[0] == cplx(0.0));
        CHECK(batch.records[t].a_out[0] == amp * rng.complex_normal(0, 0) / opt.dt);
        CHECK(batch.records[t].b_out[0] == amp * rng.complex_normal(0, 3) / opt.dt);
    }

    // with burn-in the recorded head uses the draws of the first kept step
    opt.burn_in = 5;
    const TrajectoryBatch burned = simulate(p, opt);
    const NoiseStream rng(opt.seed, 0);
    CHECK(burned.records[0].a_out[0] ==
          amp * rng.complex_normal(5, 0) / opt.dt + std::sqrt(p.res_a.kappa_ex) * burned.records[0].a[0]);
}

TEST_CASE("same seed means the same paths, whatever the schedule") {
    const SystemParams p = damped_toy();
    SimOptions opt;
    opt.dt = 5e-3;
    opt.n_steps = 512;
    opt.n_traj = 6;
    opt.seed = 42;
    opt.burn_in = 64;
    for (SdeBackend backend : {SdeBackend::EulerMaruyama, SdeBackend::ExactOu}) {
        opt.backend = backend;
        opt.threads = 1;
        const TrajectoryBatch one = simulate(p, opt);
        const TrajectoryBatch again = simulate(p, opt);
        opt.threads = 3;
        const TrajectoryBatch pooled = simulate(p, opt);
        CHECK(batches_equal(one, again));
        CHECK(batches_equal(one, pooled));

        opt.seed = 43;
        const TrajectoryBatch other = simulate(p, opt);
        CHECK_FALSE(batches_equal(one, other));
        opt.seed = 42;
    }
}

TEST_CASE("sink exceptions cancel the pool and propagate") {
    const SystemParams p = damped_toy();
    SimOptions opt;
    opt.dt = 5e-3;
    opt.n_steps = 16;
    opt.n_traj = 8;
    opt.burn_in = 0;
    opt.threads = 2;
    CHECK_THROWS_WITH_AS(
        simulate_stream(p, opt,
                        [](std::size_t t, const Trajectory&) {
                            if (t == 2) throw std::runtime_error("sink full");
                        }),
        "sink full", std::runtime_error);
}

TEST_CASE("sampled moments agree with the Lyapunov covariance, both backends") {
    const SystemParams p = damped_toy();
    const Mat2 v = stationary_covariance(p);
    SimOptions opt;
    opt.dt = 5e-3;
    opt.n_steps = 1 << 14;
    opt.n_traj = 64;
    opt.seed = 2024;
    for (SdeBackend backend : {SdeBackend::ExactOu, SdeBackend::EulerMaruyama}) {
        CAPTURE(backend_name(backend));
        opt.backend = backend;
        const BatchMoments mom = batch_moments(simulate(p, opt));
        CHECK(mom.n_traj == 64);
        CHECK(mom.se_a > 0.0);
        CHECK(std::abs(mom.var_a - std::real(v.m00)) < 4.0 * mom.se_a);
        CHECK(std::abs(mom.var_b - std::real(v.m11)) < 4.0 * mom.se_b);
    }
    CHECK_THROWS_AS(batch_moments(TrajectoryBatch{}), ValidationError);
}

TEST_CASE("periodogram pins a pure tone to its bin, rect and hann") {
    const std::size_t len = 8192;
    const double dt = 1e-3;
    const double dw = 2.0 * 3.14159265358979323846 / (double(len) * dt);
    const double w0 = 150.0 * dw;

    // a mode rotating as exp(-i w0 t) must show up at +w0
    std::vector<cplx> x(16 * len);
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double t = dt * double(k);
        x[k] = std::exp(cplx(0.0, -w0 * t));
    }

    SpectrumAccumulator rect(len, dt, WindowKind::Rect);
    rect.add_series(x);
    CHECK(rect.n_segments() == 16);
    const SpectrumEstimate er = rect.finalize(OutputField::A);
    REQUIRE(er.omega.size() == len);
    CHECK(er.omega[len / 2] == 0.0);
    CHECK(er.omega[1] - er.omega[0] == doctest::Approx(dw).epsilon(1e-12));
    const std::size_t peak = len / 2 + 150;
    CHECK(er.omega[peak] == doctest::Approx(w0).epsilon(1e-12));
    CHECK(er.s[peak] == doctest::Approx(double(len) * dt).epsilon(1e-9));
    CHECK(er.se[peak] < 1e-9); // identical segments
    CHECK(er.s[peak - 1] < 1e-9);
    CHECK(er.s[peak + 1] < 1e-9);
    CHECK(er.s[len / 2 - 150] < 1e-9); // nothing at -w0

    // hann: 2/3 of the energy in the center bin, 1/6 in each neighbour
    SpectrumAccumulator hann(len, dt, WindowKind::Hann);
    hann.add_series(x);
    const SpectrumEstimate eh = hann.finalize(OutputField::A);
    CHECK(eh.s[peak] == doctest::Approx(2.0 / 3.0 * double(len) * dt).epsilon(1e-9));
    CHECK(eh.s[peak - 1] == doctest::Approx(double(len) * dt / 6.0).epsilon(1e-9));
    CHECK(eh.s[peak + 1] == doctest::Approx(double(len) * dt / 6.0).epsilon(1e-9));
    CHECK(eh.s[peak + 2] < 1e-9);
}

TEST_CASE("window normalization puts white noise on the floor") {
    const std::size_t len = 4096;
    const double dt = 2e-3;
    const NoiseStream rng(9001, 0);
    std::vector<cplx> x(16 * len);
    const double amp = std::sqrt(0.5 / dt); // E|x|^2 = 1/(2 dt)
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = amp * rng.complex_normal(k, 0);

    for (WindowKind wk : {WindowKind::Rect, WindowKind::Hann}) {
        SpectrumAccumulator acc(len, dt, wk);
        acc.add_series(x);
        const SpectrumEstimate est = acc.finalize(OutputField::A);
        double mean = 0.0;
        for (double s : est.s) mean += s;
        mean /= double(len);
        CHECK(mean == doctest::Approx(0.5).epsilon(0.04));
    }
}

TEST_CASE("closed output tap leaves pure vacuum at exactly one half") {
    SystemParams p = damped_toy();
    p.res_a.kappa_ex = 0.0;
    p.res_a.kappa_0 = 1.0; // total loss unchanged, all of it now internal

    SimOptions opt;
    opt.dt = 5e-3;
    opt.n_steps = 16384;
    opt.n_traj = 16;
    opt.seed = 7;
    opt.backend = SdeBackend::ExactOu;
    const OracleSpectra spec = oracle_spectra(p, opt, 8192);
    REQUIRE(spec.a.omega.size() == 8192);
    CHECK(spec.a.n_segments == 32);

    std::size_t within = 0;
    double mean = 0.0;
    for (std::size_t j = 0; j < spec.a.s.size(); ++j) {
        mean += spec.a.s[j];
        if (std::abs(spec.a.s[j] - 0.5) <= 4.0 * spec.a.se[j]) ++within;
    }
    mean /= double(spec.a.s.size());
    CHECK(mean == doctest::Approx(0.5).epsilon(0.02));
    // 32 segments: the periodogram is exponential-ish per bin, so the
    // studentized 4 sigma interval still misses slightly more often than a
    // normal table would say
    CHECK(double(within) / double(spec.a.s.size()) > 0.985);
}

TEST_CASE("sampled spectrum tracks the frequency-domain curve") {
    const SystemParams p = damped_toy();
    SimOptions opt;
    opt.dt = 5e-3;
    opt.n_steps = 8192;
    opt.n_traj = 32;
    opt.seed = 314;
    opt.backend = SdeBackend::ExactOu;
    const OracleSpectra spec = oracle_spectra(p, opt);
    CHECK(spec.a.n_segments == 32);
    CHECK(spec.b.field == OutputField::B);

    // compare across the feature region; discretization bias stays well under
    // the segment scatter at this step size
    for (const auto& [est, curve] : {
             std::pair<const SpectrumEstimate&, double (*)(const SystemParams&, double)>{
                 spec.a, &spectrum_a_at},
             {spec.b, &spectrum_b_at}}) {
        std::size_t n = 0, within = 0;
        for (std::size_t j = 0; j < est.omega.size(); ++j) {
            if (std::abs(est.omega[j]) > 5.0) continue;
            ++n;
            if (std::abs(est.s[j] - curve(p, est.omega[j])) <= 4.0 * est.se[j]) ++within;
        }
        REQUIRE(n > 50);
        CHECK(double(within) / double(n) > 0.97);
    }

    // the dominant sampled peak sits where the analytic curve says, on the
    // negative side for the slow hybrid mode of this parameter set
    std::size_t jbest = 0;
    for (std::size_t j = 1; j < spec.a.s.size(); ++j)
        if (spec.a.s[j] > spec.a.s[jbest]) jbest = j;
    const auto rep = is_stable(p);
    CHECK(spec.a.omega[jbest] == doctest::Approx(-std::imag(rep.lambda_plus)).epsilon(0.2));
}

TEST_CASE("data volume gates") {
    CHECK_THROWS_AS(SpectrumAccumulator(2048, 1e-3), InsufficientDataError);
    CHECK_THROWS_AS(SpectrumAccumulator(4096, 0.0), ValidationError);
    SpectrumAccumulator acc(4096, 1e-3);
    acc.add_series(std::vector<cplx>(5000, cplx(1.0))); // one whole segment only
    CHECK(acc.n_segments() == 1);
    CHECK_THROWS_AS(acc.finalize(OutputField::A), InsufficientDataError);

    const SystemParams p = damped_toy();
    SimOptions opt;
    opt.dt = 5e-3;
    opt.n_steps = 4096;
    opt.n_traj = 8;
    opt.burn_in = 0;
    CHECK_THROWS_AS(estimate_spectrum(simulate(p, opt), OutputField::A), InsufficientDataError);
}

TEST_CASE("trajectory dumps round trip bit for bit") {
    const SystemParams p = damped_toy();
    SimOptions opt;
    opt.dt = 5e-3;
    opt.n_steps = 64;
    opt.n_traj = 3;
    opt.seed = 99;
    opt.burn_in = 16;
    const TrajectoryBatch batch = simulate(p, opt);

    const std::string path = "/tmp/wgm_traj_roundtrip.bin";
    dump_trajectories(batch, path);
    const TrajectoryBatch loaded = load_trajectories(path);
    CHECK(loaded.dt == batch.dt);
    CHECK(loaded.n_steps == batch.n_steps);
    CHECK(loaded.n_traj == batch.n_traj);
    CHECK(loaded.seed == batch.seed);
    CHECK(loaded.backend == batch.backend);
    CHECK(batches_equal(batch, loaded));

    // not a dump at all
    const std::string junk = "/tmp/wgm_traj_junk.bin";
    {
        std::ofstream os(junk, std::ios::binary);
        os << "definitely not a trajectory file";
    }
    CHECK_THROWS_AS(load_trajectories(junk), std::runtime_error);

    // valid header, missing tail
    const std::string stub = "/tmp/wgm_traj_short.bin";
    {
        std::ifstream is(path, std::ios::binary);
        std::vector<char> all((std::istreambuf_iterator<char>(is)),
                              std::istreambuf_iterator<char>());
        std::ofstream os(stub, std::ios::binary);
        os.write(all.data(), std::streamsize(all.size() - 128));
    }
    CHECK_THROWS_AS(load_trajectories(stub), std::runtime_error);

    CHECK_THROWS_AS(load_trajectories("/tmp/wgm_traj_missing.bin"), std::runtime_error);
    std::remove(path.c_str());
    std::remove(junk.c_str());
    std::remove(stub.c_str());
}
