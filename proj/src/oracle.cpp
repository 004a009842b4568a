#include "wgmgyro/oracle.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "wgmgyro/errors.hpp"
#include "wgmgyro/rng.hpp"
#include "wgmgyro/spectrum.hpp"

namespace wgmgyro {

const char* backend_name(SdeBackend b) {
    return b == SdeBackend::EulerMaruyama ? "euler" : "exact_ou";
}

SdeBackend backend_from_name(const std::string& name) {
    if (name == "euler") return SdeBackend::EulerMaruyama;
    if (name == "exact_ou") return SdeBackend::ExactOu;
    throw ValidationError("unknown SDE backend '" + name + "' (expected euler or exact_ou)");
}

std::array<NoisePort, 5> noise_ports(const SystemParams& p) {
    using L = NoisePort::Label;
    return {{{L::AWaveguide, 0, p.res_a.kappa_ex},
             {L::AEnvironment, 0, p.res_a.kappa_0},
             {L::AGain, 0, p.res_a.gain},
             {L::BWaveguide, 1, p.res_b.kappa_ex},
             {L::BEnvironment, 1, p.res_b.kappa_0}}};
}

Mat2 symmetrized_diffusion(const SystemParams& p) {
    return Mat2::diag(0.5 * (p.res_a.kappa() + p.res_a.gain), 0.5 * p.res_b.kappa());
}

Mat2 stationary_covariance(const SystemParams& p) {
    require_stable(p);
    return lyapunov_steady(drift_matrix(p, 0.0), symmetrized_diffusion(p));
}

double max_drift_rate(const SystemParams& p) {
    const auto [l1, l2] = eigenvalues(drift_matrix(p, 0.0));
    return std::max(std::abs(l1), std::abs(l2));
}

double max_step_size(const SystemParams& p) {
    return 0.01 / max_drift_rate(p);
}

std::size_t auto_burn_in(const SystemParams& p, double dt) {
    require_stable(p);
    const StabilityReport rep = is_stable(p);
    // lambda_plus has the larger real part, so it is the slowest decay
    const double t_relax = 1.0 / (-std::real(rep.lambda_plus));
    return static_cast<std::size_t>(std::ceil(10.0 * t_relax / dt));
}

namespace {

// integral_0^dt e^{M s} D e^{M^H s} ds, D hermitian. Eigenbasis closed form;
// near an exceptional point (eigenvectors nearly parallel) fall back to
// composite Simpson, which is machine-exact here because the step gate keeps
// |M| dt small.
Mat2 noise_covariance_integral(const Mat2& m, const Mat2& d_sym, double dt) {
    auto [l1, l2] = eigenvalues(m);
    const double scale =
        std::abs(m.m00) + std::abs(m.m01) + std::abs(m.m10) + std::abs(m.m11) + 1e-300;
    cplx v1x, v1y, v2x, v2y;
    if (std::abs(m.m01) >= std::abs(m.m10) && std::abs(m.m01) > 1e-14 * scale) {
        v1x = m.m01;
        v1y = l1 - m.m00;
        v2x = m.m01;
        v2y = l2 - m.m00;
    } else if (std::abs(m.m10) > 1e-14 * scale) {
        v1x = l1 - m.m11;
        v1y = m.m10;
        v2x = l2 - m.m11;
        v2y = m.m10;
    } else {
        // drift is diagonal; the characteristic-polynomial root order may not
        // match the diagonal order, so read the eigenvalues off directly
        l1 = m.m00;
        l2 = m.m11;
        v1x = 1.0;
        v1y = 0.0;
        v2x = 0.0;
        v2y = 1.0;
    }
    const double n1 = std::hypot(std::abs(v1x), std::abs(v1y));
    const double n2 = std::hypot(std::abs(v2x), std::abs(v2y));
    v1x /= n1;
    v1y /= n1;
    v2x /= n2;
    v2y /= n2;
    const cplx dets = v1x * v2y - v1y * v2x;
    if (std::abs(dets) < 1e-8) {
        const int n = 64;
        const double h = dt / n;
        Mat2 acc{};
        for (int i = 0; i <= n; ++i) {
            const Mat2 es = expm(m * cplx(h * i));
            const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            acc = acc + es * d_sym * es.adjoint() * cplx(w);
        }
        return acc * cplx(h / 3.0);
    }
    const Mat2 smat{v1x, v2x, v1y, v2y};
    const Mat2 sinv = Mat2{v2y, -v2x, -v1y, v1x} * (1.0 / dets);
    const Mat2 gt = sinv * d_sym * sinv.adjoint();
    const auto seg = [dt](cplx li, cplx lj_conj) {
        return dt * detail::phi1((li + lj_conj) * dt);
    };
    const Mat2 k{gt.m00 * seg(l1, std::conj(l1)), gt.m01 * seg(l1, std::conj(l2)),
                 gt.m10 * seg(l2, std::conj(l1)), gt.m11 * seg(l2, std::conj(l2))};
    return smat * k * smat.adjoint();
}

} // namespace

OuStep ou_step(const SystemParams& p, double dt) {
    require_valid(p);
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive and finite");
    const Mat2 m = drift_matrix(p, 0.0);
    const Mat2 d_sym = symmetrized_diffusion(p);
    OuStep st;
    st.propagator = expm(m * cplx(dt));
    st.increment_integral = expm_integral(m * cplx(dt)) * cplx(dt);
    st.noise_cov = noise_covariance_integral(m, d_sym, dt);
    // part of the noise already determined by the raw port increments:
    // A G A^H / (2 dt) with G = 2 d_sym
    const Mat2& a = st.increment_integral;
    st.residual_cov = st.noise_cov - a * d_sym * a.adjoint() * cplx(1.0 / dt);
    return st;
}

namespace {

struct SimContext {
    double dt = 0.0;
    std::size_t n_rec = 0;
    std::size_t burn = 0;
    std::uint64_t seed = 0;
    SdeBackend backend = SdeBackend::EulerMaruyama;
    Mat2 m;                          // drift, resonant frame
    std::array<double, 5> inj{};     // sqrt(port rate)
    std::array<int, 5> mode{};
    double out_a = 0.0, out_b = 0.0; // sqrt(kappa_ex)
    // exact backend pieces
    Mat2 prop;
    std::array<std::array<cplx, 2>, 5> cw{}; // conditional-mean weight per port
    double ch00 = 0.0, ch11 = 0.0;           // cholesky of the residual covariance
    cplx ch10;
};

SimContext make_context(const SystemParams& p, const SimOptions& opt, std::size_t burn) {
    SimContext c;
    c.dt = opt.dt;
    c.n_rec = opt.n_steps;
    c.burn = burn;
    c.seed = opt.seed;
    c.backend = opt.backend;
    c.m = drift_matrix(p, 0.0);
    const auto ports = noise_ports(p);
    for (int k = 0; k < 5; ++k) {
        c.inj[k] = std::sqrt(ports[k].rate);
        c.mode[k] = ports[k].mode;
    }
    c.out_a = std::sqrt(p.res_a.kappa_ex);
    c.out_b = std::sqrt(p.res_b.kappa_ex);
    if (opt.backend == SdeBackend::ExactOu) {
        const OuStep st = ou_step(p, opt.dt);
        c.prop = st.propagator;
        const Mat2& a = st.increment_integral;
        for (int k = 0; k < 5; ++k) {
            const cplx col0 = c.mode[k] == 0 ? a.m00 : a.m01;
            const cplx col1 = c.mode[k] == 0 ? a.m10 : a.m11;
            c.cw[k] = {col0 * (c.inj[k] / opt.dt), col1 * (c.inj[k] / opt.dt)};
        }
        // 2x2 cholesky with clamping; the residual covariance is PSD up to
        // rounding by construction
        const Mat2& q = st.residual_cov;
        const double q00 = std::max(std::real(q.m00), 0.0);
        c.ch00 = std::sqrt(q00);
        c.ch10 = c.ch00 > 1e-150 ? q.m10 / c.ch00 : cplx(0.0);
        c.ch11 = std::sqrt(std::max(std::real(q.m11) - std::norm(c.ch10), 0.0));
    }
    return c;
}

Trajectory run_one(const SimContext& c, std::uint32_t traj) {
    NoiseStream rng(c.seed, traj);
    Trajectory tr;
    tr.a.resize(c.n_rec);
    tr.b.resize(c.n_rec);
    tr.a_out.resize(c.n_rec);
    tr.b_out.resize(c.n_rec);
    cplx a = 0.0, b = 0.0;
    const double amp = std::sqrt(0.5 * c.dt); // port increment, E|xi|^2 = dt/2
    const std::size_t total = c.burn + c.n_rec;
    for (std::size_t step = 0; step < total; ++step) {
        cplx xi[5];
        for (std::uint32_t k = 0; k < 5; ++k) xi[k] = amp * rng.complex_normal(step, k);
        if (step >= c.burn) {
            const std::size_t j = step - c.burn;
            tr.a[j] = a;
            tr.b[j] = b;
            // same-step waveguide increment: keeps the input-output
            // interference term exact
            tr.a_out[j] = xi[0] / c.dt + c.out_a * a;
            tr.b_out[j] = xi[3] / c.dt + c.out_b * b;
        }
        if (c.backend == SdeBackend::EulerMaruyama) {
            const auto drift = c.m.apply({a, b});
            a += drift[0] * c.dt + c.inj[0] * xi[0] + c.inj[1] * xi[1] + c.inj[2] * xi[2];
            b += drift[1] * c.dt + c.inj[3] * xi[3] + c.inj[4] * xi[4];
        } else {
            // propagate exactly, then add the noise conditioned on the port
            // increments plus an independent residual
            const cplx z0 = rng.complex_normal(step, 5);
            const cplx z1 = rng.complex_normal(step, 6);
            auto next = c.prop.apply({a, b});
            for (int k = 0; k < 5; ++k) {
                next[0] += c.cw[k][0] * xi[k];
                next[1] += c.cw[k][1] * xi[k];
            }
            a = next[0] + c.ch00 * z0;
            b = next[1] + c.ch10 * z0 + c.ch11 * z1;
        }
    }
    return tr;
}

void run_ordered_pool(const SimContext& ctx, std::size_t n_traj, unsigned threads,
                      const std::function<void(std::size_t, const Trajectory&)>& sink) {
    std::mutex mu;
    std::condition_variable room_cv, ready_cv;
    std::map<std::size_t, Trajectory> done;
    std::size_t next_claim = 0;
    std::size_t next_deliver = 0;
    bool cancelled = false;
    std::exception_ptr worker_error;
    const std::size_t max_buffered = 2 * std::size_t(threads) + 1;

    auto worker = [&] {
        try {
            while (true) {
                std::size_t t;
                {
                    std::lock_guard<std::mutex> lk(mu);
                    if (cancelled || next_claim >= n_traj) return;
                    t = next_claim++;
                }
                Trajectory tr = run_one(ctx, std::uint32_t(t));
                std::unique_lock<std::mutex> lk(mu);
                room_cv.wait(lk, [&] { return cancelled || t < next_deliver + max_buffered; });
                if (cancelled) return;
                done.emplace(t, std::move(tr));
                ready_cv.notify_all();
            }
        } catch (...) {
            std::lock_guard<std::mutex> lk(mu);
            if (!worker_error) worker_error = std::current_exception();
            cancelled = true;
            ready_cv.notify_all();
            room_cv.notify_all();
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);

    std::exception_ptr sink_error;
    for (std::size_t idx = 0; idx < n_traj; ++idx) {
        Trajectory tr;
        {
            std::unique_lock<std::mutex> lk(mu);
            ready_cv.wait(lk, [&] { return cancelled || done.count(idx) > 0; });
            if (cancelled) break;
            auto it = done.find(idx);
            tr = std::move(it->second);
            done.erase(it);
            next_deliver = idx + 1;
            room_cv.notify_all();
        }
        try {
            sink(idx, tr);
        } catch (...) {
            sink_error = std::current_exception();
            std::lock_guard<std::mutex> lk(mu);
            cancelled = true;
            ready_cv.notify_all();
            room_cv.notify_all();
            break;
        }
    }
    for (auto& th : pool) th.join();
    if (sink_error) std::rethrow_exception(sink_error);
    if (worker_error) std::rethrow_exception(worker_error);
}

} // namespace

void simulate_stream(const SystemParams& p, const SimOptions& opt,
                     const std::function<void(std::size_t, const Trajectory&)>& sink) {
    if (opt.n_steps == 0 || opt.n_traj == 0)
        throw ValidationError("n_steps and n_traj must both be positive");
    if (!(opt.dt > 0.0) || !std::isfinite(opt.dt))
        throw ValidationError("dt must be positive and finite");

    bool any_noise = false;
    for (const NoisePort& port : noise_ports(p))
        if (port.rate != 0.0) any_noise = true;
    if (!any_noise) {
        // degenerate noiseless system: the origin is an exact solution, so
        // every trajectory is identically zero whatever the drift does; no
        // stability or validity gate applies
        Trajectory zero;
        zero.a.assign(opt.n_steps, cplx(0.0));
        zero.b.assign(opt.n_steps, cplx(0.0));
        zero.a_out.assign(opt.n_steps, cplx(0.0));
        zero.b_out.assign(opt.n_steps, cplx(0.0));
        for (std::size_t t = 0; t < opt.n_traj; ++t) sink(t, zero);
        return;
    }

    require_valid(p);
    require_stable(p);
    const double dt_max = max_step_size(p);
    if (opt.dt > dt_max) {
        std::ostringstream os;
        os << "dt = " << opt.dt << " exceeds the resolution bound " << dt_max
           << " (0.01 / max drift rate)";
        throw StepSizeError(os.str());
    }
    const std::size_t burn =
        opt.burn_in == kAutoBurnIn ? auto_burn_in(p, opt.dt) : opt.burn_in;
    const SimContext ctx = make_context(p, opt, burn);

    unsigned threads = opt.threads;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    if (threads <= 1 || opt.n_traj == 1) {
        for (std::size_t t = 0; t < opt.n_traj; ++t) {
            const Trajectory tr = run_one(ctx, std::uint32_t(t));
            sink(t, tr);
        }
        return;
    }
    run_ordered_pool(ctx, opt.n_traj, threads, sink);
}

TrajectoryBatch simulate(const SystemParams& p, const SimOptions& opt) {
    TrajectoryBatch batch;
    batch.dt = opt.dt;
    batch.n_steps = opt.n_steps;
    batch.n_traj = opt.n_traj;
    batch.seed = opt.seed;
    batch.backend = opt.backend;
    batch.records.resize(opt.n_traj);
    simulate_stream(p, opt,
                    [&](std::size_t t, const Trajectory& tr) { batch.records[t] = tr; });
    return batch;
}

BatchMoments batch_moments(const TrajectoryBatch& batch) {
    if (batch.records.empty()) throw ValidationError("empty trajectory batch");
    std::vector<double> ma, mb;
    ma.reserve(batch.records.size());
    mb.reserve(batch.records.size());
    for (const Trajectory& tr : batch.records) {
        double sa = 0.0, sb = 0.0;
        for (const cplx& v : tr.a) sa += std::norm(v);
        for (const cplx& v : tr.b) sb += std::norm(v);
        ma.push_back(sa / double(tr.a.size()));
        mb.push_back(sb / double(tr.b.size()));
    }
    const std::size_t n = ma.size();
    BatchMoments out{};
    out.n_traj = n;
    for (double v : ma) out.var_a += v;
    for (double v : mb) out.var_b += v;
    out.var_a /= double(n);
    out.var_b /= double(n);
    if (n > 1) {
        double da = 0.0, db = 0.0;
        for (double v : ma) da += (v - out.var_a) * (v - out.var_a);
        for (double v : mb) db += (v - out.var_b) * (v - out.var_b);
        out.se_a = std::sqrt(da / double(n - 1) / double(n));
        out.se_b = std::sqrt(db / double(n - 1) / double(n));
    }
    return out;
}

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

} // namespace

SpectrumAccumulator::SpectrumAccumulator(std::size_t segment_len, double dt, WindowKind window)
    : len_(segment_len), dt_(dt) {
    if (len_ < 4096)
        throw InsufficientDataError("segment length must be at least 4096 samples, got " +
                                    std::to_string(len_));
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive and finite");
    window_.resize(len_);
    if (window == WindowKind::Rect) {
        std::fill(window_.begin(), window_.end(), 1.0);
    } else {
        for (std::size_t k = 0; k < len_; ++k)
            window_[k] = 0.5 * (1.0 - std::cos(kTwoPi * double(k) / double(len_)));
    }
    window_norm_ = 0.0;
    for (double w : window_) window_norm_ += w * w;
    mean_.assign(len_, 0.0);
    m2_.assign(len_, 0.0);
    std::lock_guard<std::mutex> lk(planner_mutex());
    buf_ = fftw_malloc(sizeof(fftw_complex) * len_);
    plan_ = fftw_plan_dft_1d(int(len_), static_cast<fftw_complex*>(buf_),
                             static_cast<fftw_complex*>(buf_), FFTW_BACKWARD, FFTW_ESTIMATE);
    if (buf_ == nullptr || plan_ == nullptr) throw std::runtime_error("fftw plan creation failed");
}

SpectrumAccumulator::~SpectrumAccumulator() {
    std::lock_guard<std::mutex> lk(planner_mutex());
    if (plan_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(plan_));
    if (buf_ != nullptr) fftw_free(buf_);
}

void SpectrumAccumulator::add_segment(const cplx* x) {
    auto* b = static_cast<fftw_complex*>(buf_);
    for (std::size_t k = 0; k < len_; ++k) {
        b[k][0] = x[k].real() * window_[k];
        b[k][1] = x[k].imag() * window_[k];
    }
    fftw_execute(static_cast<fftw_plan>(plan_));
    ++n_seg_;
    const double norm = dt_ / window_norm_;
    for (std::size_t j = 0; j < len_; ++j) {
        const double pj = (b[j][0] * b[j][0] + b[j][1] * b[j][1]) * norm;
        const double d = pj - mean_[j];
        mean_[j] += d / double(n_seg_);
        m2_[j] += d * (pj - mean_[j]);
    }
}

void SpectrumAccumulator::add_series(const std::vector<cplx>& x) {
    const std::size_t n_whole = x.size() / len_;
    for (std::size_t s = 0; s < n_whole; ++s) add_segment(x.data() + s * len_);
}

SpectrumEstimate SpectrumAccumulator::finalize(OutputField field) const {
    if (n_seg_ < 16)
        throw InsufficientDataError("need at least 16 segments for a variance estimate, have " +
                                    std::to_string(n_seg_));
    SpectrumEstimate est;
    est.field = field;
    est.n_segments = n_seg_;
    est.dt = dt_;
    est.omega.resize(len_);
    est.s.resize(len_);
    est.se.resize(len_);
    const std::size_t half = (len_ + 1) / 2; // fft indices below this are nonnegative freq
    const double dw = kTwoPi / (double(len_) * dt_);
    for (std::size_t i = 0; i < len_; ++i) {
        const std::size_t j = (i + half) % len_;
        const double k = double(j) - (j >= half ? double(len_) : 0.0);
        est.omega[i] = dw * k;
        est.s[i] = mean_[j];
        est.se[i] = std::sqrt(m2_[j] / double(n_seg_ - 1) / double(n_seg_));
    }
    return est;
}

SpectrumEstimate estimate_spectrum(const TrajectoryBatch& batch, OutputField field,
                                   std::size_t segment_len, WindowKind window) {
    if (segment_len == 0) segment_len = batch.n_steps;
    SpectrumAccumulator acc(segment_len, batch.dt, window);
    for (const Trajectory& tr : batch.records)
        acc.add_series(field == OutputField::A ? tr.a_out : tr.b_out);
    return acc.finalize(field);
}

OracleSpectra oracle_spectra(const SystemParams& p, const SimOptions& opt,
                             std::size_t segment_len, WindowKind window) {
    if (segment_len == 0) segment_len = opt.n_steps;
    SpectrumAccumulator acc_a(segment_len, opt.dt, window);
    SpectrumAccumulator acc_b(segment_len, opt.dt, window);
    simulate_stream(p, opt, [&](std::size_t, const Trajectory& tr) {
        acc_a.add_series(tr.a_out);
        acc_b.add_series(tr.b_out);
    });
    return {acc_a.finalize(OutputField::A), acc_b.finalize(OutputField::B)};
}

namespace {

constexpr char kTrajMagic[8] = {'W', 'G', 'T', 'R', 'A', 'J', '0', '1'};

template <class T>
void raw_write(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void raw_read(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
}

} // namespace

void dump_trajectories(const TrajectoryBatch& batch, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    os.write(kTrajMagic, sizeof(kTrajMagic));
    raw_write(os, std::uint64_t(batch.n_steps));
    raw_write(os, std::uint64_t(batch.n_traj));
    raw_write(os, std::uint64_t(batch.seed));
    raw_write(os, batch.dt);
    raw_write(os, std::uint32_t(batch.backend));
    raw_write(os, std::uint32_t(0));
    for (const Trajectory& tr : batch.records)
        for (const std::vector<cplx>* v : {&tr.a, &tr.b, &tr.a_out, &tr.b_out})
            os.write(reinterpret_cast<const char*>(v->data()),
                     std::streamsize(v->size() * sizeof(cplx)));
    if (!os) throw std::runtime_error("short write to '" + path + "'");
}

TrajectoryBatch load_trajectories(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open '" + path + "' for reading");
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kTrajMagic, sizeof(magic)) != 0)
        throw std::runtime_error("'" + path + "' is not a trajectory dump");
    TrajectoryBatch batch;
    std::uint64_t n_steps = 0, n_traj = 0, seed = 0;
    std::uint32_t backend = 0, reserved = 0;
    raw_read(is, n_steps);
    raw_read(is, n_traj);
    raw_read(is, seed);
    raw_read(is, batch.dt);
    raw_read(is, backend);
    raw_read(is, reserved);
    batch.n_steps = n_steps;
    batch.n_traj = n_traj;
    batch.seed = seed;
    batch.backend = SdeBackend(backend);
    batch.records.resize(n_traj);
    for (Trajectory& tr : batch.records)
        for (std::vector<cplx>* v : {&tr.a, &tr.b, &tr.a_out, &tr.b_out}) {
            v->resize(n_steps);
            is.read(reinterpret_cast<char*>(v->data()), std::streamsize(n_steps * sizeof(cplx)));
        }
    if (!is) throw std::runtime_error("'" + path + "' is truncated");
    return batch;
}

} // namespace wgmgyro
