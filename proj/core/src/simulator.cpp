#include "htfkit/simulator.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "htfkit/errors.hpp"
#include "htfkit/io.hpp"
#include "htfkit/stability.hpp"

namespace htfkit {

void SimConfig::validate() const {
    if (!(dt > 0.0)) throw input_error("SimConfig: dt must be positive");
    if (!(duration > dt)) throw input_error("SimConfig: duration must exceed dt");
    if (settle_time < 0.0 || settle_time >= duration)
        throw input_error("SimConfig: settle_time must lie in [0, duration)");
    if (!(instability_threshold > 1.0))
        throw input_error("SimConfig: instability_threshold must exceed 1");
}

SimConfig SimConfig::for_period(double period, double duration_periods,
                                double settle_periods) {
    SimConfig cfg;
    cfg.dt = period / 2000.0;
    cfg.duration = duration_periods * period;
    cfg.settle_time = settle_periods * period;
    return cfg;
}

namespace {

constexpr double kDivergenceFactor = 1e6;

// Fixed-step classic 4th-order step for a generic complex-vector rhs.
template <typename Rhs, typename Vec>
Vec rk4_step(const Rhs& rhs, double t, double dt, const Vec& x) {
    const Vec k1 = rhs(t, x);
    const Vec k2 = rhs(t + 0.5 * dt, Vec(x + 0.5 * dt * k1));
    const Vec k3 = rhs(t + 0.5 * dt, Vec(x + 0.5 * dt * k2));
    const Vec k4 = rhs(t + dt, Vec(x + dt * k3));
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

bool norm_diverged(double norm, double scale) {
    return !std::isfinite(norm) || norm > kDivergenceFactor * std::max(1.0, scale);
}

// Trapezoid-weighted Fourier projection accumulated on the fly:
// (1/T) \int_0^T y(t) e^{-j w t} dt over a window of n_steps steps.
class Projector {
public:
    Projector(double omega, double t0, double dt, long n_steps)
        : omega_(omega), t0_(t0), dt_(dt), n_steps_(n_steps) {}

    void accept(long i, double t, Complex y) {
        const double w = (i == 0 || i == n_steps_) ? 0.5 : 1.0;
        acc_ += w * y * std::exp(-jj * (omega_ * (t - t0_)));
    }
    // Amplitude of the tone at omega_ relative to the window start phase;
    // shift back to absolute time phase.
    Complex amplitude() const {
        return acc_ / static_cast<double>(n_steps_) * std::exp(-jj * (omega_ * t0_));
    }

private:
    double omega_, t0_, dt_;
    long n_steps_;
    Complex acc_{0.0, 0.0};
};

struct ToneList {
    std::vector<double> omegas;
    std::vector<CVector> amps;
    double max_abs_omega = 0.0;
    double scale = 0.0;

    explicit ToneList(const ToneSet& input) {
        for (const auto& [w, u] : input.tones()) {
            omegas.push_back(w);
            amps.push_back(u);
            max_abs_omega = std::max(max_abs_omega, std::abs(w));
            scale = std::max(scale, u.cwiseAbs().maxCoeff());
        }
    }

    CVector eval(double t, int dim) const {
        CVector u = CVector::Zero(dim);
        for (std::size_t k = 0; k < omegas.size(); ++k)
            u += amps[k] * std::exp(jj * (omegas[k] * t));
        return u;
    }
};

void check_resolution(const SimConfig& cfg, double max_abs_omega) {
    if (max_abs_omega <= 0.0) return;
    const double steps_per_period = 2.0 * pi / max_abs_omega / cfg.dt;
    if (steps_per_period < 50.0)
        throw input_error("SimConfig: dt resolves the highest injected frequency by only " +
                          std::to_string(steps_per_period) + " steps/period (need >= 50)");
}

} // namespace

Trajectory integrate_ltp(const LtpStateSpace& model, const ToneSet& input,
                         const SimConfig& cfg) {
    return integrate_ltp(model, input, cfg, CVector::Zero(model.state_dim()));
}

Trajectory integrate_ltp(const LtpStateSpace& model, const ToneSet& input,
                         const SimConfig& cfg, const CVector& x0) {
    cfg.validate();
    if (x0.size() != model.state_dim())
        throw input_error("integrate_ltp: initial state dimension mismatch");
    ToneList tones(input);
    check_resolution(cfg, std::max(tones.max_abs_omega, model.base_freq()));
    for (const CVector& u : tones.amps)
        if (u.size() != model.input_dim())
            throw input_error("integrate_ltp: tone amplitude dimension mismatch");

    auto rhs = [&](double t, const CVector& x) -> CVector {
        return model.A().eval(t) * x + model.B().eval(t) * tones.eval(t, model.input_dim());
    };
    const long n = std::lround(cfg.duration / cfg.dt);
    Trajectory traj;
    traj.t.reserve(n + 1);
    traj.state.reserve(n + 1);
    traj.output.reserve(n + 1);
    CVector x = x0;
    const double scale = std::max(tones.scale,
                                  x0.size() ? x0.cwiseAbs().maxCoeff() : 0.0);
    for (long i = 0; i <= n; ++i) {
        const double t = i * cfg.dt;
        traj.t.push_back(t);
        traj.state.push_back(x);
        traj.output.push_back(model.C().eval(t) * x +
                              model.D().eval(t) * tones.eval(t, model.input_dim()));
        if (norm_diverged(x.cwiseAbs().maxCoeff(), scale)) {
            traj.diverged = true;
            break;
        }
        if (i < n) x = rk4_step(rhs, t, cfg.dt, x);
    }
    return traj;
}

Trajectory integrate_vsi(const VsiNonlinear& sys, const Eigen::Vector4cd& x0,
                         const SimConfig& cfg) {
    cfg.validate();
    auto rhs = [&](double t, const Eigen::Vector4cd& x) { return sys.rhs(t, x); };
    const long n = std::lround(cfg.duration / cfg.dt);
    const double scale = x0.cwiseAbs().maxCoeff();
    Trajectory traj;
    traj.t.reserve(n + 1);
    traj.state.reserve(n + 1);
    traj.output.reserve(n + 1);
    Eigen::Vector4cd x = x0;
    for (long i = 0; i <= n; ++i) {
        const double t = i * cfg.dt;
        traj.t.push_back(t);
        traj.state.push_back(x);
        traj.output.push_back(x.head(2));
        if (norm_diverged(x.cwiseAbs().maxCoeff(), scale)) {
            traj.diverged = true;
            break;
        }
        if (i < n) x = rk4_step(rhs, t, cfg.dt, x);
    }
    return traj;
}

SnappedRatio snap_ratio(double ratio, long max_q) {
    if (!(ratio > 0.0) || max_q < 1) throw input_error("snap_ratio: invalid arguments");
    SnappedRatio best;
    best.rel_error = std::numeric_limits<double>::infinity();
    for (long q = 1; q <= max_q; ++q) {
        const long p = std::max(1L, std::lround(ratio * q));
        const double err = std::abs(static_cast<double>(p) / q - ratio) / ratio;
        if (err < best.rel_error - 1e-15) {
            best = {p, q, static_cast<double>(p) / q, err};
            if (err < 1e-12) break;
        }
    }
    return best;
}

std::map<int, CVector> tone_response(const LtpStateSpace& model, double omega_u,
                                     const CVector& amplitude,
                                     const std::vector<int>& harmonics,
                                     const SimConfig& cfg) {
    cfg.validate();
    const double wp = model.base_freq();
    long q_common = 1;  // a DC tone shares the pump period
    if (std::abs(omega_u) > 1e-12) {
        SnappedRatio snap = snap_ratio(std::abs(omega_u) / wp, 128);
        if (snap.rel_error > 1e-9)
            throw input_error("tone_response: omega_u is not commensurate with the pump "
                              "frequency; snap it to a multiple of omega_p/q (q <= 128), "
                              "nearest is " + std::to_string(snap.value * wp));
        q_common = snap.q;
    }
    // Common period of omega_u and omega_p.
    const double t_common = q_common * 2.0 * pi / wp;
    const double available = cfg.duration - cfg.settle_time;
    const long n_windows = static_cast<long>(std::floor(available / t_common));
    if (n_windows < 1)
        throw input_error("tone_response: duration leaves no full common period "
                          "after settle_time (need >= " + std::to_string(t_common) + ")");
    const double t_window = n_windows * t_common;

    double max_injected = std::abs(omega_u);
    for (int n : harmonics) max_injected = std::max(max_injected, std::abs(omega_u + n * wp));
    check_resolution(cfg, max_injected);

    // Re-grid dt so the window is an exact number of steps.
    const long win_steps = std::max(2L, std::lround(t_window / cfg.dt));
    const double dt = t_window / win_steps;
    const long settle_steps = static_cast<long>(std::ceil(cfg.settle_time / dt));
    const double t0 = settle_steps * dt;

    ToneSet input;
    input.add(omega_u, amplitude);
    ToneList tones(input);
    auto rhs = [&](double t, const CVector& x) -> CVector {
        return model.A().eval(t) * x + model.B().eval(t) * tones.eval(t, model.input_dim());
    };

    std::vector<Projector> projectors;
    projectors.reserve(harmonics.size());
    for (int n : harmonics)
        projectors.emplace_back(omega_u + n * wp, t0, dt, win_steps);

    CVector x = CVector::Zero(model.state_dim());
    const long total = settle_steps + win_steps;
    // Per-channel accumulation: project each output channel separately.
    std::vector<std::vector<Projector>> acc(
        model.output_dim(), projectors);
    for (long i = 0; i <= total; ++i) {
        const double t = i * dt;
        if (i >= settle_steps) {
            const CVector y = model.C().eval(t) * x +
                              model.D().eval(t) * tones.eval(t, model.input_dim());
            for (int ch = 0; ch < model.output_dim(); ++ch)
                for (std::size_t k = 0; k < harmonics.size(); ++k)
                    acc[ch][k].accept(i - settle_steps, t, y(ch));
        }
        if (norm_diverged(x.cwiseAbs().maxCoeff(), tones.scale))
            throw numerical_error("tone_response: simulation diverged");
        if (i < total) x = rk4_step(rhs, t, dt, x);
    }

    std::map<int, CVector> out;
    for (std::size_t k = 0; k < harmonics.size(); ++k) {
        CVector amp(model.output_dim());
        for (int ch = 0; ch < model.output_dim(); ++ch)
            amp(ch) = acc[ch][k].amplitude();
        out[harmonics[k]] = amp;
    }
    return out;
}

namespace {

// One admittance column measurement: inject a tone on the given channel of
// the bus voltage and project both current channels.
struct ColumnMeasurement {
    Complex y_row0, y_row1;
    bool diverged = false;
};

ColumnMeasurement measure_column(const VsiParams& params, double omega_bar, int channel,
                                 double eps, const SimConfig& cfg) {
    const double wp = params.pump_pu();
    const double w_plus = omega_bar + wp;   // + channel stationary frequency
    const double w_minus = omega_bar - wp;  // - channel stationary frequency

    VsiNonlinear sys(params);
    if (channel == 0) {
        sys.vb_plus = [&sys, eps, w_plus](double t) {
            return sys.vb_plus_eq(t) + eps * std::exp(jj * (w_plus * t));
        };
    } else {
        sys.vb_minus = [&sys, eps, w_minus](double t) {
            return sys.vb_minus_eq(t) + eps * std::exp(jj * (w_minus * t));
        };
    }

    const long n = std::lround(cfg.duration / cfg.dt);
    const long settle_steps = std::lround(cfg.settle_time / cfg.dt);
    const double t0 = settle_steps * cfg.dt;
    const long win_steps = n - settle_steps;
    Projector proj_plus(w_plus, t0, cfg.dt, win_steps);
    Projector proj_minus(w_minus, t0, cfg.dt, win_steps);

    auto rhs = [&](double t, const Eigen::Vector4cd& x) { return sys.rhs(t, x); };
    Eigen::Vector4cd x = sys.equilibrium(0.0);
    const double scale = x.cwiseAbs().maxCoeff();
    ColumnMeasurement out;
    for (long i = 0; i <= n; ++i) {
        const double t = i * cfg.dt;
        if (i >= settle_steps) {
            const Eigen::Vector4cd xe = sys.equilibrium(t);
            proj_plus.accept(i - settle_steps, t, x(0) - xe(0));
            proj_minus.accept(i - settle_steps, t, x(1) - xe(1));
        }
        if (norm_diverged(x.cwiseAbs().maxCoeff(), scale)) {
            out.diverged = true;
            return out;
        }
        if (i < n) x = rk4_step(rhs, t, cfg.dt, x);
    }
    out.y_row0 = proj_plus.amplitude() / eps;
    out.y_row1 = proj_minus.amplitude() / eps;
    return out;
}

} // namespace

SweepDataset sweep_admittance(const VsiParams& params, const std::vector<double>& grid_hz,
                              const SimConfig& cfg_in, double perturbation) {
    params.validate();
    if (grid_hz.empty()) throw input_error("sweep_admittance: empty grid");
    const double wp = params.pump_pu();
    const double omega_base = params.omega_base();
    ZtClosedForm zt = z_closed_form(params);

    SweepDataset out;
    out.points.resize(grid_hz.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next.fetch_add(1); i < grid_hz.size(); i = next.fetch_add(1)) {
            SweepPoint& pt = out.points[i];
            pt.f_requested_hz = grid_hz[i];
            const double omega_target = 2.0 * pi * grid_hz[i] / omega_base;  // pu
            SnappedRatio snap = snap_ratio(omega_target / wp, 128);
            const double omega_bar = snap.value * wp;
            pt.f_hz = omega_bar * omega_base / (2.0 * pi);

            // Window = integer count of the common period of all tones.
            const double t_common = snap.q * 2.0 * pi / wp;
            SimConfig cfg = cfg_in;
            if (cfg.dt <= 0.0) cfg.dt = (2.0 * pi / wp) / 2000.0;
            const long win_steps = std::max(2L, std::lround(t_common / cfg.dt));
            cfg.dt = t_common / win_steps;
            const long settle_steps =
                static_cast<long>(std::ceil(std::max(cfg.settle_time, 0.0) / cfg.dt));
            cfg.settle_time = settle_steps * cfg.dt;
            cfg.duration = cfg.settle_time + t_common;

            ColumnMeasurement c0 = measure_column(params, omega_bar, 0, perturbation, cfg);
            ColumnMeasurement c1 = measure_column(params, omega_bar, 1, perturbation, cfg);
            if (c0.diverged || c1.diverged) {
                pt.valid = false;
                continue;
            }
            pt.y_measured << c0.y_row0, c1.y_row0, c0.y_row1, c1.y_row1;
            pt.y_model = zt.admittance_2x2(jj * omega_bar);
            pt.valid = true;
        }
    };

    const int n_threads = std::min<int>(thread_budget(), static_cast<int>(grid_hz.size()));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return out;
}

SimConfig verdict_config(const VsiParams& params, double m) {
    return SimConfig::for_period(params.with_m(m).pump_period_pu(), 250.0, 20.0);
}

VerdictResult stability_verdict(const VsiParams& params, double m, const SimConfig& cfg) {
    cfg.validate();
    const VsiParams p = params.with_m(m);
    const double period = p.pump_period_pu();
    if (cfg.duration < 50.0 * period)
        throw input_error("stability_verdict: duration must cover >= 50 pump periods");
    VsiNonlinear sys(p);

    Eigen::Vector4cd x = sys.equilibrium(0.0);
    x(2) += 1e-3;  // small frequency perturbation excites the droop dynamics

    const long n = std::lround(cfg.duration / cfg.dt);
    const long settle_steps = std::lround(cfg.settle_time / cfg.dt);
    const long period_steps = std::max(1L, std::lround(period / cfg.dt));

    auto rhs = [&](double t, const Eigen::Vector4cd& y) { return sys.rhs(t, y); };
    const double scale = x.cwiseAbs().maxCoeff();

    std::vector<double> envelope;       // per-period RMS of the deviation norm
    std::vector<Complex> ip_deviation;  // + channel deviation, for the spectrum
    ip_deviation.reserve(n - settle_steps + 1);
    double acc = 0.0;
    long acc_count = 0;

    VerdictResult out;
    for (long i = 0; i <= n; ++i) {
        const double t = i * cfg.dt;
        const Eigen::Vector4cd dev = x - sys.equilibrium(t);
        const double dn = dev.norm();
        if (i >= settle_steps) {
            ip_deviation.push_back(dev(0));
            acc += dn * dn;
            if (++acc_count == period_steps) {
                envelope.push_back(std::sqrt(acc / acc_count));
                acc = 0.0;
                acc_count = 0;
            }
        }
        if (norm_diverged(x.cwiseAbs().maxCoeff(), scale)) {
            out.diverged = true;
            break;
        }
        if (i < n) x = rk4_step(rhs, t, cfg.dt, x);
    }

    if (out.diverged) {
        out.stable = false;
        out.growth_factor = std::numeric_limits<double>::infinity();
        return out;
    }
    if (envelope.size() < 20)
        throw input_error("stability_verdict: observation window too short");

    const std::size_t head = 10, tail = 10;
    double first = 0.0, last = 0.0;
    for (std::size_t k = 0; k < head; ++k) first += envelope[k];
    for (std::size_t k = envelope.size() - tail; k < envelope.size(); ++k)
        last += envelope[k];
    const double first_mean = first / head;
    const double last_mean = last / tail;
    out.growth_factor = (first_mean > 0.0) ? last_mean / first_mean
                                           : std::numeric_limits<double>::infinity();
    out.stable = out.growth_factor <= cfg.instability_threshold;

    if (!out.stable) {
        // Dominant oscillation frequency from the + channel deviation spectrum
        // over the last 64 periods (projection onto bins k * wp / 64).
        const long span = std::min<long>(64 * period_steps,
                                         static_cast<long>(ip_deviation.size()) - 1);
        const long start = static_cast<long>(ip_deviation.size()) - 1 - span;
        const double window = span * cfg.dt;
        double best_mag = -1.0, best_freq = 0.0;
        for (int k = -256; k <= 256; ++k) {
            const double omega = 2.0 * pi * k / window;
            Complex accum{0.0, 0.0};
            for (long i = 0; i <= span; ++i) {
                const double w = (i == 0 || i == span) ? 0.5 : 1.0;
                accum += w * ip_deviation[start + i] * std::exp(-jj * (omega * i * cfg.dt));
            }
            const double mag = std::abs(accum);
            if (mag > best_mag) {
                best_mag = mag;
                best_freq = omega;
            }
        }
        out.dominant_freq_hz = std::abs(best_freq) * p.omega_base() / (2.0 * pi);
    }
    return out;
}

} // namespace htfkit
