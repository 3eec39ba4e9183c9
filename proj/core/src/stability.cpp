#include "htfkit/stability.hpp"

#include <algorithm>
#include <cmath>

#include "htfkit/errors.hpp"
#include "htfkit/vsi.hpp"

namespace htfkit {

LoopDecomposition decompose_loops(const ZtClosedForm& zt) {
    LoopDecomposition out;
    out.omega_base = zt.omega_base;
    const double wp = zt.pump_pu;
    auto Z = zt.Z;
    auto M = zt.M;
    auto a_plus = [Z, M, wp](Complex s) { return jj * M(s) / Z(s + jj * wp); };
    auto a_minus = [Z, M, wp](Complex s) { return -jj * M(s) / Z(s - jj * wp); };
    out.symmetric_plus = a_plus;
    out.symmetric_minus = a_minus;
    out.asymmetric = [M, a_plus, a_minus](Complex s) {
        const Complex gs_plus = jj * M(s) / (1.0 + a_plus(s));
        const Complex gs_minus = -jj * M(s) / (1.0 + a_minus(s));
        return gs_plus * gs_minus * M(s) * M(s);
    };
    // Nested-loop assembly of (1 + Z_D Z_L^{-1})^{-1}: close the two symmetric
    // loops first, then the cross (asymmetric) loop between them.
    out.closed_loop_nested = [Z, M, wp, a_plus, a_minus](Complex s) -> CMatrix2 {
        const Complex ap = a_plus(s);
        const Complex am = a_minus(s);
        const Complex la = ap * am / ((1.0 + ap) * (1.0 + am));
        const Complex denom = (1.0 + ap) * (1.0 + am) * (1.0 - la);
        CMatrix2 h;
        h(0, 0) = (1.0 + am) / denom;
        h(1, 1) = (1.0 + ap) / denom;
        h(0, 1) = -(jj * M(s) / Z(s - jj * wp)) / denom;
        h(1, 0) = (jj * M(s) / Z(s + jj * wp)) / denom;
        return h;
    };
    auto zl = zt.zl_2x2;
    auto zd = zt.zd_2x2;
    out.closed_loop_direct = [zl, zd](Complex s) -> CMatrix2 {
        const CMatrix2 loop = CMatrix2::Identity() + zd(s) * zl(s).inverse();
        return loop.inverse();
    };
    return out;
}

std::vector<double> default_grid_hz(double lo_hz, double hi_hz, int points) {
    if (!(lo_hz > 0.0) || !(hi_hz > lo_hz) || points < 2)
        throw input_error("default_grid_hz: invalid band");
    std::vector<double> grid(points);
    const double l0 = std::log10(lo_hz), l1 = std::log10(hi_hz);
    for (int i = 0; i < points; ++i)
        grid[i] = std::pow(10.0, l0 + (l1 - l0) * i / (points - 1));
    return grid;
}

namespace {

Complex eval_at_hz(const ScalarEvaluator& g, double f_hz, double omega_base) {
    return g(jj * (2.0 * pi * f_hz / omega_base));
}

// Wrap an angle in degrees into (-180, 180].
double wrap_deg(double x) {
    x = std::fmod(x, 360.0);
    if (x <= -180.0) x += 360.0;
    if (x > 180.0) x -= 360.0;
    return x;
}

} // namespace

BodeDataset bode(const ScalarEvaluator& g, const std::vector<double>& grid_hz,
                 double omega_base, const std::string& label) {
    if (grid_hz.empty() || !std::is_sorted(grid_hz.begin(), grid_hz.end()))
        throw input_error("bode: grid must be ascending and nonempty");
    BodeDataset out;
    out.label = label;
    out.frequencies_hz = grid_hz;
    out.gain_db.reserve(grid_hz.size());
    out.phase_deg.reserve(grid_hz.size());
    double prev_phase = 0.0;
    bool have_prev = false;
    for (double f : grid_hz) {
        bool ok = true;
        Complex v{0.0, 0.0};
        try {
            v = eval_at_hz(g, f, omega_base);
            if (!std::isfinite(std::abs(v))) ok = false;
        } catch (const std::exception&) {
            ok = false;
        }
        if (!ok) {
            out.gain_db.push_back(0.0);
            out.phase_deg.push_back(have_prev ? prev_phase : 0.0);
            out.valid.push_back(false);
            continue;
        }
        double phase = std::arg(v) * 180.0 / pi;
        if (have_prev) {
            // Nearest-multiple-of-360 continuation.
            phase += 360.0 * std::round((prev_phase - phase) / 360.0);
        }
        prev_phase = phase;
        have_prev = true;
        out.gain_db.push_back(20.0 * std::log10(std::abs(v)));
        out.phase_deg.push_back(phase);
        out.valid.push_back(true);
    }
    return out;
}

PhaseMarginResult phase_margin(const ScalarEvaluator& g, const std::vector<double>& grid_hz,
                               double omega_base) {
    BodeDataset data = bode(g, grid_hz, omega_base);
    PhaseMarginResult out;
    for (std::size_t i = 0; i + 1 < grid_hz.size(); ++i) {
        if (!data.valid[i] || !data.valid[i + 1]) continue;
        const double g0 = data.gain_db[i], g1 = data.gain_db[i + 1];
        if (g0 == 0.0) continue;  // exact hits handled by the bracket below
        if ((g0 > 0.0) == (g1 > 0.0)) continue;
        // Bisection on log-frequency for |G| = 1.
        double la = std::log10(grid_hz[i]), lb = std::log10(grid_hz[i + 1]);
        double fa_sign = (g0 > 0.0) ? 1.0 : -1.0;
        for (int it = 0; it < 60 && (lb - la) > 1e-6 * std::abs(lb + la + 1.0); ++it) {
            const double lm = 0.5 * (la + lb);
            const double gm = std::abs(eval_at_hz(g, std::pow(10.0, lm), omega_base));
            const double sm = (gm > 1.0) ? 1.0 : -1.0;
            if (sm == fa_sign) la = lm; else lb = lm;
        }
        const double fc = std::pow(10.0, 0.5 * (la + lb));
        const Complex v = eval_at_hz(g, fc, omega_base);
        const double margin = wrap_deg(180.0 + std::arg(v) * 180.0 / pi);
        out.crossovers.push_back({fc, margin});
    }
    if (out.crossovers.empty()) {
        out.found = false;
        return out;
    }
    out.found = true;
    const auto worst = std::min_element(
        out.crossovers.begin(), out.crossovers.end(),
        [](const Crossover& a, const Crossover& b) { return a.margin_deg < b.margin_deg; });
    out.worst_margin_deg = worst->margin_deg;
    out.worst_crossover_hz = worst->freq_hz;
    return out;
}

SmallGainResult small_gain_check(const ScalarEvaluator& g, const std::vector<double>& grid_hz,
                                 double omega_base) {
    if (grid_hz.size() < 3) throw input_error("small_gain_check: grid too small");
    SmallGainResult out;
    std::size_t peak_i = 0;
    double peak = -1.0;
    for (std::size_t i = 0; i < grid_hz.size(); ++i) {
        const double mag = std::abs(eval_at_hz(g, grid_hz[i], omega_base));
        if (mag > peak) { peak = mag; peak_i = i; }
    }
    // Golden-section refinement on log-frequency around the discrete peak.
    const std::size_t lo_i = (peak_i == 0) ? 0 : peak_i - 1;
    const std::size_t hi_i = std::min(peak_i + 1, grid_hz.size() - 1);
    double a = std::log10(grid_hz[lo_i]), b = std::log10(grid_hz[hi_i]);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = std::abs(eval_at_hz(g, std::pow(10.0, x1), omega_base));
    double f2 = std::abs(eval_at_hz(g, std::pow(10.0, x2), omega_base));
    for (int it = 0; it < 80 && (b - a) > 1e-10; ++it) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + gr * (b - a);
            f2 = std::abs(eval_at_hz(g, std::pow(10.0, x2), omega_base));
        } else {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - gr * (b - a);
            f1 = std::abs(eval_at_hz(g, std::pow(10.0, x1), omega_base));
        }
    }
    const double f_ref = std::pow(10.0, 0.5 * (a + b));
    const double refined = std::abs(eval_at_hz(g, f_ref, omega_base));
    if (refined > peak) {
        out.peak_gain = refined;
        out.peak_hz = f_ref;
    } else {
        out.peak_gain = peak;
        out.peak_hz = grid_hz[peak_i];
    }
    out.satisfied = out.peak_gain < 1.0;
    return out;
}

PassivityResult passivity_check(const ScalarEvaluator& g, const std::vector<double>& grid_hz,
                                double omega_base) {
    if (grid_hz.empty()) throw input_error("passivity_check: empty grid");
    // Two-sided signed grid, ascending.
    std::vector<double> signed_hz;
    signed_hz.reserve(2 * grid_hz.size());
    for (auto it = grid_hz.rbegin(); it != grid_hz.rend(); ++it) signed_hz.push_back(-*it);
    for (double f : grid_hz) signed_hz.push_back(f);

    auto re_at = [&](double f) { return eval_at_hz(g, f, omega_base).real(); };
    auto refine = [&](double fa, double fb) {
        // Bisect the sign change of Re G between fa and fb.
        double a = fa, b = fb;
        const bool a_neg = re_at(a) < 0.0;
        for (int it = 0; it < 60; ++it) {
            const double m = 0.5 * (a + b);
            if ((re_at(m) < 0.0) == a_neg) a = m; else b = m;
        }
        return 0.5 * (a + b);
    };

    PassivityResult out;
    bool in_negative = false;
    double range_lo = 0.0;
    for (std::size_t i = 0; i < signed_hz.size(); ++i) {
        const bool neg = re_at(signed_hz[i]) < 0.0;
        if (neg && !in_negative) {
            range_lo = (i == 0) ? signed_hz[i] : refine(signed_hz[i - 1], signed_hz[i]);
            in_negative = true;
        } else if (!neg && in_negative) {
            out.negative_real_ranges.push_back({range_lo, refine(signed_hz[i - 1], signed_hz[i])});
            in_negative = false;
        }
    }
    if (in_negative)
        out.negative_real_ranges.push_back({range_lo, signed_hz.back()});
    out.passive = out.negative_real_ranges.empty();
    return out;
}

} // namespace htfkit
