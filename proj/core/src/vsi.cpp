#include "htfkit/vsi.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "htfkit/errors.hpp"
#include "htfkit/stability.hpp"

namespace htfkit {

void VsiParams::validate() const {
    if (!(L > 0.0)) throw input_error("VsiParams: L must be positive");
    if (R < 0.0) throw input_error("VsiParams: R must be nonnegative");
    if (!(tau > 0.0)) throw input_error("VsiParams: tau must be positive");
    if (!(V0 > 0.0)) throw input_error("VsiParams: V0 must be positive");
    if (m < 0.0) throw input_error("VsiParams: m must be nonnegative");
    if (!(F_base_hz > 0.0)) throw input_error("VsiParams: F_base_hz must be positive");
    if (!(pump_pu() > 0.0)) throw input_error("VsiParams: drooped frequency nonpositive");
}

VsiParams load_vsi_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open parameter file: " + path);
    VsiParams p;
    std::map<std::string, double*> keys{
        {"V0", &p.V0},       {"Omega0", &p.Omega0},   {"I0", &p.I0},
        {"phi_deg", &p.phi_deg}, {"L", &p.L},         {"R", &p.R},
        {"m", &p.m},         {"tau", &p.tau},         {"S_base", &p.S_base},
        {"V_base", &p.V_base}, {"F_base_hz", &p.F_base_hz}};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        auto it = keys.find(key);
        if (it == keys.end())
            throw input_error(path + ":" + std::to_string(lineno) +
                              ": unknown parameter key '" + key + "'");
        double value;
        if (!(ls >> value))
            throw input_error(path + ":" + std::to_string(lineno) +
                              ": missing value for key '" + key + "'");
        *it->second = value;
    }
    p.validate();
    return p;
}

void save_vsi_params(const VsiParams& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write parameter file: " + path);
    out.precision(12);
    out << "V0 " << p.V0 << "\nOmega0 " << p.Omega0 << "\nI0 " << p.I0
        << "\nphi_deg " << p.phi_deg << "\nL " << p.L << "\nR " << p.R
        << "\nm " << p.m << "\ntau " << p.tau << "\nS_base " << p.S_base
        << "\nV_base " << p.V_base << "\nF_base_hz " << p.F_base_hz << "\n";
}

ZtClosedForm z_closed_form(const VsiParams& params) {
    params.validate();
    const double L = params.L, R = params.R;
    const double m = params.m, V0 = params.V0, I0 = params.I0;
    const double tau_pu = params.tau_pu();
    const double sinphi = std::sin(params.phi_rad());
    const double wp = params.pump_pu();

    ZtClosedForm out;
    out.pump_pu = wp;
    out.omega_base = params.omega_base();
    out.Z = [L, R](Complex s) { return s * L + R; };
    out.M = [m, V0, I0, tau_pu, sinphi](Complex s) {
        return (m * V0 * V0 / 2.0) / (tau_pu * s * s + s - m * V0 * I0 * sinphi);
    };
    auto Z = out.Z;
    auto M = out.M;
    out.zl_2x2 = [Z, wp](Complex s) -> CMatrix2 {
        CMatrix2 zl = CMatrix2::Zero();
        zl(0, 0) = Z(s + jj * wp);
        zl(1, 1) = Z(s - jj * wp);
        return zl;
    };
    out.zd_2x2 = [M](Complex s) -> CMatrix2 {
        const Complex jm = jj * M(s);
        CMatrix2 zd;
        zd << jm, jm, -jm, -jm;
        return zd;
    };
    auto zl = out.zl_2x2;
    auto zd = out.zd_2x2;
    out.zt_2x2 = [zl, zd](Complex s) -> CMatrix2 { return zl(s) + zd(s); };
    auto zt = out.zt_2x2;
    out.admittance_2x2 = [zt](Complex s) -> CMatrix2 { return zt(s).inverse(); };
    return out;
}

LtpStateSpace build_vsi_hss(const VsiParams& params) {
    params.validate();
    const double L = params.L, R = params.R;
    const double m = params.m, V0 = params.V0, I0 = params.I0;
    const double tau_pu = params.tau_pu();
    const double sinphi = std::sin(params.phi_rad());
    const double wp = params.pump_pu();

    // States (i+, i-, omega, theta); the e^{+/- j theta} modulation around the
    // operating point theta = wp*t produces the +/-1 harmonic coefficients.
    CMatrix a0 = CMatrix::Zero(4, 4), ap1 = CMatrix::Zero(4, 4), am1 = CMatrix::Zero(4, 4);
    a0(0, 0) = -R / L;
    a0(1, 1) = -R / L;
    a0(2, 2) = -1.0 / tau_pu;
    a0(2, 3) = m * V0 * I0 * sinphi / tau_pu;
    a0(3, 2) = 1.0;
    ap1(0, 3) = Complex(0.0, -V0 / L);
    ap1(2, 1) = m * V0 / (2.0 * tau_pu);
    am1(1, 3) = Complex(0.0, V0 / L);
    am1(2, 0) = m * V0 / (2.0 * tau_pu);
    HarmonicMatrixSeries a(wp, 4, 4, {{0, a0}, {1, ap1}, {-1, am1}});

    CMatrix b0 = CMatrix::Zero(4, 2);
    b0(0, 0) = 1.0 / L;
    b0(1, 1) = 1.0 / L;
    HarmonicMatrixSeries b(wp, 4, 2, {{0, b0}});

    CMatrix c0 = CMatrix::Zero(2, 4);
    c0(0, 0) = 1.0;
    c0(1, 1) = 1.0;
    HarmonicMatrixSeries c(wp, 2, 4, {{0, c0}});

    HarmonicMatrixSeries d(wp, 2, 2, {{0, CMatrix::Zero(2, 2)}});
    return LtpStateSpace(std::move(a), std::move(b), std::move(c), std::move(d));
}

VsiNonlinear::VsiNonlinear(const VsiParams& p) : params(p) {
    params.validate();
    vb_plus = [this](double t) { return vb_plus_eq(t); };
    vb_minus = [this](double t) { return vb_minus_eq(t); };
}

Eigen::Vector4cd VsiNonlinear::rhs(double t, const Eigen::Vector4cd& x) const {
    const double L = params.L, R = params.R, m = params.m, V0 = params.V0;
    const double tau_pu = params.tau_pu();
    const Complex ip = x(0), im = x(1), om = x(2), th = x(3);
    const Complex ep = std::exp(jj * th);   // holomorphic extension in theta
    const Complex em = std::exp(-jj * th);
    const Complex p = -(V0 * ep * im + V0 * em * ip) / 2.0;
    Eigen::Vector4cd dx;
    dx(0) = (vb_plus(t) - R * ip - V0 * ep) / L;
    dx(1) = (vb_minus(t) - R * im - V0 * em) / L;
    dx(2) = (params.Omega0 - om - m * p) / tau_pu;
    dx(3) = om;
    return dx;
}

Eigen::Vector4cd VsiNonlinear::equilibrium(double t) const {
    const double wp = params.pump_pu();
    const double phi = params.phi_rad();
    Eigen::Vector4cd x;
    x(0) = params.I0 * std::exp(jj * (wp * t + phi));
    x(1) = params.I0 * std::exp(-jj * (wp * t + phi));
    x(2) = wp;
    x(3) = wp * t;
    return x;
}

Complex VsiNonlinear::vb_plus_eq(double t) const {
    const double wp = params.pump_pu();
    const Complex ip = params.I0 * std::exp(jj * (wp * t + params.phi_rad()));
    return (jj * wp * params.L + params.R) * ip + params.V0 * std::exp(jj * wp * t);
}

Complex VsiNonlinear::vb_minus_eq(double t) const {
    return std::conj(vb_plus_eq(t));
}

Eigen::Matrix4cd rotating_frame_state_matrix(const VsiParams& params) {
    params.validate();
    const double L = params.L, R = params.R, m = params.m;
    const double V0 = params.V0, I0 = params.I0;
    const double tau_pu = params.tau_pu();
    const double sinphi = std::sin(params.phi_rad());
    const double wp = params.pump_pu();
    Eigen::Matrix4cd a = Eigen::Matrix4cd::Zero();
    a(0, 0) = -R / L - jj * wp;
    a(0, 3) = -jj * V0 / L;
    a(1, 1) = -R / L + jj * wp;
    a(1, 3) = jj * V0 / L;
    a(2, 0) = m * V0 / (2.0 * tau_pu);
    a(2, 1) = m * V0 / (2.0 * tau_pu);
    a(2, 2) = -1.0 / tau_pu;
    a(2, 3) = m * V0 * I0 * sinphi / tau_pu;
    a(3, 2) = 1.0;
    return a;
}

namespace {

double worst_symmetric_margin_deg(const VsiParams& params) {
    LoopDecomposition loops = decompose_loops(z_closed_form(params));
    const std::vector<double> grid = default_grid_hz();
    PhaseMarginResult mp = phase_margin(loops.symmetric_plus, grid, loops.omega_base);
    PhaseMarginResult mm = phase_margin(loops.symmetric_minus, grid, loops.omega_base);
    if (!mp.found && !mm.found)
        throw no_crossover_error("worst_symmetric_margin: no unity-gain crossover");
    if (!mp.found) return mm.worst_margin_deg;
    if (!mm.found) return mp.worst_margin_deg;
    return std::min(mp.worst_margin_deg, mm.worst_margin_deg);
}

} // namespace

CriticalGainResult critical_droop_gain(const VsiParams& params, double m_lo, double m_hi,
                                       double rel_tol) {
    if (!(m_lo >= 0.0) || !(m_hi > m_lo))
        throw input_error("critical_droop_gain: invalid bracket");
    double margin_lo = worst_symmetric_margin_deg(params.with_m(m_lo));
    double margin_hi = worst_symmetric_margin_deg(params.with_m(m_hi));
    if ((margin_lo > 0.0) == (margin_hi > 0.0))
        throw no_crossover_error(
            "critical_droop_gain: phase margin has no sign change over bracket [" +
            std::to_string(m_lo) + ", " + std::to_string(m_hi) + "] (margins " +
            std::to_string(margin_lo) + ", " + std::to_string(margin_hi) + " deg)");
    CriticalGainResult out;
    double lo = m_lo, hi = m_hi;
    int iters = 0;
    while ((hi - lo) > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        const double margin_mid = worst_symmetric_margin_deg(params.with_m(mid));
        if ((margin_mid > 0.0) == (margin_lo > 0.0)) {
            lo = mid;
            margin_lo = margin_mid;
        } else {
            hi = mid;
        }
        if (++iters > 100) break;
    }
    out.m_crit = 0.5 * (lo + hi);
    out.margin_at_crit_deg = worst_symmetric_margin_deg(params.with_m(out.m_crit));
    out.iterations = iters;
    return out;
}

} // namespace htfkit
