#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "htfkit/hss.hpp"

namespace htfkit {

// Per-unit parameter record for the droop-controlled voltage-source inverter
// case study.  Defaults correspond to the reference 10 kVA / 380 V / 50 Hz
// system.  All closed forms and models built from this record work in per-unit
// with time normalized by Omega_base (s_pu = s / Omega_base).
struct VsiParams {
    double V0 = 1.0;        // pu inverter voltage magnitude
    double Omega0 = 1.0;    // pu frequency setpoint
    double I0 = 0.30;       // pu operating-point current magnitude
    double phi_deg = 188.0; // operating-point current angle, degrees
    double L = 0.091;       // pu equivalent inductance
    double R = 0.015;       // pu equivalent resistance
    double m = 0.02;        // droop gain, fraction of Omega_base/S_base
    double tau = 1.0 / (4.0 * pi); // droop filter time constant, s/rad
    double S_base = 10e3;   // VA
    double V_base = 380.0;  // V
    double F_base_hz = 50.0;

    double omega_base() const { return 2.0 * pi * F_base_hz; }
    double phi_rad() const { return phi_deg * pi / 180.0; }
    double tau_pu() const { return tau * omega_base(); }
    // Steady-state (drooped) pump frequency in pu: the droop loop settles at
    // Omega0 + m*V0*I0*cos(phi), which is the frequency the operating point
    // actually rotates at.
    double pump_pu() const { return Omega0 + m * V0 * I0 * std::cos(phi_rad()); }
    double pump_period_pu() const { return 2.0 * pi / pump_pu(); }

    void validate() const;
    VsiParams with_m(double new_m) const { VsiParams p = *this; p.m = new_m; return p; }
};

// Load/save the key-value parameter file format (keys exactly V0, Omega0, I0,
// phi_deg, L, R, m, tau, S_base, V_base, F_base_hz; missing keys keep
// defaults; unknown keys are an input_error).
VsiParams load_vsi_params(const std::string& path);
void save_vsi_params(const VsiParams& p, const std::string& path);

// Closed-form total impedance of the VSI seen from the bus, in the rotating
// +/- frame: Z_T(s) = Z_L(s) + Z_D(s) with
//   Z(s) = s L + R,
//   M(s) = (m V0^2 / 2) / (tau_pu s^2 + s - m V0 I0 sin(phi)),
//   Z_L = diag(Z(s + j w_p), Z(s - j w_p)),
//   Z_D = M(s) [[j, j], [-j, -j]]   (rank 1).
struct ZtClosedForm {
    double pump_pu = 1.0;
    double omega_base = 100.0 * pi;
    std::function<Complex(Complex)> Z;
    std::function<Complex(Complex)> M;
    std::function<CMatrix2(Complex)> zl_2x2;
    std::function<CMatrix2(Complex)> zd_2x2;
    std::function<CMatrix2(Complex)> zt_2x2;
    std::function<CMatrix2(Complex)> admittance_2x2;  // zt_2x2^{-1}
};

ZtClosedForm z_closed_form(const VsiParams& params);

// Small-signal LTP model in the stationary +/- frame: states
// (i+, i-, omega, theta), inputs (vb+, vb-), outputs (i+, i-).  Banded with
// bandwidth 1 (modulation terms e^{+/- j theta} contribute +/-1 shifts).
LtpStateSpace build_vsi_hss(const VsiParams& params);

// Nonlinear per-unit state equations and the exact operating point, used by
// the simulator and by the finite-difference Jacobian check.
struct VsiNonlinear {
    VsiParams params;
    // Bus voltage sources (defaults: equilibrium bus waveforms).
    std::function<Complex(double)> vb_plus;
    std::function<Complex(double)> vb_minus;

    explicit VsiNonlinear(const VsiParams& p);

    // State order: (i+, i-, omega, theta); holomorphic in the state so that
    // complex-valued small-signal trajectories are meaningful.
    Eigen::Vector4cd rhs(double t, const Eigen::Vector4cd& x) const;
    Eigen::Vector4cd equilibrium(double t) const;
    Complex vb_plus_eq(double t) const;
    Complex vb_minus_eq(double t) const;
};

// Time-invariant state matrix in the frame rotating at the pump frequency;
// its eigenvalues are the Floquet exponents of the LTP model (mod j w_p).
Eigen::Matrix4cd rotating_frame_state_matrix(const VsiParams& params);

// Critical droop gain: bisection on the worst symmetric-loop phase margin
// over [m_lo, m_hi].  Throws no_crossover_error when the margin has the same
// sign at both ends.
struct CriticalGainResult {
    double m_crit = 0.0;
    double margin_at_crit_deg = 0.0;
    int iterations = 0;
};
CriticalGainResult critical_droop_gain(const VsiParams& params, double m_lo, double m_hi,
                                       double rel_tol = 1e-4);

} // namespace htfkit
