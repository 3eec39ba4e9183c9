#pragma once

#include <map>
#include <optional>
#include <vector>

#include "htfkit/hss.hpp"
#include "htfkit/vsi.hpp"

namespace htfkit {

// Fixed-step deterministic integration settings.  Times are in the same unit
// as the model (per-unit radians for the VSI models here).
struct SimConfig {
    double dt = 0.0;
    double duration = 0.0;
    double settle_time = 0.0;
    double instability_threshold = 1.5;  // envelope growth factor

    void validate() const;
    // Default configuration for a model with fundamental period `period`:
    // dt = period / 2000.
    static SimConfig for_period(double period, double duration_periods = 60.0,
                                double settle_periods = 20.0);
};

struct Trajectory {
    std::vector<double> t;
    std::vector<CVector> state;
    std::vector<CVector> output;
    bool diverged = false;
};

// Fixed-step 4th-order integration of x' = A(t)x + B(t)u, y = C(t)x + D(t)u
// from zero initial state, with u(t) the complex tone sum of `input`.
// Early-stops with the diverged flag when the state norm exceeds 1e6 x the
// input scale.
Trajectory integrate_ltp(const LtpStateSpace& model, const ToneSet& input,
                         const SimConfig& cfg);
// Same, from a caller-supplied initial state.
Trajectory integrate_ltp(const LtpStateSpace& model, const ToneSet& input,
                         const SimConfig& cfg, const CVector& x0);

// Same integrator for the nonlinear VSI equations, starting from x0
// (typically the operating point, possibly perturbed).
Trajectory integrate_vsi(const VsiNonlinear& sys, const Eigen::Vector4cd& x0,
                         const SimConfig& cfg);

// Best rational approximation p/q of `ratio` with q <= max_q.
struct SnappedRatio {
    long p = 0;
    long q = 1;
    double value = 0.0;
    double rel_error = 0.0;
};
SnappedRatio snap_ratio(double ratio, long max_q);

// Measured complex amplitudes of the output at w_u + n*w_p for each requested
// harmonic n, via discrete Fourier projection over an integer number of
// common periods after settling.  w_u must be commensurate with the pump
// (w_u/w_p within 1e-9 of p/q, q <= 128), otherwise an input_error instructs
// snapping to the simulation grid.
std::map<int, CVector> tone_response(const LtpStateSpace& model, double omega_u,
                                     const CVector& amplitude,
                                     const std::vector<int>& harmonics,
                                     const SimConfig& cfg);

struct SweepPoint {
    double f_requested_hz = 0.0;
    double f_hz = 0.0;       // snapped to the simulation grid
    bool valid = false;
    CMatrix2 y_measured;     // 2x2 admittance from tone injection
    CMatrix2 y_model;        // closed-form admittance at the snapped frequency
};

struct SweepDataset {
    std::vector<SweepPoint> points;
};

// Frequency sweep of the 2x2 admittance: per grid point, inject a small bus
// voltage tone (1e-3 pu) on each channel of the nonlinear VSI, project the
// current response, and compare with the closed form.  Points whose
// simulation diverges are marked invalid.  Runs points in parallel (capped by
// HTFKIT_THREADS).
SweepDataset sweep_admittance(const VsiParams& params, const std::vector<double>& grid_hz,
                              const SimConfig& cfg, double perturbation = 1e-3);

struct VerdictResult {
    bool stable = false;
    double growth_factor = 0.0;  // envelope ratio over the observation window
    std::optional<double> dominant_freq_hz;  // set when unstable (not diverged)
    bool diverged = false;
};

// Time-domain stability verdict: perturb the operating point, integrate the
// nonlinear equations, and classify by the growth of the deviation envelope
// over the post-settle window.
VerdictResult stability_verdict(const VsiParams& params, double m, const SimConfig& cfg);

// Convenience config for stability_verdict (250 pump periods, 20 settle).
SimConfig verdict_config(const VsiParams& params, double m);

} // namespace htfkit
