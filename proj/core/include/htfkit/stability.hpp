#pragma once

#include <functional>
#include <string>
#include <vector>

#include "htfkit/types.hpp"

namespace htfkit {

struct ZtClosedForm;

// Scalar transfer evaluator; the argument is s in per-unit rad/s.
using ScalarEvaluator = std::function<Complex(Complex)>;

// Loop gains of the nested-loop decomposition of (1 + Z_D Z_L^{-1})^{-1}:
//   symmetric_plus(s)  =  j M(s) / Z(s + j w_p)
//   symmetric_minus(s) = -j M(s) / Z(s - j w_p)
//   asymmetric(s)      =  G_S+(s) G_S-(s) M(s)^2, with
//     G_S+ =  j M / (1 + j M / Z(s + j w_p)),
//     G_S- = -j M / (1 - j M / Z(s - j w_p)).
struct LoopDecomposition {
    double omega_base = 100.0 * pi;  // physical rad/s per pu rad/s
    ScalarEvaluator symmetric_plus;
    ScalarEvaluator symmetric_minus;
    ScalarEvaluator asymmetric;
    // Closed loop assembled from the nested loops, and by direct inversion.
    std::function<CMatrix2(Complex)> closed_loop_nested;
    std::function<CMatrix2(Complex)> closed_loop_direct;
};

LoopDecomposition decompose_loops(const ZtClosedForm& zt);

struct BodeDataset {
    std::string label;
    std::vector<double> frequencies_hz;  // strictly ascending
    std::vector<double> gain_db;
    std::vector<double> phase_deg;       // unwrapped
    std::vector<bool> valid;             // false where a pole was hit
};

// Default analysis grid: 400 log-spaced points over 0.1 .. 1000 Hz.
std::vector<double> default_grid_hz(double lo_hz = 0.1, double hi_hz = 1000.0,
                                    int points = 400);

// Frequency response on a positive Hz grid; s = j 2 pi f / omega_base (pu).
BodeDataset bode(const ScalarEvaluator& g, const std::vector<double>& grid_hz,
                 double omega_base, const std::string& label = "");

struct Crossover {
    double freq_hz = 0.0;
    double margin_deg = 0.0;
};

struct PhaseMarginResult {
    bool found = false;                 // false: no unity-gain crossover
    double worst_margin_deg = 0.0;
    double worst_crossover_hz = 0.0;
    std::vector<Crossover> crossovers;  // all crossings, ascending frequency
};

// Phase margin at every unity-gain crossing (bisection-refined to 1e-6
// relative frequency); the headline is the minimum margin.  Margins are
// mapped to (-180, 180] degrees.
PhaseMarginResult phase_margin(const ScalarEvaluator& g, const std::vector<double>& grid_hz,
                               double omega_base);

struct SmallGainResult {
    bool satisfied = false;  // sup |G| < 1 on the band
    double peak_gain = 0.0;
    double peak_hz = 0.0;
};

// Grid-based sup-norm check with golden-section refinement around the
// discrete peak.  A finite-grid certificate: necessary-but-numerical.
SmallGainResult small_gain_check(const ScalarEvaluator& g, const std::vector<double>& grid_hz,
                                 double omega_base);

struct FrequencyRange {
    double lo_hz = 0.0;  // signed: negative values denote negative frequencies
    double hi_hz = 0.0;
};

struct PassivityResult {
    bool passive = false;  // Re G(jw) >= 0 everywhere on the scanned grid
    std::vector<FrequencyRange> negative_real_ranges;
};

// Passivity classification on a two-sided grid (+/- each entry of grid_hz),
// with bisection refinement of the Re G sign changes.
PassivityResult passivity_check(const ScalarEvaluator& g, const std::vector<double>& grid_hz,
                                double omega_base);

} // namespace htfkit
