#pragma once

#include <functional>
#include <string>
#include <vector>

#include "htfkit/hss.hpp"

namespace htfkit {

enum class Frame { alpha_beta_pm, dq_pm, alpha_beta, dq };

std::string to_string(Frame f);

// Periodic 2x2 transform T(t) applied to HTF matrices as the similarity
// transformation  T G T^{-1}  (via Toeplitz embedding).  Both the series and
// its exact inverse series are stored so interior-block arithmetic stays exact.
class FrameTransform {
public:
    enum class Kind { identity, rotation, complex_mix, park, custom };

    static FrameTransform identity(double omega_p);
    // T_r(t) = diag(e^{-j w_p t}, e^{+j w_p t}): frequency-shifting transform.
    static FrameTransform rotation(double omega_p);
    // T_j = [[1, j], [1, -j]]: constant transform mixing real channels into
    // complex +/- channels.
    static FrameTransform complex_mix(double omega_p);
    // T_p = T_j^{-1} T_r T_j: real rotating-frame transform.
    static FrameTransform park(double omega_p);
    // User-supplied transform; the inverse is verified via the series product.
    static FrameTransform custom(HarmonicMatrixSeries series,
                                 HarmonicMatrixSeries inverse_series);

    Kind kind() const { return kind_; }
    const HarmonicMatrixSeries& series() const { return series_; }
    const HarmonicMatrixSeries& inverse_series() const { return inverse_series_; }
    int bandwidth() const;
    FrameTransform inverted() const;

private:
    FrameTransform(Kind kind, HarmonicMatrixSeries series,
                   HarmonicMatrixSeries inverse_series);
    Kind kind_;
    HarmonicMatrixSeries series_;
    HarmonicMatrixSeries inverse_series_;
};

// T G T^{-1} at the order of G.  Valid on interior blocks
// (|harmonic| <= h - bandwidth(T)).
HtfSlice similarity(const HtfSlice& g, const FrameTransform& t);

struct DiagonalityReport {
    bool diagonal = false;
    double residual = 0.0;      // max |entry| outside the diagonal blocks
    double max_entry = 0.0;     // normalization reference
};

// Tests whether interior blocks of the slice are block-diagonal with the given
// block size.  interior_margin excludes the outermost blocks corrupted by
// truncation (default 1, enough for bandwidth-1 transforms).
DiagonalityReport is_block_diagonal(const HtfSlice& g, int block, double tol,
                                    int interior_margin = 1);

// Entry-level diagonality of a 2x2 evaluator sampled on a grid of s points.
DiagonalityReport is_entry_diagonal(const std::function<CMatrix2(Complex)>& g,
                                    const std::vector<Complex>& grid, double tol);

// Reduced 2x2 transfer representation (one harmonic block as a function of s).
struct ReducedHtf2x2 {
    Frame frame = Frame::dq_pm;
    std::function<CMatrix2(Complex)> eval;

    Complex g11(Complex s) const { return eval(s)(0, 0); }
    Complex g12(Complex s) const { return eval(s)(0, 1); }
    Complex g21(Complex s) const { return eval(s)(1, 0); }
    Complex g22(Complex s) const { return eval(s)(1, 1); }
};

// Extract the center 2x2 block of the (block-diagonal) transformed HTF as a
// function of s: for each s the model is evaluated, transformed by T, checked
// for block diagonality, and the harmonic-0 block returned.  The remaining
// diagonal blocks are recovered by shifting s to s_n.
ReducedHtf2x2 reduce_to_2x2(const LtpStateSpace& model, const FrameTransform& t, int h,
                            Frame frame, double tol = 1e-8);

// Validated single-slice variant: requires is_block_diagonal(g) to pass.
CMatrix2 reduce_to_2x2(const HtfSlice& g, double tol = 1e-8);

// Stationary-frame 2x2 extraction from an untransformed +/- channel slice:
// rows/columns at harmonics +1 (channel 0) and -1 (channel 1).  This is the
// frequency-shifted companion of the rotating-frame center block.
CMatrix2 extract_stationary_2x2(const HtfSlice& g);

// Entrywise constant-frame conversion along dq <-> dq+/- (and ab <-> ab+/-):
// G_target = T_j G T_j^{-1} or its inverse, applied per evaluation point.
ReducedHtf2x2 convert_frame(const ReducedHtf2x2& g, Frame target);

struct SymmetryReport {
    bool symmetric = false;
    double worst_deviation = 0.0;  // normalized by max entry magnitude
};

// Symmetric condition in the real dq frame: G_dd = G_qq and G_dq = -G_qd.
SymmetryReport symmetric_condition(const ReducedHtf2x2& g_dq,
                                   const std::vector<Complex>& grid, double tol);

struct EntryDiagonalization {
    std::function<Complex(Complex)> lambda_plus;   // G_dd + j G_dq
    std::function<Complex(Complex)> lambda_minus;  // G_dd - j G_dq
    CVector2 xi_plus;   // left eigenvector of lambda_plus: (1, -j)
    CVector2 xi_minus;  // left eigenvector of lambda_minus: (1, +j)
};

// Diagonalize a symmetric 2x2 system: eigenvalues G_dd +/- j G_dq with
// s-independent left eigenvectors (1, +/- j).  Requires symmetric_condition
// within tol on the supplied check grid.
EntryDiagonalization entry_diagonalize(const ReducedHtf2x2& g_dq,
                                       const std::vector<Complex>& check_grid,
                                       double tol = 1e-8);

} // namespace htfkit
