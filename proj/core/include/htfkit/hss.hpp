#pragma once

#include <vector>

#include "htfkit/toeplitz.hpp"

namespace htfkit {

// Harmonic state-space model: (A, B, C, D) harmonic series sharing a pump
// frequency w_p, describing x' = A(t)x + B(t)u, y = C(t)x + D(t)u.
class LtpStateSpace {
public:
    LtpStateSpace(HarmonicMatrixSeries a, HarmonicMatrixSeries b,
                  HarmonicMatrixSeries c, HarmonicMatrixSeries d);

    const HarmonicMatrixSeries& A() const { return a_; }
    const HarmonicMatrixSeries& B() const { return b_; }
    const HarmonicMatrixSeries& C() const { return c_; }
    const HarmonicMatrixSeries& D() const { return d_; }
    double base_freq() const { return a_.base_freq(); }
    int state_dim() const { return a_.rows(); }
    int input_dim() const { return b_.cols(); }
    int output_dim() const { return c_.rows(); }

private:
    HarmonicMatrixSeries a_, b_, c_, d_;
};

// One evaluated slice of the harmonic transfer function at base point s0.
// Block (row for harmonic m, column for harmonic k) maps the input copy at
// s0 + j*k*w_p to the output copy at s0 + j*m*w_p; the transfer coefficient
// G_n(s_m) lives at (row m, column m-n).
class HtfSlice {
public:
    HtfSlice(Complex s0, int order, int output_dim, int input_dim,
             double base_freq, CMatrix matrix);

    Complex s0() const { return s0_; }
    int order() const { return order_; }
    int output_dim() const { return output_dim_; }
    int input_dim() const { return input_dim_; }
    double base_freq() const { return base_freq_; }
    const CMatrix& matrix() const { return matrix_; }

    // Block addressed by output/input harmonics in [-h, h].
    Eigen::Block<const CMatrix> block(int n_out, int n_in) const;
    // Transfer coefficient G_n evaluated at s_m = s0 + j*m*w_p.
    Eigen::Block<const CMatrix> coeff_block(int n, int m) const;

private:
    Complex s0_;
    int order_, output_dim_, input_dim_;
    double base_freq_;
    CMatrix matrix_;
};

// Evaluate the harmonic transfer function C (sI + N - A)^{-1} B + D at base
// point s, truncated at order h.  Throws numerical_error on a resolvent pole
// (condition estimate > 1e12), reporting the nearest harmonic eigenvalue.
HtfSlice htf_evaluate(const LtpStateSpace& model, Complex s, int h);

// Output spectrum for a single input tone at w_u: amplitudes G_n(j w_u) U at
// frequencies w_u + n*w_p for n = -h .. h.
ToneSet coupling_spectrum(const LtpStateSpace& model, const ToneSet& input_tone, int h);

struct TruncationReport {
    struct Step {
        int h_from = 0, h_to = 0;
        double max_interior_change = 0.0;
        bool converged = false;
    };
    std::vector<Step> steps;
};

// Convergence probe: interior-block change of the HTF slice between
// consecutive truncation orders (interior = harmonics
// |n| <= min(h) - interior_margin).  For a model whose HTF coupling spans k
// harmonics, interior_margin = k makes the interior truncation-exact.
TruncationReport truncation_probe(const LtpStateSpace& model, Complex s,
                                  const std::vector<int>& h_list,
                                  double converged_tol = 1e-9,
                                  int interior_margin = 1);

} // namespace htfkit
