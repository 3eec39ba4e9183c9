#pragma once

#include "htfkit/harmonic_series.hpp"

namespace htfkit {

// Finite (2h+1)-block slice of the infinite block-Toeplitz operator generated
// by a harmonic series.  Block row r corresponds to harmonic h-r (top block
// row is the highest frequency shift), and block (r,c) holds coefficient
// X_{c-r}.
class TruncatedToeplitz {
public:
    TruncatedToeplitz(int order, int block_rows, int block_cols,
                      double base_freq, CMatrix data);

    int order() const { return order_; }
    int block_rows() const { return block_rows_; }
    int block_cols() const { return block_cols_; }
    double base_freq() const { return base_freq_; }
    const CMatrix& data() const { return data_; }

    // Block at (block-row r, block-col c), 0-based from the top-left.
    Eigen::Block<const CMatrix> block(int r, int c) const;
    // Block addressed by harmonics: row harmonic n_row, column harmonic n_col,
    // each in [-h, h].
    Eigen::Block<const CMatrix> block_h(int n_row, int n_col) const;

private:
    int order_, block_rows_, block_cols_;
    double base_freq_;
    CMatrix data_;
};

// Truncated Toeplitz embedding of a harmonic series at order h.
// Coefficients with |n| > 2h fall outside the slice and are ignored.
TruncatedToeplitz toeplitz_embed(const HarmonicMatrixSeries& series, int h);

// blkdiag(j*n*w_p*I_dim) for n = +h ... -h, matching toeplitz_embed row order.
CMatrix n_matrix(int h, double omega_p, int dim);

struct ToeplitzInverse {
    CMatrix inverse;
    double condition_estimate = 0.0;
    // The inverse of a truncation is not the truncation of the inverse:
    // accuracy holds only on interior blocks.
    bool edge_corrupted = true;
};

// Dense inverse of the truncated matrix.  Throws numerical_error when the
// condition estimate exceeds 1e12.
ToeplitzInverse toeplitz_invert(const TruncatedToeplitz& t);

// Moore-Penrose pseudo-inverse.  Truncating a banded frequency-shift operator
// zeroes its outermost channel rows, which makes the slice exactly
// rank-deficient even though the infinite operator is invertible; the
// pseudo-inverse still reproduces the true inverse on interior blocks.
CMatrix toeplitz_pseudo_invert(const TruncatedToeplitz& t, double rank_tol = 1e-12);

} // namespace htfkit
