#include "htfkit/toeplitz.hpp"

#include <string>

#include "htfkit/errors.hpp"

namespace htfkit {

TruncatedToeplitz::TruncatedToeplitz(int order, int block_rows, int block_cols,
                                     double base_freq, CMatrix data)
    : order_(order), block_rows_(block_rows), block_cols_(block_cols),
      base_freq_(base_freq), data_(std::move(data)) {
    if (order_ < 1) throw input_error("TruncatedToeplitz: order must be >= 1");
    const int nb = 2 * order_ + 1;
    if (data_.rows() != nb * block_rows_ || data_.cols() != nb * block_cols_)
        throw input_error("TruncatedToeplitz: data shape inconsistent with order");
}

Eigen::Block<const CMatrix> TruncatedToeplitz::block(int r, int c) const {
    const int nb = 2 * order_ + 1;
    if (r < 0 || r >= nb || c < 0 || c >= nb)
        throw input_error("TruncatedToeplitz::block: index out of range");
    return data_.block(r * block_rows_, c * block_cols_, block_rows_, block_cols_);
}

Eigen::Block<const CMatrix> TruncatedToeplitz::block_h(int n_row, int n_col) const {
    return block(order_ - n_row, order_ - n_col);
}

TruncatedToeplitz toeplitz_embed(const HarmonicMatrixSeries& series, int h) {
    if (h < 1) throw input_error("toeplitz_embed: order must be >= 1");
    if (series.coeffs().empty()) throw input_error("toeplitz_embed: empty series");
    const int br = series.rows();
    const int bc = series.cols();
    const int nb = 2 * h + 1;
    CMatrix data = CMatrix::Zero(nb * br, nb * bc);
    for (const auto& [n, x] : series.coeffs()) {
        if (std::abs(n) > 2 * h) continue;
        // X_n occupies blocks (r, c) with c - r = n.
        for (int r = 0; r < nb; ++r) {
            const int c = r + n;
            if (c < 0 || c >= nb) continue;
            data.block(r * br, c * bc, br, bc) = x;
        }
    }
    return TruncatedToeplitz(h, br, bc, series.base_freq(), std::move(data));
}

CMatrix n_matrix(int h, double omega_p, int dim) {
    if (h < 1) throw input_error("n_matrix: order must be >= 1");
    if (dim < 1) throw input_error("n_matrix: dim must be >= 1");
    const int nb = 2 * h + 1;
    CMatrix out = CMatrix::Zero(nb * dim, nb * dim);
    for (int r = 0; r < nb; ++r) {
        const int n = h - r;
        for (int k = 0; k < dim; ++k)
            out(r * dim + k, r * dim + k) = jj * (n * omega_p);
    }
    return out;
}

ToeplitzInverse toeplitz_invert(const TruncatedToeplitz& t) {
    if (t.data().rows() != t.data().cols())
        throw input_error("toeplitz_invert: matrix not square");
    Eigen::JacobiSVD<CMatrix> svd(t.data(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    const double cond = (smin > 0.0) ? smax / smin : std::numeric_limits<double>::infinity();
    if (!(cond < 1e12))
        throw numerical_error("toeplitz_invert: ill-conditioned matrix, condition estimate " +
                              std::to_string(cond));
    ToeplitzInverse out;
    out.condition_estimate = cond;
    out.inverse = t.data().partialPivLu().inverse();
    out.edge_corrupted = true;
    return out;
}

CMatrix toeplitz_pseudo_invert(const TruncatedToeplitz& t, double rank_tol) {
    Eigen::JacobiSVD<CMatrix> svd(t.data(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cutoff = rank_tol * sv(0);
    CVector inv_sv(sv.size());
    for (int i = 0; i < sv.size(); ++i)
        inv_sv(i) = (sv(i) > cutoff) ? Complex(1.0 / sv(i), 0.0) : Complex(0.0, 0.0);
    return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().adjoint();
}

} // namespace htfkit
