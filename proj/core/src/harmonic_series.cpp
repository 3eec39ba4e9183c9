#include "htfkit/harmonic_series.hpp"

#include <cmath>
#include <cstdlib>
#include <utility>

#include "htfkit/errors.hpp"

namespace htfkit {

HarmonicMatrixSeries::HarmonicMatrixSeries(double base_freq, int rows, int cols,
                                           std::map<int, CMatrix> coeffs,
                                           bool real_valued)
    : base_freq_(base_freq), rows_(rows), cols_(cols), real_valued_(real_valued),
      coeffs_(std::move(coeffs)) {
    if (base_freq_ <= 0.0)
        throw input_error("HarmonicMatrixSeries: base_freq must be positive");
    if (rows_ <= 0 || cols_ <= 0)
        throw input_error("HarmonicMatrixSeries: dimensions must be positive");
    for (const auto& [n, x] : coeffs_) {
        if (x.rows() != rows_ || x.cols() != cols_)
            throw input_error("HarmonicMatrixSeries: coefficient n=" + std::to_string(n) +
                              " has inconsistent shape");
    }
    if (real_valued_) {
        for (const auto& [n, x] : coeffs_) {
            CMatrix other = coeff(-n);
            if ((x - other.conjugate()).cwiseAbs().maxCoeff() > 1e-12)
                throw input_error("HarmonicMatrixSeries: real_valued series violates "
                                  "conjugate symmetry at n=" + std::to_string(n));
        }
    }
}

HarmonicMatrixSeries HarmonicMatrixSeries::constant(double base_freq, const CMatrix& x0,
                                                    bool real_valued) {
    std::map<int, CMatrix> c;
    c[0] = x0;
    return HarmonicMatrixSeries(base_freq, static_cast<int>(x0.rows()),
                                static_cast<int>(x0.cols()), std::move(c), real_valued);
}

CMatrix HarmonicMatrixSeries::coeff(int n) const {
    auto it = coeffs_.find(n);
    if (it == coeffs_.end()) return CMatrix::Zero(rows_, cols_);
    return it->second;
}

int HarmonicMatrixSeries::bandwidth() const {
    int bw = 0;
    for (const auto& [n, x] : coeffs_) {
        if (x.cwiseAbs().maxCoeff() > 0.0) bw = std::max(bw, std::abs(n));
    }
    return bw;
}

CMatrix HarmonicMatrixSeries::eval(double t) const {
    CMatrix out = CMatrix::Zero(rows_, cols_);
    for (const auto& [n, x] : coeffs_)
        out += x * std::exp(jj * (n * base_freq_ * t));
    return out;
}

HarmonicMatrixSeries HarmonicMatrixSeries::product(const HarmonicMatrixSeries& rhs) const {
    if (cols_ != rhs.rows_)
        throw input_error("HarmonicMatrixSeries::product: dimension mismatch");
    std::map<int, CMatrix> out;
    for (const auto& [n, x] : coeffs_) {
        for (const auto& [k, y] : rhs.coeffs_) {
            auto it = out.find(n + k);
            if (it == out.end())
                out.emplace(n + k, CMatrix(x * y));
            else
                it->second += x * y;
        }
    }
    return HarmonicMatrixSeries(base_freq_, rows_, rhs.cols_, std::move(out));
}

HarmonicMatrixSeries HarmonicMatrixSeries::scaled_sum(Complex alpha,
                                                      const HarmonicMatrixSeries& other,
                                                      Complex beta) const {
    if (rows_ != other.rows_ || cols_ != other.cols_)
        throw input_error("HarmonicMatrixSeries::scaled_sum: dimension mismatch");
    std::map<int, CMatrix> out;
    for (const auto& [n, x] : coeffs_) out[n] = alpha * x;
    for (const auto& [n, y] : other.coeffs_) {
        auto it = out.find(n);
        if (it == out.end())
            out.emplace(n, CMatrix(beta * y));
        else
            it->second += beta * y;
    }
    return HarmonicMatrixSeries(base_freq_, rows_, cols_, std::move(out));
}

void ToneSet::add(double omega, const CVector& amplitude) {
    auto lo = tones_.lower_bound(omega - resolution_);
    if (lo != tones_.end() && std::abs(lo->first - omega) <= resolution_) {
        lo->second += amplitude;
        return;
    }
    tones_.emplace(omega, amplitude);
}

} // namespace htfkit
