#pragma once

#include <map>
#include <vector>

#include "htfkit/types.hpp"

namespace htfkit {

// Fourier-coefficient family {X_n} of a T-periodic matrix function
// X(t) = sum_n X_n exp(j n w_p t).  Unstored indices are zero matrices.
// Immutable after construction; shareable across threads.
class HarmonicMatrixSeries {
public:
    HarmonicMatrixSeries(double base_freq, int rows, int cols,
                         std::map<int, CMatrix> coeffs, bool real_valued = false);

    // Convenience: single-coefficient (LTI) series.
    static HarmonicMatrixSeries constant(double base_freq, const CMatrix& x0,
                                         bool real_valued = false);

    double base_freq() const { return base_freq_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool real_valued() const { return real_valued_; }

    // Coefficient X_n; zero matrix when unstored.
    CMatrix coeff(int n) const;
    bool has_coeff(int n) const { return coeffs_.count(n) != 0; }
    const std::map<int, CMatrix>& coeffs() const { return coeffs_; }

    // Largest |n| with a stored nonzero coefficient (0 for LTI).
    int bandwidth() const;

    // Time-domain evaluation X(t).
    CMatrix eval(double t) const;

    // Pointwise-in-time product (series convolution) and linear combination.
    HarmonicMatrixSeries product(const HarmonicMatrixSeries& rhs) const;
    HarmonicMatrixSeries scaled_sum(Complex alpha, const HarmonicMatrixSeries& other,
                                    Complex beta) const;

private:
    double base_freq_;
    int rows_, cols_;
    bool real_valued_;
    std::map<int, CMatrix> coeffs_;
};

// Discrete signal spectrum: complex amplitude vectors on a frequency comb.
// Frequencies merge (amplitudes summed) when closer than the resolution.
class ToneSet {
public:
    explicit ToneSet(double resolution = 1e-9) : resolution_(resolution) {}

    void add(double omega, const CVector& amplitude);
    const std::map<double, CVector>& tones() const { return tones_; }
    double resolution() const { return resolution_; }
    std::size_t size() const { return tones_.size(); }

private:
    double resolution_;
    std::map<double, CVector> tones_;
};

} // namespace htfkit
