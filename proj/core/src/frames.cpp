#include "htfkit/frames.hpp"

#include <cmath>

#include "htfkit/errors.hpp"

namespace htfkit {

std::string to_string(Frame f) {
    switch (f) {
        case Frame::alpha_beta_pm: return "ab_pm";
        case Frame::dq_pm: return "dq_pm";
        case Frame::alpha_beta: return "ab";
        case Frame::dq: return "dq";
    }
    return "?";
}

namespace {

const CMatrix2 kTj = (CMatrix2() << Complex(1, 0), jj, Complex(1, 0), -jj).finished();
const CMatrix2 kTjInv = (CMatrix2() << Complex(0.5, 0), Complex(0.5, 0),
                         -0.5 * jj, 0.5 * jj).finished();

void verify_inverse(const HarmonicMatrixSeries& series,
                    const HarmonicMatrixSeries& inverse_series) {
    HarmonicMatrixSeries prod = series.product(inverse_series);
    for (const auto& [n, x] : prod.coeffs()) {
        CMatrix expect = (n == 0) ? CMatrix(CMatrix::Identity(x.rows(), x.cols()))
                                  : CMatrix(CMatrix::Zero(x.rows(), x.cols()));
        if ((x - expect).cwiseAbs().maxCoeff() > 1e-12)
            throw input_error("FrameTransform: series * inverse_series != identity");
    }
}

} // namespace

FrameTransform::FrameTransform(Kind kind, HarmonicMatrixSeries series,
                               HarmonicMatrixSeries inverse_series)
    : kind_(kind), series_(std::move(series)), inverse_series_(std::move(inverse_series)) {
    if (series_.rows() != 2 || series_.cols() != 2)
        throw input_error("FrameTransform: expected 2x2 blocks");
    verify_inverse(series_, inverse_series_);
}

FrameTransform FrameTransform::identity(double omega_p) {
    auto ident = HarmonicMatrixSeries::constant(omega_p, CMatrix2::Identity(), true);
    return FrameTransform(Kind::identity, ident, ident);
}

FrameTransform FrameTransform::rotation(double omega_p) {
    CMatrix2 up = CMatrix2::Zero(), dn = CMatrix2::Zero();
    up(0, 0) = 1.0;  // e^{-j w_p t} on the + channel -> coefficient at n = -1
    dn(1, 1) = 1.0;  // e^{+j w_p t} on the - channel -> coefficient at n = +1
    std::map<int, CMatrix> fw{{-1, up}, {+1, dn}};
    std::map<int, CMatrix> bw{{+1, up}, {-1, dn}};
    HarmonicMatrixSeries series(omega_p, 2, 2, std::move(fw));
    HarmonicMatrixSeries inverse(omega_p, 2, 2, std::move(bw));
    return FrameTransform(Kind::rotation, std::move(series), std::move(inverse));
}

FrameTransform FrameTransform::complex_mix(double omega_p) {
    return FrameTransform(Kind::complex_mix,
                          HarmonicMatrixSeries::constant(omega_p, kTj),
                          HarmonicMatrixSeries::constant(omega_p, kTjInv));
}

FrameTransform FrameTransform::park(double omega_p) {
    FrameTransform tr = rotation(omega_p);
    HarmonicMatrixSeries tj = HarmonicMatrixSeries::constant(omega_p, kTj);
    HarmonicMatrixSeries tj_inv = HarmonicMatrixSeries::constant(omega_p, kTjInv);
    HarmonicMatrixSeries series = tj_inv.product(tr.series()).product(tj);
    HarmonicMatrixSeries inverse = tj_inv.product(tr.inverse_series()).product(tj);
    return FrameTransform(Kind::park, std::move(series), std::move(inverse));
}

FrameTransform FrameTransform::custom(HarmonicMatrixSeries series,
                                      HarmonicMatrixSeries inverse_series) {
    return FrameTransform(Kind::custom, std::move(series), std::move(inverse_series));
}

int FrameTransform::bandwidth() const {
    return std::max(series_.bandwidth(), inverse_series_.bandwidth());
}

FrameTransform FrameTransform::inverted() const {
    return FrameTransform(kind_, inverse_series_, series_);
}

HtfSlice similarity(const HtfSlice& g, const FrameTransform& t) {
    if (g.output_dim() != 2 || g.input_dim() != 2)
        throw input_error("similarity: slice must have 2x2 blocks");
    const int h = g.order();
    const CMatrix et = toeplitz_embed(t.series(), h).data();
    const CMatrix eti = toeplitz_embed(t.inverse_series(), h).data();
    return HtfSlice(g.s0(), h, 2, 2, g.base_freq(), et * g.matrix() * eti);
}

DiagonalityReport is_block_diagonal(const HtfSlice& g, int block, double tol,
                                    int interior_margin) {
    if (g.output_dim() != g.input_dim() || g.output_dim() % block != 0)
        throw input_error("is_block_diagonal: block size must divide dimensions");
    const int interior = g.order() - interior_margin;
    if (interior < 0) throw input_error("is_block_diagonal: order too small for margin");
    DiagonalityReport report;
    const int dim = g.output_dim();
    const int sub = dim / block;  // diagonal sub-blocks per harmonic block
    for (int r = -interior; r <= interior; ++r) {
        for (int c = -interior; c <= interior; ++c) {
            const auto blk = g.block(r, c);
            for (int i = 0; i < dim; ++i) {
                for (int k = 0; k < dim; ++k) {
                    const double mag = std::abs(blk(i, k));
                    report.max_entry = std::max(report.max_entry, mag);
                    const bool on_diag = (r == c) && (i / block == k / block);
                    if (!on_diag) report.residual = std::max(report.residual, mag);
                }
            }
        }
    }
    (void)sub;
    report.diagonal = report.residual < tol * report.max_entry;
    return report;
}

DiagonalityReport is_entry_diagonal(const std::function<CMatrix2(Complex)>& g,
                                    const std::vector<Complex>& grid, double tol) {
    DiagonalityReport report;
    for (Complex s : grid) {
        CMatrix2 m = g(s);
        report.max_entry = std::max({report.max_entry, std::abs(m(0, 0)), std::abs(m(1, 1)),
                                     std::abs(m(0, 1)), std::abs(m(1, 0))});
        report.residual = std::max({report.residual, std::abs(m(0, 1)), std::abs(m(1, 0))});
    }
    report.diagonal = report.residual < tol * report.max_entry;
    return report;
}

CMatrix2 reduce_to_2x2(const HtfSlice& g, double tol) {
    DiagonalityReport rep = is_block_diagonal(g, 2, tol);
    if (!rep.diagonal)
        throw input_error("reduce_to_2x2: slice is not block-diagonal (residual " +
                          std::to_string(rep.residual) + ")");
    return g.block(0, 0);
}

ReducedHtf2x2 reduce_to_2x2(const LtpStateSpace& model, const FrameTransform& t, int h,
                            Frame frame, double tol) {
    ReducedHtf2x2 out;
    out.frame = frame;
    out.eval = [model, t, h, tol](Complex s) -> CMatrix2 {
        HtfSlice slice = similarity(htf_evaluate(model, s, h), t);
        return reduce_to_2x2(slice, tol);
    };
    return out;
}

CMatrix2 extract_stationary_2x2(const HtfSlice& g) {
    if (g.order() < 2)
        throw input_error("extract_stationary_2x2: order must be >= 2");
    CMatrix2 out;
    out(0, 0) = g.block(+1, +1)(0, 0);
    out(0, 1) = g.block(+1, -1)(0, 1);
    out(1, 0) = g.block(-1, +1)(1, 0);
    out(1, 1) = g.block(-1, -1)(1, 1);
    return out;
}

ReducedHtf2x2 convert_frame(const ReducedHtf2x2& g, Frame target) {
    const Frame source = g.frame;
    if (source == target) return g;
    auto complexify = (source == Frame::dq && target == Frame::dq_pm) ||
                      (source == Frame::alpha_beta && target == Frame::alpha_beta_pm);
    auto realify = (source == Frame::dq_pm && target == Frame::dq) ||
                   (source == Frame::alpha_beta_pm && target == Frame::alpha_beta);
    if (!complexify && !realify)
        throw input_error("convert_frame: unsupported conversion " + to_string(source) +
                          " -> " + to_string(target));
    auto inner = g.eval;
    ReducedHtf2x2 out;
    out.frame = target;
    if (complexify)
        out.eval = [inner](Complex s) -> CMatrix2 { return kTj * inner(s) * kTjInv; };
    else
        out.eval = [inner](Complex s) -> CMatrix2 { return kTjInv * inner(s) * kTj; };
    return out;
}

SymmetryReport symmetric_condition(const ReducedHtf2x2& g_dq,
                                   const std::vector<Complex>& grid, double tol) {
    if (g_dq.frame != Frame::dq && g_dq.frame != Frame::alpha_beta)
        throw input_error("symmetric_condition: expected a real-frame 2x2");
    SymmetryReport report;
    double max_mag = 0.0, worst = 0.0;
    for (Complex s : grid) {
        CMatrix2 m = g_dq.eval(s);
        max_mag = std::max(max_mag, m.cwiseAbs().maxCoeff());
        worst = std::max({worst, std::abs(m(0, 0) - m(1, 1)), std::abs(m(0, 1) + m(1, 0))});
    }
    report.worst_deviation = (max_mag > 0.0) ? worst / max_mag : 0.0;
    report.symmetric = report.worst_deviation < tol;
    return report;
}

EntryDiagonalization entry_diagonalize(const ReducedHtf2x2& g_dq,
                                       const std::vector<Complex>& check_grid,
                                       double tol) {
    SymmetryReport sym = symmetric_condition(g_dq, check_grid, tol);
    if (!sym.symmetric)
        throw input_error("entry_diagonalize: symmetric condition violated (deviation " +
                          std::to_string(sym.worst_deviation) + ")");
    auto inner = g_dq.eval;
    EntryDiagonalization out;
    out.lambda_plus = [inner](Complex s) {
        CMatrix2 m = inner(s);
        return m(0, 0) + jj * m(0, 1);
    };
    out.lambda_minus = [inner](Complex s) {
        CMatrix2 m = inner(s);
        return m(0, 0) - jj * m(0, 1);
    };
    // Left eigenvector pairing for [[a, b], [-b, a]]: (1, -j) M = (a + jb)(1, -j).
    out.xi_plus << Complex(1, 0), -jj;
    out.xi_minus << Complex(1, 0), jj;
    return out;
}

} // namespace htfkit
