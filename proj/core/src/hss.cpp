#include "htfkit/hss.hpp"

#include <algorithm>
#include <string>

#include "htfkit/errors.hpp"

namespace htfkit {

LtpStateSpace::LtpStateSpace(HarmonicMatrixSeries a, HarmonicMatrixSeries b,
                             HarmonicMatrixSeries c, HarmonicMatrixSeries d)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)) {
    if (a_.rows() != a_.cols())
        throw input_error("LtpStateSpace: A must be square");
    if (b_.rows() != a_.rows() || c_.cols() != a_.rows() ||
        d_.rows() != c_.rows() || d_.cols() != b_.cols())
        throw input_error("LtpStateSpace: inconsistent (A,B,C,D) shapes");
    const double wp = a_.base_freq();
    if (b_.base_freq() != wp || c_.base_freq() != wp || d_.base_freq() != wp)
        throw input_error("LtpStateSpace: all series must share base_freq");
}

HtfSlice::HtfSlice(Complex s0, int order, int output_dim, int input_dim,
                   double base_freq, CMatrix matrix)
    : s0_(s0), order_(order), output_dim_(output_dim), input_dim_(input_dim),
      base_freq_(base_freq), matrix_(std::move(matrix)) {
    const int nb = 2 * order_ + 1;
    if (matrix_.rows() != nb * output_dim_ || matrix_.cols() != nb * input_dim_)
        throw input_error("HtfSlice: matrix shape inconsistent with order");
}

Eigen::Block<const CMatrix> HtfSlice::block(int n_out, int n_in) const {
    if (std::abs(n_out) > order_ || std::abs(n_in) > order_)
        throw input_error("HtfSlice::block: harmonic index out of range");
    return matrix_.block((order_ - n_out) * output_dim_, (order_ - n_in) * input_dim_,
                         output_dim_, input_dim_);
}

Eigen::Block<const CMatrix> HtfSlice::coeff_block(int n, int m) const {
    return block(m, m - n);
}

HtfSlice htf_evaluate(const LtpStateSpace& model, Complex s, int h) {
    const int nx = model.state_dim();
    const int nb = 2 * h + 1;
    const CMatrix ea = toeplitz_embed(model.A(), h).data();
    const CMatrix eb = toeplitz_embed(model.B(), h).data();
    const CMatrix ec = toeplitz_embed(model.C(), h).data();
    const CMatrix ed = toeplitz_embed(model.D(), h).data();
    CMatrix resolvent_arg =
        s * CMatrix::Identity(nb * nx, nb * nx) + n_matrix(h, model.base_freq(), nx) - ea;

    Eigen::JacobiSVD<CMatrix> svd(resolvent_arg);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (!(smin > 0.0) || smax / smin > 1e12) {
        // Report the harmonic eigenvalue closest to s for diagnosis.
        Eigen::ComplexEigenSolver<CMatrix> eig(ea - n_matrix(h, model.base_freq(), nx));
        Complex nearest = eig.eigenvalues()(0);
        for (int i = 1; i < eig.eigenvalues().size(); ++i)
            if (std::abs(eig.eigenvalues()(i) - s) < std::abs(nearest - s))
                nearest = eig.eigenvalues()(i);
        throw numerical_error(
            "htf_evaluate: resolvent pole hit near s = (" + std::to_string(s.real()) + ", " +
            std::to_string(s.imag()) + "); nearest harmonic eigenvalue (" +
            std::to_string(nearest.real()) + ", " + std::to_string(nearest.imag()) + ")");
    }

    CMatrix g = ec * resolvent_arg.partialPivLu().solve(eb) + ed;
    return HtfSlice(s, h, model.output_dim(), model.input_dim(), model.base_freq(),
                    std::move(g));
}

ToneSet coupling_spectrum(const LtpStateSpace& model, const ToneSet& input_tone, int h) {
    if (input_tone.size() != 1)
        throw input_error("coupling_spectrum: expected a single input tone");
    const auto& [omega_u, u] = *input_tone.tones().begin();
    if (u.size() != model.input_dim())
        throw input_error("coupling_spectrum: tone amplitude dimension mismatch");
    HtfSlice slice = htf_evaluate(model, jj * omega_u, h);
    ToneSet out(input_tone.resolution());
    // Output copy at harmonic n carries amplitude G_n(s_n) U at w_u + n*w_p.
    for (int n = -h; n <= h; ++n)
        out.add(omega_u + n * model.base_freq(), slice.coeff_block(n, n) * u);
    return out;
}

TruncationReport truncation_probe(const LtpStateSpace& model, Complex s,
                                  const std::vector<int>& h_list, double converged_tol,
                                  int interior_margin) {
    if (h_list.size() < 2)
        throw input_error("truncation_probe: need at least two orders");
    if (!std::is_sorted(h_list.begin(), h_list.end()))
        throw input_error("truncation_probe: orders must be ascending");
    if (interior_margin < 1)
        throw input_error("truncation_probe: interior_margin must be >= 1");
    TruncationReport report;
    HtfSlice prev = htf_evaluate(model, s, h_list[0]);
    for (std::size_t i = 1; i < h_list.size(); ++i) {
        HtfSlice next = htf_evaluate(model, s, h_list[i]);
        const int interior = std::max(0, h_list[i - 1] - interior_margin);
        double change = 0.0;
        for (int r = -interior; r <= interior; ++r)
            for (int c = -interior; c <= interior; ++c)
                change = std::max(change,
                                  (next.block(r, c) - prev.block(r, c)).cwiseAbs().maxCoeff());
        report.steps.push_back({h_list[i - 1], h_list[i], change, change < converged_tol});
        prev = std::move(next);
    }
    return report;
}

} // namespace htfkit
