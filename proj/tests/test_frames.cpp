#include <doctest.h>

#include <random>

#include "htfkit/errors.hpp"
#include "htfkit/frames.hpp"
#include "htfkit/vsi.hpp"

using namespace htfkit;

namespace {

// Real symmetric 2x2 LTI model: impedance-style dynamics with cross coupling,
// G(s) = (sI - A)^{-1} with A = [[-a, -b], [b, -a]].
LtpStateSpace symmetric_lti_model(double omega_p, double a, double b) {
    CMatrix am(2, 2);
    am << -a, -b, b, -a;
    return LtpStateSpace(HarmonicMatrixSeries::constant(omega_p, am, true),
                         HarmonicMatrixSeries::constant(omega_p, CMatrix::Identity(2, 2), true),
                         HarmonicMatrixSeries::constant(omega_p, CMatrix::Identity(2, 2), true),
                         HarmonicMatrixSeries::constant(omega_p, CMatrix::Zero(2, 2), true));
}

std::vector<Complex> imaginary_grid(double lo, double hi, int n) {
    std::vector<Complex> grid;
    for (int i = 0; i < n; ++i)
        grid.push_back(jj * (lo + (hi - lo) * i / (n - 1)));
    return grid;
}

} // namespace

TEST_CASE("FrameTransform factories match their defining coefficients") {
    const double wp = 1.7;
    SUBCASE("complex_mix is the constant [[1, j], [1, -j]]") {
        FrameTransform tj = FrameTransform::complex_mix(wp);
        CMatrix2 expect;
        expect << Complex(1, 0), jj, Complex(1, 0), -jj;
        CHECK((tj.series().coeff(0) - expect).cwiseAbs().maxCoeff() == 0.0);
        CHECK(tj.bandwidth() == 0);
    }
    SUBCASE("rotation has only +/-1 coefficients") {
        FrameTransform tr = FrameTransform::rotation(wp);
        CHECK(tr.series().coeff(-1)(0, 0) == Complex(1, 0));
        CHECK(tr.series().coeff(1)(1, 1) == Complex(1, 0));
        CHECK(tr.series().coeff(0).cwiseAbs().maxCoeff() == 0.0);
        CHECK(tr.bandwidth() == 1);
    }
    SUBCASE("series * inverse_series is the identity function (all factories)") {
        for (auto t : {FrameTransform::identity(wp), FrameTransform::rotation(wp),
                       FrameTransform::complex_mix(wp), FrameTransform::park(wp)}) {
            HarmonicMatrixSeries prod = t.series().product(t.inverse_series());
            for (const auto& [n, x] : prod.coeffs()) {
                CMatrix expect = (n == 0) ? CMatrix(CMatrix::Identity(2, 2))
                                          : CMatrix(CMatrix::Zero(2, 2));
                CHECK((x - expect).cwiseAbs().maxCoeff() < 1e-12);
            }
        }
    }
    SUBCASE("custom transform with a wrong inverse is rejected") {
        auto series = HarmonicMatrixSeries::constant(wp, CMatrix2::Identity());
        auto bad = HarmonicMatrixSeries::constant(wp, CMatrix(2.0 * CMatrix2::Identity()));
        CHECK_THROWS_AS(FrameTransform::custom(series, bad), input_error);
    }
}

TEST_CASE("similarity with the identity transform leaves the slice unchanged") {
    LtpStateSpace model = build_vsi_hss(VsiParams{});
    HtfSlice g = htf_evaluate(model, Complex(0.0, 0.23), 3);
    HtfSlice same = similarity(g, FrameTransform::identity(model.base_freq()));
    CHECK((g.matrix() - same.matrix()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("T_j entry-diagonalizes a symmetric LTI 2x2 model") {
    const double wp = 1.0;
    LtpStateSpace model = symmetric_lti_model(wp, 1.0, 0.4);
    HtfSlice g = similarity(htf_evaluate(model, Complex(0.1, 0.6), 3),
                            FrameTransform::complex_mix(wp));
    // Entry-diagonal interior: scalar-level diagonality (block size 1).
    DiagonalityReport rep = is_block_diagonal(g, 1, 1e-10, 1);
    CHECK(rep.diagonal);
    // Diagonal entries are G_dd -+ j G_dq (rows of T_j pair (1, +/-j) with -+).
    const Complex s(0.1, 0.6);
    CMatrix a0 = model.A().coeff(0);
    CMatrix gc = (CMatrix(s * CMatrix::Identity(2, 2) - a0)).inverse();
    const Complex lam_plus = gc(0, 0) + jj * gc(0, 1);
    const Complex lam_minus = gc(0, 0) - jj * gc(0, 1);
    const Complex d0 = g.block(0, 0)(0, 0);
    const Complex d1 = g.block(0, 0)(1, 1);
    CHECK(std::abs(d0 - lam_minus) < 1e-12);
    CHECK(std::abs(d1 - lam_plus) < 1e-12);
}

TEST_CASE("T_r round trip is exact on interior blocks") {
    LtpStateSpace model = build_vsi_hss(VsiParams{});
    const double wp = model.base_freq();
    const int h = 4;
    HtfSlice g = htf_evaluate(model, Complex(0.0, 0.31), h);
    FrameTransform tr = FrameTransform::rotation(wp);
    HtfSlice round = similarity(similarity(g, tr), tr.inverted());
    for (int m = -(h - 2); m <= h - 2; ++m)
        for (int k = -(h - 2); k <= h - 2; ++k)
            CHECK((g.block(m, k) - round.block(m, k)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("VSI admittance: block-diagonal only after the rotation transform") {
    VsiParams params;
    LtpStateSpace model = build_vsi_hss(params);
    const int h = 4;
    // Near the droop bandwidth (s = j0.1 pu) the +/-2 coupling is a large
    // fraction of the max entry, so the raw +/- frame visibly fails.
    HtfSlice g = htf_evaluate(model, Complex(0.0, 0.10), h);
    DiagonalityReport before = is_block_diagonal(g, 2, 1e-10, 1);
    CHECK_FALSE(before.diagonal);
    CHECK(before.residual > 0.1 * before.max_entry);  // +/-2 coupling is structural

    HtfSlice rotated = similarity(g, FrameTransform::rotation(model.base_freq()));
    DiagonalityReport after = is_block_diagonal(rotated, 2, 1e-10, 1);
    CHECK(after.diagonal);

    // The center block matches the closed-form admittance.
    ZtClosedForm zt = z_closed_form(params);
    CMatrix2 center = reduce_to_2x2(rotated, 1e-8);
    CMatrix2 expect = zt.admittance_2x2(Complex(0.0, 0.10));
    CHECK((center - expect).cwiseAbs().maxCoeff() < 1e-10 * expect.cwiseAbs().maxCoeff());
}

TEST_CASE("is_block_diagonal status is invariant under the constant T_j") {
    LtpStateSpace model = build_vsi_hss(VsiParams{});
    const double wp = model.base_freq();
    HtfSlice g = htf_evaluate(model, Complex(0.0, 0.21), 4);
    FrameTransform tj = FrameTransform::complex_mix(wp);
    CHECK(is_block_diagonal(g, 2, 1e-10).diagonal ==
          is_block_diagonal(similarity(g, tj), 2, 1e-10).diagonal);
    HtfSlice rotated = similarity(g, FrameTransform::rotation(wp));
    CHECK(is_block_diagonal(rotated, 2, 1e-10).diagonal ==
          is_block_diagonal(similarity(rotated, tj), 2, 1e-10).diagonal);
}

TEST_CASE("is_entry_diagonal: Z_L passes, Z_T fails") {
    ZtClosedForm zt = z_closed_form(VsiParams{});
    auto grid = imaginary_grid(0.01, 2.0, 25);
    CHECK(is_entry_diagonal(zt.zl_2x2, grid, 1e-10).diagonal);
    CHECK_FALSE(is_entry_diagonal(zt.zt_2x2, grid, 1e-10).diagonal);
    // The Z_D off-diagonal is the j M(s) coupling.
    DiagonalityReport rep = is_entry_diagonal(zt.zd_2x2, grid, 1e-10);
    CHECK(rep.residual == doctest::Approx(std::abs(zt.M(grid.front()))).epsilon(0.5));
}

TEST_CASE("reduce_to_2x2 evaluator and shifted extraction") {
    VsiParams params;
    LtpStateSpace model = build_vsi_hss(params);
    ZtClosedForm zt = z_closed_form(params);
    FrameTransform tr = FrameTransform::rotation(model.base_freq());
    ReducedHtf2x2 reduced = reduce_to_2x2(model, tr, 4, Frame::dq_pm);

    SUBCASE("entries match the closed-form structure") {
        const Complex s(0.0, 0.17);
        CMatrix2 y = reduced.eval(s);
        CMatrix2 y_expect = zt.admittance_2x2(s);
        CHECK((y - y_expect).cwiseAbs().maxCoeff() < 1e-10 * y_expect.cwiseAbs().maxCoeff());
    }
    SUBCASE("stationary-frame extraction equals the center block (shift identity)") {
        const Complex s(0.0, 0.17);
        HtfSlice g = htf_evaluate(model, s, 4);
        CMatrix2 stationary = extract_stationary_2x2(g);
        CMatrix2 center = reduced.eval(s);
        CHECK((stationary - center).cwiseAbs().maxCoeff() <
              1e-10 * center.cwiseAbs().maxCoeff());
    }
    SUBCASE("non-block-diagonal slice is rejected") {
        HtfSlice g = htf_evaluate(model, Complex(0.0, 0.17), 4);
        CHECK_THROWS_AS(reduce_to_2x2(g, 1e-8), input_error);
    }
}

TEST_CASE("symmetric_condition") {
    auto grid = imaginary_grid(0.02, 1.5, 20);
    SUBCASE("RL impedance with cross coupling is symmetric") {
        const double wp = 1.0, L = 0.091, R = 0.015;
        ReducedHtf2x2 g;
        g.frame = Frame::dq;
        g.eval = [wp, L, R](Complex s) -> CMatrix2 {
            CMatrix2 z;
            z << s * L + R, -wp * L, wp * L, s * L + R;
            return z;
        };
        CHECK(symmetric_condition(g, grid, 1e-10).symmetric);
    }
    SUBCASE("VSI Z_T with droop enabled is asymmetric; m = 0 restores symmetry") {
        auto dq_of = [&](const VsiParams& p) {
            ZtClosedForm zt = z_closed_form(p);
            ReducedHtf2x2 g;
            g.frame = Frame::dq_pm;
            g.eval = zt.zt_2x2;
            return convert_frame(g, Frame::dq);
        };
        VsiParams params;
        CHECK_FALSE(symmetric_condition(dq_of(params), grid, 1e-8).symmetric);
        CHECK(symmetric_condition(dq_of(params.with_m(0.0)), grid, 1e-10).symmetric);
    }
}

TEST_CASE("entry_diagonalize") {
    auto grid = imaginary_grid(0.05, 2.0, 15);
    SUBCASE("RL cross-coupled impedance: lambda_-+ = Z(s +-+ j w_p)") {
        const double wp = 0.8, L = 0.2, R = 0.05;
        ReducedHtf2x2 g;
        g.frame = Frame::dq;
        g.eval = [wp, L, R](Complex s) -> CMatrix2 {
            CMatrix2 z;
            z << s * L + R, -wp * L, wp * L, s * L + R;
            return z;
        };
        EntryDiagonalization d = entry_diagonalize(g, grid);
        for (Complex s : {Complex(0.0, 0.3), Complex(0.1, -0.2), Complex(0.0, 1.1)}) {
            CHECK(std::abs(d.lambda_plus(s) - ((s - jj * wp) * L + R)) < 1e-14);
            CHECK(std::abs(d.lambda_minus(s) - ((s + jj * wp) * L + R)) < 1e-14);
        }
    }
    SUBCASE("G_dq == 0 degenerates to lambda+ = lambda-") {
        ReducedHtf2x2 g;
        g.frame = Frame::dq;
        g.eval = [](Complex s) -> CMatrix2 {
            CMatrix2 z = CMatrix2::Zero();
            z(0, 0) = z(1, 1) = 1.0 / (s + 1.0);
            return z;
        };
        EntryDiagonalization d = entry_diagonalize(g, grid);
        const Complex s(0.0, 0.4);
        CHECK(d.lambda_plus(s) == d.lambda_minus(s));
    }
    SUBCASE("matches numeric eigenvalues and left eigenvectors at random points") {
        std::mt19937 rng(42);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            const Complex gdd(u(rng), u(rng)), gdq(u(rng), u(rng));
            ReducedHtf2x2 g;
            g.frame = Frame::dq;
            g.eval = [gdd, gdq](Complex) -> CMatrix2 {
                CMatrix2 m;
                m << gdd, gdq, -gdq, gdd;
                return m;
            };
            EntryDiagonalization d = entry_diagonalize(g, {Complex(0, 0)});
            const CMatrix2 m = g.eval(Complex(0, 0));
            Eigen::ComplexEigenSolver<CMatrix2> eig(m);
            std::vector<Complex> numeric{eig.eigenvalues()(0), eig.eigenvalues()(1)};
            std::vector<Complex> ours{d.lambda_plus(Complex(0, 0)),
                                      d.lambda_minus(Complex(0, 0))};
            auto err = [&](bool swap) {
                return std::abs(numeric[0] - ours[swap ? 1 : 0]) +
                       std::abs(numeric[1] - ours[swap ? 0 : 1]);
            };
            CHECK(std::min(err(false), err(true)) < 1e-12);
            // Left eigenvector identity xi^T M = lambda xi^T.
            CHECK((d.xi_plus.transpose() * m - ours[0] * d.xi_plus.transpose())
                      .cwiseAbs().maxCoeff() < 1e-12);
            CHECK((d.xi_minus.transpose() * m - ours[1] * d.xi_minus.transpose())
                      .cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    SUBCASE("asymmetric input is rejected") {
        ReducedHtf2x2 g;
        g.frame = Frame::dq;
        g.eval = [](Complex) -> CMatrix2 {
            CMatrix2 m;
            m << Complex(1.0, 0), Complex(0.5, 0), Complex(0.5, 0), Complex(1.0, 0);
            return m;
        };
        CHECK_THROWS_AS(entry_diagonalize(g, {Complex(0, 0)}), input_error);
    }
}

TEST_CASE("entry diagonalization reassembly and conjugate pairing") {
    const double wp = 1.0, L = 0.091, R = 0.015;
    ReducedHtf2x2 g;
    g.frame = Frame::dq;
    g.eval = [wp, L, R](Complex s) -> CMatrix2 {
        CMatrix2 z;
        z << s * L + R, -wp * L, wp * L, s * L + R;
        return z;
    };
    auto grid = imaginary_grid(0.05, 2.0, 15);
    EntryDiagonalization d = entry_diagonalize(g, grid);

    CMatrix2 tj, tj_inv;
    tj << Complex(1, 0), jj, Complex(1, 0), -jj;
    tj_inv << Complex(0.5, 0), Complex(0.5, 0), -0.5 * jj, 0.5 * jj;
    for (Complex s : grid) {
        // Reassembling T_j^{-1} diag T_j reproduces G_dq.  The + channel (row
        // (1, j) of T_j) carries lambda_minus per the left-eigenvector pairing.
        CMatrix2 diag = CMatrix2::Zero();
        diag(0, 0) = d.lambda_minus(s);
        diag(1, 1) = d.lambda_plus(s);
        CMatrix2 back = tj_inv * diag * tj;
        CHECK((back - g.eval(s)).cwiseAbs().maxCoeff() < 1e-12);
        // Conjugate pairing at conjugate frequencies for real-coefficient G.
        CHECK(std::abs(d.lambda_minus(s) - std::conj(d.lambda_plus(std::conj(s)))) < 1e-12);
    }
}

TEST_CASE("constant-transform similarity preserves the full truncated spectrum") {
    // T_j has bandwidth 0, so its embedding is an exact (block-diagonal)
    // similarity of the truncated matrix: every eigenvalue is preserved.
    LtpStateSpace model = build_vsi_hss(VsiParams{});
    const double wp = model.base_freq();
    const int h = 6;
    HtfSlice g = htf_evaluate(model, Complex(0.0, 0.29), h);
    HtfSlice t = similarity(g, FrameTransform::complex_mix(wp));
    Eigen::ComplexEigenSolver<CMatrix> eg(g.matrix()), et(t.matrix());
    const int dim = static_cast<int>(g.matrix().rows());
    std::vector<Complex> ev_g, ev_t;
    for (int i = 0; i < dim; ++i) {
        ev_g.push_back(eg.eigenvalues()(i));
        ev_t.push_back(et.eigenvalues()(i));
    }
    auto order = [](Complex a, Complex b) {
        if (std::abs(a.real() - b.real()) > 1e-12) return a.real() < b.real();
        return a.imag() < b.imag();
    };
    std::sort(ev_g.begin(), ev_g.end(), order);
    std::sort(ev_t.begin(), ev_t.end(), order);
    for (int i = 0; i < dim; ++i)
        CHECK(std::abs(ev_g[i] - ev_t[i]) < 1e-8 * std::max(1.0, std::abs(ev_g[i])));
}
