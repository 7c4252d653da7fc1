#include "doctest.h"

#include <random>

#include "smmpc/smm.hpp"

using namespace smmpc;

namespace {

SignalMatrix example1_sm(std::uint64_t seed = 1) {
    const DataRecord rec =
        generate_data(tf_to_ss(benchmark_plant()), 50, NoiseSpec{0.1, 0.1}, seed);
    return build(rec, 4, 10);
}

Eigen::VectorXd random_vec(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> d(0.0, 1.0);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = d(rng);
    return v;
}

}  // namespace

TEST_CASE("kkt_solve with a square invertible constraint ignores the objective") {
    std::mt19937_64 rng(3);
    const int n = 5;
    Eigen::MatrixXd U = Eigen::MatrixXd::Identity(n, n);
    U += 0.3 * Eigen::MatrixXd::NullaryExpr(n, n, [&](Eigen::Index, Eigen::Index) {
             return std::normal_distribution<double>(0, 1)(rng);
         });
    const Eigen::VectorXd u_stack = random_vec(rng, n);
    const Eigen::MatrixXd Yp = Eigen::MatrixXd::Random(3, n);
    const Eigen::VectorXd y_ini = Eigen::VectorXd::Random(3);
    for (double lambda : {1e-6, 1.0, 1e4}) {
        const KktResult res = kkt_solve(lambda, U, Yp, u_stack, y_ini);
        CHECK((U * res.g - u_stack).lpNorm<Eigen::Infinity>() < 1e-8);
        CHECK((res.g - U.lu().solve(u_stack)).lpNorm<Eigen::Infinity>() < 1e-6);
    }
}

TEST_CASE("kkt_solve pure ridge matches the hand-solved normal equations") {
    // min ||g||^2 + (g1 + g2 - 2)^2  ->  g = (2/3, 2/3).
    Eigen::MatrixXd Yp(1, 2);
    Yp << 1.0, 1.0;
    Eigen::VectorXd y_ini(1);
    y_ini << 2.0;
    const KktResult res =
        kkt_solve(1.0, Eigen::MatrixXd(0, 2), Yp, Eigen::VectorXd(0), y_ini);
    CHECK(res.g(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(res.g(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(res.residual < 1e-12);
}

TEST_CASE("large lambda drives the solution to the minimum-norm interpolant") {
    const SignalMatrix sm = example1_sm();
    std::mt19937_64 rng(17);
    const Eigen::VectorXd u_stack = random_vec(rng, sm.L());
    const Eigen::VectorXd y_ini = random_vec(rng, sm.L0);
    const KktResult res = kkt_solve(1e8, sm.U, sm.Yp(), u_stack, y_ini);
    // Oracle: pseudo-inverse solution of U g = u_stack.
    const Eigen::VectorXd pinv_sol =
        sm.U.completeOrthogonalDecomposition().pseudoInverse() * u_stack;
    CHECK((res.g - pinv_sol).norm() / pinv_sol.norm() < 1e-4);
}

TEST_CASE("kkt_solve satisfies the residual contract on random instances") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const int M = 10 + static_cast<int>(rng() % 20);
        const int L = 3 + static_cast<int>(rng() % 5);
        const int L0 = 2;
        Eigen::MatrixXd U(L, M), Yp(L0, M);
        for (int i = 0; i < L; ++i) U.row(i) = random_vec(rng, M).transpose();
        for (int i = 0; i < L0; ++i) Yp.row(i) = random_vec(rng, M).transpose();
        const Eigen::VectorXd u_stack = random_vec(rng, L);
        const Eigen::VectorXd y_ini = random_vec(rng, L0);
        const double lambda = std::pow(10.0, -3.0 + 6.0 * (rng() % 100) / 100.0);
        const KktResult res = kkt_solve(lambda, U, Yp, u_stack, y_ini);
        REQUIRE(res.residual < 1e-8);
        REQUIRE((U * res.g - u_stack).lpNorm<Eigen::Infinity>() <
                1e-8 * (1.0 + u_stack.norm()));
    }
}

TEST_CASE("rank-deficient constraints are reported with a condition estimate") {
    Eigen::MatrixXd U(2, 4);
    U.row(0) << 1, 2, 3, 4;
    U.row(1) = 2.0 * U.row(0);
    const Eigen::MatrixXd Yp = Eigen::MatrixXd::Identity(2, 4);

    // Consistent right-hand side: the minimum-norm multiplier still meets
    // the constraint, and the deficiency is flagged.
    Eigen::VectorXd consistent(2);
    consistent << 1.0, 2.0;
    const KktResult ok = kkt_solve(1.0, U, Yp, consistent, Eigen::VectorXd::Zero(2));
    CHECK(ok.rank_deficient);
    CHECK(ok.condition > 1e10);
    CHECK((U * ok.g - consistent).lpNorm<Eigen::Infinity>() < 1e-8);
    CHECK(ok.g.allFinite());

    // Inconsistent right-hand side: reported, never a wild solution.
    Eigen::VectorXd inconsistent(2);
    inconsistent << 1.0, 3.0;
    const KktResult bad = kkt_solve(1.0, U, Yp, inconsistent, Eigen::VectorXd::Zero(2));
    CHECK(bad.rank_deficient);
    CHECK(bad.g.allFinite());
    CHECK(bad.residual > 1e-8);  // the violation is visible, not hidden
}

TEST_CASE("lambda_update evaluates the noise-weighted ridge formula") {
    CHECK(lambda_update(2.0, NoiseSpec{0.1, 0.1}, 14, 10) == doctest::Approx(1.9).epsilon(1e-12));
    CHECK(lambda_update(2.0, NoiseSpec{0.0, 0.0}, 14, 10) == 0.0);
    // sigma2_p = 0: independent of g.
    CHECK(lambda_update(1e-30, NoiseSpec{0.3, 0.0}, 14, 10) ==
          doctest::Approx(14 * 0.3).epsilon(1e-12));
    CHECK_THROWS_AS(lambda_update(0.0, NoiseSpec{0.1, 0.1}, 14, 10), std::invalid_argument);
}

TEST_CASE("smm_iterate converges in one solve when sigma2_p = 0") {
    const SignalMatrix sm = example1_sm();
    std::mt19937_64 rng(5);
    const SmmIterateResult res =
        smm_iterate(sm, NoiseSpec{0.1, 0.0}, random_vec(rng, 4), random_vec(rng, 4),
                    random_vec(rng, 10), Eigen::VectorXd::Zero(sm.cols()));
    CHECK(res.iterations == 1);
    CHECK(res.converged);
}

TEST_CASE("smm_iterate converges within 30 iterations on Example-1 instances") {
    int converged_fast = 0;
    const int trials = 20;
    std::mt19937_64 rng(31);
    for (int t = 0; t < trials; ++t) {
        const SignalMatrix sm = example1_sm(100 + t);
        const NoiseSpec noise{0.1, 0.1};
        const Eigen::VectorXd u_ini = random_vec(rng, 4);
        const Eigen::VectorXd y_ini = random_vec(rng, 4);
        const Eigen::VectorXd u_hat = random_vec(rng, 10);
        const Eigen::VectorXd g0 = init_g(sm, u_ini, y_ini, u_hat);
        const SmmIterateResult res = smm_iterate(sm, noise, u_ini, y_ini, u_hat, g0);
        if (res.converged && res.iterations <= 30) ++converged_fast;
    }
    CHECK(converged_fast >= trials * 95 / 100);
}

TEST_CASE("noise-free SMM reproduces the exact continuation") {
    const StateSpace ss = tf_to_ss(benchmark_plant());
    const NoiseSpec nf{0.0, 0.0};
    const DataRecord rec = generate_data(ss, 60, nf, 2);
    REQUIRE(pe_order(rec.u, 18));
    const SignalMatrix sm = build(rec, 4, 10);

    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        // A consistent past window from a random state.
        const Eigen::VectorXd x_start = random_vec(rng, 4);
        const Eigen::VectorXd u_past = random_vec(rng, 4);
        NormalStream dummy(1, 0, StreamRole::DataNoise);
        const SimResult past = simulate(ss, u_past, x_start, nf, dummy);
        const Eigen::VectorXd u_hat = random_vec(rng, 10);
        const SimResult future = simulate(ss, u_hat, past.x_final, nf, dummy);

        const SmmIterateResult res = smm_iterate(sm, nf, u_past, past.y0, u_hat,
                                                 Eigen::VectorXd::Zero(sm.cols()));
        const Eigen::VectorXd y_hat = sm.Yf() * res.g;
        REQUIRE((y_hat - future.y0).norm() / future.y0.norm() < 1e-6);
    }
}

TEST_CASE("linearize reproduces kkt_solve as an affine map") {
    const SignalMatrix sm = example1_sm();
    const NoiseSpec noise{0.1, 0.1};
    std::mt19937_64 rng(11);
    const Eigen::VectorXd g_prev = random_vec(rng, sm.cols());
    const SmmLinearization lin = linearize(sm, noise, g_prev);
    CHECK(lin.Pmat.rows() == sm.cols());
    CHECK(lin.Pmat.cols() == sm.L0);
    CHECK(lin.Qmat.cols() == sm.L());
    CHECK(lin.kkt_residual < 1e-8);

    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::VectorXd y_ini = random_vec(rng, sm.L0);
        const Eigen::VectorXd u_stack = random_vec(rng, sm.L());
        const Eigen::VectorXd mapped = lin.Pmat * y_ini + lin.Qmat * u_stack;
        const KktResult direct = kkt_solve(lin.lambda, sm.U, sm.Yp(), u_stack, y_ini);
        REQUIRE((mapped - direct.g).lpNorm<Eigen::Infinity>() < 1e-10);
    }
}

TEST_CASE("linearize on a square invertible U gives P = 0, Q = U^-1") {
    std::mt19937_64 rng(13);
    SignalMatrix sm;
    sm.L0 = 2;
    sm.Lp = 2;
    sm.U = Eigen::MatrixXd::Identity(4, 4) + 0.2 * Eigen::MatrixXd::Random(4, 4);
    sm.Y = Eigen::MatrixXd::Random(4, 4);
    const SmmLinearization lin = linearize(sm, NoiseSpec{0.1, 0.0}, 1.0);
    CHECK(lin.Pmat.lpNorm<Eigen::Infinity>() < 1e-8);
    CHECK((sm.U * lin.Qmat - Eigen::MatrixXd::Identity(4, 4)).lpNorm<Eigen::Infinity>() < 1e-8);
    (void)rng;
}

TEST_CASE("one linearized map application equals one fixed-point iteration") {
    const SignalMatrix sm = example1_sm();
    const NoiseSpec noise{0.1, 0.1};
    std::mt19937_64 rng(19);
    const Eigen::VectorXd g_prev = random_vec(rng, sm.cols());
    const Eigen::VectorXd u_ini = random_vec(rng, 4);
    const Eigen::VectorXd y_ini = random_vec(rng, 4);
    const Eigen::VectorXd u_hat = random_vec(rng, 10);

    const SmmLinearization lin = linearize(sm, noise, g_prev);
    Eigen::VectorXd stack(14);
    stack << u_ini, u_hat;
    const Eigen::VectorXd mapped = lin.Pmat * y_ini + lin.Qmat * stack;

    const SmmIterateResult one =
        smm_iterate(sm, noise, u_ini, y_ini, u_hat, g_prev, 1e308, 1);
    CHECK((mapped - one.g).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("predict reads columns of Yf and the variance model") {
    const SignalMatrix sm = example1_sm();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(sm.cols());
    g(7) = 1.0;
    const NoiseSpec noise{0.1, 0.1};
    const Prediction p = predict(sm, g, noise);
    CHECK((p.y_hat - sm.Yf().col(7)).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(p.variance == doctest::Approx(0.1).epsilon(1e-12));

    const Prediction nf = predict(sm, g, NoiseSpec{0.0, 0.0});
    CHECK(nf.variance == 0.0);

    // Variance equals the diagonal of the covariance's future block.
    std::mt19937_64 rng(29);
    const Eigen::VectorXd gr = random_vec(rng, sm.cols());
    const Prediction pr = predict(sm, gr, noise);
    const CovarianceModel cov = covariance(gr, noise, sm.L0, sm.L());
    for (int i = sm.L0; i < sm.L(); ++i) {
        REQUIRE(cov.Sigma_y(i, i) == doctest::Approx(pr.variance).epsilon(1e-12));
    }
}

TEST_CASE("covariance matches the direct evaluation on a tiny case") {
    Eigen::VectorXd g(3);
    g << 1.0, 0.0, 0.0;
    const CovarianceModel cov = covariance(g, NoiseSpec{0.5, 0.2}, 1, 2);
    CHECK(cov.Sigma_y(0, 0) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(cov.Sigma_y(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(cov.Sigma_y(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cov.Sigma_y(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("covariance of g = 0 keeps only the measurement-noise diagonal") {
    const CovarianceModel cov = covariance(Eigen::VectorXd::Zero(5), NoiseSpec{0.3, 0.4}, 2, 6);
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
            REQUIRE(cov.Sigma_y(i, j) == (i == j && i < 2 ? 0.4 : 0.0));
        }
    }
}

TEST_CASE("covariance is symmetric positive semidefinite for random g") {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 100; ++trial) {
        const int M = 5 + static_cast<int>(rng() % 30);
        const Eigen::VectorXd g = random_vec(rng, M);
        const CovarianceModel cov = covariance(g, NoiseSpec{0.7, 0.1}, 4, 14);
        REQUIRE((cov.Sigma_y - cov.Sigma_y.transpose()).lpNorm<Eigen::Infinity>() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov.Sigma_y, Eigen::EigenvaluesOnly);
        REQUIRE(es.eigenvalues().minCoeff() >= -1e-10);
    }
}

TEST_CASE("init_g is the pseudo-inverse solution") {
    const SignalMatrix sm = example1_sm();
    std::mt19937_64 rng(41);
    const Eigen::VectorXd u0 = random_vec(rng, 4);
    const Eigen::VectorXd y0 = random_vec(rng, 4);
    const Eigen::VectorXd r0 = random_vec(rng, 10);
    const Eigen::VectorXd g = init_g(sm, u0, y0, r0);

    Eigen::MatrixXd stacked(18, sm.cols());
    stacked.topRows(4) = sm.Up();
    stacked.middleRows(4, 4) = sm.Yp();
    stacked.bottomRows(10) = sm.Yf();
    Eigen::VectorXd rhs(18);
    rhs << u0, y0, r0;
    // Oracle via a different decomposition.
    const Eigen::VectorXd oracle =
        stacked.completeOrthogonalDecomposition().pseudoInverse() * rhs;
    CHECK((g - oracle).lpNorm<Eigen::Infinity>() < 1e-8);

    // Warm-start weight is finite and positive on the Example-1 setup.
    const double lambda = lambda_update(g, NoiseSpec{0.1, 0.1}, sm.L(), sm.Lp);
    CHECK(std::isfinite(lambda));
    CHECK(lambda > 0.0);
}

TEST_CASE("discrepancy ratio") {
    Eigen::VectorXd a(3), b(3);
    a << 1, 2, 3;
    b = a;
    CHECK(*discrepancy(a, b) == 0.0);
    CHECK(*discrepancy(2.0 * a, a) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_FALSE(discrepancy(a, Eigen::VectorXd::Zero(3)).has_value());
    CHECK_THROWS_AS(discrepancy(a, Eigen::VectorXd::Zero(2)), std::invalid_argument);
}

TEST_CASE("ml objective is finite and penalizes bad fits") {
    const SignalMatrix sm = example1_sm();
    const NoiseSpec noise{0.1, 0.1};
    std::mt19937_64 rng(43);
    const Eigen::VectorXd u_ini = random_vec(rng, 4);
    const Eigen::VectorXd y_ini = random_vec(rng, 4);
    const Eigen::VectorXd u_hat = random_vec(rng, 10);
    const Eigen::VectorXd g0 = init_g(sm, u_ini, y_ini, u_hat);
    const SmmIterateResult fit = smm_iterate(sm, noise, u_ini, y_ini, u_hat, g0);

    const double at_fit = ml_objective(sm, noise, fit.g, y_ini);
    CHECK(std::isfinite(at_fit));
    const double off_fit = ml_objective(sm, noise, fit.g, y_ini.array() + 10.0);
    CHECK(off_fit > at_fit);
}
