#include "smmpc/smm.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace smmpc {

namespace {

constexpr double kSingularRatio = 1e-12;

// Factorization of H = lambda I + Yp^T Yp together with the Schur
// complement S = U H^{-1} U^T of the constraint block. A row-rank-deficient
// U (persistency of excitation lost) is handled by a spectral cutoff on S:
// the solve then uses the minimum-norm multiplier, and the deficiency is
// reported through `rank_deficient` and `condition` rather than by a wild
// solution.
struct KktFactors {
    Eigen::LLT<Eigen::MatrixXd> H_llt;
    Eigen::MatrixXd HinvUt;  // H^{-1} U^T, M x L
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> S_eig;
    bool rank_deficient = false;
    double condition = 1.0;

    Eigen::MatrixXd schur_solve(const Eigen::MatrixXd& rhs) const {
        const Eigen::VectorXd& ev = S_eig.eigenvalues();
        const double cutoff = std::max(ev.maxCoeff(), 0.0) * kSingularRatio;
        Eigen::MatrixXd w = S_eig.eigenvectors().transpose() * rhs;
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            if (ev(i) > cutoff) {
                w.row(i) /= ev(i);
            } else {
                w.row(i).setZero();
            }
        }
        return S_eig.eigenvectors() * w;
    }
};

KktFactors factor_kkt(double lambda, const Eigen::MatrixXd& U, const Eigen::MatrixXd& Yp) {
    Eigen::MatrixXd H = Yp.transpose() * Yp;
    H.diagonal().array() += lambda;
    KktFactors f;
    f.H_llt.compute(H);
    if (f.H_llt.info() != Eigen::Success) {
        throw SingularKktError("kkt_solve: ridge Hessian not positive definite (lambda=" +
                                   std::to_string(lambda) + ")",
                               std::numeric_limits<double>::infinity());
    }
    if (U.rows() > 0) {
        f.HinvUt = f.H_llt.solve(U.transpose());
        f.S_eig.compute(U * f.HinvUt);
        const double emax = f.S_eig.eigenvalues().maxCoeff();
        const double emin = f.S_eig.eigenvalues().minCoeff();
        f.rank_deficient = !(emax > 0.0) || emin <= kSingularRatio * emax;
        f.condition = emin > 0.0 ? emax / emin : std::numeric_limits<double>::infinity();
    }
    return f;
}

double kkt_residual_norm(double lambda, const Eigen::MatrixXd& U, const Eigen::MatrixXd& Yp,
                         const Eigen::VectorXd& u_stack, const Eigen::VectorXd& y_ini,
                         const Eigen::VectorXd& g, const Eigen::VectorXd& nu) {
    // Stationarity: (lambda I + Yp^T Yp) g + U^T nu = Yp^T y_ini.
    Eigen::VectorXd rhs_top = Yp.transpose() * y_ini;
    Eigen::VectorXd r_top = lambda * g + Yp.transpose() * (Yp * g) - rhs_top;
    if (U.rows() > 0) r_top += U.transpose() * nu;
    double sq = r_top.squaredNorm();
    double rhs_sq = rhs_top.squaredNorm();
    if (U.rows() > 0) {
        sq += (U * g - u_stack).squaredNorm();
        rhs_sq += u_stack.squaredNorm();
    }
    return std::sqrt(sq) / (1.0 + std::sqrt(rhs_sq));
}

}  // namespace

KktResult kkt_solve(double lambda, const Eigen::MatrixXd& U, const Eigen::MatrixXd& Yp,
                    const Eigen::VectorXd& u_stack, const Eigen::VectorXd& y_ini) {
    if (!(lambda > 0.0)) {
        throw std::invalid_argument("kkt_solve: lambda must be positive");
    }
    if (U.rows() != u_stack.size() || Yp.rows() != y_ini.size()) {
        throw std::invalid_argument("kkt_solve: right-hand side dimensions do not match");
    }
    if (U.rows() > 0 && U.cols() != Yp.cols()) {
        throw std::invalid_argument("kkt_solve: U and Yp must have the same column count");
    }
    const KktFactors f = factor_kkt(lambda, U, Yp);
    const Eigen::VectorXd rhs_top = Yp.transpose() * y_ini;

    KktResult out;
    Eigen::VectorXd nu;
    if (U.rows() == 0) {
        out.g = f.H_llt.solve(rhs_top);
    } else {
        const Eigen::VectorXd h_rhs = f.H_llt.solve(rhs_top);
        nu = f.schur_solve(U * h_rhs - u_stack);
        out.g = h_rhs - f.HinvUt * nu;
        out.rank_deficient = f.rank_deficient;
        out.condition = f.condition;
    }
    out.residual = kkt_residual_norm(lambda, U, Yp, u_stack, y_ini, out.g, nu);
    return out;
}

double lambda_update(double g_sq_norm, const NoiseSpec& noise, int L, int Lp) {
    if (noise.sigma2_p > 0.0 && !(g_sq_norm > 0.0)) {
        throw std::invalid_argument("lambda_update: zero warm start with sigma2_p > 0");
    }
    const double past_term = noise.sigma2_p > 0.0 ? Lp * noise.sigma2_p / g_sq_norm : 0.0;
    return past_term + L * noise.sigma2;
}

double lambda_update(const Eigen::VectorXd& g, const NoiseSpec& noise, int L, int Lp) {
    return lambda_update(g.squaredNorm(), noise, L, Lp);
}

double lambda_floor(const SignalMatrix& sm) {
    const double tr = sm.Yp().squaredNorm();
    return 1e-8 * tr / static_cast<double>(sm.cols());
}

SmmIterateResult smm_iterate(const SignalMatrix& sm, const NoiseSpec& noise,
                             const Eigen::VectorXd& u_ini, const Eigen::VectorXd& y_ini,
                             const Eigen::VectorXd& u_hat, const Eigen::VectorXd& g0,
                             double tol, int max_iter) {
    const int L = sm.L();
    if (u_ini.size() != sm.L0 || y_ini.size() != sm.L0 || u_hat.size() != sm.Lp) {
        throw std::invalid_argument("smm_iterate: window lengths do not match the partition");
    }
    Eigen::VectorXd u_stack(L);
    u_stack << u_ini, u_hat;
    const double floor = lambda_floor(sm);

    SmmIterateResult out;
    if (noise.sigma2_p == 0.0) {
        // lambda does not depend on g; one solve is the fixed point.
        const double lambda = std::max(lambda_update(0.0, noise, L, sm.Lp), floor);
        KktResult res = kkt_solve(lambda, sm.U, sm.Yp(), u_stack, y_ini);
        out.g = std::move(res.g);
        out.rank_deficient = res.rank_deficient;
        out.iterations = 1;
        out.converged = true;
        return out;
    }

    Eigen::VectorXd g = g0;
    for (int k = 0; k < max_iter; ++k) {
        const double lambda = std::max(lambda_update(g, noise, L, sm.Lp), floor);
        KktResult step = kkt_solve(lambda, sm.U, sm.Yp(), u_stack, y_ini);
        out.rank_deficient = out.rank_deficient || step.rank_deficient;
        const double denom = g.norm();
        const double change = denom > 0.0 ? (step.g - g).norm() / denom : 1.0;
        g = std::move(step.g);
        out.iterations = k + 1;
        if (change < tol) {
            out.converged = true;
            break;
        }
    }
    out.g = std::move(g);
    return out;
}

SmmLinearization linearize(const SignalMatrix& sm, const NoiseSpec& noise,
                           double g_prev_sq_norm) {
    const int L = sm.L();
    const double lambda =
        std::max(lambda_update(g_prev_sq_norm, noise, L, sm.Lp), lambda_floor(sm));
    const KktFactors f = factor_kkt(lambda, sm.U, sm.Yp());

    // g(y_ini, u_stack) = P y_ini + Q u_stack with
    //   Q = H^{-1} U^T S^{-1},
    //   P = (I - Q U) H^{-1} Yp^T.
    SmmLinearization lin;
    lin.Qmat = f.schur_solve(f.HinvUt.transpose()).transpose();
    const Eigen::MatrixXd Z = f.H_llt.solve(sm.Yp().transpose());  // M x L0
    lin.Pmat = Z - lin.Qmat * (sm.U * Z);
    lin.lambda = lambda;
    lin.rank_deficient = f.rank_deficient;
    lin.condition = f.condition;

    // Feasibility of the map: U Q = I, U P = 0. Exceeding 1e-8 here means
    // the excitation condition failed; the flag above carries the report.
    lin.kkt_residual =
        std::max((sm.U * lin.Qmat - Eigen::MatrixXd::Identity(L, L)).cwiseAbs().maxCoeff(),
                 (sm.U * lin.Pmat).cwiseAbs().maxCoeff());
    return lin;
}

SmmLinearization linearize(const SignalMatrix& sm, const NoiseSpec& noise,
                           const Eigen::VectorXd& g_prev) {
    SmmLinearization lin = linearize(sm, noise, g_prev.squaredNorm());
    lin.g_warm = g_prev;
    return lin;
}

Prediction predict(const SignalMatrix& sm, const Eigen::VectorXd& g, const NoiseSpec& noise) {
    if (g.size() != sm.cols()) {
        throw std::invalid_argument("predict: g has length " + std::to_string(g.size()) +
                                    ", expected " + std::to_string(sm.cols()));
    }
    Prediction p;
    p.y_hat = sm.Yf() * g;
    p.variance = noise.sigma2 * g.squaredNorm();
    return p;
}

CovarianceModel covariance(const Eigen::VectorXd& g, const NoiseSpec& noise, int L0, int L) {
    const Eigen::Index M = g.size();
    Eigen::VectorXd autocorr(L);
    for (int d = 0; d < L; ++d) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k + d < M; ++k) acc += g(k) * g(k + d);
        autocorr(d) = acc;
    }
    CovarianceModel cov;
    cov.Sigma_y.resize(L, L);
    for (int i = 0; i < L; ++i) {
        for (int j = 0; j < L; ++j) {
            cov.Sigma_y(i, j) = noise.sigma2 * autocorr(std::abs(i - j));
        }
    }
    for (int i = 0; i < L0; ++i) {
        cov.Sigma_y(i, i) += noise.sigma2_p;
    }
    return cov;
}

Eigen::VectorXd init_g(const SignalMatrix& sm, const Eigen::VectorXd& u0,
                       const Eigen::VectorXd& y0, const Eigen::VectorXd& r0) {
    if (u0.size() != sm.L0 || y0.size() != sm.L0 || r0.size() != sm.Lp) {
        throw std::invalid_argument("init_g: window lengths do not match the partition");
    }
    const int rows = 2 * sm.L0 + sm.Lp;
    Eigen::MatrixXd stacked(rows, sm.cols());
    stacked.topRows(sm.L0) = sm.Up();
    stacked.middleRows(sm.L0, sm.L0) = sm.Yp();
    stacked.bottomRows(sm.Lp) = sm.Yf();
    Eigen::VectorXd rhs(rows);
    rhs << u0, y0, r0;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(static_cast<double>(std::max(stacked.rows(), stacked.cols())) *
                     std::numeric_limits<double>::epsilon());
    return svd.solve(rhs);
}

std::optional<double> discrepancy(const Eigen::VectorXd& y_lin, const Eigen::VectorXd& y_smm) {
    if (y_lin.size() != y_smm.size()) {
        throw std::invalid_argument("discrepancy: length mismatch");
    }
    const double denom = y_smm.norm();
    if (denom == 0.0) return std::nullopt;
    return (y_lin - y_smm).norm() / denom;
}

double ml_objective(const SignalMatrix& sm, const NoiseSpec& noise,
                    const Eigen::VectorXd& g, const Eigen::VectorXd& y_ini) {
    const int L = sm.L();
    const CovarianceModel cov = covariance(g, noise, sm.L0, L);
    Eigen::LLT<Eigen::MatrixXd> llt(cov.Sigma_y);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("ml_objective: covariance not positive definite");
    }
    Eigen::VectorXd resid = Eigen::VectorXd::Zero(L);
    resid.head(sm.L0) = sm.Yp() * g - y_ini;
    double logdet = 0.0;
    const auto& Lmat = llt.matrixL();
    for (int i = 0; i < L; ++i) logdet += 2.0 * std::log(Lmat(i, i));
    return logdet + resid.dot(llt.solve(resid));
}

}  // namespace smmpc
