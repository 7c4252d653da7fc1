#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>

#include "smmpc/signal_matrix.hpp"

namespace smmpc {

// Equality constraints of the ridge problem are numerically singular
// (input data not persistently exciting, or degenerate forgetting).
class SingularKktError : public std::runtime_error {
  public:
    SingularKktError(const std::string& what, double condition)
        : std::runtime_error(what), condition_estimate(condition) {}
    double condition_estimate;
};

struct KktResult {
    Eigen::VectorXd g;
    double residual = 0.0;        // KKT residual relative to 1 + ||rhs||
    bool rank_deficient = false;  // constraint block lost row rank; the solve
                                  // used the minimum-norm multiplier
    double condition = 1.0;       // condition estimate of the Schur complement
};

// Affine solution map of one warm-started ridge iterate:
// g = Pmat * y_ini + Qmat * col(u_ini, u_hat).
struct SmmLinearization {
    Eigen::MatrixXd Pmat;     // M x L0
    Eigen::MatrixXd Qmat;     // M x L
    Eigen::VectorXd g_warm;   // warm start the map was linearized at
    double lambda = 0.0;      // ridge weight actually used (after flooring)
    double kkt_residual = 0.0;
    bool rank_deficient = false;
    double condition = 1.0;
};

struct CovarianceModel {
    Eigen::MatrixXd Sigma_y;  // L x L
};

struct Prediction {
    Eigen::VectorXd y_hat;  // length Lp
    double variance = 0.0;  // sigma2 * ||g||^2, the diagonal of Sigma_{y_f}
};

struct SmmIterateResult {
    Eigen::VectorXd g;
    int iterations = 0;
    bool converged = false;
    bool rank_deficient = false;
};

// Unique minimizer of lambda ||g||^2 + ||Yp g - y_ini||^2 subject to
// U g = u_stack, by block elimination of the KKT system. U may have zero
// rows (pure ridge). A row-rank-deficient U is reported through the result
// flags together with a condition estimate; the solve then satisfies the
// feasible part of the constraints with the minimum-norm multiplier.
KktResult kkt_solve(double lambda, const Eigen::MatrixXd& U, const Eigen::MatrixXd& Yp,
                    const Eigen::VectorXd& u_stack, const Eigen::VectorXd& y_ini);

// lambda(g) = Lp * sigma2_p / ||g||^2 + L * sigma2.
double lambda_update(double g_sq_norm, const NoiseSpec& noise, int L, int Lp);
double lambda_update(const Eigen::VectorXd& g, const NoiseSpec& noise, int L, int Lp);

// Floor keeping the KKT system well posed in the noise-free limit:
// 1e-8 * trace(Yp^T Yp) / M.
double lambda_floor(const SignalMatrix& sm);

// Fixed-point iteration g^{k+1} = kkt_solve(lambda(g^k), ...) until the
// relative change drops below tol. With sigma2_p = 0 the weight does not
// depend on g and a single solve is exact.
SmmIterateResult smm_iterate(const SignalMatrix& sm, const NoiseSpec& noise,
                             const Eigen::VectorXd& u_ini, const Eigen::VectorXd& y_ini,
                             const Eigen::VectorXd& u_hat, const Eigen::VectorXd& g0,
                             double tol = 1e-6, int max_iter = 50);

// Solution map of the single ridge iterate at warm start g_prev.
SmmLinearization linearize(const SignalMatrix& sm, const NoiseSpec& noise,
                           const Eigen::VectorXd& g_prev);
// Same map when only the squared norm of the warm start is retained
// (the warm-start vector enters the iterate through its norm alone).
SmmLinearization linearize(const SignalMatrix& sm, const NoiseSpec& noise,
                           double g_prev_sq_norm);

Prediction predict(const SignalMatrix& sm, const Eigen::VectorXd& g, const NoiseSpec& noise);

// Output covariance of col(eps_y, y_hat) given g:
// (Sigma_y)_{ij} = sigma2 * sum_k g_k g_{k+|i-j|}, plus sigma2_p on the
// first L0 diagonal entries.
CovarianceModel covariance(const Eigen::VectorXd& g, const NoiseSpec& noise, int L0, int L);

// Pseudo-inverse warm start: g = pinv(col(Up, Yp, Yf)) col(u0, y0, r0).
Eigen::VectorXd init_g(const SignalMatrix& sm, const Eigen::VectorXd& u0,
                       const Eigen::VectorXd& y0, const Eigen::VectorXd& r0);

// ||y_lin - y_smm|| / ||y_smm||; nullopt when the denominator vanishes
// (excluded from statistics by callers).
std::optional<double> discrepancy(const Eigen::VectorXd& y_lin, const Eigen::VectorXd& y_smm);

// Log-likelihood objective logdet(Sigma_y) + col(eps_y, 0)^T Sigma_y^{-1}
// col(eps_y, 0); diagnostics only, throws if Sigma_y is not positive
// definite.
double ml_objective(const SignalMatrix& sm, const NoiseSpec& noise,
                    const Eigen::VectorXd& g, const Eigen::VectorXd& y_ini);

}  // namespace smmpc
