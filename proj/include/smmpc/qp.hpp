#pragma once

#include <Eigen/Dense>

namespace smmpc::qp {

enum class Status { Optimal, Infeasible, MaxIter };

const char* to_string(Status s);

// min 1/2 x^T H x + f^T x
// s.t. Aeq x = beq, lb <= x <= ub, ylb <= Cout x + dout <= yub.
// Empty vectors/matrices mean the block is absent; +-inf entries disable
// individual bounds. H must be symmetric PSD; if its Cholesky factorization
// fails, an escalating diagonal jitter (starting at 1e-12 * trace/n) is
// applied and reported in Solution::jitter.
struct Problem {
    Eigen::MatrixXd H;
    Eigen::VectorXd f;
    Eigen::MatrixXd Aeq;
    Eigen::VectorXd beq;
    Eigen::VectorXd lb, ub;
    Eigen::MatrixXd Cout;
    Eigen::VectorXd dout;
    Eigen::VectorXd ylb, yub;
};

struct Solution {
    Eigen::VectorXd x;
    Status status = Status::Optimal;
    int iterations = 0;
    double kkt_residual = 0.0;     // stationarity + primal feasibility, scaled by 1 + ||f||
    double comp_slackness = 0.0;   // max |u_i * slack_i| over active inequalities
    double jitter = 0.0;
};

// Unconstrained and equality-only problems are solved in closed form;
// inequality-constrained problems by the dual active-set method of
// Goldfarb and Idnani (equalities are entered first and never leave the
// active set). Inconsistent bounds give Status::Infeasible, never a
// clipped answer.
Solution solve(const Problem& p);

}  // namespace smmpc::qp
