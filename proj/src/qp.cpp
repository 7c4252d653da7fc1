#include "smmpc/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace smmpc::qp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One linear constraint a^T x >= b (or = b). Equalities may enter the
// active set with a flipped normal and never leave it.
struct Row {
    Eigen::VectorXd a;
    double b = 0.0;
    bool equality = false;
};

struct ActiveEntry {
    int row = -1;
    double sign = 1.0;  // normal used at entry: sign * rows[row].a
    double u = 0.0;     // multiplier w.r.t. the entered normal
};

struct Workspace {
    Eigen::LLT<Eigen::MatrixXd> H_llt;
    double jitter = 0.0;
};

Workspace factor_hessian(const Eigen::MatrixXd& H) {
    Workspace w;
    w.H_llt.compute(H);
    if (w.H_llt.info() == Eigen::Success) return w;
    const Eigen::Index n = H.rows();
    const double scale = std::max(1.0, H.trace() / static_cast<double>(n));
    for (double jitter = 1e-12 * scale; jitter <= 1e-5 * scale; jitter *= 100.0) {
        Eigen::MatrixXd Hj = H;
        Hj.diagonal().array() += jitter;
        w.H_llt.compute(Hj);
        if (w.H_llt.info() == Eigen::Success) {
            w.jitter = jitter;
            return w;
        }
    }
    throw std::runtime_error("qp::solve: Hessian is not positive semidefinite");
}

void append_bound_rows(std::vector<Row>& rows, const Eigen::MatrixXd& C,
                       const Eigen::VectorXd& d, const Eigen::VectorXd& lo,
                       const Eigen::VectorXd& hi) {
    for (Eigen::Index i = 0; i < C.rows(); ++i) {
        const double offset = d.size() > 0 ? d(i) : 0.0;
        if (lo.size() > 0 && std::isfinite(lo(i))) {
            rows.push_back({C.row(i).transpose(), lo(i) - offset, false});
        }
        if (hi.size() > 0 && std::isfinite(hi(i))) {
            rows.push_back({-C.row(i).transpose(), -(hi(i) - offset), false});
        }
    }
}

// Closed-form equality-constrained solve by block elimination.
Eigen::VectorXd equality_solve(const Workspace& w, const Eigen::VectorXd& f,
                               const Eigen::MatrixXd& Aeq, const Eigen::VectorXd& beq) {
    const Eigen::VectorXd x_free = w.H_llt.solve(-f);
    if (Aeq.rows() == 0) return x_free;
    const Eigen::MatrixXd HinvAt = w.H_llt.solve(Aeq.transpose());
    const Eigen::MatrixXd S = Aeq * HinvAt;
    Eigen::LDLT<Eigen::MatrixXd> S_ldlt(S);
    const Eigen::VectorXd nu = S_ldlt.solve(Aeq * x_free - beq);
    return x_free - HinvAt * nu;
}

void finish_kkt(const Problem& p, const std::vector<Row>& rows,
                const std::vector<ActiveEntry>& active, Solution& sol) {
    Eigen::VectorXd grad = p.H * sol.x + p.f;
    for (const ActiveEntry& e : active) {
        grad -= e.u * e.sign * rows[static_cast<std::size_t>(e.row)].a;
    }
    double feas = 0.0;
    for (const Row& r : rows) {
        const double s = r.a.dot(sol.x) - r.b;
        feas = std::max(feas, r.equality ? std::abs(s) : std::max(0.0, -s));
    }
    sol.kkt_residual =
        (grad.lpNorm<Eigen::Infinity>() + feas) / (1.0 + p.f.lpNorm<Eigen::Infinity>());
    sol.comp_slackness = 0.0;
    for (const ActiveEntry& e : active) {
        const Row& r = rows[static_cast<std::size_t>(e.row)];
        if (r.equality) continue;
        sol.comp_slackness =
            std::max(sol.comp_slackness, std::abs(e.u * (r.a.dot(sol.x) - r.b)));
    }
}

}  // namespace

const char* to_string(Status s) {
    switch (s) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::MaxIter: return "max_iter";
    }
    return "unknown";
}

Solution solve(const Problem& p) {
    const Eigen::Index n = p.H.rows();
    if (p.H.cols() != n || p.f.size() != n) {
        throw std::invalid_argument("qp::solve: H/f dimensions inconsistent");
    }

    Solution sol;
    // Inconsistent bounds are reported, never clipped.
    for (Eigen::Index i = 0; i < std::min(p.lb.size(), p.ub.size()); ++i) {
        if (p.lb(i) > p.ub(i)) {
            sol.status = Status::Infeasible;
            return sol;
        }
    }
    for (Eigen::Index i = 0; i < std::min(p.ylb.size(), p.yub.size()); ++i) {
        if (p.ylb(i) > p.yub(i)) {
            sol.status = Status::Infeasible;
            return sol;
        }
    }

    Workspace w = factor_hessian(p.H);
    sol.jitter = w.jitter;

    std::vector<Row> rows;
    for (Eigen::Index i = 0; i < p.Aeq.rows(); ++i) {
        rows.push_back({p.Aeq.row(i).transpose(), p.beq(i), true});
    }
    const std::size_t n_eq = rows.size();
    if (p.lb.size() > 0 || p.ub.size() > 0) {
        append_bound_rows(rows, Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd(), p.lb, p.ub);
    }
    if (p.Cout.rows() > 0) {
        append_bound_rows(rows, p.Cout, p.dout, p.ylb, p.yub);
    }

    if (rows.size() == n_eq) {
        // Closed form: unconstrained or equality-constrained.
        sol.x = equality_solve(w, p.f, p.Aeq, p.beq);
        finish_kkt(p, rows, {}, sol);
        return sol;
    }

    double b_scale = 1.0;
    for (const Row& r : rows) b_scale = std::max(b_scale, std::abs(r.b));
    const double feas_tol = 1e-10 * b_scale;
    const int max_iter = 50 * static_cast<int>(n + rows.size()) + 100;

    Eigen::VectorXd x = w.H_llt.solve(-p.f);
    std::vector<ActiveEntry> active;
    auto in_active = [&](int row) {
        return std::any_of(active.begin(), active.end(),
                           [row](const ActiveEntry& e) { return e.row == row; });
    };

    int p_row = -1;      // entering constraint
    double p_sign = 1.0;
    double u_p = 0.0;    // its accumulated multiplier

    for (int iter = 0;; ++iter) {
        if (iter >= max_iter) {
            sol.status = Status::MaxIter;
            sol.x = x;
            sol.iterations = iter;
            return sol;
        }
        sol.iterations = iter + 1;

        if (p_row < 0) {
            // Violated equalities take priority, then the most violated
            // inequality; none violated means optimal.
            for (std::size_t i = 0; i < n_eq && p_row < 0; ++i) {
                if (in_active(static_cast<int>(i))) continue;
                const double s = rows[i].a.dot(x) - rows[i].b;
                if (std::abs(s) > feas_tol) {
                    p_row = static_cast<int>(i);
                    p_sign = s > 0.0 ? -1.0 : 1.0;
                    u_p = 0.0;
                }
            }
            if (p_row < 0) {
                double worst = -feas_tol;
                for (std::size_t i = n_eq; i < rows.size(); ++i) {
                    if (in_active(static_cast<int>(i))) continue;
                    const double s = rows[i].a.dot(x) - rows[i].b;
                    if (s < worst) {
                        worst = s;
                        p_row = static_cast<int>(i);
                    }
                }
                p_sign = 1.0;
                u_p = 0.0;
            }
            if (p_row < 0) break;  // all constraints satisfied
        }

        const Eigen::VectorXd n_p = p_sign * rows[static_cast<std::size_t>(p_row)].a;
        const double b_p = p_sign * rows[static_cast<std::size_t>(p_row)].b;

        // Primal direction z and dual direction r for the entering normal.
        const Eigen::VectorXd Hinv_np = w.H_llt.solve(n_p);
        Eigen::VectorXd z = Hinv_np;
        Eigen::VectorXd r_dual;
        if (!active.empty()) {
            const Eigen::Index m = static_cast<Eigen::Index>(active.size());
            Eigen::MatrixXd N(n, m);
            for (Eigen::Index k = 0; k < m; ++k) {
                const ActiveEntry& e = active[static_cast<std::size_t>(k)];
                N.col(k) = e.sign * rows[static_cast<std::size_t>(e.row)].a;
            }
            const Eigen::MatrixXd HinvN = w.H_llt.solve(N);
            Eigen::LDLT<Eigen::MatrixXd> G_ldlt(N.transpose() * HinvN);
            r_dual = G_ldlt.solve(N.transpose() * Hinv_np);
            z -= HinvN * r_dual;
        }

        // Dual blocking step over active inequalities.
        double t1 = kInf;
        int blocker = -1;
        for (std::size_t k = 0; k < active.size(); ++k) {
            if (rows[static_cast<std::size_t>(active[k].row)].equality) continue;
            const double dir = r_dual.size() > 0 ? r_dual(static_cast<Eigen::Index>(k)) : 0.0;
            if (dir > 1e-14) {
                const double cand = active[k].u / dir;
                if (cand < t1) {
                    t1 = cand;
                    blocker = static_cast<int>(k);
                }
            }
        }

        const double znp = n_p.dot(z);
        if (znp <= 1e-14 * std::max(1.0, n_p.squaredNorm())) {
            // Entering normal linearly dependent on the active set.
            if (blocker < 0) {
                sol.status = Status::Infeasible;
                sol.x = x;
                return sol;
            }
            for (std::size_t k = 0; k < active.size(); ++k) {
                active[k].u -= t1 * r_dual(static_cast<Eigen::Index>(k));
            }
            u_p += t1;
            active.erase(active.begin() + blocker);
            continue;  // same entering constraint
        }

        const double t2 = (b_p - n_p.dot(x)) / znp;
        const double t = std::min(t1, t2);
        if (!std::isfinite(t)) {
            sol.status = Status::Infeasible;
            sol.x = x;
            return sol;
        }

        x += t * z;
        for (std::size_t k = 0; k < active.size(); ++k) {
            active[k].u -= t * r_dual(static_cast<Eigen::Index>(k));
        }
        u_p += t;

        if (t == t2) {
            active.push_back({p_row, p_sign, u_p});
            p_row = -1;
        } else {
            active.erase(active.begin() + blocker);
        }
    }

    sol.x = x;
    finish_kkt(p, rows, active, sol);
    return sol;
}

}  // namespace smmpc::qp
