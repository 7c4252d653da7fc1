#include "smmpc/controllers.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace smmpc {

namespace {

void check_window(const TrajectoryWindow& w, int L0, int Lp) {
    if (w.u_ini.size() != L0 || w.y_ini.size() != L0) {
        throw std::invalid_argument("controller step: past window length " +
                                    std::to_string(w.u_ini.size()) + " does not match L0=" +
                                    std::to_string(L0));
    }
    if (w.r.size() != Lp) {
        throw std::invalid_argument("controller step: reference window length " +
                                    std::to_string(w.r.size()) + " does not match Lp=" +
                                    std::to_string(Lp));
    }
}

double tracking_cost(const Eigen::VectorXd& y, const Eigen::VectorXd& r,
                     const Eigen::VectorXd& u, const CostSpec& cost) {
    return cost.Q * (y - r).squaredNorm() + cost.R * u.squaredNorm();
}

// Shared assembly of the horizon QP over u_hat given an affine output
// predictor y = y_base + Theta * u_hat.
ControllerStep solve_horizon_qp(const Eigen::MatrixXd& Theta, const Eigen::VectorXd& y_base,
                                const Eigen::VectorXd& r, const CostSpec& cost,
                                const BoxConstraints& cons, const Eigen::MatrixXd* G,
                                const Eigen::VectorXd* g_base, double zeta_sigma2) {
    const int Lp = cost.Lp;
    qp::Problem qp;
    qp.H = 2.0 * (cost.Q * Theta.transpose() * Theta +
                  cost.R * Eigen::MatrixXd::Identity(Lp, Lp));
    qp.f = 2.0 * cost.Q * Theta.transpose() * (y_base - r);
    if (G != nullptr && zeta_sigma2 > 0.0) {
        qp.H += 2.0 * zeta_sigma2 * G->transpose() * (*G);
        qp.f += 2.0 * zeta_sigma2 * G->transpose() * (*g_base);
    }
    qp.lb = cons.u_min;
    qp.ub = cons.u_max;
    if (cons.output_bounded()) {
        qp.Cout = Theta;
        qp.dout = y_base;
        qp.ylb = cons.y_min;
        qp.yub = cons.y_max;
    }
    const qp::Solution s = qp::solve(qp);

    ControllerStep step;
    step.diag.qp_status = s.status;
    step.diag.qp_residual = s.kkt_residual;
    step.diag.comp_slackness = s.comp_slackness;
    if (s.status == qp::Status::Optimal) {
        step.u_seq = s.x;
        step.u = s.x(0);
        step.y_pred = y_base + Theta * s.x;
        step.diag.predicted_cost = tracking_cost(step.y_pred, r, step.u_seq, cost);
    }
    return step;
}

}  // namespace

void BoxConstraints::validate(int Lp) const {
    auto check_len = [Lp](const Eigen::VectorXd& v, const char* name) {
        if (v.size() > 0 && v.size() != Lp) {
            throw std::invalid_argument(std::string("BoxConstraints: ") + name +
                                        " must have length Lp or be empty");
        }
    };
    check_len(u_min, "u_min");
    check_len(u_max, "u_max");
    check_len(y_min, "y_min");
    check_len(y_max, "y_max");
    if (u_min.size() > 0 && u_max.size() > 0 && (u_min.array() > u_max.array()).any()) {
        throw std::invalid_argument("BoxConstraints: u_min > u_max");
    }
    if (y_min.size() > 0 && y_max.size() > 0 && (y_min.array() > y_max.array()).any()) {
        throw std::invalid_argument("BoxConstraints: y_min > y_max");
    }
}

ControllerStep smmpc_step(const SmmLinearization& lin, const SignalMatrix& sm,
                          const TrajectoryWindow& w, const CostSpec& cost,
                          const BoxConstraints& cons, const NoiseSpec& noise) {
    check_window(w, sm.L0, sm.Lp);
    if (cost.Lp != sm.Lp) {
        throw std::invalid_argument("smmpc_step: cost horizon does not match the signal matrix");
    }
    // g = g_base + G u_hat, y = Yf g.
    const Eigen::VectorXd g_base =
        lin.Pmat * w.y_ini + lin.Qmat.leftCols(sm.L0) * w.u_ini;
    const Eigen::MatrixXd G = lin.Qmat.rightCols(sm.Lp);
    const Eigen::MatrixXd Theta = sm.Yf() * G;
    const Eigen::VectorXd y_base = sm.Yf() * g_base;

    ControllerStep step = solve_horizon_qp(Theta, y_base, w.r, cost, cons, &G, &g_base,
                                           cost.zeta * noise.sigma2);
    step.diag.lambda = lin.lambda;
    step.diag.kkt_residual = lin.kkt_residual;
    step.diag.degenerate = lin.rank_deficient;
    step.diag.condition = lin.condition;
    if (step.diag.qp_status == qp::Status::Optimal) {
        step.diag.g = g_base + G * step.u_seq;
        step.diag.g_sq = step.diag.g.squaredNorm();
    }
    return step;
}

ControllerStep deepc_step(const SignalMatrix& sm, const TrajectoryWindow& w,
                          const CostSpec& cost, const BoxConstraints& cons,
                          double lambda_g, double lambda_y) {
    check_window(w, sm.L0, sm.Lp);
    if (!(lambda_g > 0.0) || !(lambda_y > 0.0)) {
        throw std::invalid_argument("deepc_step: lambda_g and lambda_y must be positive");
    }
    const int M = sm.cols();
    const Eigen::MatrixXd Yp = sm.Yp(), Yf = sm.Yf(), Up = sm.Up(), Uf = sm.Uf();

    // minimize over g:  J_ctr(Yf g, Uf g) + lambda_g ||g||^2
    //                   + lambda_y ||Yp g - y_ini||^2  s.t.  Up g = u_ini.
    qp::Problem qp;
    qp.H = 2.0 * (lambda_g * Eigen::MatrixXd::Identity(M, M) +
                  lambda_y * Yp.transpose() * Yp + cost.Q * Yf.transpose() * Yf +
                  cost.R * Uf.transpose() * Uf);
    qp.f = -2.0 * (lambda_y * Yp.transpose() * w.y_ini + cost.Q * Yf.transpose() * w.r);
    qp.Aeq = Up;
    qp.beq = w.u_ini;
    if (cons.input_bounded() || cons.output_bounded()) {
        const int rows = (cons.input_bounded() ? sm.Lp : 0) + (cons.output_bounded() ? sm.Lp : 0);
        qp.Cout.resize(rows, M);
        qp.dout = Eigen::VectorXd::Zero(rows);
        qp.ylb = Eigen::VectorXd::Constant(rows, -std::numeric_limits<double>::infinity());
        qp.yub = Eigen::VectorXd::Constant(rows, std::numeric_limits<double>::infinity());
        int at = 0;
        if (cons.input_bounded()) {
            qp.Cout.middleRows(at, sm.Lp) = Uf;
            if (cons.u_min.size() > 0) qp.ylb.segment(at, sm.Lp) = cons.u_min;
            if (cons.u_max.size() > 0) qp.yub.segment(at, sm.Lp) = cons.u_max;
            at += sm.Lp;
        }
        if (cons.output_bounded()) {
            qp.Cout.middleRows(at, sm.Lp) = Yf;
            if (cons.y_min.size() > 0) qp.ylb.segment(at, sm.Lp) = cons.y_min;
            if (cons.y_max.size() > 0) qp.yub.segment(at, sm.Lp) = cons.y_max;
        }
    }
    const qp::Solution s = qp::solve(qp);

    ControllerStep step;
    step.diag.qp_status = s.status;
    step.diag.qp_residual = s.kkt_residual;
    step.diag.comp_slackness = s.comp_slackness;
    if (s.status == qp::Status::Optimal) {
        step.diag.g = s.x;
        step.diag.g_sq = s.x.squaredNorm();
        step.u_seq = Uf * s.x;
        step.u = step.u_seq(0);
        step.y_pred = Yf * s.x;
        step.diag.predicted_cost = tracking_cost(step.y_pred, w.r, step.u_seq, cost);
    }
    return step;
}

ControllerStep ideal_mpc_step(const StateSpace& ss, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& r, const CostSpec& cost,
                              const BoxConstraints& cons) {
    if (x.size() != ss.order()) {
        throw std::invalid_argument("ideal_mpc_step: state length does not match the model");
    }
    const int Lp = cost.Lp;
    // y = Phi x + Gamma u_hat with Phi rows C A^k and Gamma the lower-
    // triangular Markov-parameter (impulse response) matrix.
    Eigen::MatrixXd Phi(Lp, ss.order());
    Eigen::RowVectorXd row = ss.C;
    for (int k = 0; k < Lp; ++k) {
        Phi.row(k) = row;
        row = row * ss.A;
    }
    const Eigen::VectorXd h = markov_params(ss, Lp);
    Eigen::MatrixXd Gamma = Eigen::MatrixXd::Zero(Lp, Lp);
    for (int k = 0; k < Lp; ++k) {
        for (int j = 0; j <= k; ++j) {
            Gamma(k, j) = h(k - j);
        }
    }
    return solve_horizon_qp(Gamma, Phi * x, r, cost, cons, nullptr, nullptr, 0.0);
}

Eigen::VectorXd impulse_fir_identify(const SignalMatrix& sm, const NoiseSpec& noise) {
    // Impulse placed in the last past-window slot so the converged SMM
    // prediction reads off h_1 .. h_Lp directly; by time invariance this is
    // the same experiment as an impulse at the first future slot, shifted.
    Eigen::VectorXd u_ini = Eigen::VectorXd::Zero(sm.L0);
    u_ini(sm.L0 - 1) = 1.0;
    const Eigen::VectorXd y_ini = Eigen::VectorXd::Zero(sm.L0);
    const Eigen::VectorXd u_hat = Eigen::VectorXd::Zero(sm.Lp);
    NoiseSpec id_noise = noise;
    id_noise.sigma2_p = 0.0;
    const SmmIterateResult it =
        smm_iterate(sm, id_noise, u_ini, y_ini, u_hat, Eigen::VectorXd::Zero(sm.cols()));
    return sm.Yf() * it.g;
}

ControllerStep impulse_mpc_step(const Eigen::VectorXd& fir, const Eigen::VectorXd& history,
                                const Eigen::VectorXd& r, const CostSpec& cost,
                                const BoxConstraints& cons) {
    const int Lp = cost.Lp;
    const int order = static_cast<int>(fir.size());
    if (history.size() < order) {
        throw std::invalid_argument("impulse_mpc_step: history shorter than the FIR order");
    }
    // y_{t+j} = sum_{k=1}^{order} fir_{k-1} u_{t+j-k}; future inputs are the
    // decision variables, past inputs come from the history buffer.
    Eigen::MatrixXd Gamma = Eigen::MatrixXd::Zero(Lp, Lp);
    for (int j = 0; j < Lp; ++j) {
        for (int m = 0; m < j; ++m) {
            const int k = j - m;  // tap index, >= 1
            if (k <= order) Gamma(j, m) = fir(k - 1);
        }
    }
    Eigen::VectorXd y_base = Eigen::VectorXd::Zero(Lp);
    for (int j = 0; j < Lp; ++j) {
        for (int k = j + 1; k <= order; ++k) {
            y_base(j) += fir(k - 1) * history(k - j - 1);
        }
    }
    return solve_horizon_qp(Gamma, y_base, r, cost, cons, nullptr, nullptr, 0.0);
}

SmmPcController::SmmPcController(SignalMatrix sm, NoiseSpec noise, CostSpec cost,
                                 BoxConstraints cons, AdaptationOptions opts)
    : sm_(std::move(sm)), noise_(noise), cost_(cost), cons_(std::move(cons)), opts_(opts) {
    cons_.validate(cost_.Lp);
    if (opts_.compress_initial) {
        sm_ = compress(sm_);
    }
}

ControllerStep SmmPcController::step(const TrajectoryWindow& w) {
    if (g_warm_sq_ < 0.0) {
        g_warm_ = init_g(sm_, w.u_ini, w.y_ini, w.r);
        g_warm_sq_ = g_warm_.squaredNorm();
    }
    const SmmLinearization lin = linearize(sm_, noise_, g_warm_sq_);
    ControllerStep step = smmpc_step(lin, sm_, w, cost_, cons_, noise_);
    if (step.diag.qp_status != qp::Status::Optimal) {
        // Documented fallback: re-apply the previous input, keep warm start.
        step.diag.fallback = true;
        step.u = last_u_;
        return step;
    }
    if (opts_.evaluate_iterated) {
        // Compare the linearized prediction against the converged SMM at the
        // newly optimized input sequence, warm-started from g^{t-1} (falls
        // back to the current optimizer when adaptation changed the basis).
        const Eigen::VectorXd g0 =
            g_warm_.size() == sm_.cols() ? g_warm_ : step.diag.g;
        const SmmIterateResult it =
            smm_iterate(sm_, noise_, w.u_ini, w.y_ini, step.u_seq, g0);
        step.diag.smm_iterations = it.iterations;
        const Eigen::VectorXd y_smm = sm_.Yf() * it.g;
        if (const auto e = discrepancy(step.y_pred, y_smm)) {
            step.diag.E = *e;
        }
    }
    g_warm_ = step.diag.g;
    g_warm_sq_ = step.diag.g_sq;
    last_u_ = step.u;
    return step;
}

void SmmPcController::observe(double u_applied, double y_measured) {
    if (!opts_.enabled) return;
    const int L = sm_.L();
    win_u_.push_back(u_applied);
    win_y_.push_back(y_measured);
    if (static_cast<int>(win_u_.size()) > L) {
        win_u_.pop_front();
        win_y_.pop_front();
    }
    if (static_cast<int>(win_u_.size()) == L) {
        Eigen::VectorXd uw(L), yw(L);
        for (int i = 0; i < L; ++i) {
            uw(i) = win_u_[static_cast<std::size_t>(i)];
            yw(i) = win_y_[static_cast<std::size_t>(i)];
        }
        sm_ = append_online(sm_, uw, yw, opts_.gamma);
    }
}

DeepcController::DeepcController(SignalMatrix sm, CostSpec cost, BoxConstraints cons,
                                 double lambda_g, double lambda_y)
    : sm_(std::move(sm)), cost_(cost), cons_(std::move(cons)), lambda_g_(lambda_g),
      lambda_y_(lambda_y) {
    cons_.validate(cost_.Lp);
}

ControllerStep DeepcController::step(const TrajectoryWindow& w) {
    ControllerStep step = deepc_step(sm_, w, cost_, cons_, lambda_g_, lambda_y_);
    if (step.diag.qp_status != qp::Status::Optimal) {
        step.diag.fallback = true;
        step.u = last_u_;
        return step;
    }
    last_u_ = step.u;
    return step;
}

IdealMpcController::IdealMpcController(std::function<StateSpace(int)> plant_at, CostSpec cost,
                                       BoxConstraints cons)
    : plant_at_(std::move(plant_at)), cost_(cost), cons_(std::move(cons)) {
    cons_.validate(cost_.Lp);
}

ControllerStep IdealMpcController::step(const TrajectoryWindow& w) {
    if (w.state.size() == 0) {
        throw std::logic_error("IdealMpcController: harness did not provide the true state");
    }
    ControllerStep step = ideal_mpc_step(plant_at_(t_), w.state, w.r, cost_, cons_);
    ++t_;
    if (step.diag.qp_status != qp::Status::Optimal) {
        step.diag.fallback = true;
        step.u = last_u_;
        return step;
    }
    last_u_ = step.u;
    return step;
}

ImpulseMpcController::ImpulseMpcController(Eigen::VectorXd fir, CostSpec cost,
                                           BoxConstraints cons, Eigen::VectorXd initial_history)
    : fir_(std::move(fir)), cost_(cost), cons_(std::move(cons)) {
    cons_.validate(cost_.Lp);
    if (initial_history.size() < fir_.size()) {
        throw std::invalid_argument("ImpulseMpcController: initial history shorter than FIR");
    }
    for (Eigen::Index i = 0; i < initial_history.size(); ++i) {
        history_.push_back(initial_history(i));
    }
}

ControllerStep ImpulseMpcController::step(const TrajectoryWindow& w) {
    Eigen::VectorXd h(static_cast<Eigen::Index>(history_.size()));
    for (std::size_t i = 0; i < history_.size(); ++i) {
        h(static_cast<Eigen::Index>(i)) = history_[i];
    }
    ControllerStep step = impulse_mpc_step(fir_, h, w.r, cost_, cons_);
    if (step.diag.qp_status != qp::Status::Optimal) {
        step.diag.fallback = true;
        step.u = last_u_;
        return step;
    }
    last_u_ = step.u;
    return step;
}

void ImpulseMpcController::observe(double u_applied, double y_measured) {
    (void)y_measured;
    history_.push_front(u_applied);
    if (history_.size() > static_cast<std::size_t>(fir_.size())) {
        history_.pop_back();
    }
}

}  // namespace smmpc
