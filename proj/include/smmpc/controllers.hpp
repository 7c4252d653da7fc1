#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <memory>

#include "smmpc/plant.hpp"
#include "smmpc/qp.hpp"
#include "smmpc/signal_matrix.hpp"
#include "smmpc/smm.hpp"

namespace smmpc {

struct CostSpec {
    double Q = 1.0;    // output weight
    double R = 1.0;    // input weight
    int Lp = 10;       // prediction horizon
    int Nc = 120;      // task length
    double zeta = 0.0; // prediction-error regularization weight
};

// Per-step box bounds; empty vectors mean unbounded.
struct BoxConstraints {
    Eigen::VectorXd u_min, u_max;
    Eigen::VectorXd y_min, y_max;

    bool input_bounded() const { return u_min.size() > 0 || u_max.size() > 0; }
    bool output_bounded() const { return y_min.size() > 0 || y_max.size() > 0; }
    void validate(int Lp) const;
};

struct StepDiagnostics {
    Eigen::VectorXd g;
    double g_sq = std::numeric_limits<double>::quiet_NaN();
    double lambda = std::numeric_limits<double>::quiet_NaN();
    qp::Status qp_status = qp::Status::Optimal;
    bool fallback = false;  // QP failed; previous input re-applied
    double qp_residual = 0.0;
    double comp_slackness = 0.0;
    double kkt_residual = 0.0;  // feasibility of the linearized map / ridge solve
    bool degenerate = false;    // signal matrix lost persistency of excitation
    double condition = 1.0;     // condition estimate of the constraint block
    double predicted_cost = std::numeric_limits<double>::quiet_NaN();
    double E = std::numeric_limits<double>::quiet_NaN();  // linearized-vs-iterated discrepancy
    int smm_iterations = 0;
};

struct ControllerStep {
    double u = 0.0;           // applied input (first entry of u_seq)
    Eigen::VectorXd u_seq;    // optimized input sequence, length Lp
    Eigen::VectorXd y_pred;   // predicted outputs, length Lp
    StepDiagnostics diag;
};

// One warm-started SMM-PC step: substitutes the linearized predictor into
// J_ctr + zeta * sigma2 * ||g||^2 and solves the resulting QP over u_hat.
ControllerStep smmpc_step(const SmmLinearization& lin, const SignalMatrix& sm,
                          const TrajectoryWindow& w, const CostSpec& cost,
                          const BoxConstraints& cons, const NoiseSpec& noise);

// Regularized DeePC (p = 2), condensed onto g with U_p g = u_ini enforced
// exactly.
ControllerStep deepc_step(const SignalMatrix& sm, const TrajectoryWindow& w,
                          const CostSpec& cost, const BoxConstraints& cons,
                          double lambda_g, double lambda_y);

// Condensed finite-horizon MPC with the true model and exact state.
ControllerStep ideal_mpc_step(const StateSpace& ss, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& r, const CostSpec& cost,
                              const BoxConstraints& cons);

// FIR coefficients (h_1 .. h_Lp) estimated by running the converged SMM on
// an impulse experiment with zero initial window and sigma_p = 0.
Eigen::VectorXd impulse_fir_identify(const SignalMatrix& sm, const NoiseSpec& noise);

// MPC over the identified FIR; history holds past inputs, history(i) = u_{t-1-i}.
ControllerStep impulse_mpc_step(const Eigen::VectorXd& fir, const Eigen::VectorXd& history,
                                const Eigen::VectorXd& r, const CostSpec& cost,
                                const BoxConstraints& cons);

// Receding-horizon interface shared by all controllers: step() consumes one
// trajectory window and emits one input; observe() feeds back the applied
// input and the measured output after the plant has stepped.
class Controller {
  public:
    virtual ~Controller() = default;
    virtual ControllerStep step(const TrajectoryWindow& w) = 0;
    virtual void observe(double u_applied, double y_measured) {
        (void)u_applied;
        (void)y_measured;
    }
};

struct AdaptationOptions {
    bool enabled = false;
    double gamma = 1.0;
    bool compress_initial = false;  // compress the offline matrix up front
    bool evaluate_iterated = false; // also run the converged SMM each step (E series)
};

class SmmPcController : public Controller {
  public:
    SmmPcController(SignalMatrix sm, NoiseSpec noise, CostSpec cost, BoxConstraints cons,
                    AdaptationOptions opts);

    ControllerStep step(const TrajectoryWindow& w) override;
    void observe(double u_applied, double y_measured) override;

    const SignalMatrix& signal_matrix() const { return sm_; }

  private:
    SignalMatrix sm_;
    NoiseSpec noise_;
    CostSpec cost_;
    BoxConstraints cons_;
    AdaptationOptions opts_;
    Eigen::VectorXd g_warm_;
    double g_warm_sq_ = -1.0;  // negative until initialized
    double last_u_ = 0.0;
    std::deque<double> win_u_, win_y_;
};

class DeepcController : public Controller {
  public:
    DeepcController(SignalMatrix sm, CostSpec cost, BoxConstraints cons, double lambda_g,
                    double lambda_y);

    ControllerStep step(const TrajectoryWindow& w) override;

  private:
    SignalMatrix sm_;
    CostSpec cost_;
    BoxConstraints cons_;
    double lambda_g_;
    double lambda_y_;
    double last_u_ = 0.0;
};

// The plant provider lets the benchmark track a drifting true model.
class IdealMpcController : public Controller {
  public:
    IdealMpcController(std::function<StateSpace(int)> plant_at, CostSpec cost,
                       BoxConstraints cons);

    ControllerStep step(const TrajectoryWindow& w) override;

  private:
    std::function<StateSpace(int)> plant_at_;
    CostSpec cost_;
    BoxConstraints cons_;
    int t_ = 0;
    double last_u_ = 0.0;
};

class ImpulseMpcController : public Controller {
  public:
    // initial_history(i) = u_{-1-i}, the tail of the offline experiment.
    ImpulseMpcController(Eigen::VectorXd fir, CostSpec cost, BoxConstraints cons,
                         Eigen::VectorXd initial_history);

    ControllerStep step(const TrajectoryWindow& w) override;
    void observe(double u_applied, double y_measured) override;

  private:
    Eigen::VectorXd fir_;
    CostSpec cost_;
    BoxConstraints cons_;
    std::deque<double> history_;  // front = most recent input
    double last_u_ = 0.0;
};

}  // namespace smmpc
