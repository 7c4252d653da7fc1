#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smmpc/controllers.hpp"
#include "smmpc/plant.hpp"

namespace smmpc {

struct ReferenceSpec {
    enum class Kind { Sinusoid, Constant, Step };
    Kind kind = Kind::Sinusoid;
    double amplitude = 0.5;  // sinusoid: amplitude * sin(2 pi t / period)
    double period = 20.0;
    double level = 0.0;      // constant / step target
    int step_time = 0;       // step: 0 before, level from step_time on

    double at(int t) const;
};

enum class ControllerKind { SmmPc, Deepc, IdealMpc, ImpulseMpc };

const char* to_string(ControllerKind k);
std::optional<ControllerKind> controller_kind_from_string(const std::string& s);

// Everything one closed-loop run depends on; identical configs (including
// seed) produce bit-identical results.
struct ScenarioConfig {
    std::string name = "scenario";
    TransferFunction plant_tf;
    std::optional<DriftSpec> drift;
    int N = 50;
    NoiseSpec noise;
    bool adaptation = false;
    double gamma = 1.0;
    bool compression = false;
    ControllerKind controller = ControllerKind::SmmPc;
    CostSpec cost;
    int L0 = 4;
    BoxConstraints constraints;
    double lambda_g = 100.0;  // DeePC only
    double lambda_y = 1000.0; // DeePC only
    ReferenceSpec reference;
    std::uint64_t seed = 1;
    bool evaluate_iterated = false;

    void validate() const;
};

struct RunResult {
    Eigen::VectorXd u, y, y0, r;
    Eigen::VectorXd stage_cost;  // J_t evaluated on the noise-free output
    Eigen::VectorXd E;           // NaN where not evaluated
    Eigen::VectorXd g_sq;        // ||g^t||^2 (NaN for model-based controllers)
    Eigen::VectorXd deviation;   // |y0 - y0_baseline|; empty unless paired
    double J_tot = 0.0;
    double J_tot_u = 0.0;
    double mean_g_sq = std::numeric_limits<double>::quiet_NaN();
    double dev_mean = std::numeric_limits<double>::quiet_NaN();
    double max_kkt_residual = 0.0;
    double max_qp_residual = 0.0;
    int degenerate_steps = 0;  // steps whose ridge solve lost the PE condition
    bool failed = false;
    std::string failure;
    std::uint64_t seed = 0;
    std::uint64_t run_index = 0;
};

// One receding-horizon run: offline data, controller construction, online
// loop with optional adaptation and drift. The pre-task window is the tail
// of the offline experiment, and the plant state carries over from it.
RunResult closed_loop(const ScenarioConfig& cfg, std::uint64_t run_index = 0);

struct SummaryStat {
    double median = std::numeric_limits<double>::quiet_NaN();
    double q1 = std::numeric_limits<double>::quiet_NaN();
    double q3 = std::numeric_limits<double>::quiet_NaN();
    double mean = std::numeric_limits<double>::quiet_NaN();
    double stddev = std::numeric_limits<double>::quiet_NaN();
    double min = std::numeric_limits<double>::quiet_NaN();
    double max = std::numeric_limits<double>::quiet_NaN();
    int count = 0;
};

// NaNs are dropped; quantiles use linear interpolation between closest
// ranks, stddev is the sample standard deviation.
SummaryStat summarize(std::vector<double> values);

struct McSummary {
    std::string name;
    int runs = 0;
    int failures = 0;
    SummaryStat J_tot, J_tot_u, mean_g_sq, dev_mean;
    SummaryStat E_pooled;      // per-step E pooled over runs
    double frac_E_below = std::numeric_limits<double>::quiet_NaN();  // P(E < 0.10)
};

// Seeds derive as (cfg.seed, run_index); runs execute on up to `jobs`
// threads and are aggregated in run order, so the result is independent of
// scheduling.
std::vector<RunResult> run_batch(const ScenarioConfig& cfg, int n_runs, int jobs = 1);
McSummary summarize_batch(const std::string& name, const std::vector<RunResult>& runs);
McSummary monte_carlo(const ScenarioConfig& cfg, int n_runs, int jobs = 1);

// Per-step |y0 - y0_baseline|; requires equal task lengths.
Eigen::VectorXd deviation_from_baseline(const RunResult& run, const RunResult& baseline);

}  // namespace smmpc
