#include "smmpc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace smmpc {

double ReferenceSpec::at(int t) const {
    switch (kind) {
        case Kind::Sinusoid:
            return amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period);
        case Kind::Constant:
            return level;
        case Kind::Step:
            return t >= step_time ? level : 0.0;
    }
    return 0.0;
}

const char* to_string(ControllerKind k) {
    switch (k) {
        case ControllerKind::SmmPc: return "smmpc";
        case ControllerKind::Deepc: return "deepc";
        case ControllerKind::IdealMpc: return "ideal_mpc";
        case ControllerKind::ImpulseMpc: return "impulse_mpc";
    }
    return "unknown";
}

std::optional<ControllerKind> controller_kind_from_string(const std::string& s) {
    if (s == "smmpc") return ControllerKind::SmmPc;
    if (s == "deepc") return ControllerKind::Deepc;
    if (s == "ideal_mpc") return ControllerKind::IdealMpc;
    if (s == "impulse_mpc") return ControllerKind::ImpulseMpc;
    return std::nullopt;
}

void ScenarioConfig::validate() const {
    if (cost.Lp < 1 || L0 < 1) {
        throw std::invalid_argument("ScenarioConfig: L0 and horizon must be positive");
    }
    if (N < L0 + cost.Lp) {
        throw std::invalid_argument("ScenarioConfig: N must be at least L0 + horizon");
    }
    if (cost.Nc < 1) {
        throw std::invalid_argument("ScenarioConfig: task length must be positive");
    }
    if (cost.Q < 0.0 || cost.R < 0.0 || (cost.Q == 0.0 && cost.R == 0.0)) {
        throw std::invalid_argument("ScenarioConfig: weights must be nonnegative, not both zero");
    }
    if (gamma <= 0.0 || gamma > 1.0) {
        throw std::invalid_argument("ScenarioConfig: gamma must be in (0, 1]");
    }
    if (noise.sigma2 < 0.0 || noise.sigma2_p < 0.0) {
        throw std::invalid_argument("ScenarioConfig: noise variances must be nonnegative");
    }
    if (cost.zeta < 0.0) {
        throw std::invalid_argument("ScenarioConfig: zeta must be nonnegative");
    }
    constraints.validate(cost.Lp);
}

namespace {

std::unique_ptr<Controller> make_controller(const ScenarioConfig& cfg, const StateSpace& ss,
                                            const SignalMatrix& sm, const DataRecord& data) {
    switch (cfg.controller) {
        case ControllerKind::SmmPc: {
            AdaptationOptions opts;
            opts.enabled = cfg.adaptation;
            opts.gamma = cfg.gamma;
            opts.compress_initial = cfg.compression;
            opts.evaluate_iterated = cfg.evaluate_iterated;
            return std::make_unique<SmmPcController>(sm, cfg.noise, cfg.cost, cfg.constraints,
                                                     opts);
        }
        case ControllerKind::Deepc:
            return std::make_unique<DeepcController>(sm, cfg.cost, cfg.constraints, cfg.lambda_g,
                                                     cfg.lambda_y);
        case ControllerKind::IdealMpc: {
            auto plant_at = [tf = cfg.plant_tf, drift = cfg.drift, ss](int t) {
                return drift ? drift_plant(tf, *drift, t) : ss;
            };
            return std::make_unique<IdealMpcController>(plant_at, cfg.cost, cfg.constraints);
        }
        case ControllerKind::ImpulseMpc: {
            const Eigen::VectorXd fir = impulse_fir_identify(sm, cfg.noise);
            Eigen::VectorXd history(cfg.cost.Lp);
            for (int i = 0; i < cfg.cost.Lp; ++i) {
                history(i) = data.u(data.u.size() - 1 - i);
            }
            return std::make_unique<ImpulseMpcController>(fir, cfg.cost, cfg.constraints,
                                                          history);
        }
    }
    throw std::logic_error("make_controller: unknown controller kind");
}

}  // namespace

RunResult closed_loop(const ScenarioConfig& cfg, std::uint64_t run_index) {
    cfg.validate();
    const int Nc = cfg.cost.Nc;
    const int Lp = cfg.cost.Lp;

    RunResult out;
    out.seed = cfg.seed;
    out.run_index = run_index;
    out.u.setZero(Nc);
    out.y.setZero(Nc);
    out.y0.setZero(Nc);
    out.r.setZero(Nc);
    out.stage_cost.setZero(Nc);
    out.E.setConstant(Nc, std::numeric_limits<double>::quiet_NaN());
    out.g_sq.setConstant(Nc, std::numeric_limits<double>::quiet_NaN());

    try {
        const StateSpace ss = tf_to_ss(cfg.plant_tf);
        const DataRecord data = generate_data(ss, cfg.N, cfg.noise, cfg.seed, run_index);
        const SignalMatrix sm = build(data, cfg.L0, Lp);
        std::unique_ptr<Controller> controller = make_controller(cfg, ss, sm, data);

        NormalStream online_noise(cfg.seed, run_index, StreamRole::OnlineNoise);
        const double sigma_p = std::sqrt(cfg.noise.sigma2_p);

        // The offline experiment continues into the task: the plant state
        // and the past window at t = 0 come from its tail.
        Eigen::VectorXd x = data.x_final;
        TrajectoryWindow w;
        w.u_ini = data.u.tail(cfg.L0);
        w.y_ini = data.y.tail(cfg.L0);
        w.r.resize(Lp);

        double j_acc = 0.0;
        double ju_acc = 0.0;
        for (int t = 0; t < Nc; ++t) {
            for (int k = 0; k < Lp; ++k) w.r(k) = cfg.reference.at(t + k);
            w.state = x;

            const ControllerStep step = controller->step(w);
            const double u_t = step.u;

            const StateSpace plant =
                cfg.drift ? drift_plant(cfg.plant_tf, *cfg.drift, t) : ss;
            const double y0_t = plant.C.dot(x) + plant.D * u_t;
            const double y_t = y0_t + sigma_p * online_noise.next();
            const double r_t = cfg.reference.at(t);

            out.u(t) = u_t;
            out.y(t) = y_t;
            out.y0(t) = y0_t;
            out.r(t) = r_t;
            const double j_t = cfg.cost.Q * (y0_t - r_t) * (y0_t - r_t) + cfg.cost.R * u_t * u_t;
            out.stage_cost(t) = j_t;
            j_acc += j_t;
            ju_acc += cfg.cost.R * u_t * u_t;
            out.E(t) = step.diag.E;
            out.g_sq(t) = step.diag.g_sq;
            out.max_kkt_residual = std::max(out.max_kkt_residual, step.diag.kkt_residual);
            out.max_qp_residual = std::max(out.max_qp_residual, step.diag.qp_residual);
            if (step.diag.degenerate) ++out.degenerate_steps;

            controller->observe(u_t, y_t);
            x = plant.A * x + plant.B * u_t;

            // Shift the past window.
            w.u_ini.head(cfg.L0 - 1) = w.u_ini.tail(cfg.L0 - 1).eval();
            w.u_ini(cfg.L0 - 1) = u_t;
            w.y_ini.head(cfg.L0 - 1) = w.y_ini.tail(cfg.L0 - 1).eval();
            w.y_ini(cfg.L0 - 1) = y_t;
        }
        out.J_tot = j_acc;
        out.J_tot_u = ju_acc;

        double g_acc = 0.0;
        int g_count = 0;
        for (int t = 0; t < Nc; ++t) {
            if (std::isfinite(out.g_sq(t))) {
                g_acc += out.g_sq(t);
                ++g_count;
            }
        }
        if (g_count > 0) out.mean_g_sq = g_acc / g_count;
    } catch (const std::exception& e) {
        out.failed = true;
        out.failure = e.what();
    }
    return out;
}

SummaryStat summarize(std::vector<double> values) {
    values.erase(std::remove_if(values.begin(), values.end(),
                                [](double v) { return !std::isfinite(v); }),
                 values.end());
    SummaryStat s;
    s.count = static_cast<int>(values.size());
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    auto quantile = [&](double p) {
        const double pos = p * static_cast<double>(values.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return values[lo] + frac * (values[hi] - values[lo]);
    };
    s.median = quantile(0.5);
    s.q1 = quantile(0.25);
    s.q3 = quantile(0.75);
    s.min = values.front();
    s.max = values.back();
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    s.mean = mean;
    if (values.size() > 1) {
        double acc = 0.0;
        for (double v : values) acc += (v - mean) * (v - mean);
        s.stddev = std::sqrt(acc / static_cast<double>(values.size() - 1));
    } else {
        s.stddev = 0.0;
    }
    return s;
}

std::vector<RunResult> run_batch(const ScenarioConfig& cfg, int n_runs, int jobs) {
    if (n_runs < 1) {
        throw std::invalid_argument("run_batch: n_runs must be positive");
    }
    std::vector<RunResult> results(static_cast<std::size_t>(n_runs));
    jobs = std::max(1, jobs);
    if (jobs == 1 || n_runs == 1) {
        for (int i = 0; i < n_runs; ++i) {
            results[static_cast<std::size_t>(i)] = closed_loop(cfg, static_cast<std::uint64_t>(i));
        }
        return results;
    }
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n_runs) return;
            results[static_cast<std::size_t>(i)] = closed_loop(cfg, static_cast<std::uint64_t>(i));
        }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min(jobs, n_runs);
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return results;
}

McSummary summarize_batch(const std::string& name, const std::vector<RunResult>& runs) {
    McSummary mc;
    mc.name = name;
    mc.runs = static_cast<int>(runs.size());
    std::vector<double> j_tot, j_tot_u, mean_g, dev_mean, e_pool;
    int below = 0;
    int e_count = 0;
    for (const RunResult& r : runs) {
        if (r.failed) {
            ++mc.failures;
            continue;
        }
        j_tot.push_back(r.J_tot);
        j_tot_u.push_back(r.J_tot_u);
        mean_g.push_back(r.mean_g_sq);
        dev_mean.push_back(r.dev_mean);
        for (Eigen::Index t = 0; t < r.E.size(); ++t) {
            if (std::isfinite(r.E(t))) {
                e_pool.push_back(r.E(t));
                ++e_count;
                if (r.E(t) < 0.10) ++below;
            }
        }
    }
    mc.J_tot = summarize(std::move(j_tot));
    mc.J_tot_u = summarize(std::move(j_tot_u));
    mc.mean_g_sq = summarize(std::move(mean_g));
    mc.dev_mean = summarize(std::move(dev_mean));
    mc.E_pooled = summarize(std::move(e_pool));
    if (e_count > 0) {
        mc.frac_E_below = static_cast<double>(below) / static_cast<double>(e_count);
    }
    return mc;
}

McSummary monte_carlo(const ScenarioConfig& cfg, int n_runs, int jobs) {
    return summarize_batch(cfg.name, run_batch(cfg, n_runs, jobs));
}

Eigen::VectorXd deviation_from_baseline(const RunResult& run, const RunResult& baseline) {
    if (run.y0.size() != baseline.y0.size()) {
        throw std::invalid_argument("deviation_from_baseline: task lengths differ");
    }
    return (run.y0 - baseline.y0).cwiseAbs();
}

}  // namespace smmpc
