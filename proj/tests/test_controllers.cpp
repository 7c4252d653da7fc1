#include "doctest.h"

#include <numbers>
#include <random>

#include "smmpc/controllers.hpp"

using namespace smmpc;

namespace {

DataRecord make_data(int N, double sigma2, std::uint64_t seed) {
    return generate_data(tf_to_ss(benchmark_plant()), N, NoiseSpec{sigma2, 0.0}, seed);
}

TrajectoryWindow zero_window(int L0, int Lp) {
    TrajectoryWindow w;
    w.u_ini = Eigen::VectorXd::Zero(L0);
    w.y_ini = Eigen::VectorXd::Zero(L0);
    w.r = Eigen::VectorXd::Zero(Lp);
    return w;
}

}  // namespace

TEST_CASE("smmpc_step at rest applies no input") {
    const DataRecord rec = make_data(50, 0.0, 4);  // noise-free data
    const SignalMatrix sm = build(rec, 4, 10);
    const NoiseSpec noise{0.0, 0.0};
    const SmmLinearization lin = linearize(sm, noise, 1.0);
    const CostSpec cost;
    const ControllerStep step =
        smmpc_step(lin, sm, zero_window(4, 10), cost, BoxConstraints{}, noise);
    REQUIRE(step.diag.qp_status == qp::Status::Optimal);
    CHECK(step.u_seq.lpNorm<Eigen::Infinity>() < 1e-8);
    CHECK(step.y_pred.lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("predicted ||g||^2 is nonincreasing in zeta at a fixed step") {
    const DataRecord rec = make_data(50, 0.1, 6);
    const SignalMatrix sm = build(rec, 4, 10);
    const NoiseSpec noise{0.1, 0.1};
    TrajectoryWindow w = zero_window(4, 10);
    w.u_ini = rec.u.tail(4);
    w.y_ini = rec.y.tail(4);
    for (int k = 0; k < 10; ++k) w.r(k) = 0.5 * std::sin(std::numbers::pi * k / 10.0);
    const Eigen::VectorXd g0 = init_g(sm, w.u_ini, w.y_ini, w.r);
    const SmmLinearization lin = linearize(sm, noise, g0);

    double prev = std::numeric_limits<double>::infinity();
    for (double zeta : {0.0, 1.0, 10.0, 100.0, 1000.0, 10000.0}) {
        CostSpec cost;
        cost.zeta = zeta;
        const ControllerStep step = smmpc_step(lin, sm, w, cost, BoxConstraints{}, noise);
        REQUIRE(step.diag.qp_status == qp::Status::Optimal);
        REQUIRE(step.diag.g_sq <= prev + 1e-9);
        prev = step.diag.g_sq;
    }
}

TEST_CASE("deepc prediction approaches the exact continuation in the noise-free limit") {
    const StateSpace ss = tf_to_ss(benchmark_plant());
    const NoiseSpec nf{0.0, 0.0};
    const DataRecord rec = generate_data(ss, 60, nf, 2);
    const SignalMatrix sm = build(rec, 4, 10);

    // Consistent past window and the true continuation under the DeePC
    // optimizer's own input plan.
    TrajectoryWindow w = zero_window(4, 10);
    w.u_ini = rec.u.tail(4);
    w.y_ini = rec.y.tail(4);
    for (int k = 0; k < 10; ++k) w.r(k) = 0.5 * std::sin(std::numbers::pi * k / 10.0);

    const CostSpec cost;
    const ControllerStep step =
        deepc_step(sm, w, cost, BoxConstraints{}, 1e-8, 1e8);
    REQUIRE(step.diag.qp_status == qp::Status::Optimal);

    NormalStream dummy(1, 0, StreamRole::DataNoise);
    const SimResult truth = simulate(ss, step.u_seq, rec.x_final, nf, dummy);
    CHECK((step.y_pred - truth.y0).lpNorm<Eigen::Infinity>() < 1e-3);
}

TEST_CASE("deepc feasibility: the optimizer reproduces u_ini through the signal matrix") {
    const DataRecord rec = make_data(50, 0.1, 8);
    const SignalMatrix sm = build(rec, 4, 10);
    TrajectoryWindow w = zero_window(4, 10);
    w.u_ini = rec.u.tail(4);
    w.y_ini = rec.y.tail(4);
    const ControllerStep step = deepc_step(sm, w, CostSpec{}, BoxConstraints{}, 100.0, 1000.0);
    REQUIRE(step.diag.qp_status == qp::Status::Optimal);
    CHECK((sm.Up() * step.diag.g - w.u_ini).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("ideal MPC at the origin does nothing") {
    const StateSpace ss = tf_to_ss(benchmark_plant());
    const ControllerStep step = ideal_mpc_step(ss, Eigen::VectorXd::Zero(4),
                                               Eigen::VectorXd::Zero(10), CostSpec{},
                                               BoxConstraints{});
    REQUIRE(step.diag.qp_status == qp::Status::Optimal);
    CHECK(step.u_seq.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("ideal MPC prediction matrix carries the Markov parameters") {
    const StateSpace ss = tf_to_ss(benchmark_plant());
    // Pin u_hat = e_1 with equal bounds; the prediction from x = 0 is then
    // the first column of the impulse-response matrix.
    BoxConstraints cons;
    cons.u_min = Eigen::VectorXd::Zero(10);
    cons.u_max = Eigen::VectorXd::Zero(10);
    cons.u_min(0) = 1.0;
    cons.u_max(0) = 1.0;
    const ControllerStep step = ideal_mpc_step(ss, Eigen::VectorXd::Zero(4),
                                               Eigen::VectorXd::Zero(10), CostSpec{}, cons);
    REQUIRE(step.diag.qp_status == qp::Status::Optimal);
    const Eigen::VectorXd h = markov_params(ss, 10);
    CHECK((step.y_pred - h).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("ideal MPC prediction agrees with simulation from the true state") {
    const StateSpace ss = tf_to_ss(benchmark_plant());
    std::mt19937_64 rng(15);
    std::normal_distribution<double> d(0.0, 1.0);
    Eigen::VectorXd x(4), r(10);
    for (int i = 0; i < 4; ++i) x(i) = d(rng);
    for (int i = 0; i < 10; ++i) r(i) = d(rng);
    const ControllerStep step = ideal_mpc_step(ss, x, r, CostSpec{}, BoxConstraints{});
    REQUIRE(step.diag.qp_status == qp::Status::Optimal);
    NormalStream dummy(1, 0, StreamRole::DataNoise);
    const SimResult truth = simulate(ss, step.u_seq, x, NoiseSpec{0.0, 0.0}, dummy);
    CHECK((step.y_pred - truth.y0).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("impulse FIR identification is exact on noise-free data") {
    const StateSpace ss = tf_to_ss(benchmark_plant());
    const DataRecord rec = generate_data(ss, 60, NoiseSpec{0.0, 0.0}, 2);
    const SignalMatrix sm = build(rec, 4, 10);
    const Eigen::VectorXd fir = impulse_fir_identify(sm, NoiseSpec{0.0, 0.0});
    const Eigen::VectorXd h = markov_params(ss, 11);
    CHECK((fir - h.tail(10)).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("impulse FIR of the pure delay is a unit tap") {
    TransferFunction tf;
    tf.num = {1.0};
    tf.den = {1.0, 0.0};
    const StateSpace ss = tf_to_ss(tf);
    const DataRecord rec = generate_data(ss, 40, NoiseSpec{0.0, 0.0}, 3);
    const SignalMatrix sm = build(rec, 2, 6);
    const Eigen::VectorXd fir = impulse_fir_identify(sm, NoiseSpec{0.0, 0.0});
    REQUIRE(fir.size() == 6);
    CHECK(fir(0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(fir.tail(5).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("impulse FIR under heavy noise stays within sampling error") {
    const StateSpace ss = tf_to_ss(benchmark_plant());
    const DataRecord rec = generate_data(ss, 100, NoiseSpec{1.0, 0.0}, 5);
    const SignalMatrix sm = build(rec, 4, 10);
    const Eigen::VectorXd fir = impulse_fir_identify(sm, NoiseSpec{1.0, 0.0});
    const Eigen::VectorXd h = markov_params(ss, 11).tail(10);
    CHECK((fir - h).lpNorm<Eigen::Infinity>() < 0.5);
}

TEST_CASE("impulse MPC with zero history and zero reference is idle") {
    Eigen::VectorXd fir(10);
    fir.setZero();
    fir(0) = 0.1159;
    fir(1) = 0.25;
    const ControllerStep step = impulse_mpc_step(fir, Eigen::VectorXd::Zero(10),
                                                 Eigen::VectorXd::Zero(10), CostSpec{},
                                                 BoxConstraints{});
    REQUIRE(step.diag.qp_status == qp::Status::Optimal);
    CHECK(step.u_seq.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("exact FIR model matches ideal MPC on an FIR plant") {
    // Plant with a 10-tap impulse response: num over z^10.
    Eigen::VectorXd taps(10);
    taps << 0.0, 0.4, 0.3, -0.2, 0.1, 0.05, -0.02, 0.01, 0.0, 0.005;
    TransferFunction tf;
    tf.den.assign(11, 0.0);
    tf.den[0] = 1.0;
    tf.num.assign(taps.data(), taps.data() + 10);
    const StateSpace ss = tf_to_ss(tf);
    REQUIRE((markov_params(ss, 11).tail(10) - taps).lpNorm<Eigen::Infinity>() < 1e-12);

    std::mt19937_64 rng(21);
    std::normal_distribution<double> d(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXd history(10), r(10);
        for (int i = 0; i < 10; ++i) {
            history(i) = d(rng);
            r(i) = d(rng);
        }
        // State of the canonical realization after the history: x holds the
        // last 10 inputs, oldest first.
        Eigen::VectorXd x(10);
        for (int i = 0; i < 10; ++i) x(i) = history(9 - i);

        const ControllerStep fir_step =
            impulse_mpc_step(taps, history, r, CostSpec{}, BoxConstraints{});
        const ControllerStep mpc_step = ideal_mpc_step(ss, x, r, CostSpec{}, BoxConstraints{});
        REQUIRE(fir_step.diag.qp_status == qp::Status::Optimal);
        REQUIRE(mpc_step.diag.qp_status == qp::Status::Optimal);
        REQUIRE((fir_step.u_seq - mpc_step.u_seq).lpNorm<Eigen::Infinity>() < 1e-8);
    }
}

TEST_CASE("SMM-PC controller falls back to the previous input on infeasible QPs") {
    const DataRecord rec = make_data(50, 0.1, 9);
    const SignalMatrix sm = build(rec, 4, 10);
    const NoiseSpec noise{0.1, 0.1};
    CostSpec cost;

    // Pin the input to zero while demanding an unreachable output.
    BoxConstraints cons;
    cons.u_min = Eigen::VectorXd::Zero(10);
    cons.u_max = Eigen::VectorXd::Zero(10);
    cons.y_min = Eigen::VectorXd::Constant(10, 1e6);
    cons.y_max = Eigen::VectorXd::Constant(10, 2e6);
    SmmPcController ctrl(sm, noise, cost, cons, AdaptationOptions{});

    TrajectoryWindow w = zero_window(4, 10);
    w.u_ini = rec.u.tail(4);
    w.y_ini = rec.y.tail(4);
    const ControllerStep step = ctrl.step(w);
    CHECK(step.diag.qp_status != qp::Status::Optimal);
    CHECK(step.diag.fallback);
    CHECK(step.u == 0.0);  // no previous input yet
}

TEST_CASE("controller warm start tracks the optimizer") {
    const DataRecord rec = make_data(50, 0.1, 10);
    const SignalMatrix sm = build(rec, 4, 10);
    const NoiseSpec noise{0.1, 0.1};
    SmmPcController ctrl(sm, noise, CostSpec{}, BoxConstraints{}, AdaptationOptions{});
    TrajectoryWindow w = zero_window(4, 10);
    w.u_ini = rec.u.tail(4);
    w.y_ini = rec.y.tail(4);
    for (int k = 0; k < 10; ++k) w.r(k) = 0.5 * std::sin(std::numbers::pi * k / 10.0);
    const ControllerStep s1 = ctrl.step(w);
    REQUIRE(s1.diag.qp_status == qp::Status::Optimal);
    CHECK(std::isfinite(s1.diag.lambda));
    CHECK(s1.diag.lambda > 0.0);
    const ControllerStep s2 = ctrl.step(w);
    // Second step linearizes at the first optimizer's norm; lambda moves.
    CHECK(s2.diag.lambda != s1.diag.lambda);
}
