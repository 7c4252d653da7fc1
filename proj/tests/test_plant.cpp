#include "doctest.h"

#include <random>

#include "smmpc/plant.hpp"

using namespace smmpc;

namespace {

// Independent oracle: impulse response by polynomial long division of
// num/den, i.e. h_k = b_k - sum_j a_j h_{k-j} with b_k the (padded)
// numerator coefficients of z^{n-k}.
Eigen::VectorXd long_division_markov(const TransferFunction& tf, int count) {
    const int n = tf.order();
    std::vector<double> a(static_cast<std::size_t>(n) + 1, 0.0);  // a[j], a[0] = 1
    for (int j = 0; j <= n; ++j) a[static_cast<std::size_t>(j)] = tf.den[static_cast<std::size_t>(j)];
    std::vector<double> b(static_cast<std::size_t>(n) + 1, 0.0);  // b[k] multiplies z^{n-k}
    const int pad = n + 1 - static_cast<int>(tf.num.size());
    for (std::size_t i = 0; i < tf.num.size(); ++i) {
        b[static_cast<std::size_t>(pad) + i] = tf.num[i];
    }
    Eigen::VectorXd h = Eigen::VectorXd::Zero(count);
    for (int k = 0; k < count; ++k) {
        double v = k <= n ? b[static_cast<std::size_t>(k)] : 0.0;
        for (int j = 1; j <= std::min(k, n); ++j) {
            v -= a[static_cast<std::size_t>(j)] * h(k - j);
        }
        h(k) = v;
    }
    return h;
}

// Random stable monic denominator from roots inside the unit disc.
TransferFunction random_stable_tf(std::mt19937_64& rng, int order) {
    std::uniform_real_distribution<double> mag(0.05, 0.9);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    // Build den = prod (z - p_i) with real/complex-conjugate roots.
    std::vector<double> den{1.0};
    int remaining = order;
    while (remaining > 0) {
        if (remaining >= 2 && coeff(rng) > 0.0) {
            const double r = mag(rng);
            const double th = coeff(rng) * 3.14159;
            // (z^2 - 2 r cos th z + r^2)
            const double c1 = -2.0 * r * std::cos(th), c2 = r * r;
            std::vector<double> next(den.size() + 2, 0.0);
            for (std::size_t i = 0; i < den.size(); ++i) {
                next[i] += den[i];
                next[i + 1] += c1 * den[i];
                next[i + 2] += c2 * den[i];
            }
            den = next;
            remaining -= 2;
        } else {
            const double p = (coeff(rng) > 0 ? 1.0 : -1.0) * mag(rng);
            std::vector<double> next(den.size() + 1, 0.0);
            for (std::size_t i = 0; i < den.size(); ++i) {
                next[i] += den[i];
                next[i + 1] += -p * den[i];
            }
            den = next;
            remaining -= 1;
        }
    }
    TransferFunction tf;
    tf.den = den;
    tf.num.resize(static_cast<std::size_t>(order));
    for (auto& c : tf.num) c = coeff(rng);
    return tf;
}

}  // namespace

TEST_CASE("tf_to_ss realizes the benchmark plant in controllable canonical form") {
    const StateSpace ss = tf_to_ss(benchmark_plant());
    CHECK(ss.order() == 4);
    CHECK(ss.A(3, 0) == doctest::Approx(-0.7225).epsilon(1e-12));
    CHECK(ss.A(3, 1) == doctest::Approx(1.87).epsilon(1e-12));
    CHECK(ss.A(3, 2) == doctest::Approx(-2.42).epsilon(1e-12));
    CHECK(ss.A(3, 3) == doctest::Approx(2.2).epsilon(1e-12));
    CHECK(ss.A(0, 1) == 1.0);
    CHECK(ss.B(3) == 1.0);
    CHECK(ss.D == 0.0);
}

TEST_CASE("tf_to_ss handles the pure delay 1/z") {
    TransferFunction tf;
    tf.num = {1.0};
    tf.den = {1.0, 0.0};
    const StateSpace ss = tf_to_ss(tf);
    CHECK(ss.order() == 1);
    CHECK(ss.A(0, 0) == 0.0);
    CHECK(ss.B(0) == 1.0);
    CHECK(ss.C(0) == 1.0);
    CHECK(ss.D == 0.0);
}

TEST_CASE("tf_to_ss rejects malformed transfer functions") {
    TransferFunction nonmonic;
    nonmonic.num = {1.0};
    nonmonic.den = {2.0, 1.0};
    CHECK_THROWS_AS(tf_to_ss(nonmonic), std::invalid_argument);

    TransferFunction improper;
    improper.num = {1.0, 0.0};
    improper.den = {1.0, 0.5};
    CHECK_THROWS_AS(tf_to_ss(improper), std::invalid_argument);
}

TEST_CASE("benchmark Markov parameters match the long-division oracle") {
    const TransferFunction tf = benchmark_plant();
    const Eigen::VectorXd h = markov_params(tf_to_ss(tf), 20);
    CHECK(h(0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(h(1) == doctest::Approx(0.1159).epsilon(1e-12));
    CHECK(h(2) == doctest::Approx(0.25498).epsilon(1e-10));
    const Eigen::VectorXd oracle = long_division_markov(tf, 20);
    CHECK((h - oracle).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("realization correctness on random stable transfer functions") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 25; ++trial) {
        const int order = 1 + static_cast<int>(rng() % 6);
        const TransferFunction tf = random_stable_tf(rng, order);
        const Eigen::VectorXd h = markov_params(tf_to_ss(tf), 20);
        const Eigen::VectorXd oracle = long_division_markov(tf, 20);
        REQUIRE((h - oracle).lpNorm<Eigen::Infinity>() < 1e-10);
    }
}

TEST_CASE("impulse response of the noise-free simulation equals the Markov parameters") {
    const StateSpace ss = tf_to_ss(benchmark_plant());
    Eigen::VectorXd u = Eigen::VectorXd::Zero(15);
    u(0) = 1.0;
    NormalStream stream(1, 0, StreamRole::DataNoise);
    const SimResult sim = simulate(ss, u, Eigen::VectorXd::Zero(4), NoiseSpec{0.0, 0.0}, stream);
    CHECK((sim.y0 - markov_params(ss, 15)).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK((sim.y - sim.y0).lpNorm<Eigen::Infinity>() == 0.0);  // sigma2 = 0
}

TEST_CASE("simulation is linear in the input") {
    const StateSpace ss = tf_to_ss(benchmark_plant());
    NormalStream gen(7, 0, StreamRole::DataInput);
    Eigen::VectorXd u1(30), u2(30);
    for (int i = 0; i < 30; ++i) {
        u1(i) = gen.next();
        u2(i) = gen.next();
    }
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(4);
    NoiseSpec nf{0.0, 0.0};
    NormalStream s1(1, 0, StreamRole::DataNoise), s2(1, 0, StreamRole::DataNoise),
        s3(1, 0, StreamRole::DataNoise), s4(1, 0, StreamRole::DataNoise);
    const Eigen::VectorXd sum = simulate(ss, u1 + u2, x0, nf, s1).y0;
    const Eigen::VectorXd a = simulate(ss, u1, x0, nf, s2).y0;
    const Eigen::VectorXd b = simulate(ss, u2, x0, nf, s3).y0;
    const Eigen::VectorXd zero = simulate(ss, Eigen::VectorXd::Zero(30), x0, nf, s4).y0;
    CHECK((sum - a - b + zero).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("sample variance of injected noise is in the chi-square band") {
    // N = 50 draws of N(0, 0.1): the 95% band for the sample variance is
    // roughly [0.05, 0.17].
    const StateSpace ss = tf_to_ss(benchmark_plant());
    int inside = 0;
    const int trials = 40;
    for (int t = 0; t < trials; ++t) {
        const DataRecord rec = generate_data(ss, 50, NoiseSpec{0.1, 0.0}, 1000 + t);
        const Eigen::VectorXd w = rec.y - rec.y0;
        const double var = w.squaredNorm() / w.size();
        if (var >= 0.05 && var <= 0.17) ++inside;
    }
    CHECK(inside >= trials * 9 / 10);
}

TEST_CASE("generate_data is deterministic and seeds are split by role") {
    const StateSpace ss = tf_to_ss(benchmark_plant());
    const DataRecord a = generate_data(ss, 50, NoiseSpec{0.1, 0.1}, 5, 3);
    const DataRecord b = generate_data(ss, 50, NoiseSpec{0.1, 0.1}, 5, 3);
    CHECK(a.u == b.u);
    CHECK(a.y == b.y);
    CHECK(a.x_final == b.x_final);

    // Same seed, different noise variance: the input realization (separate
    // stream) is untouched.
    const DataRecord c = generate_data(ss, 50, NoiseSpec{1.0, 0.0}, 5, 3);
    CHECK(a.u == c.u);
    CHECK(a.y0 == c.y0);
    CHECK(a.y != c.y);
}

TEST_CASE("drift follows theta(t) = theta0 / (1 + t/tau)") {
    const TransferFunction tf = benchmark_plant();
    const DriftSpec drift = benchmark_drift();

    const StateSpace at0 = drift_plant(tf, drift, 0.0);
    const StateSpace nominal = tf_to_ss(tf);
    CHECK((at0.A - nominal.A).lpNorm<Eigen::Infinity>() == 0.0);

    const TransferFunction at1500 = drift_tf(tf, drift, 1500.0);
    CHECK(at1500.den[3] == doctest::Approx(-0.935).epsilon(1e-12));

    DriftSpec slow = drift;
    slow.tau = 1e18;
    const TransferFunction frozen = drift_tf(tf, slow, 120.0);
    CHECK(frozen.den[3] == doctest::Approx(-1.87).epsilon(1e-10));
}

TEST_CASE("time-varying simulation carries the state across coefficient changes") {
    const TransferFunction tf = benchmark_plant();
    const DriftSpec drift = benchmark_drift();
    // Step the drifting plant manually; state must evolve continuously.
    Eigen::VectorXd x = Eigen::VectorXd::Ones(4);
    for (int t = 0; t < 5; ++t) {
        const StateSpace ss = drift_plant(tf, drift, t);
        x = ss.A * x + ss.B * 1.0;
        REQUIRE(x.allFinite());
    }
    CHECK(x.lpNorm<Eigen::Infinity>() > 0.0);
}
