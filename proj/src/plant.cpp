#include "smmpc/plant.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace smmpc {

namespace {

// Strip leading zero coefficients so degrees reflect the actual polynomial.
std::vector<double> trim_leading_zeros(const std::vector<double>& c) {
    std::size_t first = 0;
    while (first + 1 < c.size() && c[first] == 0.0) ++first;
    return {c.begin() + static_cast<std::ptrdiff_t>(first), c.end()};
}

}  // namespace

StateSpace tf_to_ss(const TransferFunction& tf) {
    if (tf.den.empty()) {
        throw std::invalid_argument("tf_to_ss: empty denominator");
    }
    if (std::abs(tf.den[0] - 1.0) > 1e-12) {
        throw std::invalid_argument("tf_to_ss: denominator must be monic, got leading coefficient " +
                                    std::to_string(tf.den[0]));
    }
    const int n = tf.order();
    if (n < 1) {
        throw std::invalid_argument("tf_to_ss: denominator degree must be at least 1");
    }
    const std::vector<double> num = trim_leading_zeros(tf.num);
    const int num_degree = static_cast<int>(num.size()) - 1;
    const bool num_is_zero = num.size() == 1 && num[0] == 0.0;
    if (!num_is_zero && num_degree >= n) {
        throw std::invalid_argument("tf_to_ss: transfer function must be strictly proper (deg(num) < deg(den))");
    }

    // Controllable canonical form for
    //   den(z) = z^n + a_1 z^{n-1} + ... + a_n,
    //   num(z) = b_1 z^{n-1} + ... + b_n:
    //   A = [ 0 I ; -a_n ... -a_1 ],  B = e_n,  C = [b_n ... b_1],  D = 0.
    StateSpace ss;
    ss.A = Eigen::MatrixXd::Zero(n, n);
    ss.A.topRightCorner(n - 1, n - 1).setIdentity();
    for (int j = 0; j < n; ++j) {
        ss.A(n - 1, j) = -tf.den[static_cast<std::size_t>(n - j)];
    }
    ss.B = Eigen::VectorXd::Zero(n);
    ss.B(n - 1) = 1.0;
    ss.C = Eigen::RowVectorXd::Zero(n);
    // b_k multiplies z^{n-k}; pad the trimmed numerator on the left.
    for (int k = 0; k < static_cast<int>(num.size()); ++k) {
        const int power = static_cast<int>(num.size()) - 1 - k;  // power of z
        ss.C(power) = num[static_cast<std::size_t>(k)];
    }
    ss.D = 0.0;
    return ss;
}

SimResult simulate(const StateSpace& ss, const Eigen::VectorXd& u,
                   const Eigen::VectorXd& x0, const NoiseSpec& noise,
                   NormalStream& noise_stream) {
    if (u.size() == 0) {
        throw std::invalid_argument("simulate: empty input sequence");
    }
    if (x0.size() != ss.order()) {
        throw std::invalid_argument("simulate: initial state has length " +
                                    std::to_string(x0.size()) + ", expected " +
                                    std::to_string(ss.order()));
    }
    const Eigen::Index N = u.size();
    const double sigma = std::sqrt(noise.sigma2);
    SimResult out;
    out.y0.resize(N);
    out.y.resize(N);
    Eigen::VectorXd x = x0;
    for (Eigen::Index t = 0; t < N; ++t) {
        out.y0(t) = ss.C.dot(x) + ss.D * u(t);
        out.y(t) = out.y0(t) + sigma * noise_stream.next();
        x = ss.A * x + ss.B * u(t);
    }
    out.x_final = std::move(x);
    return out;
}

DataRecord generate_data(const StateSpace& ss, int N, const NoiseSpec& noise,
                         std::uint64_t master_seed, std::uint64_t run_index) {
    if (N < 1) {
        throw std::invalid_argument("generate_data: N must be positive");
    }
    NormalStream input_stream(master_seed, run_index, StreamRole::DataInput);
    NormalStream noise_stream(master_seed, run_index, StreamRole::DataNoise);

    DataRecord rec;
    rec.u.resize(N);
    for (int t = 0; t < N; ++t) rec.u(t) = input_stream.next();
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(ss.order());
    SimResult sim = simulate(ss, rec.u, x0, noise, noise_stream);
    rec.y = std::move(sim.y);
    rec.y0 = std::move(sim.y0);
    rec.x_final = std::move(sim.x_final);
    rec.noise = noise;
    rec.seed = master_seed;
    rec.run_index = run_index;
    return rec;
}

TransferFunction drift_tf(const TransferFunction& tf, const DriftSpec& drift, double t) {
    if (drift.den_index < 0 || drift.den_index >= static_cast<int>(tf.den.size())) {
        throw std::invalid_argument("drift_tf: den_index out of range");
    }
    if (drift.tau <= 0.0) {
        throw std::invalid_argument("drift_tf: tau must be positive");
    }
    TransferFunction drifted = tf;
    drifted.den[static_cast<std::size_t>(drift.den_index)] = drift.theta(t);
    return drifted;
}

StateSpace drift_plant(const TransferFunction& tf, const DriftSpec& drift, double t) {
    return tf_to_ss(drift_tf(tf, drift, t));
}

Eigen::VectorXd markov_params(const StateSpace& ss, int count) {
    Eigen::VectorXd h(count);
    if (count < 1) return h;
    h(0) = ss.D;
    Eigen::VectorXd v = ss.B;  // A^{k-1} B
    for (int k = 1; k < count; ++k) {
        h(k) = ss.C.dot(v);
        v = ss.A * v;
    }
    return h;
}

TransferFunction benchmark_plant() {
    TransferFunction tf;
    tf.num = {0.1159, 0.0, 0.1159 * 0.5, 0.0};
    tf.den = {1.0, -2.2, 2.42, -1.87, 0.7225};
    return tf;
}

DriftSpec benchmark_drift() {
    DriftSpec d;
    d.den_index = 3;
    d.theta0 = -1.87;
    d.tau = 1500.0;
    return d;
}

}  // namespace smmpc
