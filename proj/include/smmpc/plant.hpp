#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "smmpc/random.hpp"

namespace smmpc {

// Discrete-time SISO transfer function, coefficients in descending powers
// of z. The denominator must be monic and the fraction strictly proper.
struct TransferFunction {
    std::vector<double> num;
    std::vector<double> den;

    int order() const { return static_cast<int>(den.size()) - 1; }
};

struct StateSpace {
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
    Eigen::RowVectorXd C;
    double D = 0.0;

    int order() const { return static_cast<int>(A.rows()); }
};

struct NoiseSpec {
    double sigma2 = 0.0;    // output-noise variance of the offline data
    double sigma2_p = 0.0;  // online measurement-noise variance
};

// One offline identification experiment.
struct DataRecord {
    Eigen::VectorXd u;
    Eigen::VectorXd y;   // noisy output
    Eigen::VectorXd y0;  // noise-free output
    NoiseSpec noise;
    std::uint64_t seed = 0;
    std::uint64_t run_index = 0;
    Eigen::VectorXd x_final;  // plant state after the last sample, for chaining
};

// Slow drift of one denominator coefficient:
// den[den_index] evolves as theta(t) = theta0 / (1 + t/tau).
// theta0 carries the sign of the stored coefficient, so theta(0) reproduces
// the nominal plant.
struct DriftSpec {
    int den_index = 0;
    double theta0 = 0.0;
    double tau = 1.0;

    double theta(double t) const { return theta0 / (1.0 + t / tau); }
};

struct SimResult {
    Eigen::VectorXd y;
    Eigen::VectorXd y0;
    Eigen::VectorXd x_final;
};

// Controllable canonical realization. Throws std::invalid_argument for a
// non-monic denominator or a non-strictly-proper fraction.
StateSpace tf_to_ss(const TransferFunction& tf);

// x_{t+1} = A x_t + B u_t, y_t = C x_t + D u_t + w_t with w ~ N(0, sigma2).
SimResult simulate(const StateSpace& ss, const Eigen::VectorXd& u,
                   const Eigen::VectorXd& x0, const NoiseSpec& noise,
                   NormalStream& noise_stream);

// Unit i.i.d. Gaussian input from zero initial state; input and output noise
// draw from the DataInput / DataNoise streams of (master_seed, run_index).
DataRecord generate_data(const StateSpace& ss, int N, const NoiseSpec& noise,
                         std::uint64_t master_seed, std::uint64_t run_index = 0);

TransferFunction drift_tf(const TransferFunction& tf, const DriftSpec& drift, double t);
StateSpace drift_plant(const TransferFunction& tf, const DriftSpec& drift, double t);

// Impulse-response coefficients h_0 .. h_{count-1}.
Eigen::VectorXd markov_params(const StateSpace& ss, int count);

// The fourth-order benchmark plant
// G(z) = 0.1159 (z^3 + 0.5 z) / (z^4 - 2.2 z^3 + 2.42 z^2 - 1.87 z + 0.7225).
TransferFunction benchmark_plant();

// Drift of the benchmark plant's first-order denominator coefficient,
// theta(t) = -1.87 / (1 + t/1500) (stored sign convention).
DriftSpec benchmark_drift();

}  // namespace smmpc
