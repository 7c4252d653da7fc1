#pragma once

#include <Eigen/Dense>

#include "smmpc/plant.hpp"

namespace smmpc {

// Stacked block-Hankel data matrix col(U, Y) with past/future partition.
// Uncompressed matrices keep the Hankel structure; after compression only
// the column space (equivalently the Gram matrix) is preserved.
struct SignalMatrix {
    Eigen::MatrixXd U;  // L x M
    Eigen::MatrixXd Y;  // L x M
    int L0 = 0;
    int Lp = 0;
    double gamma = 1.0;
    bool compressed = false;

    int L() const { return L0 + Lp; }
    int cols() const { return static_cast<int>(U.cols()); }

    Eigen::Block<const Eigen::MatrixXd> Up() const { return U.topRows(L0); }
    Eigen::Block<const Eigen::MatrixXd> Uf() const { return U.bottomRows(Lp); }
    Eigen::Block<const Eigen::MatrixXd> Yp() const { return Y.topRows(L0); }
    Eigen::Block<const Eigen::MatrixXd> Yf() const { return Y.bottomRows(Lp); }

    // Gram matrix of col(U, Y); invariant under compression.
    Eigen::MatrixXd gram() const;
};

// Past window and reference segment consumed by one controller step.
struct TrajectoryWindow {
    Eigen::VectorXd u_ini;  // length L0
    Eigen::VectorXd y_ini;  // length L0
    Eigen::VectorXd r;      // length Lp
    Eigen::VectorXd state;  // true plant state; only the ideal MPC reads it
};

// rows x (len-rows+1) matrix with entry (i, j) = seq(i + j).
Eigen::MatrixXd hankel(const Eigen::VectorXd& seq, int rows);

SignalMatrix build(const DataRecord& data, int L0, int Lp);

// Persistency of excitation: the order-`order` Hankel matrix of u has full
// row rank. Singular values below max(dim) * eps * s_max count as zero.
bool pe_order(const Eigen::VectorXd& u, int order);

// SVD compression to 2L columns (W * S_2L). Returns the input unchanged
// (compressed flag false) when M < 2L.
SignalMatrix compress(const SignalMatrix& sm);

// Scale existing columns by gamma and append the window as a new column;
// recompresses to 2L columns whenever the input was compressed or the
// result would exceed 2L columns.
SignalMatrix append_online(const SignalMatrix& sm, const Eigen::VectorXd& u_win,
                           const Eigen::VectorXd& y_win, double gamma);

}  // namespace smmpc
