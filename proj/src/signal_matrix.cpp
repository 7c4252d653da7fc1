#include "smmpc/signal_matrix.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace smmpc {

Eigen::MatrixXd SignalMatrix::gram() const {
    Eigen::MatrixXd stacked(2 * L(), cols());
    stacked.topRows(L()) = U;
    stacked.bottomRows(L()) = Y;
    return stacked * stacked.transpose();
}

Eigen::MatrixXd hankel(const Eigen::VectorXd& seq, int rows) {
    if (rows < 1 || rows > seq.size()) {
        throw std::invalid_argument("hankel: rows must be in [1, len(seq)], got rows=" +
                                    std::to_string(rows) + ", len=" + std::to_string(seq.size()));
    }
    const int cols = static_cast<int>(seq.size()) - rows + 1;
    Eigen::MatrixXd H(rows, cols);
    for (int i = 0; i < rows; ++i) {
        H.row(i) = seq.segment(i, cols).transpose();
    }
    return H;
}

SignalMatrix build(const DataRecord& data, int L0, int Lp) {
    if (L0 < 1 || Lp < 1) {
        throw std::invalid_argument("build: L0 and Lp must be positive");
    }
    const int L = L0 + Lp;
    if (data.u.size() < L) {
        throw std::invalid_argument("build: record of length " + std::to_string(data.u.size()) +
                                    " too short for window length " + std::to_string(L));
    }
    SignalMatrix sm;
    sm.U = hankel(data.u, L);
    sm.Y = hankel(data.y, L);
    sm.L0 = L0;
    sm.Lp = Lp;
    return sm;
}

bool pe_order(const Eigen::VectorXd& u, int order) {
    if (order < 1 || order > u.size()) return false;
    const Eigen::MatrixXd H = hankel(u, order);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(H);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return false;
    const double tol = static_cast<double>(std::max(H.rows(), H.cols())) *
                       std::numeric_limits<double>::epsilon() * s(0);
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > tol) ++rank;
    }
    return rank == order;
}

SignalMatrix compress(const SignalMatrix& sm) {
    const int L = sm.L();
    const int M = sm.cols();
    if (M < 2 * L) {
        return sm;  // not applicable; flag stays as-is
    }
    Eigen::MatrixXd stacked(2 * L, M);
    stacked.topRows(L) = sm.U;
    stacked.bottomRows(L) = sm.Y;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeThinU);
    // W * S_2L: the 2L x 2L representative with the same Gram matrix.
    Eigen::MatrixXd ws = svd.matrixU() * svd.singularValues().asDiagonal();

    SignalMatrix out;
    out.U = ws.topRows(L);
    out.Y = ws.bottomRows(L);
    out.L0 = sm.L0;
    out.Lp = sm.Lp;
    out.gamma = sm.gamma;
    out.compressed = true;
    return out;
}

SignalMatrix append_online(const SignalMatrix& sm, const Eigen::VectorXd& u_win,
                           const Eigen::VectorXd& y_win, double gamma) {
    const int L = sm.L();
    if (u_win.size() != L || y_win.size() != L) {
        throw std::invalid_argument("append_online: window length " +
                                    std::to_string(u_win.size()) + " does not match L=" +
                                    std::to_string(L));
    }
    if (gamma <= 0.0 || gamma > 1.0) {
        throw std::invalid_argument("append_online: gamma must be in (0, 1]");
    }
    SignalMatrix out;
    const int M = sm.cols();
    out.U.resize(L, M + 1);
    out.U.leftCols(M) = gamma * sm.U;
    out.U.col(M) = u_win;
    out.Y.resize(L, M + 1);
    out.Y.leftCols(M) = gamma * sm.Y;
    out.Y.col(M) = y_win;
    out.L0 = sm.L0;
    out.Lp = sm.Lp;
    out.gamma = gamma;
    out.compressed = sm.compressed;
    if (sm.compressed || M + 1 > 2 * L) {
        out = compress(out);
    }
    return out;
}

}  // namespace smmpc
