#include "pdrls/rls.hpp"

#include <cmath>

#include "pdrls/errors.hpp"

namespace pdrls {

NodeState rls_init(int m, double delta) {
    if (m < 1) throw ConfigError("filter length must be at least 1");
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw ConfigError("regularization delta must be positive and finite");
    }
    NodeState s;
    s.w = Eigen::VectorXd::Zero(m);
    s.psi = Eigen::VectorXd::Zero(m);
    s.p = Eigen::MatrixXd::Identity(m, m) / delta;
    return s;
}

void rls_adapt(NodeState& state, const Eigen::RowVectorXd& u, double d,
               double lambda) {
    if (u.size() != state.w.size()) {
        throw ConfigError("regressor width must match the filter length");
    }
    if (!(lambda > 0.0) || lambda > 1.0) {
        throw ConfigError("forgetting factor must lie in (0, 1]");
    }
    if (!u.allFinite() || !std::isfinite(d)) {
        throw ConfigError("rls update requires finite inputs");
    }
    // Rank-one inverse update: p <- (p - p u' u p / (lambda + u p u')) / lambda.
    const Eigen::VectorXd pu = state.p * u.transpose();
    const double denom = lambda + u.dot(pu);
    state.p.noalias() -= pu * (pu.transpose() / denom);
    state.p /= lambda;
    state.p = ((state.p + state.p.transpose()) * 0.5).eval();
    const double innovation = d - u.dot(state.w);
    state.psi = state.w + state.p * u.transpose() * innovation;
}

Eigen::VectorXd batch_ls_solve(const BatchDataset& dataset, double ridge) {
    const Eigen::Index n = dataset.y.size();
    const Eigen::Index m = dataset.h.cols();
    if (n == 0 || dataset.h.rows() != n || dataset.weights.size() != n) {
        throw ConfigError("batch dataset stacks must be non-empty and aligned");
    }
    if (!(ridge >= 0.0) || !std::isfinite(ridge)) {
        throw ConfigError("ridge weight must be nonnegative and finite");
    }
    Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (Eigen::Index row = 0; row < n; ++row) {
        const double wgt = dataset.weights(row);
        normal.noalias() +=
            wgt * dataset.h.row(row).transpose() * dataset.h.row(row);
        rhs.noalias() += wgt * dataset.y(row) * dataset.h.row(row).transpose();
    }
    normal.diagonal().array() += ridge;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    if (ldlt.info() != Eigen::Success) {
        throw ConfigError("normal matrix factorization failed");
    }
    // The normal equations are consistent even when rank-deficient, so a
    // residual test alone cannot see the deficiency; the pivots can.
    const double pivot_min = ldlt.vectorD().minCoeff();
    const double pivot_max = ldlt.vectorD().maxCoeff();
    if (pivot_min <= 1e-12 * std::max(pivot_max, 0.0)) {
        throw ConfigError("normal matrix is singular; add ridge regularization");
    }
    const Eigen::VectorXd x = ldlt.solve(rhs);
    const double scale = normal.cwiseAbs().maxCoeff();
    if ((normal * x - rhs).cwiseAbs().maxCoeff() >
        1e-8 * std::max(1.0, scale) * std::max(1.0, x.cwiseAbs().maxCoeff())) {
        throw ConfigError("normal matrix is singular; add ridge regularization");
    }
    return x;
}

} // namespace pdrls
