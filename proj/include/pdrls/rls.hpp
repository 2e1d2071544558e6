#pragma once

#include <Eigen/Dense>

#include "pdrls/signal_model.hpp"

namespace pdrls {

/// Per-node recursive least-squares state.  p is the inverse of the
/// regularized, exponentially weighted sample covariance.
struct NodeState {
    Eigen::VectorXd w;   // combined estimate
    Eigen::VectorXd psi; // local (pre-combination) estimate
    Eigen::MatrixXd p;   // symmetric positive definite
};

/// w = psi = 0, p = I/delta.  Pre: m >= 1, delta > 0.
NodeState rls_init(int m, double delta);

/// One exponentially weighted RLS update from the node's combined estimate:
/// rank-one covariance downdate of p followed by the gain step into psi.
/// p is re-symmetrized after the update; w is left untouched.
/// Pre: lambda in (0, 1], finite inputs.
void rls_adapt(NodeState& state, const Eigen::RowVectorXd& u, double d,
               double lambda);

/// Weighted regularized least squares on a stacked dataset:
/// argmin_w sum_j weights_j (y_j - h_j w)^2 + ridge * |w|^2.
/// ridge = 0 requires a nonsingular normal matrix; pass delta*lambda^(i+1)
/// to reproduce the recursive estimator's initialization bias exactly.
Eigen::VectorXd batch_ls_solve(const BatchDataset& dataset,
                               double ridge = 0.0);

} // namespace pdrls
