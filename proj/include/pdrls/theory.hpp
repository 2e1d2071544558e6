#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pdrls/selection.hpp"
#include "pdrls/signal_model.hpp"
#include "pdrls/topology.hpp"

namespace pdrls {

/// Largest supported network dimension n_nodes * m for the closed-form
/// analysis; the second-moment matrix is dense of side (n_nodes * m)^2.
inline constexpr int kMaxTheoryDimension = 128;

/// Closed-form small-signal model of the partial-diffusion recursion.
/// All matrices are dense; sizes are n = n_nodes * m and n^2.
struct TheoryModel {
    int n_nodes = 0;
    int m = 0;
    double lambda = 0.0;
    double rho = 0.0; // nominal transmitted fraction l/m
    SchemeKind scheme = SchemeKind::sequential;

    Eigen::MatrixXd mean_matrix;        // n x n, expected update matrix
    Eigen::MatrixXd second_moment;      // n^2 x n^2, expected Kronecker square
    Eigen::MatrixXd noise_gain;         // n x n, (1-lambda) diag{R_u^-1}
    Eigen::MatrixXd measurement_noise;  // n x n, forcing term from data noise
    Eigen::MatrixXd link_noise;         // n x n, aggregate link-noise covariance

    std::vector<std::string> warnings;
};

struct TheoryInputs {
    const Topology& topology;
    const CombinationMatrix& weights;
    const std::vector<NodeProfile>& node_profiles;
    const LinkNoiseProfile& link_profile; // scaled variances
    SchemeKind scheme;
    int entries_l;
    double lambda;
};

/// Assembles the full model.  Throws ResourceError past kMaxTheoryDimension
/// and ConfigError on inconsistent inputs.
TheoryModel build_theory_model(const TheoryInputs& inputs);

/// Expected update matrix: diagonal block p is
/// (1 - rho * sum_{l in N_p \ {p}} a(l,p)) I, block (p,q) for a strict
/// neighbor q is rho * a(q,p) I.  Every row sums to one.
Eigen::MatrixXd mean_update_matrix(const Topology& topology,
                                   const CombinationMatrix& weights,
                                   double rho, int m);

/// Probability that node_p selects entry t1 and node_q selects entry t2 in
/// the same iteration.  The shared-schedule kind couples all node pairs; the
/// independent kinds factor across distinct nodes.  Partition kinds are
/// taken at their nominal uniform law.
double selection_pair_probability(SchemeKind kind, int node_p, int node_q,
                                  int t1, int t2, int l, int m);

/// Diagonal m x m matrix whose (t2,t2) entry is the probability that node_p
/// selects entry t and node_q selects entry t2.
Eigen::MatrixXd selection_pair_moment(SchemeKind kind, int t, int node_p,
                                      int node_q, int l, int m);

/// Expected Kronecker square of the transposed update matrix; columns sum to
/// one exactly because every realized update matrix has unit row sums.
Eigen::MatrixXd update_second_moment(const Topology& topology,
                                     const CombinationMatrix& weights,
                                     SchemeKind kind, int l, int m);

/// Forcing matrix from measurement noise: block k is
/// (1-lambda)^2 sigma2_v(k) diag(1/r_u(k)).
Eigen::MatrixXd measurement_noise_matrix(
    const std::vector<NodeProfile>& profiles, double lambda);

/// Covariance of the aggregate link-noise term entering node k's update:
/// block k is rho * sum_{l in N_k \ {k}} a(l,k)^2 sigma2(l,k) I.
Eigen::MatrixXd link_noise_covariance(const Topology& topology,
                                      const CombinationMatrix& weights,
                                      const LinkNoiseProfile& link_profile,
                                      double rho, int m);

struct StabilityReport {
    double lambda = 0.0;
    double mean_radius = 0.0;        // spectral radius of lambda * mean_matrix
    double second_moment_radius = 0.0; // of lambda^2 * second_moment
};

StabilityReport stability_report(const TheoryModel& model);

/// Spectral radius via the dense eigensolver; for small matrices.
double spectral_radius_dense(const Eigen::MatrixXd& a);

/// Spectral radius of an entrywise-nonnegative matrix via power iteration on
/// the all-ones start vector; 1-norm growth ratio, stabilized-window stop.
double spectral_radius_power(const Eigen::MatrixXd& a, int max_iters = 10000,
                             double tol = 1e-13);

struct MsdPrediction {
    double msd_ideal = 0.0;     // steady-state network MSD, noise-free links
    double msd_noisy = 0.0;     // with link noise
    double noise_penalty = 0.0; // msd_noisy - msd_ideal, computed directly
    std::vector<double> transient; // optional per-iteration sequence
};

/// Steady-state predictions from one linear solve of the weighted-variance
/// fixed point; the ideal/noisy/penalty additive identity is exact because
/// all three use the same solution vector.  Pre: lambda < 1 (the system is
/// singular at lambda = 1: throws DomainError), second-moment spectral
/// radius below one.  The solve is verified by iterative refinement to a
/// residual of 1e-10.
MsdPrediction steady_state_msd(const TheoryModel& model);

/// Per-iteration network MSD predicted from the error-variance recursion,
/// starting from exact initial error w_o at every node.  Element 0 equals
/// |w_o|^2.  Valid at lambda = 1.
std::vector<double> transient_msd(const TheoryModel& model,
                                  const GroundTruth& truth, int iterations);

/// Mean error trajectory E[error_i] = (lambda * mean_matrix)^i * initial;
/// element 0 is the initial vector itself.
std::vector<Eigen::VectorXd> predict_mean_error(
    const TheoryModel& model, const Eigen::VectorXd& initial, int iterations);

} // namespace pdrls
