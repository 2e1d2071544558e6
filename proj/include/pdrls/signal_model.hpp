#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "pdrls/rng.hpp"
#include "pdrls/topology.hpp"

namespace pdrls {

/// Common parameter vector the whole network estimates.
struct GroundTruth {
    Eigen::VectorXd w_o;
};

/// Standard normal entries, one per coefficient.
GroundTruth draw_ground_truth(int m, Rng& rng);

/// Per-node data statistics: diagonal regressor covariance R_u = diag(r_u)
/// and measurement-noise variance.
struct NodeProfile {
    Eigen::VectorXd r_u; // entries > 0
    double sigma2_v = 0.0;
};

/// Validating constructor; throws ConfigError on nonpositive covariance
/// entries, negative noise variance, or non-finite values.
NodeProfile make_node_profile(Eigen::VectorXd r_u, double sigma2_v);

/// Per-directed-link noise variances, indexed by position in the canonical
/// link enumeration.
struct LinkNoiseProfile {
    std::vector<DirectedLink> links;
    std::vector<double> sigma2; // aligned with links

    /// Variance for link l -> k; throws ConfigError if the link is unknown.
    double at(int source, int sink) const;
};

LinkNoiseProfile make_link_noise_profile(std::vector<DirectedLink> links,
                                         std::vector<double> sigma2);

/// Inclusive [lo, hi] draw ranges for generated profiles.
struct ProfileRanges {
    std::array<double, 2> r_u{0.5, 2.0};
    std::array<double, 2> sigma2_v{0.001, 0.01};
    std::array<double, 2> sigma2_psi{1e-4, 1e-2};
};

std::vector<NodeProfile> generate_node_profiles(int n_nodes, int m,
                                                const ProfileRanges& ranges,
                                                std::uint64_t seed);

LinkNoiseProfile generate_link_noise_profile(
    const std::vector<DirectedLink>& links, const ProfileRanges& ranges,
    std::uint64_t seed);

/// Zero-mean Gaussian row regressor with covariance diag(r_u).
Eigen::RowVectorXd draw_regressor(const NodeProfile& profile, Rng& rng);

/// d = u * w_o + v,  v ~ N(0, sigma2_v).  sigma2_v = 0 is exact.
double draw_measurement(const Eigen::RowVectorXd& u, const GroundTruth& truth,
                        double sigma2_v, Rng& rng);

/// Full-length noise vector for one transmission over link source -> sink.
/// Entries are iid N(0, sigma2); sigma2 = 0 yields exact zeros while still
/// consuming the same number of draws.
Eigen::VectorXd draw_link_noise(int source, int sink,
                                const LinkNoiseProfile& profile, int m,
                                Rng& rng);

/// One scalar observation and its regressor row.
struct Sample {
    double d = 0.0;
    Eigen::RowVectorXd u;
    double v = 0.0; // noise actually applied; bookkeeping only
};

/// Stacked regression data, newest sample first, with the matching geometric
/// weight vector diag entries {1, lambda, lambda^2, ...}.
struct BatchDataset {
    Eigen::VectorXd y;       // observations, newest first
    Eigen::MatrixXd h;       // regressor rows, newest first
    Eigen::VectorXd weights; // geometric weights, newest first
};

/// Stacks a chronological history (oldest first) into a BatchDataset.
/// Pre: history non-empty, consistent widths, lambda in (0, 1].
BatchDataset assemble_batch(const std::vector<Sample>& history, double lambda);

} // namespace pdrls
