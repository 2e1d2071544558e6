#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "pdrls/selection.hpp"
#include "pdrls/signal_model.hpp"
#include "pdrls/theory.hpp"
#include "pdrls/topology.hpp"

namespace pdrls {

/// Monte-Carlo cross-checks of the closed-form moment matrices.  These
/// sample the same update-matrix structure the simulator realizes, so a
/// defect in either the closed forms or the sampling shows up as a located
/// mismatch.

/// One realized update matrix from per-node selection masks.
Eigen::MatrixXd sample_update_matrix(const Topology& topology,
                                     const CombinationMatrix& weights,
                                     const std::vector<SelectionMask>& masks,
                                     int m);

/// Masks distributed per the scheme kind's exact selection law: independent
/// uniform subsets per node, or one shared subset for the shared-schedule
/// kind.  (The partition-based kinds are validated at their nominal law.)
std::vector<SelectionMask> draw_oracle_masks(SchemeKind kind, int n_nodes,
                                             int m, int l, Rng& rng);

struct MomentCheck {
    double max_abs_error = 0.0;
    int row = 0;
    int col = 0;
    double threshold = 0.0;
    long draws = 0;
    bool pass = false;
};

/// Entrywise comparison locating the worst absolute deviation; the building
/// block of every check below, public so corrupted references are provably
/// caught where they differ.
MomentCheck compare_moments(const Eigen::MatrixXd& sampled,
                            const Eigen::MatrixXd& reference, double threshold,
                            long draws);

/// Sampled E[update matrix] vs the closed-form mean matrix.
MomentCheck validate_mean_moment(const Topology& topology,
                                 const CombinationMatrix& weights,
                                 SchemeKind kind, int l, int m, long draws,
                                 std::uint64_t seed, double threshold);

/// Sampled expected Kronecker square vs the closed-form second moment.
/// Dense accumulation: intended for (n_nodes * m)^2 <= 144.
MomentCheck validate_second_moment(const Topology& topology,
                                   const CombinationMatrix& weights,
                                   SchemeKind kind, int l, int m, long draws,
                                   std::uint64_t seed, double threshold);

/// Sampled covariance of the aggregate link-noise term vs the closed form,
/// entrywise within 3 standard errors (plus a small absolute floor).
MomentCheck validate_link_noise_covariance(const Topology& topology,
                                           const CombinationMatrix& weights,
                                           const LinkNoiseProfile& profile,
                                           SchemeKind kind, int l, int m,
                                           long draws, std::uint64_t seed);

} // namespace pdrls
