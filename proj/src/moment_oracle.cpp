#include "pdrls/moment_oracle.hpp"

#include <cmath>

#include "pdrls/errors.hpp"

namespace pdrls {

Eigen::MatrixXd sample_update_matrix(const Topology& topology,
                                     const CombinationMatrix& weights,
                                     const std::vector<SelectionMask>& masks,
                                     int m) {
    const int n_nodes = topology.n_nodes;
    if (static_cast<int>(masks.size()) != n_nodes) {
        throw ConfigError("one selection mask required per node");
    }
    const Eigen::Index n = static_cast<Eigen::Index>(n_nodes) * m;
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
    for (int p = 0; p < n_nodes; ++p) {
        for (int t = 0; t < m; ++t) {
            double own = 1.0;
            for (int l : topology.strict_neighbors(p)) {
                if (masks[l].diag(t) != 0) own -= weights.weights(l, p);
            }
            b(p * m + t, p * m + t) = own;
        }
        for (int q : topology.strict_neighbors(p)) {
            for (int t = 0; t < m; ++t) {
                if (masks[q].diag(t) != 0) {
                    b(p * m + t, q * m + t) = weights.weights(q, p);
                }
            }
        }
    }
    return b;
}

std::vector<SelectionMask> draw_oracle_masks(SchemeKind kind, int n_nodes,
                                             int m, int l, Rng& rng) {
    std::vector<SelectionMask> masks;
    masks.reserve(n_nodes);
    if (kind == SchemeKind::sequential) {
        const SelectionMask shared = draw_uniform_subset(m, l, rng);
        for (int k = 0; k < n_nodes; ++k) masks.push_back(shared);
    } else {
        for (int k = 0; k < n_nodes; ++k) {
            masks.push_back(draw_uniform_subset(m, l, rng));
        }
    }
    return masks;
}

MomentCheck compare_moments(const Eigen::MatrixXd& sampled,
                            const Eigen::MatrixXd& reference, double threshold,
                            long draws) {
    if (sampled.rows() != reference.rows() ||
        sampled.cols() != reference.cols()) {
        throw ConfigError("moment comparison requires equal shapes");
    }
    MomentCheck check;
    check.threshold = threshold;
    check.draws = draws;
    for (Eigen::Index c = 0; c < sampled.cols(); ++c) {
        for (Eigen::Index r = 0; r < sampled.rows(); ++r) {
            const double err = std::abs(sampled(r, c) - reference(r, c));
            if (err > check.max_abs_error) {
                check.max_abs_error = err;
                check.row = static_cast<int>(r);
                check.col = static_cast<int>(c);
            }
        }
    }
    check.pass = check.max_abs_error <= threshold;
    return check;
}

MomentCheck validate_mean_moment(const Topology& topology,
                                 const CombinationMatrix& weights,
                                 SchemeKind kind, int l, int m, long draws,
                                 std::uint64_t seed, double threshold) {
    if (draws < 1) throw ConfigError("at least one draw required");
    const Eigen::Index n = static_cast<Eigen::Index>(topology.n_nodes) * m;
    Rng rng = derive_stream(seed, StreamTag::selection);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    for (long i = 0; i < draws; ++i) {
        const auto masks = draw_oracle_masks(kind, topology.n_nodes, m, l, rng);
        acc += sample_update_matrix(topology, weights, masks, m);
    }
    acc /= static_cast<double>(draws);
    const double rho = transmission_fraction(l, m);
    const Eigen::MatrixXd reference =
        mean_update_matrix(topology, weights, rho, m);
    return compare_moments(acc, reference, threshold, draws);
}

MomentCheck validate_second_moment(const Topology& topology,
                                   const CombinationMatrix& weights,
                                   SchemeKind kind, int l, int m, long draws,
                                   std::uint64_t seed, double threshold) {
    if (draws < 1) throw ConfigError("at least one draw required");
    const Eigen::Index n = static_cast<Eigen::Index>(topology.n_nodes) * m;
    if (n * n > 144) {
        throw ResourceError(
            "second-moment sampling is limited to (n_nodes * m)^2 <= 144");
    }
    Rng rng = derive_stream(seed, StreamTag::selection);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n * n, n * n);
    for (long i = 0; i < draws; ++i) {
        const auto masks = draw_oracle_masks(kind, topology.n_nodes, m, l, rng);
        const Eigen::MatrixXd bt =
            sample_update_matrix(topology, weights, masks, m).transpose();
        // Kronecker square accumulated densely; sizes are tiny here.
        for (Eigen::Index r1 = 0; r1 < n; ++r1) {
            for (Eigen::Index c1 = 0; c1 < n; ++c1) {
                if (bt(r1, c1) == 0.0) continue;
                acc.block(r1 * n, c1 * n, n, n) += bt(r1, c1) * bt;
            }
        }
    }
    acc /= static_cast<double>(draws);
    const Eigen::MatrixXd reference =
        update_second_moment(topology, weights, kind, l, m);
    return compare_moments(acc, reference, threshold, draws);
}

MomentCheck validate_link_noise_covariance(const Topology& topology,
                                           const CombinationMatrix& weights,
                                           const LinkNoiseProfile& profile,
                                           SchemeKind kind, int l, int m,
                                           long draws, std::uint64_t seed) {
    if (draws < 2) throw ConfigError("at least two draws required");
    const int n_nodes = topology.n_nodes;
    const Eigen::Index n = static_cast<Eigen::Index>(n_nodes) * m;
    Rng mask_rng = derive_stream(seed, StreamTag::selection);
    Rng noise_rng = derive_stream(seed, StreamTag::link_noise);

    // Entrywise running sums of v v' and of its square, for standard errors.
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd v(n);
    for (long i = 0; i < draws; ++i) {
        const auto masks = draw_oracle_masks(kind, n_nodes, m, l, mask_rng);
        v.setZero();
        for (int k = 0; k < n_nodes; ++k) {
            for (int src : topology.strict_neighbors(k)) {
                const double sd = std::sqrt(profile.at(src, k));
                const double a = weights.weights(src, k);
                for (int t = 0; t < m; ++t) {
                    const double g = sd * noise_rng.gaussian();
                    if (masks[src].diag(t) != 0) {
                        v(k * m + t) += a * g;
                    }
                }
            }
        }
        for (Eigen::Index c = 0; c < n; ++c) {
            for (Eigen::Index r = 0; r < n; ++r) {
                const double prod = v(r) * v(c);
                sum(r, c) += prod;
                sum_sq(r, c) += prod * prod;
            }
        }
    }

    const double rho = transmission_fraction(l, m);
    const Eigen::MatrixXd reference =
        link_noise_covariance(topology, weights, profile, rho, m);

    MomentCheck check;
    check.draws = draws;
    check.pass = true;
    double worst_margin = -1.0;
    const double inv = 1.0 / static_cast<double>(draws);
    for (Eigen::Index c = 0; c < n; ++c) {
        for (Eigen::Index r = 0; r < n; ++r) {
            const double mean = sum(r, c) * inv;
            const double var =
                std::max(0.0, sum_sq(r, c) * inv - mean * mean);
            const double se = std::sqrt(var * inv);
            const double allowance = 3.0 * se + 1e-12;
            const double err = std::abs(mean - reference(r, c));
            if (err > allowance) check.pass = false;
            const double margin = err - allowance;
            if (margin > worst_margin) {
                worst_margin = margin;
                check.max_abs_error = err;
                check.threshold = allowance;
                check.row = static_cast<int>(r);
                check.col = static_cast<int>(c);
            }
        }
    }
    return check;
}

} // namespace pdrls
