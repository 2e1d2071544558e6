#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace pdrls {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Undirected connected network with the self-loop convention: every node is
/// a member of its own neighborhood.
struct Topology {
    int n_nodes = 0;
    BoolMatrix adjacency;                        // symmetric, true diagonal
    std::vector<std::vector<int>> neighborhoods; // ascending, includes self

    bool is_neighbor(int l, int k) const { return adjacency(l, k); }

    /// Neighbors of k excluding k itself, ascending.
    std::vector<int> strict_neighbors(int k) const;

    int degree(int k) const {
        return static_cast<int>(neighborhoods[k].size()) - 1;
    }
};

/// Validates a square 0/1 adjacency matrix (symmetry, connectivity) and
/// builds the neighborhood lists.  The diagonal is forced true regardless of
/// the input, matching the self-loop convention.
Topology topology_from_adjacency(const BoolMatrix& adjacency);

/// Samples an Erdos-Renyi graph with edge probability
/// target_avg_degree / (n_nodes - 1) and resamples until connected.
/// Deterministic in the seed.  Pre: n_nodes >= 2,
/// 1 <= target_avg_degree <= n_nodes - 1.
Topology generate_topology(int n_nodes, double target_avg_degree,
                           std::uint64_t seed);

bool is_connected(const BoolMatrix& adjacency);

/// Left-stochastic combination weights: column k holds the weights node k
/// applies to the estimates it uses, zero outside the neighborhood.
struct CombinationMatrix {
    Eigen::MatrixXd weights;
};

/// Uniform averaging over each neighborhood: a(l,k) = 1/|N_k| for l in N_k.
CombinationMatrix uniform_combination(const Topology& topology);

/// Validates user-supplied weights against the topology: zero pattern must
/// match the adjacency and every column must sum to 1 within 1e-12.
CombinationMatrix validate_combination(const Topology& topology,
                                       const Eigen::MatrixXd& weights);

/// One directed communication link, source -> sink.
struct DirectedLink {
    int source = 0;
    int sink = 0;

    bool operator==(const DirectedLink&) const = default;
};

/// Canonical enumeration of the directed links (l, k), l != k, l in N_k:
/// ordered by sink k, then by source l, both ascending.  Positions in this
/// list index the per-link noise profile and noise streams.
std::vector<DirectedLink> enumerate_links(const Topology& topology);

} // namespace pdrls
