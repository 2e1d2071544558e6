#include "pdrls/topology.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "pdrls/errors.hpp"
#include "pdrls/rng.hpp"

namespace pdrls {

std::vector<int> Topology::strict_neighbors(int k) const {
    std::vector<int> out;
    out.reserve(neighborhoods[k].size() - 1);
    for (int l : neighborhoods[k]) {
        if (l != k) out.push_back(l);
    }
    return out;
}

bool is_connected(const BoolMatrix& adjacency) {
    const int n = static_cast<int>(adjacency.rows());
    if (n == 0) return false;
    std::vector<bool> seen(n, false);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = true;
    int reached = 1;
    while (!frontier.empty()) {
        int v = frontier.front();
        frontier.pop();
        for (int w = 0; w < n; ++w) {
            if (w != v && adjacency(v, w) && !seen[w]) {
                seen[w] = true;
                ++reached;
                frontier.push(w);
            }
        }
    }
    return reached == n;
}

Topology topology_from_adjacency(const BoolMatrix& adjacency) {
    const int n = static_cast<int>(adjacency.rows());
    if (n < 1 || adjacency.cols() != n) {
        throw ConfigError("adjacency matrix must be square and non-empty");
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (adjacency(i, j) != adjacency(j, i)) {
                throw ConfigError("adjacency matrix must be symmetric");
            }
        }
    }
    Topology t;
    t.n_nodes = n;
    t.adjacency = adjacency;
    t.adjacency.diagonal().setConstant(true);
    if (!is_connected(t.adjacency)) {
        throw ConfigError("adjacency matrix must describe a connected graph");
    }
    t.neighborhoods.resize(n);
    for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
            if (t.adjacency(l, k)) t.neighborhoods[k].push_back(l);
        }
    }
    return t;
}

Topology generate_topology(int n_nodes, double target_avg_degree,
                           std::uint64_t seed) {
    if (n_nodes < 2) {
        throw ConfigError("topology generation requires at least 2 nodes");
    }
    if (!(target_avg_degree >= 1.0) ||
        !(target_avg_degree <= static_cast<double>(n_nodes - 1))) {
        throw ConfigError(
            "target average degree must lie in [1, n_nodes - 1]");
    }
    const double p = target_avg_degree / static_cast<double>(n_nodes - 1);
    Rng rng = derive_stream(seed, StreamTag::topology);
    constexpr int kMaxAttempts = 100000;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        BoolMatrix adj = BoolMatrix::Constant(n_nodes, n_nodes, false);
        for (int i = 0; i < n_nodes; ++i) {
            adj(i, i) = true;
            for (int j = i + 1; j < n_nodes; ++j) {
                bool edge = rng.uniform(0.0, 1.0) < p;
                adj(i, j) = edge;
                adj(j, i) = edge;
            }
        }
        if (is_connected(adj)) return topology_from_adjacency(adj);
    }
    throw ConfigError("topology generation failed to reach a connected graph");
}

CombinationMatrix uniform_combination(const Topology& topology) {
    const int n = topology.n_nodes;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        const double w = 1.0 / static_cast<double>(topology.neighborhoods[k].size());
        for (int l : topology.neighborhoods[k]) a(l, k) = w;
    }
    return CombinationMatrix{std::move(a)};
}

CombinationMatrix validate_combination(const Topology& topology,
                                       const Eigen::MatrixXd& weights) {
    const int n = topology.n_nodes;
    if (weights.rows() != n || weights.cols() != n) {
        throw ConfigError("combination matrix size must match the topology");
    }
    for (int k = 0; k < n; ++k) {
        double col_sum = 0.0;
        for (int l = 0; l < n; ++l) {
            const double a = weights(l, k);
            if (!std::isfinite(a) || a < 0.0) {
                throw ConfigError("combination weights must be finite and nonnegative");
            }
            if (!topology.is_neighbor(l, k) && a != 0.0) {
                throw ConfigError("combination weight set outside the neighborhood");
            }
            col_sum += a;
        }
        if (std::abs(col_sum - 1.0) > 1e-12) {
            throw ConfigError("combination matrix columns must sum to 1");
        }
    }
    return CombinationMatrix{weights};
}

std::vector<DirectedLink> enumerate_links(const Topology& topology) {
    std::vector<DirectedLink> links;
    for (int k = 0; k < topology.n_nodes; ++k) {
        for (int l : topology.neighborhoods[k]) {
            if (l != k) links.push_back(DirectedLink{l, k});
        }
    }
    return links;
}

} // namespace pdrls
