#pragma once

#include <map>
#include <vector>

#include <Eigen/Dense>

#include "pdrls/rls.hpp"
#include "pdrls/selection.hpp"
#include "pdrls/signal_model.hpp"
#include "pdrls/topology.hpp"

namespace pdrls {

struct NetworkState {
    std::vector<NodeState> nodes;
    long iteration = 0; // iterations applied so far

    int n_nodes() const { return static_cast<int>(nodes.size()); }
    int m() const {
        return nodes.empty() ? 0 : static_cast<int>(nodes[0].w.size());
    }
};

NetworkState init_network(int n_nodes, int m, double delta);

/// What one neighbor delivers: which entries it sent and their (possibly
/// noise-corrupted) values, compacted in ascending entry order.
struct NeighborPayload {
    SelectionMask mask;
    Eigen::VectorXd values; // size == mask.count()
};

/// Combination step for node k: received entries are averaged with the
/// combination weights; entries a neighbor withheld are substituted with the
/// node's own local estimate, so the weights always add to one per entry.
/// Requires a payload from every strict neighbor of k, none from k itself.
Eigen::VectorXd combine_partial(const Topology& topology,
                                const CombinationMatrix& weights, int k,
                                const Eigen::VectorXd& own_psi,
                                const std::map<int, NeighborPayload>& received);

/// Per-iteration randomness, one stream per entity so that stream identity
/// never depends on evaluation order.
struct StepStreams {
    std::vector<Rng>* selection = nullptr;  // one per node
    std::vector<Rng>* link_noise = nullptr; // one per directed link
};

/// One synchronous network iteration: every node adapts on its sample, then
/// exchanges selected entries (noise applied per directed link, only on
/// entries actually sent) and combines.  Reads the previous state, writes
/// the next; all adaptations complete before any combination.
void network_step(NetworkState& state, const Topology& topology,
                  const CombinationMatrix& weights,
                  const std::vector<Eigen::RowVectorXd>& u,
                  const std::vector<double>& d,
                  const SelectionScheme& scheme,
                  const LinkNoiseProfile& link_profile,
                  const std::vector<DirectedLink>& links, double lambda,
                  StepStreams streams);

/// Stacked error w_o - w_k for every node, node-major.
Eigen::VectorXd error_vector(const NetworkState& state,
                             const GroundTruth& truth);

} // namespace pdrls
