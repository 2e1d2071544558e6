#include "pdrls/network.hpp"

#include "pdrls/errors.hpp"

namespace pdrls {

NetworkState init_network(int n_nodes, int m, double delta) {
    if (n_nodes < 1) throw ConfigError("network needs at least one node");
    NetworkState s;
    s.nodes.reserve(n_nodes);
    for (int k = 0; k < n_nodes; ++k) s.nodes.push_back(rls_init(m, delta));
    return s;
}

Eigen::VectorXd combine_partial(const Topology& topology,
                                const CombinationMatrix& weights, int k,
                                const Eigen::VectorXd& own_psi,
                                const std::map<int, NeighborPayload>& received) {
    const auto strict = topology.strict_neighbors(k);
    if (received.size() != strict.size()) {
        throw ConfigError("combination requires exactly one payload per neighbor");
    }
    Eigen::VectorXd w = weights.weights(k, k) * own_psi;
    for (int l : strict) {
        const auto it = received.find(l);
        if (it == received.end()) {
            throw ConfigError("missing payload from a neighbor");
        }
        const NeighborPayload& payload = it->second;
        if (payload.mask.diag.size() != own_psi.size()) {
            throw ConfigError("payload mask length must match the filter length");
        }
        if (payload.values.size() != payload.mask.count()) {
            throw ConfigError("payload value count must match its mask");
        }
        // Entries the neighbor withheld are filled with the node's own local
        // estimate, preserving unit weight per entry.
        Eigen::VectorXd contribution = own_psi;
        Eigen::Index pos = 0;
        for (Eigen::Index t = 0; t < own_psi.size(); ++t) {
            if (payload.mask.diag(t) != 0) {
                contribution(t) = payload.values(pos++);
            }
        }
        w.noalias() += weights.weights(l, k) * contribution;
    }
    return w;
}

void network_step(NetworkState& state, const Topology& topology,
                  const CombinationMatrix& weights,
                  const std::vector<Eigen::RowVectorXd>& u,
                  const std::vector<double>& d,
                  const SelectionScheme& scheme,
                  const LinkNoiseProfile& link_profile,
                  const std::vector<DirectedLink>& links, double lambda,
                  StepStreams streams) {
    const int n = state.n_nodes();
    const int m = state.m();
    if (topology.n_nodes != n || static_cast<int>(u.size()) != n ||
        static_cast<int>(d.size()) != n) {
        throw ConfigError("per-node data must cover every node exactly once");
    }
    if (streams.selection == nullptr || streams.link_noise == nullptr ||
        static_cast<int>(streams.selection->size()) != n ||
        streams.link_noise->size() != links.size()) {
        throw ConfigError("stream bundle must match the nodes and links");
    }

    // Adaptation completes network-wide before any exchange.
    for (int k = 0; k < n; ++k) {
        rls_adapt(state.nodes[k], u[k], d[k], lambda);
    }

    std::vector<SelectionMask> masks;
    masks.reserve(n);
    for (int k = 0; k < n; ++k) {
        masks.push_back(
            select_entries(scheme, state.iteration, (*streams.selection)[k]));
    }

    // One payload per directed link in canonical order.  The full-length
    // noise vector is drawn before masking so stream positions stay fixed
    // whatever the masks select.
    std::vector<std::map<int, NeighborPayload>> inbox(n);
    for (std::size_t j = 0; j < links.size(); ++j) {
        const DirectedLink& link = links[j];
        const Eigen::VectorXd noise = draw_link_noise(
            link.source, link.sink, link_profile, m, (*streams.link_noise)[j]);
        const SelectionMask& mask = masks[link.source];
        NeighborPayload payload;
        payload.mask = mask;
        payload.values.resize(mask.count());
        Eigen::Index pos = 0;
        for (int t = 0; t < m; ++t) {
            if (mask.diag(t) != 0) {
                payload.values(pos++) =
                    state.nodes[link.source].psi(t) + noise(t);
            }
        }
        inbox[link.sink].emplace(link.source, std::move(payload));
    }

    std::vector<Eigen::VectorXd> next_w(n);
    for (int k = 0; k < n; ++k) {
        next_w[k] =
            combine_partial(topology, weights, k, state.nodes[k].psi, inbox[k]);
    }
    for (int k = 0; k < n; ++k) state.nodes[k].w = std::move(next_w[k]);
    ++state.iteration;
}

Eigen::VectorXd error_vector(const NetworkState& state,
                             const GroundTruth& truth) {
    const int n = state.n_nodes();
    const int m = state.m();
    Eigen::VectorXd e(static_cast<Eigen::Index>(n) * m);
    for (int k = 0; k < n; ++k) {
        e.segment(static_cast<Eigen::Index>(k) * m, m) =
            truth.w_o - state.nodes[k].w;
    }
    return e;
}

} // namespace pdrls
