#include "pdrls/signal_model.hpp"

#include <cmath>
#include <utility>

#include "pdrls/errors.hpp"

namespace pdrls {

GroundTruth draw_ground_truth(int m, Rng& rng) {
    Eigen::VectorXd w(m);
    for (int t = 0; t < m; ++t) w(t) = rng.gaussian();
    return GroundTruth{std::move(w)};
}

NodeProfile make_node_profile(Eigen::VectorXd r_u, double sigma2_v) {
    if (r_u.size() == 0) throw ConfigError("node profile needs at least one coefficient");
    for (Eigen::Index t = 0; t < r_u.size(); ++t) {
        if (!std::isfinite(r_u(t)) || r_u(t) <= 0.0) {
            throw ConfigError("regressor covariance entries must be finite and positive");
        }
    }
    if (!std::isfinite(sigma2_v) || sigma2_v < 0.0) {
        throw ConfigError("measurement noise variance must be finite and nonnegative");
    }
    return NodeProfile{std::move(r_u), sigma2_v};
}

double LinkNoiseProfile::at(int source, int sink) const {
    for (std::size_t i = 0; i < links.size(); ++i) {
        if (links[i].source == source && links[i].sink == sink) return sigma2[i];
    }
    throw ConfigError("link noise variance requested for an unknown link");
}

LinkNoiseProfile make_link_noise_profile(std::vector<DirectedLink> links,
                                         std::vector<double> sigma2) {
    if (links.size() != sigma2.size()) {
        throw ConfigError("link noise profile must cover every link exactly once");
    }
    for (double s : sigma2) {
        if (!std::isfinite(s) || s < 0.0) {
            throw ConfigError("link noise variances must be finite and nonnegative");
        }
    }
    return LinkNoiseProfile{std::move(links), std::move(sigma2)};
}

std::vector<NodeProfile> generate_node_profiles(int n_nodes, int m,
                                                const ProfileRanges& ranges,
                                                std::uint64_t seed) {
    std::vector<NodeProfile> profiles;
    profiles.reserve(n_nodes);
    for (int k = 0; k < n_nodes; ++k) {
        Rng rng = derive_stream(seed, StreamTag::node_profile, static_cast<std::uint64_t>(k));
        Eigen::VectorXd r(m);
        for (int t = 0; t < m; ++t) r(t) = rng.uniform(ranges.r_u[0], ranges.r_u[1]);
        const double s2v = rng.uniform(ranges.sigma2_v[0], ranges.sigma2_v[1]);
        profiles.push_back(make_node_profile(std::move(r), s2v));
    }
    return profiles;
}

LinkNoiseProfile generate_link_noise_profile(
    const std::vector<DirectedLink>& links, const ProfileRanges& ranges,
    std::uint64_t seed) {
    std::vector<double> sigma2;
    sigma2.reserve(links.size());
    for (std::size_t i = 0; i < links.size(); ++i) {
        Rng rng = derive_stream(seed, StreamTag::link_profile, static_cast<std::uint64_t>(i));
        sigma2.push_back(rng.uniform(ranges.sigma2_psi[0], ranges.sigma2_psi[1]));
    }
    return make_link_noise_profile(links, std::move(sigma2));
}

Eigen::RowVectorXd draw_regressor(const NodeProfile& profile, Rng& rng) {
    const Eigen::Index m = profile.r_u.size();
    Eigen::RowVectorXd u(m);
    for (Eigen::Index t = 0; t < m; ++t) {
        u(t) = std::sqrt(profile.r_u(t)) * rng.gaussian();
    }
    return u;
}

double draw_measurement(const Eigen::RowVectorXd& u, const GroundTruth& truth,
                        double sigma2_v, Rng& rng) {
    if (u.size() != truth.w_o.size()) {
        throw ConfigError("regressor width must match the ground truth");
    }
    // The Gaussian is drawn even at zero variance so the stream position
    // never depends on the profile values.
    const double g = rng.gaussian();
    return u.dot(truth.w_o) + std::sqrt(sigma2_v) * g;
}

Eigen::VectorXd draw_link_noise(int source, int sink,
                                const LinkNoiseProfile& profile, int m,
                                Rng& rng) {
    const double scale = std::sqrt(profile.at(source, sink));
    Eigen::VectorXd v(m);
    for (int t = 0; t < m; ++t) v(t) = scale * rng.gaussian();
    return v;
}

BatchDataset assemble_batch(const std::vector<Sample>& history, double lambda) {
    if (history.empty()) throw ConfigError("batch assembly needs at least one sample");
    if (!(lambda > 0.0) || lambda > 1.0) {
        throw ConfigError("forgetting factor must lie in (0, 1]");
    }
    const Eigen::Index n = static_cast<Eigen::Index>(history.size());
    const Eigen::Index m = history.front().u.size();
    BatchDataset out;
    out.y.resize(n);
    out.h.resize(n, m);
    out.weights.resize(n);
    double w = 1.0;
    for (Eigen::Index row = 0; row < n; ++row) {
        const Sample& s = history[static_cast<std::size_t>(n - 1 - row)];
        if (s.u.size() != m) throw ConfigError("inconsistent regressor widths in history");
        out.y(row) = s.d;
        out.h.row(row) = s.u;
        out.weights(row) = w;
        w *= lambda;
    }
    return out;
}

} // namespace pdrls
