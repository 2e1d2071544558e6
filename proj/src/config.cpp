#include "pdrls/config.hpp"

#include <fstream>
#include <set>
#include <string>

#include "pdrls/errors.hpp"

namespace pdrls {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::string& where,
                  const std::set<std::string>& allowed) {
    if (!j.is_object()) {
        throw ConfigError(where + " must be a JSON object");
    }
    for (const auto& item : j.items()) {
        if (!allowed.contains(item.key())) {
            throw ConfigError("unknown key \"" + item.key() + "\" in " + where);
        }
    }
}

BoolMatrix parse_adjacency(const json& rows) {
    if (!rows.is_array() || rows.empty()) {
        throw ConfigError("adjacency must be a non-empty array of rows");
    }
    const int n = static_cast<int>(rows.size());
    BoolMatrix adj(n, n);
    for (int i = 0; i < n; ++i) {
        const json& row = rows.at(i);
        if (!row.is_array() || static_cast<int>(row.size()) != n) {
            throw ConfigError("adjacency rows must form a square matrix");
        }
        for (int j2 = 0; j2 < n; ++j2) {
            const int v = row.at(j2).get<int>();
            if (v != 0 && v != 1) {
                throw ConfigError("adjacency entries must be 0 or 1");
            }
            adj(i, j2) = (v == 1);
        }
    }
    return adj;
}

TopologySpec parse_topology(const json& j) {
    TopologySpec spec;
    if (j.contains("adjacency")) {
        require_keys(j, "topology", {"adjacency"});
        spec.adjacency = parse_adjacency(j.at("adjacency"));
        spec.n_nodes = static_cast<int>(spec.adjacency->rows());
    } else {
        require_keys(j, "topology", {"n_nodes", "avg_degree", "seed"});
        spec.n_nodes = j.at("n_nodes").get<int>();
        if (j.contains("avg_degree")) {
            spec.avg_degree = j.at("avg_degree").get<double>();
        }
        if (j.contains("seed")) {
            spec.seed = j.at("seed").get<std::uint64_t>();
        }
    }
    return spec;
}

ProfileSpec parse_profiles(const json& j, int m) {
    ProfileSpec spec;
    require_keys(j, "profiles",
                 {"seed", "r_u_range", "sigma2_v_range", "sigma2_psi_range",
                  "r_u", "sigma2_v", "sigma2_psi"});
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    auto range = [&](const char* key, std::array<double, 2>& out) {
        if (!j.contains(key)) return;
        const json& r = j.at(key);
        if (!r.is_array() || r.size() != 2) {
            throw ConfigError(std::string(key) + " must be a [lo, hi] pair");
        }
        out = {r.at(0).get<double>(), r.at(1).get<double>()};
    };
    range("r_u_range", spec.ranges.r_u);
    range("sigma2_v_range", spec.ranges.sigma2_v);
    range("sigma2_psi_range", spec.ranges.sigma2_psi);
    if (j.contains("r_u")) {
        std::vector<Eigen::VectorXd> r_u;
        for (const json& row : j.at("r_u")) {
            if (static_cast<int>(row.size()) != m) {
                throw ConfigError("each r_u row must have m entries");
            }
            Eigen::VectorXd v(m);
            for (int t = 0; t < m; ++t) v(t) = row.at(t).get<double>();
            r_u.push_back(std::move(v));
        }
        spec.r_u = std::move(r_u);
    }
    if (j.contains("sigma2_v")) {
        spec.sigma2_v = j.at("sigma2_v").get<std::vector<double>>();
    }
    if (j.contains("sigma2_psi")) {
        spec.sigma2_psi = j.at("sigma2_psi").get<std::vector<double>>();
    }
    return spec;
}

} // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
    try {
        require_keys(j, "config",
                     {"topology", "combination", "m", "entries", "scheme",
                      "lambda", "delta", "iterations", "runs", "seed",
                      "link_noise_scale", "shared_ground_truth", "profiles"});
        ExperimentConfig config;
        if (!j.contains("topology") || !j.contains("m")) {
            throw ConfigError("config requires \"topology\" and \"m\"");
        }
        config.topology = parse_topology(j.at("topology"));
        config.m = j.at("m").get<int>();
        if (j.contains("combination")) {
            const json& c = j.at("combination");
            if (c.is_string()) {
                if (c.get<std::string>() != "uniform") {
                    throw ConfigError(
                        "combination must be \"uniform\" or {\"weights\": ...}");
                }
            } else {
                require_keys(c, "combination", {"weights"});
                const json& rows = c.at("weights");
                const int n = static_cast<int>(rows.size());
                Eigen::MatrixXd w(n, n);
                for (int r = 0; r < n; ++r) {
                    if (static_cast<int>(rows.at(r).size()) != n) {
                        throw ConfigError("combination weights must be square");
                    }
                    for (int cc = 0; cc < n; ++cc) {
                        w(r, cc) = rows.at(r).at(cc).get<double>();
                    }
                }
                config.combination_weights = std::move(w);
            }
        }
        if (j.contains("entries")) config.entries_l = j.at("entries").get<int>();
        if (j.contains("scheme")) {
            config.scheme = scheme_from_name(j.at("scheme").get<std::string>());
        }
        if (j.contains("lambda")) config.lambda = j.at("lambda").get<double>();
        if (j.contains("delta")) config.delta = j.at("delta").get<double>();
        if (j.contains("iterations")) {
            config.iterations = j.at("iterations").get<int>();
        }
        if (j.contains("runs")) config.n_runs = j.at("runs").get<int>();
        if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("link_noise_scale")) {
            config.link_noise_scale = j.at("link_noise_scale").get<double>();
        }
        if (j.contains("shared_ground_truth")) {
            config.shared_ground_truth = j.at("shared_ground_truth").get<bool>();
        }
        if (j.contains("profiles")) {
            config.profiles = parse_profiles(j.at("profiles"), config.m);
        }
        validate_config(config);
        return config;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid JSON in ") + path + ": " +
                          e.what());
    }
    return config_from_json(j);
}

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig config;
    if (name == "desk") {
        config.topology = TopologySpec{.n_nodes = 5, .avg_degree = 2.0, .seed = 101};
        config.m = 4;
        config.profiles.seed = 7;
        config.seed = 42;
    } else if (name == "paper") {
        config.topology = TopologySpec{.n_nodes = 10, .avg_degree = 2.0, .seed = 202};
        config.m = 8;
        config.profiles.seed = 8;
        config.seed = 43;
    } else {
        throw ConfigError("unknown preset: " + name +
                          " (available: desk, paper)");
    }
    config.entries_l = 2;
    config.scheme = SchemeKind::sequential;
    config.lambda = 0.995;
    config.delta = 0.01;
    config.iterations = 3000;
    config.n_runs = 50;
    config.link_noise_scale = 1.0;
    return config;
}

void apply_overrides(ExperimentConfig& config, const ConfigOverrides& o) {
    if (o.seed) config.seed = *o.seed;
    if (o.entries_l) config.entries_l = *o.entries_l;
    if (o.lambda) config.lambda = *o.lambda;
    if (o.scheme) config.scheme = scheme_from_name(*o.scheme);
    if (o.link_noise_scale) config.link_noise_scale = *o.link_noise_scale;
    if (o.n_runs) config.n_runs = *o.n_runs;
    if (o.iterations) config.iterations = *o.iterations;
    validate_config(config);
}

nlohmann::json config_echo(const ResolvedExperiment& experiment) {
    const ExperimentConfig& cfg = experiment.config;
    const int n = experiment.topology.n_nodes;
    json j;

    json adjacency = json::array();
    for (int r = 0; r < n; ++r) {
        json row = json::array();
        for (int c = 0; c < n; ++c) {
            row.push_back(experiment.topology.adjacency(r, c) ? 1 : 0);
        }
        adjacency.push_back(std::move(row));
    }
    j["topology"] = {{"adjacency", std::move(adjacency)}};

    json weights = json::array();
    for (int r = 0; r < n; ++r) {
        json row = json::array();
        for (int c = 0; c < n; ++c) {
            row.push_back(experiment.weights.weights(r, c));
        }
        weights.push_back(std::move(row));
    }
    j["combination"] = {{"weights", std::move(weights)}};

    j["m"] = cfg.m;
    j["entries"] = cfg.entries_l;
    j["scheme"] = scheme_name(cfg.scheme);
    j["lambda"] = cfg.lambda;
    j["delta"] = cfg.delta;
    j["iterations"] = cfg.iterations;
    j["runs"] = cfg.n_runs;
    j["seed"] = cfg.seed;
    j["link_noise_scale"] = cfg.link_noise_scale;
    j["shared_ground_truth"] = cfg.shared_ground_truth;

    // Profiles are echoed fully resolved; link variances are echoed before
    // scaling so reloading the echo (which re-applies the scale) reproduces
    // the identical experiment.
    json profiles;
    json r_u = json::array();
    json sigma2_v = json::array();
    for (const NodeProfile& p : experiment.node_profiles) {
        json row = json::array();
        for (Eigen::Index t = 0; t < p.r_u.size(); ++t) row.push_back(p.r_u(t));
        r_u.push_back(std::move(row));
        sigma2_v.push_back(p.sigma2_v);
    }
    profiles["r_u"] = std::move(r_u);
    profiles["sigma2_v"] = std::move(sigma2_v);
    std::vector<double> base_sigma2;
    if (cfg.profiles.sigma2_psi.has_value()) {
        base_sigma2 = *cfg.profiles.sigma2_psi;
    } else {
        base_sigma2 = generate_link_noise_profile(experiment.links,
                                                  cfg.profiles.ranges,
                                                  cfg.profiles.seed)
                          .sigma2;
    }
    profiles["sigma2_psi"] = base_sigma2;
    j["profiles"] = std::move(profiles);
    return j;
}

} // namespace pdrls
