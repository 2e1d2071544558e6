#include "pdrls/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pdrls/errors.hpp"

namespace pdrls {

double to_db(double linear) {
    if (!(linear > 0.0)) return kDbFloor;
    if (std::isinf(linear)) return std::numeric_limits<double>::infinity();
    return std::max(kDbFloor, 10.0 * std::log10(linear));
}

namespace {

/// Least-squares slope of the trailing 20% of the sequence (at least two
/// points); infinite if that window contains non-finite values.
double tail_slope(const std::vector<double>& values) {
    const std::size_t size = values.size();
    const std::size_t window = std::max<std::size_t>(2, size / 5);
    if (size < 2) return 0.0;
    const std::size_t start = size - window;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = start; i < size; ++i) {
        const double y = values[i];
        if (!std::isfinite(y)) return std::numeric_limits<double>::infinity();
        const double x = static_cast<double>(i - start);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(window);
    const double denom = n * sxx - sx * sx;
    return denom == 0.0 ? 0.0 : (n * sxy - sx * sy) / denom;
}

constexpr double kNonConvergingSlope = 1e-4; // dB per iteration

void check_ranges(const ProfileRanges& r) {
    auto ordered = [](const std::array<double, 2>& range) {
        return std::isfinite(range[0]) && std::isfinite(range[1]) &&
               range[0] <= range[1];
    };
    if (!ordered(r.r_u) || r.r_u[0] <= 0.0) {
        throw ConfigError("regressor power range must be positive and ordered");
    }
    if (!ordered(r.sigma2_v) || r.sigma2_v[0] < 0.0) {
        throw ConfigError("measurement noise range must be nonnegative and ordered");
    }
    if (!ordered(r.sigma2_psi) || r.sigma2_psi[0] < 0.0) {
        throw ConfigError("link noise range must be nonnegative and ordered");
    }
}

} // namespace

void validate_config(const ExperimentConfig& config) {
    if (!config.topology.adjacency.has_value()) {
        if (config.topology.n_nodes < 2) {
            throw ConfigError("topology generation requires at least 2 nodes");
        }
    }
    if (config.m < 1) throw ConfigError("filter length must be at least 1");
    if (config.entries_l < 1 || config.entries_l > config.m) {
        throw ConfigError("entries must satisfy 1 <= entries <= m");
    }
    if (!(config.lambda > 0.0) || config.lambda > 1.0) {
        throw ConfigError("forgetting factor must lie in (0, 1]");
    }
    if (!(config.delta > 0.0) || !std::isfinite(config.delta)) {
        throw ConfigError("regularization delta must be positive and finite");
    }
    if (config.iterations < 1) throw ConfigError("iterations must be at least 1");
    if (config.n_runs < 1) throw ConfigError("runs must be at least 1");
    if (!(config.link_noise_scale >= 0.0) ||
        !std::isfinite(config.link_noise_scale)) {
        throw ConfigError("link noise scale must be nonnegative and finite");
    }
    check_ranges(config.profiles.ranges);
    const bool has_ru = config.profiles.r_u.has_value();
    const bool has_sv = config.profiles.sigma2_v.has_value();
    if (has_ru != has_sv) {
        throw ConfigError(
            "explicit node profiles need both regressor powers and noise variances");
    }
}

ResolvedExperiment resolve_experiment(const ExperimentConfig& config) {
    validate_config(config);
    ResolvedExperiment exp{.config = config};

    if (config.topology.adjacency.has_value()) {
        exp.topology = topology_from_adjacency(*config.topology.adjacency);
    } else {
        exp.topology = generate_topology(config.topology.n_nodes,
                                         config.topology.avg_degree,
                                         config.topology.seed);
    }
    const int n = exp.topology.n_nodes;

    exp.weights = config.combination_weights.has_value()
                      ? validate_combination(exp.topology,
                                             *config.combination_weights)
                      : uniform_combination(exp.topology);
    exp.links = enumerate_links(exp.topology);

    if (config.profiles.r_u.has_value()) {
        const auto& r_u = *config.profiles.r_u;
        const auto& s2v = *config.profiles.sigma2_v;
        if (static_cast<int>(r_u.size()) != n ||
            static_cast<int>(s2v.size()) != n) {
            throw ConfigError("explicit node profiles must cover every node");
        }
        for (int k = 0; k < n; ++k) {
            if (r_u[k].size() != config.m) {
                throw ConfigError(
                    "explicit regressor powers must match the filter length");
            }
            exp.node_profiles.push_back(make_node_profile(r_u[k], s2v[k]));
        }
    } else {
        exp.node_profiles = generate_node_profiles(
            n, config.m, config.profiles.ranges, config.profiles.seed);
    }

    std::vector<double> sigma2;
    if (config.profiles.sigma2_psi.has_value()) {
        sigma2 = *config.profiles.sigma2_psi;
        if (sigma2.size() != exp.links.size()) {
            throw ConfigError(
                "explicit link noise variances must cover every directed link");
        }
    } else {
        sigma2 = generate_link_noise_profile(exp.links, config.profiles.ranges,
                                             config.profiles.seed)
                     .sigma2;
    }
    for (double& s : sigma2) s *= config.link_noise_scale;
    exp.link_profile = make_link_noise_profile(exp.links, std::move(sigma2));

    exp.scheme = make_scheme(config.scheme, config.m, config.entries_l);

    Rng truth_rng = derive_stream(config.seed, StreamTag::ground_truth, 0);
    exp.truth = draw_ground_truth(config.m, truth_rng);
    return exp;
}

GroundTruth run_ground_truth(const ResolvedExperiment& experiment,
                             std::uint64_t run_index) {
    if (experiment.config.shared_ground_truth) return experiment.truth;
    Rng rng = derive_stream(experiment.config.seed, StreamTag::ground_truth,
                            run_index);
    return draw_ground_truth(experiment.config.m, rng);
}

double network_msd(const NetworkState& state, const GroundTruth& truth) {
    return error_vector(state, truth).squaredNorm() /
           static_cast<double>(state.n_nodes());
}

RunTrace run_single(const ResolvedExperiment& experiment,
                    std::uint64_t run_index) {
    const ExperimentConfig& cfg = experiment.config;
    const int n = experiment.topology.n_nodes;
    const int m = cfg.m;
    const GroundTruth truth = run_ground_truth(experiment, run_index);

    std::vector<Rng> regressor, measurement, selection, link_noise;
    for (int k = 0; k < n; ++k) {
        const auto node = static_cast<std::uint64_t>(k);
        regressor.push_back(
            derive_stream(cfg.seed, {static_cast<std::uint64_t>(StreamTag::regressor),
                                     run_index, node}));
        measurement.push_back(derive_stream(
            cfg.seed, {static_cast<std::uint64_t>(StreamTag::measurement),
                       run_index, node}));
        selection.push_back(derive_stream(
            cfg.seed, {static_cast<std::uint64_t>(StreamTag::selection),
                       run_index, node}));
    }
    for (std::size_t j = 0; j < experiment.links.size(); ++j) {
        link_noise.push_back(derive_stream(
            cfg.seed, {static_cast<std::uint64_t>(StreamTag::link_noise),
                       run_index, static_cast<std::uint64_t>(j)}));
    }

    NetworkState state = init_network(n, m, cfg.delta);
    RunTrace trace;
    trace.msd.assign(static_cast<std::size_t>(cfg.iterations),
                     std::numeric_limits<double>::infinity());
    std::vector<Eigen::RowVectorXd> u(n);
    std::vector<double> d(n);
    for (int i = 0; i < cfg.iterations; ++i) {
        for (int k = 0; k < n; ++k) {
            u[k] = draw_regressor(experiment.node_profiles[k], regressor[k]);
            d[k] = draw_measurement(u[k], truth,
                                    experiment.node_profiles[k].sigma2_v,
                                    measurement[k]);
        }
        network_step(state, experiment.topology, experiment.weights, u, d,
                     experiment.scheme, experiment.link_profile,
                     experiment.links, cfg.lambda,
                     StepStreams{&selection, &link_noise});
        const double msd = network_msd(state, truth);
        if (!std::isfinite(msd)) {
            // Overflow is reported, never dropped; the rest of the trace
            // stays pinned at infinity.
            trace.diverged_at = i;
            break;
        }
        trace.msd[static_cast<std::size_t>(i)] = msd;
    }

    std::vector<double> db(trace.msd.size());
    std::transform(trace.msd.begin(), trace.msd.end(), db.begin(), to_db);
    trace.tail_slope_db = tail_slope(db);
    trace.non_converging = trace.diverged_at.has_value() ||
                           trace.tail_slope_db > kNonConvergingSlope;
    return trace;
}

McSummary monte_carlo(const ResolvedExperiment& experiment) {
    const ExperimentConfig& cfg = experiment.config;
    McSummary out;
    std::vector<double> acc(static_cast<std::size_t>(cfg.iterations), 0.0);
    for (int r = 0; r < cfg.n_runs; ++r) {
        const RunTrace trace =
            run_single(experiment, static_cast<std::uint64_t>(r));
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += trace.msd[i];
        if (trace.diverged_at.has_value()) {
            out.diverged = true;
            if (!out.first_divergence_iteration.has_value() ||
                *trace.diverged_at < *out.first_divergence_iteration) {
                out.first_divergence_iteration = *trace.diverged_at;
            }
        }
    }
    out.msd_linear.resize(acc.size());
    out.msd_db.resize(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) {
        out.msd_linear[i] = acc[i] / static_cast<double>(cfg.n_runs);
        out.msd_db[i] = to_db(out.msd_linear[i]);
    }

    const std::size_t tail =
        std::max<std::size_t>(1, out.msd_linear.size() / 10);
    double tail_sum = 0.0;
    for (std::size_t i = out.msd_linear.size() - tail;
         i < out.msd_linear.size(); ++i) {
        tail_sum += out.msd_linear[i];
    }
    out.steady_state_linear = tail_sum / static_cast<double>(tail);
    out.steady_state_db = to_db(out.steady_state_linear);
    out.tail_slope_db = tail_slope(out.msd_db);
    out.non_converging =
        out.diverged || out.tail_slope_db > kNonConvergingSlope;
    out.transmitted_entries_per_run = static_cast<long>(cfg.entries_l) *
                                      cfg.iterations *
                                      static_cast<long>(experiment.links.size());
    return out;
}

TheoryComparison compare_theory_sim(const ResolvedExperiment& experiment) {
    const ExperimentConfig& cfg = experiment.config;
    TheoryComparison out;
    out.entries_l = cfg.entries_l;
    out.summary = monte_carlo(experiment);
    const TheoryModel model = build_theory_model(
        TheoryInputs{experiment.topology, experiment.weights,
                     experiment.node_profiles, experiment.link_profile,
                     cfg.scheme, cfg.entries_l, cfg.lambda});
    out.warnings = model.warnings;
    out.stability = stability_report(model);
    out.prediction = steady_state_msd(model);
    out.msd_sim_db = out.summary.steady_state_db;
    out.msd_ideal_db = to_db(out.prediction.msd_ideal);
    out.msd_noisy_db = to_db(out.prediction.msd_noisy);
    out.gap_db = out.msd_sim_db - out.msd_noisy_db;
    out.noise_penalty_linear = out.prediction.noise_penalty;
    return out;
}

std::vector<TheoryComparison> sweep_entries(const ExperimentConfig& config,
                                            const std::vector<int>& l_values) {
    if (l_values.empty()) throw ConfigError("sweep requires at least one entries value");
    std::vector<TheoryComparison> out;
    out.reserve(l_values.size());
    for (int l : l_values) {
        ExperimentConfig c = config;
        c.entries_l = l;
        out.push_back(compare_theory_sim(resolve_experiment(c)));
    }
    return out;
}

} // namespace pdrls
