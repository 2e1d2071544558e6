#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pdrls/network.hpp"
#include "pdrls/selection.hpp"
#include "pdrls/signal_model.hpp"
#include "pdrls/theory.hpp"
#include "pdrls/topology.hpp"

namespace pdrls {

/// MSD values below this floor are clamped in dB output.
inline constexpr double kDbFloor = -300.0;

double to_db(double linear);

struct TopologySpec {
    std::optional<BoolMatrix> adjacency; // explicit; else generated
    int n_nodes = 0;
    double avg_degree = 2.0;
    std::uint64_t seed = 0;
};

struct ProfileSpec {
    // Explicit values win over generation when present.
    std::optional<std::vector<Eigen::VectorXd>> r_u;    // per node
    std::optional<std::vector<double>> sigma2_v;        // per node
    std::optional<std::vector<double>> sigma2_psi;      // per canonical link
    ProfileRanges ranges;
    std::uint64_t seed = 0;
};

struct ExperimentConfig {
    TopologySpec topology;
    std::optional<Eigen::MatrixXd> combination_weights; // else uniform
    int m = 4;
    int entries_l = 2;
    SchemeKind scheme = SchemeKind::sequential;
    double lambda = 0.995;
    double delta = 0.01;
    int iterations = 3000;
    int n_runs = 50;
    std::uint64_t seed = 0; // master seed for data and ground truth
    double link_noise_scale = 1.0;
    bool shared_ground_truth = true; // one w_o across runs
    ProfileSpec profiles;
};

/// Throws ConfigError describing the first violated constraint.
void validate_config(const ExperimentConfig& config);

/// Everything the runs and the theory share, fully constructed: topology,
/// weights, canonical links, profiles (link variances already scaled by
/// link_noise_scale), the shared ground truth, and the selection scheme.
struct ResolvedExperiment {
    ExperimentConfig config;
    Topology topology;
    CombinationMatrix weights;
    std::vector<DirectedLink> links;
    std::vector<NodeProfile> node_profiles;
    LinkNoiseProfile link_profile;
    SelectionScheme scheme;
    GroundTruth truth; // shared w_o; per-run truths derive from the seed
};

ResolvedExperiment resolve_experiment(const ExperimentConfig& config);

/// Ground truth for one run index (the shared one unless configured
/// per-run).
GroundTruth run_ground_truth(const ResolvedExperiment& experiment,
                             std::uint64_t run_index);

/// Network MSD (1/N) sum_k |w_o - w_k|^2 of the current state.
double network_msd(const NetworkState& state, const GroundTruth& truth);

struct RunTrace {
    std::vector<double> msd;                // per iteration, linear
    std::optional<long> diverged_at;        // first non-finite iteration
    double tail_slope_db = 0.0;             // LS slope over trailing 20%, dB/iter
    bool non_converging = false;            // tail_slope_db > 1e-4
};

/// One seeded trajectory.  Divergence freezes the remaining trace at
/// infinity and is reported, never silently dropped.
RunTrace run_single(const ResolvedExperiment& experiment,
                    std::uint64_t run_index);

struct McSummary {
    std::vector<double> msd_linear; // run-averaged, per iteration
    std::vector<double> msd_db;
    double steady_state_linear = 0.0; // mean over final 10% of iterations
    double steady_state_db = 0.0;
    double tail_slope_db = 0.0;
    bool non_converging = false;
    bool diverged = false;
    std::optional<long> first_divergence_iteration;
    long transmitted_entries_per_run = 0; // nominal l * iterations * n_links
};

/// Averages run traces in fixed run-index order (deterministic reduction).
McSummary monte_carlo(const ResolvedExperiment& experiment);

struct TheoryComparison {
    int entries_l = 0;
    double msd_sim_db = 0.0;
    double msd_ideal_db = 0.0;
    double msd_noisy_db = 0.0;
    double gap_db = 0.0; // sim - noisy prediction
    double noise_penalty_linear = 0.0;
    StabilityReport stability;
    MsdPrediction prediction;
    McSummary summary;
    std::vector<std::string> warnings;
};

/// Runs the Monte-Carlo ensemble and the closed-form prediction on the same
/// resolved inputs.
TheoryComparison compare_theory_sim(const ResolvedExperiment& experiment);

/// Comparison per entries value; every other knob held fixed.
std::vector<TheoryComparison> sweep_entries(const ExperimentConfig& config,
                                            const std::vector<int>& l_values);

} // namespace pdrls
