// Acceptance gate: one [PASS]/[FAIL] line per criterion, measured value and
// pinned tolerance on every line, nonzero exit if anything failed.  All
// checks run even after a failure so a broken build reports everything at
// once.  argv[1] names the command-line binary used by the determinism check.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pdrls/config.hpp"
#include "pdrls/errors.hpp"
#include "pdrls/experiment.hpp"
#include "pdrls/moment_oracle.hpp"
#include "pdrls/rls.hpp"
#include "pdrls/rng.hpp"
#include "pdrls/selection.hpp"
#include "pdrls/signal_model.hpp"
#include "pdrls/theory.hpp"
#include "pdrls/topology.hpp"

namespace {

int failures = 0;

using Clock = std::chrono::steady_clock;

double elapsed_s(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(bool ok, const std::string& label, const std::string& detail) {
    std::printf("[%s] %s  (%s)\n", ok ? "PASS" : "FAIL", label.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

// One deterministic mixed bag of analysis configs reused by criteria 2 and 3.
struct AnalysisCase {
    pdrls::Topology topology;
    pdrls::CombinationMatrix weights;
    pdrls::SchemeKind scheme;
    int m = 0;
    int l = 0;
    double lambda = 0.0;
};

std::vector<AnalysisCase> analysis_cases() {
    const int n_values[] = {3, 4, 5, 6};
    const int m_values[] = {2, 4, 8};
    const double lambdas[] = {0.9, 0.95, 0.99, 0.995, 1.0};
    std::vector<AnalysisCase> cases;
    pdrls::Rng rng(pdrls::derive_stream(2024, {990}));
    for (int i = 0; i < 20; ++i) {
        AnalysisCase c;
        const int n = n_values[i % 4];
        c.m = m_values[static_cast<int>(rng.uniform_index(3))];
        c.l = 1 + static_cast<int>(rng.uniform_index(
                      static_cast<std::size_t>(c.m)));
        c.scheme = (i % 2 == 0) ? pdrls::SchemeKind::sequential
                                : pdrls::SchemeKind::stochastic;
        c.lambda = lambdas[i % 5];
        c.topology = pdrls::generate_topology(n, 2.0, 3000 + i);
        c.weights = pdrls::uniform_combination(c.topology);
        cases.push_back(std::move(c));
    }
    return cases;
}

pdrls::TheoryModel build_case_model(const AnalysisCase& c,
                                    const std::vector<pdrls::NodeProfile>& profiles,
                                    const pdrls::LinkNoiseProfile& link_profile) {
    return pdrls::build_theory_model({c.topology, c.weights, profiles,
                                      link_profile, c.scheme, c.l, c.lambda});
}

// --- criterion 1: chained recursion vs regularized batch solution ---------
void criterion_rls_batch() {
    const auto start = Clock::now();
    const int m = 4;
    const double lambda = 0.99;
    const double delta = 0.01;
    Eigen::VectorXd r_u(m);
    r_u << 1.0, 0.7, 1.3, 0.9;
    const pdrls::NodeProfile profile = pdrls::make_node_profile(r_u, 1e-3);
    pdrls::Rng reg(pdrls::derive_stream(511, {1}));
    pdrls::Rng meas(pdrls::derive_stream(511, {2}));
    pdrls::Rng truth_rng(pdrls::derive_stream(511, {3}));
    const pdrls::GroundTruth truth = pdrls::draw_ground_truth(m, truth_rng);

    pdrls::NodeState state = pdrls::rls_init(m, delta);
    std::vector<pdrls::Sample> history;
    double worst = 0.0;
    double ridge = delta;
    for (int i = 0; i < 200; ++i) {
        pdrls::Sample s;
        s.u = pdrls::draw_regressor(profile, reg);
        s.d = pdrls::draw_measurement(s.u, truth, profile.sigma2_v, meas);
        history.push_back(s);
        pdrls::rls_adapt(state, s.u, s.d, lambda);
        state.w = state.psi;
        ridge *= lambda;
        const Eigen::VectorXd batch =
            pdrls::batch_ls_solve(pdrls::assemble_batch(history, lambda), ridge);
        worst = std::max(worst, (state.w - batch).cwiseAbs().maxCoeff());
    }
    const double t = elapsed_s(start);
    report(worst <= 1e-8 && t < 1.0, "1 recursion matches batch solution",
           fmt("max |recursive - batch| = %.3e, tol 1e-8, %.2f s < 1 s", worst,
               t));
}

// --- criteria 2 and 3: stochastic structure and spectral radii ------------
void criteria_stochasticity_and_radii(const std::vector<AnalysisCase>& cases) {
    const auto start = Clock::now();
    double worst_row = 0.0;
    double worst_col = 0.0;
    double worst_mean_radius = 0.0;
    double worst_second_radius = 0.0;
    for (const AnalysisCase& c : cases) {
        const auto profiles = pdrls::generate_node_profiles(
            c.topology.n_nodes, c.m, pdrls::ProfileRanges{}, 17);
        const auto links = pdrls::enumerate_links(c.topology);
        const pdrls::LinkNoiseProfile link_profile =
            pdrls::generate_link_noise_profile(links, pdrls::ProfileRanges{},
                                               17);
        const pdrls::TheoryModel model =
            build_case_model(c, profiles, link_profile);
        worst_row = std::max(
            worst_row, (model.mean_matrix.rowwise().sum().array() - 1.0)
                           .abs()
                           .maxCoeff());
        worst_col = std::max(
            worst_col, (model.second_moment.colwise().sum().array() - 1.0)
                           .abs()
                           .maxCoeff());
        const pdrls::StabilityReport stability = pdrls::stability_report(model);
        worst_mean_radius = std::max(
            worst_mean_radius, std::abs(stability.mean_radius - c.lambda));
        worst_second_radius =
            std::max(worst_second_radius,
                     std::abs(stability.second_moment_radius -
                              c.lambda * c.lambda));
    }
    const double t = elapsed_s(start);
    report(worst_row <= 1e-12 && worst_col <= 1e-10 && t < 30.0,
           "2 mean rows and second-moment columns sum to one",
           fmt("20 configs: max |row sum - 1| = %.3e (tol 1e-12), "
               "max |col sum - 1| = %.3e (tol 1e-10), %.1f s < 30 s",
               worst_row, worst_col, t));
    report(worst_mean_radius <= 1e-8 && worst_second_radius <= 1e-8 &&
               t < 60.0,
           "3 spectral radii equal lambda and lambda^2",
           fmt("max |rho(mean) - lambda| = %.3e, "
               "max |rho(second) - lambda^2| = %.3e, tol 1e-8, %.1f s < 60 s",
               worst_mean_radius, worst_second_radius, t));
}

// --- criterion 4: Monte-Carlo moment oracles ------------------------------
void criterion_moment_oracles() {
    const auto start = Clock::now();
    const pdrls::Topology mean_topology = pdrls::generate_topology(4, 2.0, 1001);
    const pdrls::CombinationMatrix mean_weights =
        pdrls::uniform_combination(mean_topology);
    double worst_mean = 0.0;
    bool mean_ok = true;
    for (int l = 1; l <= 4; ++l) {
        for (pdrls::SchemeKind kind : {pdrls::SchemeKind::sequential,
                                       pdrls::SchemeKind::uniform_subset}) {
            const pdrls::MomentCheck check = pdrls::validate_mean_moment(
                mean_topology, mean_weights, kind, l, 4, 100000,
                7000 + l * 10 + static_cast<int>(kind), 5e-3);
            worst_mean = std::max(worst_mean, check.max_abs_error);
            mean_ok = mean_ok && check.pass;
        }
    }

    const pdrls::Topology second_topology =
        pdrls::generate_topology(3, 2.0, 1002);
    const pdrls::CombinationMatrix second_weights =
        pdrls::uniform_combination(second_topology);
    const pdrls::MomentCheck second = pdrls::validate_second_moment(
        second_topology, second_weights, pdrls::SchemeKind::uniform_subset, 1,
        2, 200000, 7100, 1e-2);

    const auto links = pdrls::enumerate_links(mean_topology);
    const pdrls::LinkNoiseProfile link_profile =
        pdrls::generate_link_noise_profile(links, pdrls::ProfileRanges{}, 19);
    bool noise_ok = true;
    double noise_margin = 0.0;
    for (pdrls::SchemeKind kind : {pdrls::SchemeKind::sequential,
                                   pdrls::SchemeKind::uniform_subset}) {
        const pdrls::MomentCheck check = pdrls::validate_link_noise_covariance(
            mean_topology, mean_weights, link_profile, kind, 2, 4, 100000,
            7200 + static_cast<int>(kind));
        noise_ok = noise_ok && check.pass;
        noise_margin = std::max(noise_margin,
                                check.max_abs_error - check.threshold);
    }
    const double t = elapsed_s(start);
    report(mean_ok && second.pass && noise_ok && t < 120.0,
           "4 sampled moments match the closed forms",
           fmt("mean: max err %.3e (tol 5e-3, 1e5 draws); second moment: "
               "max err %.3e (tol 1e-2, 2e5 draws); link noise worst "
               "excess over 3-sigma %.3e (<= 0 passes); %.1f s < 120 s",
               worst_mean, second.max_abs_error, noise_margin, t));
}

// --- criteria 5 and 6: ideal-link prediction and the additive identity ----
double worst_identity = 0.0;

void absorb_identity(const pdrls::MsdPrediction& p) {
    worst_identity =
        std::max(worst_identity,
                 std::abs(p.msd_noisy - p.msd_ideal - p.noise_penalty));
}

void criterion_theory_vs_sim() {
    const auto start = Clock::now();
    pdrls::ExperimentConfig config = pdrls::preset_config("desk");
    config.link_noise_scale = 0.0;
    const auto sweep = pdrls::sweep_entries(config, {2, 4});
    bool ok = true;
    std::string detail;
    for (const pdrls::TheoryComparison& c : sweep) {
        absorb_identity(c.prediction);
        ok = ok && std::abs(c.gap_db) <= 2.0;
        detail += fmt("L=%d: sim %.2f dB, predicted %.2f dB, gap %+.2f dB; ",
                      c.entries_l, c.msd_sim_db, c.msd_ideal_db, c.gap_db);
    }
    const double t = elapsed_s(start);
    report(ok && t < 300.0, "5 ideal-link simulation matches the prediction",
           detail + fmt("tol 2 dB, %.1f s < 300 s", t));
}

// --- criterion 7: noisy-link degradation ----------------------------------
void criterion_noisy_degradation() {
    const auto start = Clock::now();
    pdrls::ExperimentConfig noisy = pdrls::preset_config("desk");
    noisy.entries_l = 2; // strictly partial exchange
    pdrls::ExperimentConfig clean = noisy;
    clean.link_noise_scale = 0.0;
    const pdrls::McSummary noisy_mc =
        pdrls::monte_carlo(pdrls::resolve_experiment(noisy));
    const pdrls::McSummary clean_mc =
        pdrls::monte_carlo(pdrls::resolve_experiment(clean));
    const double excess = noisy_mc.steady_state_db - clean_mc.steady_state_db;

    bool slope_ok = true;
    std::string slope_detail;
    for (pdrls::SchemeKind kind : {pdrls::SchemeKind::sequential,
                                   pdrls::SchemeKind::stochastic}) {
        pdrls::ExperimentConfig flat = noisy;
        flat.lambda = 1.0;
        flat.scheme = kind;
        const pdrls::McSummary mc =
            pdrls::monte_carlo(pdrls::resolve_experiment(flat));
        slope_ok = slope_ok && mc.tail_slope_db >= 0.0;
        slope_detail += fmt("%s %+.2e dB/iter; ",
                            pdrls::scheme_name(kind).c_str(),
                            mc.tail_slope_db);
    }

    const pdrls::ResolvedExperiment exp = pdrls::resolve_experiment(noisy);
    std::vector<double> penalties;
    bool increasing = true;
    for (int l = 1; l <= 4; ++l) {
        const pdrls::TheoryModel model = pdrls::build_theory_model(
            {exp.topology, exp.weights, exp.node_profiles, exp.link_profile,
             exp.scheme.kind, l, noisy.lambda});
        const pdrls::MsdPrediction p = pdrls::steady_state_msd(model);
        absorb_identity(p);
        if (!penalties.empty() && p.noise_penalty <= penalties.back()) {
            increasing = false;
        }
        penalties.push_back(p.noise_penalty);
    }
    const double t = elapsed_s(start);
    report(excess >= 10.0 && t < 300.0,
           "7a noisy links degrade the steady state",
           fmt("noisy tail %.2f dB vs ideal-link tail %.2f dB, excess "
               "%.2f dB >= 10 dB, %.1f s < 300 s",
               noisy_mc.steady_state_db, clean_mc.steady_state_db, excess, t));
    report(slope_ok, "7b no convergence without forgetting",
           slope_detail + "tail slope >= 0 required");
    report(increasing, "7c noise penalty increases with shared entries",
           fmt("penalties L=1..4: %.3e %.3e %.3e %.3e, strictly increasing",
               penalties[0], penalties[1], penalties[2], penalties[3]));
}

void criterion_identity() {
    report(worst_identity <= 1e-9,
           "6 noisy prediction = ideal + penalty identically",
           fmt("max |noisy - ideal - penalty| = %.3e, tol 1e-9",
               worst_identity));
}

// --- criterion 8: byte-identical CLI outputs ------------------------------
std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void criterion_cli_determinism(const std::string& binary) {
    const auto start = Clock::now();
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "pdrls_acceptance";
    std::error_code ec;
    fs::remove_all(base, ec);
    bool ok = true;
    std::string detail;
    const std::string common =
        " --preset desk --runs 2 --iterations 60 --seed 5";
    const std::vector<std::pair<std::string, std::string>> invocations = {
        {"simulate", common},
        {"theory", " --preset desk --seed 5 --entries 2"},
    };
    for (const auto& [command, args] : invocations) {
        const fs::path dir_a = base / (command + "_a");
        const fs::path dir_b = base / (command + "_b");
        for (const fs::path& dir : {dir_a, dir_b}) {
            const std::string cmd = "\"" + binary + "\" " + command + args +
                                    " --out \"" + dir.string() +
                                    "\" > /dev/null 2>&1";
            if (std::system(cmd.c_str()) != 0) {
                ok = false;
                detail += command + ": nonzero exit; ";
            }
        }
        if (!fs::exists(dir_a) || !fs::exists(dir_b)) continue;
        std::size_t compared = 0;
        for (const auto& entry : fs::directory_iterator(dir_a)) {
            const fs::path twin = dir_b / entry.path().filename();
            if (!fs::exists(twin) ||
                slurp(entry.path()) != slurp(twin)) {
                ok = false;
                detail += command + ": " +
                          entry.path().filename().string() + " differs; ";
            }
            ++compared;
        }
        if (compared == 0) {
            ok = false;
            detail += command + ": produced no files; ";
        } else {
            detail += command + ": " + std::to_string(compared) +
                      " files identical; ";
        }
    }
    fs::remove_all(base, ec);
    report(ok, "8 repeated invocations are byte-identical",
           detail + fmt("%.1f s", elapsed_s(start)));
}

// --- paper-scale preset: reported, criteria 6 and 7c asserted -------------
void paper_scale() {
    const auto start = Clock::now();
    pdrls::ExperimentConfig config = pdrls::preset_config("paper");
    const auto sweep = pdrls::sweep_entries(config, {2, 4, 8});
    bool increasing = true;
    double prev_penalty = -1.0;
    double worst = 0.0;
    for (const pdrls::TheoryComparison& c : sweep) {
        worst = std::max(worst,
                         std::abs(c.prediction.msd_noisy -
                                  c.prediction.msd_ideal -
                                  c.prediction.noise_penalty));
        if (c.noise_penalty_linear <= prev_penalty) increasing = false;
        prev_penalty = c.noise_penalty_linear;
        std::printf("[info] paper scale L=%d: sim %.2f dB, ideal %.2f dB, "
                    "noisy %.2f dB, penalty %.3e\n",
                    c.entries_l, c.msd_sim_db, c.msd_ideal_db, c.msd_noisy_db,
                    c.noise_penalty_linear);
    }
    const double t = elapsed_s(start);
    report(worst <= 1e-9 && increasing && t < 1800.0,
           "paper-scale run: identity and penalty ordering hold",
           fmt("max identity residual %.3e (tol 1e-9), penalties increasing, "
               "%.0f s < 1800 s",
               worst, t));
}

} // namespace

int main(int argc, char** argv) {
    const auto start = Clock::now();
    std::string binary;
    if (argc > 1) binary = argv[1];

    try {
        criterion_rls_batch();
        criteria_stochasticity_and_radii(analysis_cases());
        criterion_moment_oracles();
        criterion_theory_vs_sim();
        criterion_noisy_degradation();
        criterion_identity();
        if (!binary.empty()) {
            criterion_cli_determinism(binary);
        } else {
            report(false, "8 repeated invocations are byte-identical",
                   "no binary path supplied");
        }
        paper_scale();
    } catch (const std::exception& e) {
        report(false, "unexpected exception", e.what());
    }

    std::printf("%s: %d failure(s), %.0f s total\n",
                failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
                failures, elapsed_s(start));
    return failures == 0 ? 0 : 1;
}
