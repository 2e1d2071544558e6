#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdrls/config.hpp"
#include "pdrls/errors.hpp"
#include "pdrls/experiment.hpp"
#include "pdrls/moment_oracle.hpp"
#include "pdrls/theory.hpp"

namespace {

using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitDomain = 3;
constexpr int kExitValidation = 4;

struct CommonArgs {
    std::string config_path;
    std::string preset;
    std::string out_dir = ".";
    pdrls::ConfigOverrides overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON experiment config");
    cmd->add_option("--preset", args.preset,
                    "Built-in configuration: desk or paper");
    cmd->add_option("--out", args.out_dir, "Output directory");
    cmd->add_option("--seed", args.overrides.seed, "Master seed override");
    cmd->add_option("--entries", args.overrides.entries_l,
                    "Entries transmitted per link per iteration");
    cmd->add_option("--lambda", args.overrides.lambda, "Forgetting factor");
    cmd->add_option("--scheme", args.overrides.scheme,
                    "sequential, stochastic, or uniform-subset");
    cmd->add_option("--link-noise-scale", args.overrides.link_noise_scale,
                    "Multiplier on the link noise variances");
    cmd->add_option("--runs", args.overrides.n_runs, "Number of runs");
    cmd->add_option("--iterations", args.overrides.iterations,
                    "Iterations per run");
}

pdrls::ExperimentConfig load(const CommonArgs& args) {
    if (args.config_path.empty() == args.preset.empty()) {
        throw pdrls::ConfigError("provide exactly one of --config or --preset");
    }
    pdrls::ExperimentConfig config =
        args.config_path.empty() ? pdrls::preset_config(args.preset)
                                 : pdrls::load_config_file(args.config_path);
    pdrls::apply_overrides(config, args.overrides);
    return config;
}

std::filesystem::path prepare_out(const CommonArgs& args) {
    std::filesystem::path dir(args.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw pdrls::ConfigError("cannot create output directory: " +
                                 dir.string());
    }
    return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw pdrls::ConfigError("cannot write output file: " + path.string());
    }
    out << text;
}

std::string curve_csv(const std::vector<double>& linear,
                      const std::vector<double>& db,
                      std::optional<double> theory_ideal_db,
                      std::optional<double> theory_noisy_db) {
    std::string text = theory_ideal_db.has_value()
                           ? "iteration,msd_linear,msd_db,theory_ideal_db,"
                             "theory_noisy_db\n"
                           : "iteration,msd_linear,msd_db\n";
    char line[160];
    for (std::size_t i = 0; i < linear.size(); ++i) {
        if (theory_ideal_db.has_value()) {
            std::snprintf(line, sizeof(line),
                          "%zu,%.12e,%.6f,%.6f,%.6f\n", i, linear[i], db[i],
                          *theory_ideal_db, *theory_noisy_db);
        } else {
            std::snprintf(line, sizeof(line), "%zu,%.12e,%.6f\n", i,
                          linear[i], db[i]);
        }
        text += line;
    }
    return text;
}

json summary_json(const pdrls::ResolvedExperiment& experiment,
                  const pdrls::McSummary& mc) {
    json j;
    j["config"] = pdrls::config_echo(experiment);
    json truth = json::array();
    for (Eigen::Index t = 0; t < experiment.truth.w_o.size(); ++t) {
        truth.push_back(experiment.truth.w_o(t));
    }
    j["ground_truth"] = std::move(truth);
    json results;
    results["steady_state_msd_linear"] = mc.steady_state_linear;
    results["steady_state_msd_db"] = mc.steady_state_db;
    results["tail_slope_db_per_iter"] = mc.tail_slope_db;
    results["non_converging"] = mc.non_converging;
    results["diverged"] = mc.diverged;
    if (mc.first_divergence_iteration.has_value()) {
        results["first_divergence_iteration"] = *mc.first_divergence_iteration;
    } else {
        results["first_divergence_iteration"] = nullptr;
    }
    results["transmitted_entries_per_run"] = mc.transmitted_entries_per_run;
    results["n_links"] = experiment.links.size();
    j["results"] = std::move(results);
    return j;
}

json theory_json(const pdrls::TheoryComparison& c) {
    json j;
    j["entries"] = c.entries_l;
    j["spectral_radius_mean"] = c.stability.mean_radius;
    j["spectral_radius_second_moment"] = c.stability.second_moment_radius;
    j["msd_ideal_linear"] = c.prediction.msd_ideal;
    j["msd_noisy_linear"] = c.prediction.msd_noisy;
    j["noise_penalty_linear"] = c.prediction.noise_penalty;
    j["msd_ideal_db"] = c.msd_ideal_db;
    j["msd_noisy_db"] = c.msd_noisy_db;
    j["noise_penalty_db"] = pdrls::to_db(c.prediction.noise_penalty);
    j["warnings"] = c.warnings;
    return j;
}

int cmd_simulate(const CommonArgs& args) {
    const pdrls::ResolvedExperiment experiment =
        pdrls::resolve_experiment(load(args));
    const std::filesystem::path dir = prepare_out(args);
    const pdrls::McSummary mc = pdrls::monte_carlo(experiment);
    write_text(dir / "curve.csv",
               curve_csv(mc.msd_linear, mc.msd_db, std::nullopt, std::nullopt));
    write_text(dir / "summary.json",
               summary_json(experiment, mc).dump(2) + "\n");
    std::printf("steady-state msd: %.6f dB over final 10%% of %d iterations\n",
                mc.steady_state_db, experiment.config.iterations);
    if (mc.diverged) {
        std::printf("divergence detected at iteration %ld\n",
                    *mc.first_divergence_iteration);
    }
    return 0;
}

int cmd_theory(const CommonArgs& args) {
    const pdrls::ResolvedExperiment experiment =
        pdrls::resolve_experiment(load(args));
    const std::filesystem::path dir = prepare_out(args);
    const pdrls::ExperimentConfig& cfg = experiment.config;
    const pdrls::TheoryModel model = pdrls::build_theory_model(
        pdrls::TheoryInputs{experiment.topology, experiment.weights,
                            experiment.node_profiles, experiment.link_profile,
                            cfg.scheme, cfg.entries_l, cfg.lambda});
    const pdrls::StabilityReport stability = pdrls::stability_report(model);
    const pdrls::MsdPrediction pred = pdrls::steady_state_msd(model);

    json j;
    j["config"] = pdrls::config_echo(experiment);
    j["spectral_radius_mean"] = stability.mean_radius;
    j["spectral_radius_second_moment"] = stability.second_moment_radius;
    j["msd_ideal_linear"] = pred.msd_ideal;
    j["msd_noisy_linear"] = pred.msd_noisy;
    j["noise_penalty_linear"] = pred.noise_penalty;
    j["msd_ideal_db"] = pdrls::to_db(pred.msd_ideal);
    j["msd_noisy_db"] = pdrls::to_db(pred.msd_noisy);
    j["noise_penalty_db"] = pdrls::to_db(pred.noise_penalty);
    j["warnings"] = model.warnings;
    write_text(dir / "theory.json", j.dump(2) + "\n");

    for (const std::string& w : model.warnings) {
        std::fprintf(stderr, "warning: %s\n", w.c_str());
    }
    std::printf("spectral radius (mean): %.12f\n", stability.mean_radius);
    std::printf("spectral radius (second moment): %.12f\n",
                stability.second_moment_radius);
    std::printf("msd ideal: %.6f dB\n", pdrls::to_db(pred.msd_ideal));
    std::printf("msd noisy: %.6f dB\n", pdrls::to_db(pred.msd_noisy));
    std::printf("noise penalty: %.6e (linear)\n", pred.noise_penalty);
    return 0;
}

std::vector<int> default_sweep(int m) {
    std::vector<int> values;
    for (int l = 1; l < m; l *= 2) values.push_back(l);
    values.push_back(m);
    return values;
}

int cmd_compare(const CommonArgs& args) {
    const pdrls::ExperimentConfig config = load(args);
    const std::filesystem::path dir = prepare_out(args);
    const std::vector<int> l_values = args.overrides.entries_l.has_value()
                                          ? std::vector<int>{config.entries_l}
                                          : default_sweep(config.m);
    const std::vector<pdrls::TheoryComparison> sweep =
        pdrls::sweep_entries(config, l_values);

    json per_l = json::array();
    std::string table =
        "entries,msd_sim_db,msd_ideal_db,msd_noisy_db,gap_db,"
        "noise_penalty_linear\n";
    for (const pdrls::TheoryComparison& c : sweep) {
        json row = theory_json(c);
        row["msd_sim_db"] = c.msd_sim_db;
        row["gap_db"] = c.gap_db;
        row["non_converging"] = c.summary.non_converging;
        row["diverged"] = c.summary.diverged;
        per_l.push_back(std::move(row));
        char line[200];
        std::snprintf(line, sizeof(line), "%d,%.6f,%.6f,%.6f,%.6f,%.12e\n",
                      c.entries_l, c.msd_sim_db, c.msd_ideal_db, c.msd_noisy_db,
                      c.gap_db, c.noise_penalty_linear);
        table += line;
        char name[64];
        std::snprintf(name, sizeof(name), "curve_L%d.csv", c.entries_l);
        write_text(dir / name,
                   curve_csv(c.summary.msd_linear, c.summary.msd_db,
                             c.msd_ideal_db, c.msd_noisy_db));
        std::printf("entries %d: sim %.3f dB, ideal %.3f dB, noisy %.3f dB, "
                    "gap %.3f dB\n",
                    c.entries_l, c.msd_sim_db, c.msd_ideal_db, c.msd_noisy_db,
                    c.gap_db);
    }
    write_text(dir / "compare.csv", table);

    pdrls::ExperimentConfig echo_config = config;
    echo_config.entries_l = l_values.front();
    json j;
    j["config"] = pdrls::config_echo(pdrls::resolve_experiment(echo_config));
    j["sweep"] = std::move(per_l);
    write_text(dir / "compare.json", j.dump(2) + "\n");
    return 0;
}

int cmd_validate_moments(const CommonArgs& args) {
    const pdrls::ResolvedExperiment experiment =
        pdrls::resolve_experiment(load(args));
    const pdrls::ExperimentConfig& cfg = experiment.config;
    const int nm = experiment.topology.n_nodes * cfg.m;
    bool all_pass = true;

    const pdrls::MomentCheck mean_check = pdrls::validate_mean_moment(
        experiment.topology, experiment.weights, cfg.scheme, cfg.entries_l,
        cfg.m, 100000, cfg.seed, 5e-3);
    std::printf("[%s] mean moment: max |error| = %.3e at (%d,%d), "
                "threshold %.1e, %ld draws\n",
                mean_check.pass ? "ok" : "FAIL", mean_check.max_abs_error,
                mean_check.row, mean_check.col, mean_check.threshold,
                mean_check.draws);
    all_pass = all_pass && mean_check.pass;

    if (nm <= 12) {
        const pdrls::MomentCheck second_check = pdrls::validate_second_moment(
            experiment.topology, experiment.weights, cfg.scheme, cfg.entries_l,
            cfg.m, 200000, cfg.seed, 1e-2);
        std::printf("[%s] second moment: max |error| = %.3e at (%d,%d), "
                    "threshold %.1e, %ld draws\n",
                    second_check.pass ? "ok" : "FAIL",
                    second_check.max_abs_error, second_check.row,
                    second_check.col, second_check.threshold,
                    second_check.draws);
        all_pass = all_pass && second_check.pass;
    } else {
        std::printf("[skip] second moment: requires n_nodes * m <= 12 "
                    "(got %d)\n", nm);
    }

    const pdrls::MomentCheck noise_check =
        pdrls::validate_link_noise_covariance(
            experiment.topology, experiment.weights, experiment.link_profile,
            cfg.scheme, cfg.entries_l, cfg.m, 100000, cfg.seed);
    std::printf("[%s] link noise covariance: worst |error| = %.3e at (%d,%d), "
                "allowance %.3e, %ld draws\n",
                noise_check.pass ? "ok" : "FAIL", noise_check.max_abs_error,
                noise_check.row, noise_check.col, noise_check.threshold,
                noise_check.draws);
    all_pass = all_pass && noise_check.pass;

    if (!all_pass) {
        throw pdrls::ValidationError("moment validation failed");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Partial-diffusion RLS simulator and analysis toolkit"};
    app.require_subcommand(1);

    CommonArgs simulate_args, theory_args, compare_args, validate_args;
    CLI::App* simulate =
        app.add_subcommand("simulate", "Run the Monte-Carlo ensemble");
    add_common(simulate, simulate_args);
    CLI::App* theory =
        app.add_subcommand("theory", "Closed-form steady-state predictions");
    add_common(theory, theory_args);
    CLI::App* compare = app.add_subcommand(
        "compare", "Simulation against closed-form predictions");
    add_common(compare, compare_args);
    CLI::App* validate = app.add_subcommand(
        "validate-moments", "Monte-Carlo checks of the moment matrices");
    add_common(validate, validate_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(simulate_args);
        if (theory->parsed()) return cmd_theory(theory_args);
        if (compare->parsed()) return cmd_compare(compare_args);
        if (validate->parsed()) return cmd_validate_moments(validate_args);
    } catch (const pdrls::DomainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitDomain;
    } catch (const pdrls::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const pdrls::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
