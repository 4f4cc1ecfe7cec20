// Command-line front end: single-point rate evaluation, sweep campaigns,
// full parameter optimization, and Monte Carlo protocol simulation.
//
// Exit codes: 0 success, 1 error, 2 infeasible everywhere.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tfqds/config.hpp"
#include "tfqds/pipeline.hpp"
#include "tfqds/report.hpp"
#include "tfqds/simulator.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;

struct CommonOptions {
    std::string config_path;
    std::optional<double> distance_km;
    std::optional<double> e_d;
    std::optional<double> n_pulses;
    std::optional<double> eps_target;
    std::optional<uint64_t> seed;
    bool as_printed = false;
    std::string out_path, csv_path, trace_path, emit_config_path;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--config", opt.config_path, "JSON configuration file");
    cmd->add_option("--distance-km", opt.distance_km, "override system.distance_km");
    cmd->add_option("--e-d", opt.e_d, "override system.e_d");
    cmd->add_option("--N", opt.n_pulses, "override protocol.n_pulses");
    cmd->add_option("--eps-target", opt.eps_target, "override budget.eps_target");
    cmd->add_option("--seed", opt.seed, "override the random seed");
    cmd->add_flag("--as-printed", opt.as_printed,
                  "use the literally printed error-count and forging formulas");
    cmd->add_option("--out", opt.out_path, "JSON report output path (default stdout)");
    cmd->add_option("--csv", opt.csv_path, "CSV output path (default stdout)");
    cmd->add_option("--trace", opt.trace_path, "optimizer trace CSV path");
    cmd->add_option("--emit-config", opt.emit_config_path, "write the effective config here");
}

tfqds::RunConfig load(const CommonOptions& opt) {
    tfqds::RunConfig cfg =
        opt.config_path.empty() ? tfqds::RunConfig{} : tfqds::load_config(opt.config_path);
    if (opt.distance_km) cfg.system.distance_km = *opt.distance_km;
    if (opt.e_d) cfg.system.e_d = *opt.e_d;
    if (opt.n_pulses) cfg.protocol.n_pulses = *opt.n_pulses;
    if (opt.eps_target) cfg.budget.eps_target = *opt.eps_target;
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.as_printed) cfg.as_printed = true;
    if (!opt.out_path.empty()) cfg.report_path = opt.out_path;
    if (!opt.csv_path.empty()) cfg.csv_path = opt.csv_path;
    if (!opt.trace_path.empty()) cfg.trace_path = opt.trace_path;
    if (!opt.emit_config_path.empty()) cfg.emit_config_path = opt.emit_config_path;
    cfg.system.validate();
    cfg.protocol.validate();
    cfg.budget.validate();
    if (!cfg.emit_config_path.empty()) {
        std::ofstream out(cfg.emit_config_path);
        if (!out) throw std::runtime_error("cannot write " + cfg.emit_config_path);
        out << tfqds::effective_config(cfg).dump(2) << "\n";
    }
    return cfg;
}

void write_json(const std::string& path, const tfqds::json& j) {
    if (path.empty()) {
        std::cout << j.dump(2) << std::endl;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

int run_rate(const CommonOptions& opt) {
    const tfqds::RunConfig cfg = load(opt);
    tfqds::SignatureReport report = tfqds::evaluate_signature_rate(
        cfg.system, cfg.protocol, cfg.budget, tfqds::PipelineOptions{cfg.as_printed});
    write_json(cfg.report_path, tfqds::report_to_json(report));
    return report.feasible ? kExitOk : kExitInfeasible;
}

int run_sweep(const CommonOptions& opt) {
    const tfqds::RunConfig cfg = load(opt);
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!cfg.csv_path.empty()) {
        file.open(cfg.csv_path);
        if (!file) throw std::runtime_error("cannot write " + cfg.csv_path);
        out = &file;
    }
    (*out) << tfqds::sweep_csv_header() << "\n";
    tfqds::OptimizeSettings settings;
    settings.seed = cfg.seed;
    settings.effort = cfg.effort;
    settings.as_printed = cfg.as_printed;
    settings.extra_starts = {cfg.protocol};
    bool any_feasible = false;
    tfqds::sweep(cfg.system, cfg.budget, cfg.space, cfg.protocol, cfg.sweep_spec, settings,
                 [&](const tfqds::SweepRow& row) {
                     (*out) << tfqds::sweep_csv_row(row) << "\n";
                     out->flush();  // partial results survive an aborted sweep
                     if (row.error) std::cerr << "sweep point failed: " << row.error_message << "\n";
                     any_feasible = any_feasible || row.report.feasible;
                 });
    return any_feasible ? kExitOk : kExitInfeasible;
}

int run_optimize(const CommonOptions& opt) {
    const tfqds::RunConfig cfg = load(opt);
    tfqds::OptimizeSettings settings;
    settings.seed = cfg.seed;
    settings.effort = cfg.effort;
    settings.as_printed = cfg.as_printed;
    settings.extra_starts = {cfg.protocol};
    const tfqds::OptimizeResult result =
        tfqds::optimize(cfg.system, cfg.budget, cfg.space, cfg.protocol, settings);
    tfqds::json j;
    j["best_protocol"] = tfqds::proto_to_json(result.best);
    j["report"] = tfqds::report_to_json(result.report);
    j["evaluations"] = result.evaluations;
    write_json(cfg.report_path, j);
    if (!cfg.trace_path.empty()) {
        std::ofstream trace(cfg.trace_path);
        if (!trace) throw std::runtime_error("cannot write " + cfg.trace_path);
        trace << tfqds::trace_csv_header() << "\n";
        for (const auto& entry : result.trace) trace << tfqds::trace_csv_row(entry) << "\n";
    }
    return result.report.feasible ? kExitOk : kExitInfeasible;
}

int run_simulate(const CommonOptions& opt, long long trials_flag, const std::string& experiment) {
    tfqds::RunConfig cfg = load(opt);
    if (trials_flag >= 0) cfg.simulate_spec.trials = trials_flag;
    if (!experiment.empty()) {
        if (experiment == "honest")
            cfg.simulate_spec.experiment = tfqds::SimulateExperiment::honest;
        else if (experiment == "repudiation")
            cfg.simulate_spec.experiment = tfqds::SimulateExperiment::repudiation;
        else if (experiment == "forge")
            cfg.simulate_spec.experiment = tfqds::SimulateExperiment::forge;
        else
            throw CLI::ValidationError("--experiment must be honest, repudiation or forge");
    }
    if (cfg.simulate_spec.trials <= 0)
        throw CLI::ValidationError("--trials must be a positive integer");

    tfqds::SignatureReport analytic = tfqds::evaluate_signature_rate(
        cfg.system, cfg.protocol, cfg.budget, tfqds::PipelineOptions{cfg.as_printed});
    tfqds::json j;
    j["analytic"] = tfqds::report_to_json(analytic);
    if (!analytic.feasible) {
        write_json(cfg.report_path, j);
        std::cerr << "analytic pipeline infeasible at these parameters\n";
        return kExitInfeasible;
    }
    const long long trials = cfg.simulate_spec.trials;
    const long long block = analytic.block_length;

    switch (cfg.simulate_spec.experiment) {
        case tfqds::SimulateExperiment::honest: {
            long long bob_accepts = 0, charlie_accepts = 0;
            double test_error_sum = 0.0;
            for (long long trial = 0; trial < trials; ++trial) {
                const uint64_t trial_seed = tfqds::splitmix64(cfg.seed) ^
                                            static_cast<uint64_t>(trial + 1);
                const tfqds::SampledRun run =
                    tfqds::sample_observables(cfg.system, cfg.protocol, trial_seed);
                const tfqds::KeyPool pool = tfqds::build_key_pools(run, cfg.protocol);
                const tfqds::SignatureTranscript t =
                    tfqds::sign_and_verify(pool, cfg.simulate_spec.message, block, analytic.s_a,
                                           analytic.s_v, trial_seed);
                bob_accepts += t.bob_accepts;
                charlie_accepts += t.charlie_accepts;
                test_error_sum += pool.alice_bob.test_error_rate;
            }
            j["experiment"] = "honest";
            j["trials"] = trials;
            j["bob_accepts"] = bob_accepts;
            j["charlie_accepts"] = charlie_accepts;
            j["mean_test_error_rate"] = test_error_sum / static_cast<double>(trials);
            break;
        }
        case tfqds::SimulateExperiment::repudiation: {
            const tfqds::AdversaryStats stats = tfqds::adversary_repudiation(
                trials, block, analytic.s_a, analytic.s_v, cfg.seed);
            j["experiment"] = "repudiation";
            j["trials"] = trials;
            j["successes"] = stats.successes;
            j["success_rate"] = stats.interval.p_hat;
            j["wilson_low"] = stats.interval.lo;
            j["wilson_high"] = stats.interval.hi;
            j["analytic_bound"] = stats.analytic_bound;
            break;
        }
        case tfqds::SimulateExperiment::forge: {
            const tfqds::AdversaryStats stats = tfqds::adversary_forge(
                trials, block, analytic.s_v, cfg.simulate_spec.p_guess, cfg.seed);
            j["experiment"] = "forge";
            j["trials"] = trials;
            j["successes"] = stats.successes;
            j["success_rate"] = stats.interval.p_hat;
            j["wilson_low"] = stats.interval.lo;
            j["wilson_high"] = stats.interval.hi;
            j["exact_binomial_tail"] = stats.analytic_bound;
            break;
        }
    }
    write_json(cfg.report_path, j);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Twin-field quantum digital signature rate toolkit"};
    app.require_subcommand(1);

    CommonOptions rate_opt, sweep_opt, optimize_opt, simulate_opt;
    CLI::App* rate = app.add_subcommand("rate", "single-point signature rate report (JSON)");
    add_common(rate, rate_opt);
    CLI::App* sweep = app.add_subcommand("sweep", "sweep campaign over distance or e_d (CSV)");
    add_common(sweep, sweep_opt);
    CLI::App* optimize = app.add_subcommand("optimize", "full parameter optimization (JSON)");
    add_common(optimize, optimize_opt);
    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo trial statistics (JSON)");
    add_common(simulate, simulate_opt);
    long long trials_flag = -1;
    std::string experiment_flag;
    simulate->add_option("--trials", trials_flag, "number of Monte Carlo trials");
    simulate->add_option("--experiment", experiment_flag, "honest | repudiation | forge");

    try {
        app.parse(argc, argv);
        if (rate->parsed()) return run_rate(rate_opt);
        if (sweep->parsed()) return run_sweep(sweep_opt);
        if (optimize->parsed()) return run_optimize(optimize_opt);
        if (simulate->parsed()) return run_simulate(simulate_opt, trials_flag, experiment_flag);
        return kExitError;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}
