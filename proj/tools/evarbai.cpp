// Command-line front end: EVaR evaluation, KL projections, oracle weights,
// single Track-and-Stop runs, Monte-Carlo experiments and delta sweeps.
//
// Exit codes: 0 success, 2 config/usage error, 3 degenerate instance,
// 4 horizon cap hit.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "evarbai/brute_force.hpp"
#include "evarbai/config.hpp"
#include "evarbai/monte_carlo.hpp"

using nlohmann::json;
using namespace evarbai;

namespace {

std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw config_error(std::string("malformed JSON in ") + path + ": " + e.what());
    }
    return j;
}

DiscreteDistribution load_distribution(const std::string& path) {
    return detail::parse_distribution_literal(load_json(path), path);
}

std::vector<ArmSpec> load_instance(const std::string& path, double default_grid) {
    return detail::parse_instance(load_json(path), default_grid);
}

json dist_to_json(const DiscreteDistribution& d) {
    json out = json::array();
    for (const Atom& a : d.atoms()) out.push_back({a.location, a.mass});
    return out;
}

json trial_to_json(const TrialRecord& rec) {
    json j{{"trial", rec.trial},
           {"seed", rec.stream_seed},
           {"tau", rec.tau},
           {"correct", rec.correct},
           {"decided", rec.decided},
           {"wall_time", rec.wall_time},
           {"counts", rec.trajectory.counts},
           {"empirical_evars", rec.trajectory.empirical_evars},
           {"statistic", rec.trajectory.statistic},
           {"threshold", rec.trajectory.threshold}};
    if (rec.recommended)
        j["recommended"] = *rec.recommended;
    else
        j["recommended"] = nullptr;
    return j;
}

std::string summary_csv(const MonteCarloSummary& s, bool header = true) {
    std::string out;
    if (header)
        out += "delta,trials,errors,error_rate,mean_tau,std_tau,T,lower_bound,ratio\n";
    out += num(s.delta) + "," + std::to_string(s.trials) + "," +
           std::to_string(s.errors) + "," + num(s.error_rate) + "," +
           num(s.mean_tau) + "," + num(s.std_tau) + "," +
           num(s.characteristic_time) + "," + num(s.lower_bound) + "," +
           num(s.ratio) + "\n";
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write to: " + path);
    out << content;
}

struct CommonArgs {
    std::string config_path;
    std::string instance_path;
    std::string dist_path;
    double alpha = -1.0;
    double delta = -1.0;
    double nu = -1.0;
    long trials = -1;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    bool with_oracle = false;
    bool strict_tracking = false;
    std::string out_path;
};

/// Flags win over config values; config supplies whatever was not given.
ExperimentConfig resolve(const CommonArgs& a, bool need_instance) {
    ExperimentConfig cfg;
    if (!a.config_path.empty()) {
        cfg = parse_config(a.config_path);
    } else {
        cfg.deltas.clear();
        cfg.arms.clear();
    }
    if (!a.instance_path.empty())
        cfg.arms = load_instance(a.instance_path, cfg.quantization_grid);
    if (a.alpha >= 0.0) cfg.alpha = a.alpha;
    if (a.delta >= 0.0) cfg.deltas = {a.delta};
    if (a.trials >= 0) cfg.trials = a.trials;
    if (a.seed) cfg.seed = *a.seed;
    if (a.strict_tracking) cfg.strict_tracking = true;
    if (!a.out_path.empty()) cfg.out.trials = a.out_path;
    if (need_instance && cfg.arms.empty())
        throw config_error("no instance given (use --instance or --config)");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
        throw config_error("\"alpha\" out of range");
    return cfg;
}

int cmd_evar(const CommonArgs& a) {
    if (a.dist_path.empty()) throw config_error("evar: --dist is required");
    DiscreteDistribution d = load_distribution(a.dist_path);
    RiskLevel r(a.alpha > 0 ? a.alpha : throw config_error("evar: --alpha is required"));
    EvarResult res = evar(d, r);
    json j{{"value", res.value},
           {"regime", res.boundary() ? "boundary" : "interior"},
           {"minimizer", res.boundary() ? json(nullptr) : json(res.minimizer)}};
    if (a.with_oracle) j["oracle"] = evar_grid(d, r, 200000);
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_klinf(const CommonArgs& a, const std::string& side) {
    if (a.dist_path.empty()) throw config_error("klinf: --dist is required");
    if (a.nu < 0.0) throw config_error("klinf: --nu is required");
    if (a.alpha <= 0.0) throw config_error("klinf: --alpha is required");
    DiscreteDistribution d = load_distribution(a.dist_path);
    RiskLevel r(a.alpha);
    Threshold nu(a.nu);
    json j;
    if (side == "upper") {
        DualSolutionU sol = kl_inf_upper(d, nu, r);
        j = json{{"value", sol.value},
                 {"dual", {{"lambda1", sol.lambda1}, {"lambda3", sol.lambda3}}},
                 {"primal", dist_to_json(sol.primal)}};
    } else {
        DualSolutionL sol = kl_inf_lower(d, nu, r);
        json value = std::isinf(sol.value) ? json("inf") : json(sol.value);
        j = json{{"value", value},
                 {"dual", {{"z", sol.z}, {"lambda", sol.lambda}}},
                 {"primal", dist_to_json(sol.primal)}};
    }
    if (a.with_oracle) {
        if (d.size() > 3) {
            j["oracle"] = nullptr;
        } else {
            double g = klinf_primal_grid(
                d, nu, r,
                side == "upper" ? ProjectionSide::upper : ProjectionSide::lower);
            j["oracle"] = std::isinf(g) ? json("inf") : json(g);
        }
    }
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_oracle(const CommonArgs& a) {
    ExperimentConfig cfg = resolve(a, true);
    BanditInstance instance(cfg.arms);
    RiskLevel r(cfg.alpha);
    std::vector<DiscreteDistribution> laws;
    for (std::size_t i = 0; i < instance.num_arms(); ++i)
        laws.push_back(instance.law(i));
    OracleSolution sol = characteristic_time(laws, r, cfg.solver);
    json alts = json::array();
    for (const PerAlternative& p : sol.per_alternative)
        alts.push_back({{"arm", p.arm}, {"x", p.x}, {"g", p.g_value}});
    json j{{"T", sol.characteristic_time},
           {"weights", sol.weights},
           {"best_arm", sol.best_arm},
           {"per_alternative", alts}};
    if (a.delta > 0.0)
        j["lower_bound"] = std::log(1.0 / (4.0 * a.delta)) / sol.characteristic_time;
    if (a.with_oracle && laws.size() <= 3)
        j["oracle"] = tmu_grid(laws, r, laws.size() == 2 ? 1.0 / 500 : 1.0 / 200,
                               laws.size() == 2 ? 4000 : 800, cfg.solver);
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_run(const CommonArgs& a) {
    ExperimentConfig cfg = resolve(a, true);
    if (cfg.deltas.size() != 1) throw config_error("run: exactly one delta required");
    BanditInstance instance(cfg.arms);
    RiskLevel r(cfg.alpha);
    TrialRecord rec =
        run_trial(instance, r, tas_config(cfg, cfg.deltas[0]), cfg.seed, 0);
    std::cout << trial_to_json(rec).dump() << "\n";
    return rec.decided ? 0 : 4;
}

int cmd_mc(const CommonArgs& a) {
    ExperimentConfig cfg = resolve(a, true);
    if (cfg.deltas.size() != 1) throw config_error("mc: exactly one delta required");
    BanditInstance instance(cfg.arms);
    RiskLevel r(cfg.alpha);
    TasConfig tc = tas_config(cfg, cfg.deltas[0]);
    MonteCarloResult mc =
        monte_carlo(instance, r, cfg.deltas[0], cfg.trials, cfg.seed, a.jobs, &tc);
    if (!cfg.out.trials.empty()) {
        std::string lines;
        for (const TrialRecord& rec : mc.records)
            lines += trial_to_json(rec).dump() + "\n";
        write_file(cfg.out.trials, lines);
    }
    std::string csv = summary_csv(mc.summary);
    std::cout << csv;
    if (!cfg.out.summary.empty()) write_file(cfg.out.summary, csv);
    return 0;
}

int cmd_sweep(const CommonArgs& a) {
    ExperimentConfig cfg = resolve(a, true);
    std::vector<SweepRow> rows = run_sweep(cfg, a.jobs);
    std::string csv = "delta,mean_tau,lower_bound,ratio\n";
    for (const SweepRow& row : rows)
        csv += num(row.delta) + "," + num(row.mean_tau) + "," +
               num(row.lower_bound) + "," + num(row.ratio) + "\n";
    std::cout << csv;
    if (!cfg.out.summary.empty()) write_file(cfg.out.summary, csv);
    return 0;
}

json error_object(int code, const std::string& message) {
    return json{{"error", {{"code", code}, {"message", message}}}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Risk-averse best-arm identification under EVaR"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string side = "upper";

    auto add_common = [&](CLI::App* sub, bool with_dist, bool with_instance) {
        sub->add_option("--config", args.config_path, "JSON experiment config");
        if (with_dist)
            sub->add_option("--dist", args.dist_path, "distribution literal file");
        if (with_instance)
            sub->add_option("--instance", args.instance_path, "instance file");
        sub->add_option("--alpha", args.alpha, "risk level in (0,1)");
        sub->add_flag("--oracle", args.with_oracle, "also print the brute-force value");
    };

    CLI::App* evar_cmd = app.add_subcommand("evar", "EVaR of a distribution");
    add_common(evar_cmd, true, false);

    CLI::App* klinf_cmd = app.add_subcommand("klinf", "KL information projection");
    add_common(klinf_cmd, true, false);
    klinf_cmd->add_option("--side", side, "upper|lower")
        ->check(CLI::IsMember({"upper", "lower"}));
    klinf_cmd->add_option("--nu", args.nu, "EVaR threshold in [0,1]");

    CLI::App* oracle_cmd =
        app.add_subcommand("oracle", "oracle weights and characteristic time");
    add_common(oracle_cmd, false, true);
    oracle_cmd->add_option("--delta", args.delta, "confidence for the lower bound");

    CLI::App* run_cmd = app.add_subcommand("run", "one Track-and-Stop trial");
    add_common(run_cmd, false, true);
    run_cmd->add_option("--delta", args.delta, "confidence level");
    std::uint64_t seed_opt = 0;
    run_cmd->add_option("--seed", seed_opt, "base seed");
    run_cmd->add_flag("--strict-tracking", args.strict_tracking,
                      "recompute oracle weights every pull");

    CLI::App* mc_cmd = app.add_subcommand("mc", "Monte-Carlo experiment");
    add_common(mc_cmd, false, true);
    mc_cmd->add_option("--delta", args.delta, "confidence level");
    mc_cmd->add_option("--trials", args.trials, "number of trials");
    mc_cmd->add_option("--seed", seed_opt, "base seed");
    mc_cmd->add_option("--jobs", args.jobs, "worker threads");
    mc_cmd->add_option("--out", args.out_path, "per-trial JSONL path");
    mc_cmd->add_flag("--strict-tracking", args.strict_tracking,
                     "recompute oracle weights every pull");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "delta sweep (config-driven)");
    add_common(sweep_cmd, false, true);
    sweep_cmd->add_option("--jobs", args.jobs, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    if (run_cmd->count("--seed") || mc_cmd->count("--seed")) args.seed = seed_opt;

    try {
        if (evar_cmd->parsed()) return cmd_evar(args);
        if (klinf_cmd->parsed()) return cmd_klinf(args, side);
        if (oracle_cmd->parsed()) return cmd_oracle(args);
        if (run_cmd->parsed()) return cmd_run(args);
        if (mc_cmd->parsed()) return cmd_mc(args);
        if (sweep_cmd->parsed()) return cmd_sweep(args);
    } catch (const config_error& e) {
        std::cerr << error_object(2, e.what()).dump() << "\n";
        return 2;
    } catch (const degenerate_instance_error& e) {
        std::cerr << error_object(3, e.what()).dump() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << error_object(2, e.what()).dump() << "\n";
        return 2;
    }
    return 0;
}
