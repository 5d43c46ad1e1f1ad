#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "evarbai/bandit.hpp"
#include "evarbai/evar.hpp"
#include "evarbai/monte_carlo.hpp"

namespace evarbai {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OutputPaths {
    std::string summary;
    std::string trials;
    bool operator==(const OutputPaths&) const = default;
};

inline bool operator==(const SolverOptions& a, const SolverOptions& b) {
    return a.t_max == b.t_max && a.upper_grid == b.upper_grid &&
           a.z_max == b.z_max && a.lower_grid == b.lower_grid &&
           a.boundary_offset == b.boundary_offset && a.refine_iters == b.refine_iters &&
           a.pairwise_grid == b.pairwise_grid &&
           a.pairwise_refine_iters == b.pairwise_refine_iters &&
           a.mirror_iters == b.mirror_iters && a.mirror_warm_iters == b.mirror_warm_iters;
}

inline bool arm_equal(const ArmSpec& a, const ArmSpec& b) {
    if (a.index() != b.index()) return false;
    if (const auto* d = std::get_if<DiscreteArm>(&a)) {
        const auto& e = std::get<DiscreteArm>(b);
        if (d->dist.size() != e.dist.size()) return false;
        for (std::size_t i = 0; i < d->dist.size(); ++i)
            if (d->dist.location(i) != e.dist.location(i) ||
                d->dist.mass(i) != e.dist.mass(i))
                return false;
        return true;
    }
    if (const auto* p = std::get_if<BernoulliArm>(&a))
        return p->p == std::get<BernoulliArm>(b).p;
    const auto& x = std::get<BetaQuantizedArm>(a);
    const auto& y = std::get<BetaQuantizedArm>(b);
    return x.a == y.a && x.b == y.b && x.grid == y.grid;
}

/// Everything one experiment needs: the instance, risk and confidence
/// levels, trial counts, seeding, solver overrides, and output paths.
struct ExperimentConfig {
    std::vector<ArmSpec> arms;
    double alpha = 0.2;
    std::vector<double> deltas{0.1};
    long trials = 200;
    std::uint64_t seed = 1;
    long horizon_cap = 1000000;
    double quantization_grid = 1e-3;
    bool strict_tracking = false;
    long dense_recompute_until = 200;
    SolverOptions solver;
    OutputPaths out;

    bool operator==(const ExperimentConfig& o) const {
        if (arms.size() != o.arms.size()) return false;
        for (std::size_t i = 0; i < arms.size(); ++i)
            if (!arm_equal(arms[i], o.arms[i])) return false;
        return alpha == o.alpha && deltas == o.deltas && trials == o.trials &&
               seed == o.seed && horizon_cap == o.horizon_cap &&
               quantization_grid == o.quantization_grid &&
               strict_tracking == o.strict_tracking &&
               dense_recompute_until == o.dense_recompute_until &&
               solver == o.solver && out == o.out;
    }
};

namespace detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                                const std::string& where) {
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key))
            throw config_error("unknown key \"" + key + "\" in " + where);
}

inline double require_number(const json& j, const std::string& key, double lo,
                             double hi, bool open_lo, bool open_hi) {
    if (!j.is_number())
        throw config_error("\"" + key + "\" must be a number");
    double v = j.get<double>();
    bool ok = (open_lo ? v > lo : v >= lo) && (open_hi ? v < hi : v <= hi);
    if (!ok)
        throw config_error("\"" + key + "\" out of range: " + std::to_string(v));
    return v;
}

inline DiscreteDistribution parse_distribution_literal(const json& j,
                                                       const std::string& where) {
    if (!j.is_array() || j.empty())
        throw config_error("\"" + where + "\" must be a nonempty list of [location, mass] pairs");
    std::vector<Atom> atoms;
    for (const auto& pair : j) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() ||
            !pair[1].is_number())
            throw config_error("\"" + where + "\": each atom must be [location, mass]");
        atoms.push_back({pair[0].get<double>(), pair[1].get<double>()});
    }
    try {
        return DiscreteDistribution(std::move(atoms));
    } catch (const std::invalid_argument& e) {
        throw config_error("\"" + where + "\": " + e.what());
    }
}

inline ArmSpec parse_arm(const json& j, double default_grid, const std::string& where) {
    if (!j.is_object() || j.size() != 1)
        throw config_error(where + ": each arm is an object with exactly one of "
                                   "\"discrete\", \"bernoulli\", \"beta_quantized\"");
    if (j.contains("discrete"))
        return DiscreteArm{parse_distribution_literal(j["discrete"], where + ".discrete")};
    if (j.contains("bernoulli"))
        return BernoulliArm{require_number(j["bernoulli"], where + ".bernoulli", 0.0,
                                           1.0, false, false)};
    if (j.contains("beta_quantized")) {
        const json& b = j["beta_quantized"];
        reject_unknown_keys(b, {"a", "b", "grid"}, where + ".beta_quantized");
        if (!b.contains("a") || !b.contains("b"))
            throw config_error(where + ".beta_quantized needs \"a\" and \"b\"");
        double grid = b.contains("grid")
                          ? require_number(b["grid"], where + ".grid", 0.0, 0.5,
                                           true, false)
                          : default_grid;
        return BetaQuantizedArm{
            require_number(b["a"], where + ".a", 0.0, 1e9, true, false),
            require_number(b["b"], where + ".b", 0.0, 1e9, true, false), grid};
    }
    throw config_error(where + ": unknown arm kind");
}

inline std::vector<ArmSpec> parse_instance(const json& j, double default_grid) {
    if (!j.is_object()) throw config_error("\"instance\" must be an object");
    reject_unknown_keys(j, {"arms"}, "instance");
    if (!j.contains("arms") || !j["arms"].is_array() || j["arms"].size() < 2)
        throw config_error("\"instance.arms\" must list at least two arms");
    std::vector<ArmSpec> arms;
    std::size_t i = 0;
    for (const auto& a : j["arms"])
        arms.push_back(parse_arm(a, default_grid, "instance.arms[" + std::to_string(i++) + "]"));
    return arms;
}

inline json arm_to_json(const ArmSpec& a) {
    json j;
    if (const auto* d = std::get_if<DiscreteArm>(&a)) {
        json atoms = json::array();
        for (const Atom& at : d->dist.atoms()) atoms.push_back({at.location, at.mass});
        j["discrete"] = atoms;
    } else if (const auto* p = std::get_if<BernoulliArm>(&a)) {
        j["bernoulli"] = p->p;
    } else {
        const auto& b = std::get<BetaQuantizedArm>(a);
        j["beta_quantized"] = {{"a", b.a}, {"b", b.b}, {"grid", b.grid}};
    }
    return j;
}

}  // namespace detail

inline ExperimentConfig parse_config_json(const nlohmann::json& j) {
    using detail::require_number;
    if (!j.is_object()) throw config_error("config must be a JSON object");
    detail::reject_unknown_keys(
        j,
        {"instance", "alpha", "delta", "trials", "seed", "horizon_cap",
         "quantization_grid", "strict_tracking", "dense_recompute_until", "solver",
         "out"},
        "config");
    ExperimentConfig cfg;
    if (j.contains("quantization_grid"))
        cfg.quantization_grid =
            require_number(j["quantization_grid"], "quantization_grid", 0.0, 0.5,
                           true, false);
    if (!j.contains("instance")) throw config_error("missing \"instance\"");
    cfg.arms = detail::parse_instance(j["instance"], cfg.quantization_grid);
    if (!j.contains("alpha")) throw config_error("missing \"alpha\"");
    cfg.alpha = require_number(j["alpha"], "alpha", 0.0, 1.0, true, true);
    if (!j.contains("delta")) throw config_error("missing \"delta\"");
    cfg.deltas.clear();
    if (j["delta"].is_array()) {
        for (const auto& d : j["delta"])
            cfg.deltas.push_back(require_number(d, "delta", 0.0, 1.0, true, true));
        if (cfg.deltas.empty()) throw config_error("\"delta\" list is empty");
    } else {
        cfg.deltas.push_back(require_number(j["delta"], "delta", 0.0, 1.0, true, true));
    }
    if (j.contains("trials")) {
        cfg.trials = static_cast<long>(
            require_number(j["trials"], "trials", 1, 1e9, false, false));
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            throw config_error("\"seed\" must be an integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("horizon_cap"))
        cfg.horizon_cap = static_cast<long>(
            require_number(j["horizon_cap"], "horizon_cap", 1, 1e12, false, false));
    if (j.contains("strict_tracking")) {
        if (!j["strict_tracking"].is_boolean())
            throw config_error("\"strict_tracking\" must be a boolean");
        cfg.strict_tracking = j["strict_tracking"].get<bool>();
    }
    if (j.contains("dense_recompute_until"))
        cfg.dense_recompute_until = static_cast<long>(require_number(
            j["dense_recompute_until"], "dense_recompute_until", 0, 1e9, false, false));
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        detail::reject_unknown_keys(
            s,
            {"t_max", "upper_grid", "z_max", "lower_grid", "boundary_offset",
             "refine_iters", "pairwise_grid", "pairwise_refine_iters", "mirror_iters",
             "mirror_warm_iters"},
            "solver");
        SolverOptions& o = cfg.solver;
        if (s.contains("t_max"))
            o.t_max = require_number(s["t_max"], "solver.t_max", 0.0, 1e9, true, false);
        if (s.contains("upper_grid"))
            o.upper_grid = static_cast<int>(
                require_number(s["upper_grid"], "solver.upper_grid", 2, 1e7, false, false));
        if (s.contains("z_max"))
            o.z_max = require_number(s["z_max"], "solver.z_max", 0.0, 1e12, true, false);
        if (s.contains("lower_grid"))
            o.lower_grid = static_cast<int>(
                require_number(s["lower_grid"], "solver.lower_grid", 2, 1e7, false, false));
        if (s.contains("boundary_offset"))
            o.boundary_offset = require_number(s["boundary_offset"],
                                               "solver.boundary_offset", 0.0, 0.5, true,
                                               true);
        if (s.contains("refine_iters"))
            o.refine_iters = static_cast<int>(require_number(
                s["refine_iters"], "solver.refine_iters", 0, 1e6, false, false));
        if (s.contains("pairwise_grid"))
            o.pairwise_grid = static_cast<int>(require_number(
                s["pairwise_grid"], "solver.pairwise_grid", 2, 1e7, false, false));
        if (s.contains("pairwise_refine_iters"))
            o.pairwise_refine_iters = static_cast<int>(
                require_number(s["pairwise_refine_iters"],
                               "solver.pairwise_refine_iters", 0, 1e6, false, false));
        if (s.contains("mirror_iters"))
            o.mirror_iters = static_cast<int>(require_number(
                s["mirror_iters"], "solver.mirror_iters", 1, 1e7, false, false));
        if (s.contains("mirror_warm_iters"))
            o.mirror_warm_iters = static_cast<int>(
                require_number(s["mirror_warm_iters"], "solver.mirror_warm_iters", 1,
                               1e7, false, false));
    }
    if (j.contains("out")) {
        detail::reject_unknown_keys(j["out"], {"summary", "trials"}, "out");
        if (j["out"].contains("summary"))
            cfg.out.summary = j["out"]["summary"].get<std::string>();
        if (j["out"].contains("trials"))
            cfg.out.trials = j["out"]["trials"].get<std::string>();
    }

    // Tied best arms are legal here (only the oracle rejects them), but worth
    // flagging early.
    try {
        BanditInstance inst(cfg.arms);
        RiskLevel r(cfg.alpha);
        double e0 = kInf, e1 = kInf;
        for (std::size_t a = 0; a < inst.num_arms(); ++a) {
            double e = evar(inst.law(a), r).value;
            if (e < e0) {
                e1 = e0;
                e0 = e;
            } else if (e < e1) {
                e1 = e;
            }
        }
        if (e1 - e0 <= 1e-9)
            std::cerr << "warning: instance has (near-)tied best arms; "
                         "oracle-based subcommands will reject it\n";
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }
    return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("malformed JSON: ") + e.what());
    }
    return parse_config_json(j);
}

inline nlohmann::json to_json(const ExperimentConfig& cfg) {
    nlohmann::json arms = nlohmann::json::array();
    for (const ArmSpec& a : cfg.arms) arms.push_back(detail::arm_to_json(a));
    nlohmann::json j{
        {"instance", {{"arms", arms}}},
        {"alpha", cfg.alpha},
        {"delta", cfg.deltas},
        {"trials", cfg.trials},
        {"seed", cfg.seed},
        {"horizon_cap", cfg.horizon_cap},
        {"quantization_grid", cfg.quantization_grid},
        {"strict_tracking", cfg.strict_tracking},
        {"dense_recompute_until", cfg.dense_recompute_until},
        {"solver",
         {{"t_max", cfg.solver.t_max},
          {"upper_grid", cfg.solver.upper_grid},
          {"z_max", cfg.solver.z_max},
          {"lower_grid", cfg.solver.lower_grid},
          {"boundary_offset", cfg.solver.boundary_offset},
          {"refine_iters", cfg.solver.refine_iters},
          {"pairwise_grid", cfg.solver.pairwise_grid},
          {"pairwise_refine_iters", cfg.solver.pairwise_refine_iters},
          {"mirror_iters", cfg.solver.mirror_iters},
          {"mirror_warm_iters", cfg.solver.mirror_warm_iters}}}};
    if (!cfg.out.summary.empty() || !cfg.out.trials.empty()) {
        nlohmann::json o;
        if (!cfg.out.summary.empty()) o["summary"] = cfg.out.summary;
        if (!cfg.out.trials.empty()) o["trials"] = cfg.out.trials;
        j["out"] = o;
    }
    return j;
}

inline TasConfig tas_config(const ExperimentConfig& cfg, double delta) {
    TasConfig t;
    t.delta = delta;
    t.horizon_cap = cfg.horizon_cap;
    t.strict_tracking = cfg.strict_tracking;
    t.dense_recompute_until = cfg.dense_recompute_until;
    t.solver = cfg.solver;
    return t;
}

struct SweepRow {
    double delta = 0.0;
    double mean_tau = 0.0;
    double lower_bound = 0.0;
    double ratio = 0.0;
};

/// Monte-Carlo runs over the config's delta list, one row per delta.
/// Rejects single-delta configs; a sweep needs a trend to show.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, int jobs = 1) {
    if (cfg.deltas.size() < 2)
        throw config_error("\"delta\": sweep needs at least two values");
    BanditInstance instance(cfg.arms);
    RiskLevel r(cfg.alpha);
    std::vector<SweepRow> rows;
    for (double d : cfg.deltas) {
        TasConfig tc = tas_config(cfg, d);
        MonteCarloResult mc =
            monte_carlo(instance, r, d, cfg.trials, cfg.seed, jobs, &tc);
        rows.push_back({d, mc.summary.mean_tau, mc.summary.lower_bound,
                        mc.summary.ratio});
    }
    return rows;
}

}  // namespace evarbai
