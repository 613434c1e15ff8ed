// Command-line front end: planning, learning, experiments, diameters and model export.

#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "smdp/harness.hpp"
#include "smdp/model_io.hpp"

using namespace smdp;

namespace {

struct Source {
    std::string model, options, env;
    std::vector<std::string> params;
};

void add_source(CLI::App* cmd, Source& src, bool with_env) {
    cmd->add_option("--model", src.model, "model file (base MDP when --options is given)");
    cmd->add_option("--options", src.options, "option set file over the --model MDP");
    if (with_env) {
        cmd->add_option("--env", src.env, "registered environment name");
        cmd->add_option("--param", src.params, "environment parameter key=value (repeatable)");
    }
}

EnvironmentBundle load(const Source& src) {
    if (!src.env.empty()) {
        if (!src.model.empty() || !src.options.empty()) throw ValidationError("--env excludes --model and --options");
        ParamMap p;
        for (const auto& kv : src.params) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) throw ValidationError("parameter must be key=value: " + kv);
            p[kv.substr(0, eq)] = kv.substr(eq + 1);
        }
        return make_environment(src.env, p);
    }
    if (src.model.empty()) throw ValidationError("need --model or --env");
    SmdpModel m = read_model_file(src.model);
    if (src.options.empty()) return bundle_from_model(std::move(m), src.model);
    return bundle_from_options(MdpModel(std::move(m)), read_options_file(src.options), src.model);
}

std::string join(const std::vector<std::size_t>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
    return os.str();
}

ConfidenceMode parse_mode(const std::string& s) {
    if (s == "bounded") return ConfidenceMode::Bounded;
    if (s == "sub-exp") return ConfidenceMode::SubExponential;
    throw ValidationError("--mode must be bounded or sub-exp");
}

int cmd_plan(const Source& src, double epsilon, double tau_param) {
    EnvironmentBundle b = load(src);
    const SmdpModel& m = *b.model;
    const double tau = tau_param > 0.0 ? tau_param : default_tau(m);
    UniformizedMdp meq(m, tau);
    EviSolution sol = value_iteration(meq, epsilon);
    DiameterResult dia = diameter(m);
    std::printf("states %zu\npairs %zu\ntau %.17g\ngain %.17g\niterations %zu\ndiameter %.17g\npolicy %s\n",
                m.num_states(), m.num_pairs(), tau, sol.gain, sol.iterations, dia.diameter,
                join(sol.policy.action).c_str());
    return 0;
}

int cmd_learn(const Source& src, std::uint64_t steps, double time_budget, double delta, std::uint64_t seed,
              const std::string& mode, const std::string& out) {
    if (steps == 0 && !(time_budget > 0.0)) throw ValidationError("need --steps or --time");
    EnvironmentBundle b = load(src);
    AgentConfig cfg = b.agent_config(parse_mode(mode), delta);
    std::vector<std::size_t> na(b.model->num_states());
    for (StateId s = 0; s < na.size(); ++s) na[s] = b.model->num_actions(s);
    UcrlSmdpAgent agent(na, cfg);
    auto sim = b.simulator();
    RegretLedger ledger;
    ledger.set_reference_gain(b.reference_gain);
    Rng rng(seed);
    UcrlSmdpAgent::RunLimits lim;
    lim.max_steps = steps;
    lim.time_budget = time_budget;
    auto eps = agent.run(*sim, 0, rng, ledger, lim);
    if (!out.empty()) ledger.write_csv(out);
    std::printf("provenance %s\nepisodes %zu\nsteps %llu\nTn %.17g\nreward %.17g\nreference_gain %.17g\nregret %.17g\n",
                ledger.provenance.c_str(), eps.size(), static_cast<unsigned long long>(ledger.steps()),
                ledger.total_time(), ledger.total_reward(), b.reference_gain, ledger.regret());
    return 0;
}

int cmd_experiment(const std::string& plan_path, std::size_t jobs, const std::string& out) {
    ExperimentPlan plan = read_plan_file(plan_path);
    AggregateResult r = run_plan(plan, out, jobs, [](const std::string& msg) { std::fprintf(stderr, "%s\n", msg.c_str()); });
    std::printf("rows %zu\nwarnings %zu\nout %s\n", r.rows.size(), r.warnings.size(), out.c_str());
    return 0;
}

int cmd_aggregate(const std::string& plan_path, const std::string& dir) {
    AggregateResult r = aggregate_directory(read_plan_file(plan_path), dir);
    emit_csv(r, dir);
    std::printf("rows %zu\nwarnings %zu\n", r.rows.size(), r.warnings.size());
    return 0;
}

int cmd_diameter(const Source& src) {
    EnvironmentBundle b = load(src);
    DiameterResult d = diameter(*b.model);
    std::printf("diameter %.17g\nfrom %zu\nto %zu\n", d.diameter, d.from, d.to);
    return 0;
}

int cmd_export(const Source& src, const std::string& out, const std::string& base_out, const std::string& options_out) {
    EnvironmentBundle b = load(src);
    write_model_file(out, *b.model);
    if (!base_out.empty()) {
        if (!b.base) throw ValidationError("environment has no base MDP");
        write_model_file(base_out, b.base->smdp());
    }
    if (!options_out.empty()) {
        if (!b.options) throw ValidationError("environment has no option set");
        write_options_file(options_out, *b.options);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Average-reward planning and optimistic learning in semi-Markov decision processes"};
    app.require_subcommand(1);

    Source src;
    double epsilon = 1e-9, tau_param = 0.0, delta = 0.05, time_budget = 0.0;
    std::uint64_t steps = 0, seed = 1;
    std::string mode = "bounded", out, plan_path, base_out, options_out;
    std::size_t jobs = 1;

    auto* plan = app.add_subcommand("plan", "solve a model and report gain, policy and diameter");
    add_source(plan, src, true);
    plan->add_option("--epsilon", epsilon, "span stopping threshold");
    plan->add_option("--tau-param", tau_param, "uniformization constant in (0, tau_min); default 0.9 tau_min");

    auto* learn = app.add_subcommand("learn", "run the optimistic learner and write its ledger");
    add_source(learn, src, true);
    learn->add_option("--steps", steps, "decision steps");
    learn->add_option("--time", time_budget, "elapsed-time budget");
    learn->add_option("--delta", delta, "confidence level");
    learn->add_option("--seed", seed, "random seed");
    learn->add_option("--mode", mode, "bounded or sub-exp");
    learn->add_option("--out", out, "ledger CSV path");

    auto* exp = app.add_subcommand("experiment", "run an options-versus-primitive sweep");
    exp->add_option("--plan", plan_path, "plan file")->required();
    exp->add_option("--jobs", jobs, "worker threads");
    exp->add_option("--out", out, "output directory")->required();

    auto* agg = app.add_subcommand("aggregate", "recompute aggregates from the ledgers of a finished experiment");
    agg->add_option("--plan", plan_path, "plan file")->required();
    agg->add_option("--dir", out, "experiment directory")->required();

    auto* dia = app.add_subcommand("diameter", "compute the diameter of a model");
    add_source(dia, src, true);

    auto* exp_env = app.add_subcommand("export-env", "write a registered environment to model files");
    add_source(exp_env, src, true);
    exp_env->add_option("--out", out, "model file for the process the learner faces")->required();
    exp_env->add_option("--base-out", base_out, "model file for the base MDP");
    exp_env->add_option("--options-out", options_out, "option set file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*plan) return cmd_plan(src, epsilon, tau_param);
        if (*learn) return cmd_learn(src, steps, time_budget, delta, seed, mode, out);
        if (*exp) return cmd_experiment(plan_path, jobs, out);
        if (*agg) return cmd_aggregate(plan_path, out);
        if (*dia) return cmd_diameter(src);
        if (*exp_env) return cmd_export(src, out, base_out, options_out);
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const RunAbort& e) {
        std::fprintf(stderr, "aborted: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "aborted: %s\n", e.what());
        return 3;
    }
    return 0;
}
