#include <set>

#include "smdp/environments.hpp"

namespace smdp {

namespace {

/// Reads typed parameters and rejects keys nobody asked for.
class Params {
public:
    explicit Params(const ParamMap& p) : p_(p) {}

    double real(const std::string& key, double fallback) {
        used_.insert(key);
        auto it = p_.find(key);
        if (it == p_.end()) return fallback;
        try {
            std::size_t pos = 0;
            double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument(key);
            return v;
        } catch (const std::exception&) {
            throw ValidationError("parameter " + key + " is not a number: " + it->second);
        }
    }

    std::size_t count(const std::string& key, std::size_t fallback) {
        double v = real(key, static_cast<double>(fallback));
        if (!(v >= 0.0) || v != static_cast<double>(static_cast<std::size_t>(v)))
            throw ValidationError("parameter " + key + " must be a non-negative integer");
        return static_cast<std::size_t>(v);
    }

    std::string text(const std::string& key, const std::string& fallback) {
        used_.insert(key);
        auto it = p_.find(key);
        return it == p_.end() ? fallback : it->second;
    }

    void finish(const std::string& env) const {
        for (const auto& [k, v] : p_)
            if (!used_.count(k)) throw ValidationError("environment " + env + " has no parameter " + k);
    }

private:
    const ParamMap& p_;
    std::set<std::string> used_;
};

double grid_gain(const GridConfig& c) {
    const double d = static_cast<double>(c.d);
    return c.r_max * (d + 1.0) / (d * d + d + 1.0);
}

EnvironmentBundle grid_bundle(const std::string& name, Params& p, OptionMode mode) {
    GridConfig c;
    c.d = p.count("d", 5);
    c.m = p.count("m", 1);
    c.r_max = p.real("r_max", 1.0);
    c.option_mode = mode;
    p.finish(name);
    MdpModel mdp = build_grid_mdp(c);
    if (mode == OptionMode::PrimitiveOnly) {
        EnvironmentBundle b = bundle_from_model(mdp.smdp(), name);
        b.reference_gain = grid_gain(c);
        return b;
    }
    OptionSet set = mode == OptionMode::Interruptible ? build_grid_options(c) : build_grid_deterministic_options(c);
    EnvironmentBundle b = bundle_from_options(std::move(mdp), std::move(set), name);
    b.reference_gain = grid_gain(c);
    return b;
}

EnvironmentBundle lb_bundle(const std::string& name, Params& p, LowerBoundVariant variant) {
    LowerBoundConfig c;
    c.variant = variant;
    if (variant == LowerBoundVariant::General) {
        c.t_max = 6.0;
        c.tau_bar = 1.5;
    }
    const std::string layout = p.text("layout", "merged");
    if (layout == "merged") c.layout = LowerBoundLayout::Merged;
    else if (layout == "tree") c.layout = LowerBoundLayout::Tree;
    else throw ValidationError("layout must be merged or tree");
    c.delta = p.real("delta", c.delta);
    c.epsilon = p.real("epsilon", c.epsilon);
    c.eta = p.real("eta", c.eta);
    c.t_min = p.real("t_min", c.t_min);
    c.t_max = p.real("t_max", c.t_max);
    c.r_max = p.real("r_max", c.r_max);
    if (variant == LowerBoundVariant::General) c.tau_bar = p.real("tau_bar", c.tau_bar);
    else c.p = p.real("p", c.p);
    c.copies = p.count("copies", c.copies);
    c.actions = p.count("actions", c.actions);
    c.best_copy = p.count("best_copy", c.best_copy);
    c.a0_star = p.count("a0_star", c.a0_star);
    c.a1_star = p.count("a1_star", c.a1_star);
    p.finish(name);
    EnvironmentBundle b = bundle_from_model(build_lower_bound_smdp(c), name);
    b.reference_gain = lower_bound_optimal_gain(c);
    return b;
}

} // namespace

std::unique_ptr<Environment> EnvironmentBundle::simulator() const {
    if (compiled) return std::make_unique<OptionEnvironment>(base, options, compiled);
    return std::make_unique<ModelEnvironment>(model, "model:" + name);
}

AgentConfig EnvironmentBundle::agent_config(ConfidenceMode mode, double delta) const {
    return default_agent_config(*model, mode, delta);
}

std::vector<std::string> environment_names() { return {"grid", "grid-options", "grid-det-options", "lb-smdp", "lb-options"}; }

EnvironmentBundle make_environment(const std::string& name, const ParamMap& params) {
    Params p(params);
    if (name == "grid") return grid_bundle(name, p, OptionMode::PrimitiveOnly);
    if (name == "grid-options") return grid_bundle(name, p, OptionMode::Interruptible);
    if (name == "grid-det-options") return grid_bundle(name, p, OptionMode::Deterministic);
    if (name == "lb-smdp") return lb_bundle(name, p, LowerBoundVariant::General);
    if (name == "lb-options") return lb_bundle(name, p, LowerBoundVariant::OptionsCompatible);
    throw ValidationError("unknown environment " + name);
}

EnvironmentBundle bundle_from_model(SmdpModel m, const std::string& name) {
    EnvironmentBundle b;
    b.name = name;
    b.model = std::make_shared<const SmdpModel>(std::move(m));
    b.reference_gain = optimal_gain(*b.model);
    return b;
}

EnvironmentBundle bundle_from_options(MdpModel mdp, OptionSet set, const std::string& name) {
    EnvironmentBundle b;
    b.name = name;
    b.base = std::make_shared<const MdpModel>(std::move(mdp));
    b.options = std::make_shared<const OptionSet>(std::move(set));
    b.compiled = std::make_shared<const CompiledOptions>(compile(*b.base, *b.options));
    b.model = std::shared_ptr<const SmdpModel>(b.compiled, &b.compiled->model);
    b.reference_gain = optimal_gain(b.base->smdp());
    return b;
}

} // namespace smdp
