#include "smdp/options.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <map>

namespace smdp {

namespace {

void check_option_shape(const OptionSet& set, std::size_t n) {
    if (set.num_base_states != n) throw ValidationError("option set does not match the base state count");
    for (std::size_t o = 0; o < set.options.size(); ++o) {
        const auto& op = set.options[o];
        if (op.termination.size() != n || op.policy.size() != n)
            throw ValidationError("option " + std::to_string(o) + " has tables of the wrong size");
        for (double b : op.termination)
            if (!(b >= 0.0 && b <= 1.0)) throw ValidationError("termination probability outside [0,1]");
        if (op.initiation.empty()) throw ValidationError("option " + std::to_string(o) + " has an empty initiation set");
        for (StateId s : op.initiation)
            if (s >= n) throw ValidationError("initiation state out of range");
    }
}

PrimitiveDist as_primitive(const ActionEntry& e, const Outcome& o) {
    if (e.reward_rate) return Dirac{*e.reward_rate};
    return std::visit([](const auto& x) -> PrimitiveDist {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, PhaseType>) throw ValidationError("base MDP rewards must be primitive distributions");
        else return x;
    }, o.reward);
}

} // namespace

bool draw_termination(double beta, Rng& rng) {
    if (beta >= 1.0) return true;
    if (beta <= 0.0) return false;
    return rng.uniform() < beta;
}

std::string fingerprint(const OptionSet& set) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* p, std::size_t n) {
        auto* c = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= c[i];
            h *= 1099511628211ull;
        }
    };
    std::uint64_t n = set.num_base_states;
    mix(&n, sizeof n);
    for (const auto& o : set.options) {
        for (StateId s : o.initiation) {
            std::uint64_t v = s;
            mix(&v, sizeof v);
        }
        mix(o.termination.data(), o.termination.size() * sizeof(double));
        for (std::size_t a : o.policy) {
            std::uint64_t v = a;
            mix(&v, sizeof v);
        }
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

std::shared_ptr<const PhaseTypeChain> build_option_chain(const MdpModel& mdp, const OptionSet& set, std::size_t o,
                                                         StateId start) {
    const SmdpModel& m = mdp.smdp();
    const std::size_t n = m.num_states();
    check_option_shape(set, n);
    if (o >= set.options.size()) throw ValidationError("option index out of range");
    const OptionSpec& op = set.options[o];
    if (std::find(op.initiation.begin(), op.initiation.end(), start) == op.initiation.end())
        throw ValidationError("option started outside its initiation set");

    std::vector<long> tidx(n, -1);
    std::vector<char> is_end(n, 0);
    std::vector<StateId> transient{start};
    tidx[start] = 0;
    for (std::size_t i = 0; i < transient.size(); ++i) {
        StateId x = transient[i];
        std::size_t a = op.policy[x];
        if (a == kNoAction || a >= m.num_actions(x))
            throw ValidationError("option " + std::to_string(o) + " has no valid action at reachable state " +
                                  std::to_string(x));
        for (const auto& out : m.action(x, a).outcomes) {
            if (out.prob <= 0.0) continue;
            double beta = op.termination[out.next];
            if (beta > 0.0) is_end[out.next] = 1;
            if (beta < 1.0 && tidx[out.next] < 0) {
                tidx[out.next] = static_cast<long>(transient.size());
                transient.push_back(out.next);
            }
        }
    }
    std::vector<StateId> ends;
    std::vector<long> eidx(n, -1);
    for (StateId y = 0; y < n; ++y)
        if (is_end[y]) {
            eidx[y] = static_cast<long>(ends.size());
            ends.push_back(y);
        }

    std::vector<PhaseTypeChain::Arc> arcs;
    for (std::size_t i = 0; i < transient.size(); ++i) {
        StateId x = transient[i];
        const ActionEntry& e = m.action(x, op.policy[x]);
        for (const auto& out : e.outcomes) {
            if (out.prob <= 0.0) continue;
            double beta = op.termination[out.next];
            PrimitiveDist r = as_primitive(e, out);
            if (beta > 0.0)
                arcs.push_back({static_cast<int>(i), -1, static_cast<int>(eidx[out.next]), out.prob * beta, r});
            if (beta < 1.0)
                arcs.push_back({static_cast<int>(i), static_cast<int>(tidx[out.next]), -1, out.prob * (1.0 - beta), r});
        }
    }
    try {
        return std::make_shared<const PhaseTypeChain>(std::move(transient), std::move(ends), std::move(arcs));
    } catch (const std::invalid_argument& ex) {
        throw ValidationError("option " + std::to_string(o) + " from state " + std::to_string(start) + ": " + ex.what());
    }
}

PhaseTypeAnalysis analyze_holding(const MdpModel& mdp, const OptionSet& set, std::size_t o, StateId start,
                                  double tail_tolerance) {
    PhaseTypeAnalysis res;
    res.option = o;
    res.start = start;
    res.chain = build_option_chain(mdp, set, o, start);
    const auto& ch = *res.chain;
    res.spectral_radius = ch.spectral_radius();
    res.holding_class = ch.nilpotent() ? HoldingClass::BoundedHolding : HoldingClass::SubExponentialUnbounded;
    res.ends = ch.end_states();

    const std::size_t n = ch.num_transient(), m = ch.num_ends();
    const auto& Q = ch.q_dense();
    const auto& R = ch.r_dense();
    std::vector<double> v(n, 0.0), w(n);
    v[0] = 1.0;
    const std::size_t cap = 10000000;
    for (std::size_t k = 1; k <= cap; ++k) {
        std::vector<double> row(m, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (v[i] == 0.0) continue;
            for (std::size_t e = 0; e < m; ++e) row[e] += v[i] * R[i * m + e];
        }
        res.pmf.push_back(std::move(row));
        std::fill(w.begin(), w.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (v[i] == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) w[j] += v[i] * Q[i * n + j];
        }
        v.swap(w);
        double rest = 0.0;
        for (double x : v) rest += x;
        res.tail_mass = rest;
        if (rest < tail_tolerance) break;
    }
    return res;
}

CompiledOptions compile(const MdpModel& mdp, const OptionSet& set) {
    const SmdpModel& m = mdp.smdp();
    const std::size_t n = m.num_states();
    check_option_shape(set, n);

    std::vector<char> in_init(n, 0);
    for (const auto& op : set.options)
        for (StateId s : op.initiation) in_init[s] = 1;
    for (std::size_t o = 0; o < set.options.size(); ++o)
        for (StateId s = 0; s < n; ++s)
            if (set.options[o].termination[s] > 0.0 && !in_init[s])
                throw ValidationError("option set is not admissible: option " + std::to_string(o) +
                                      " can stop in state " + std::to_string(s) + " where no option starts");

    CompiledOptions c;
    c.base_to_smdp.assign(n, kNoAction);
    for (StateId s = 0; s < n; ++s)
        if (in_init[s]) {
            c.base_to_smdp[s] = c.smdp_to_base.size();
            c.smdp_to_base.push_back(s);
        }

    std::vector<std::vector<ActionEntry>> actions(c.smdp_to_base.size());
    c.action_option.assign(c.smdp_to_base.size(), {});
    bool bounded = true;
    std::size_t longest = 1;
    for (std::size_t o = 0; o < set.options.size(); ++o) {
        for (StateId s : set.options[o].initiation) {
            std::size_t x = c.base_to_smdp[s];
            auto chain = build_option_chain(mdp, set, o, s);
            bounded = bounded && chain->nilpotent();
            longest = std::max(longest, chain->max_holding());
            ActionEntry e;
            e.label = set.options[o].label;
            for (std::size_t k = 0; k < chain->num_ends(); ++k) {
                double p = chain->end_probability(k);
                if (p <= 0.0) continue;
                Outcome out;
                out.next = c.base_to_smdp[chain->end_states()[k]];
                out.prob = p;
                out.reward = PhaseType{chain, k, PhaseQuantity::Reward};
                out.holding = PhaseType{chain, k, PhaseQuantity::Holding};
                e.outcomes.push_back(std::move(out));
            }
            actions[x].push_back(std::move(e));
            c.action_option[x].push_back(o);
        }
    }
    SmdpModel tmp(actions);
    ModelBounds b = derive_bounds(tmp);
    b.r_max = std::max(b.r_max, m.bounds().r_max);
    c.model = SmdpModel(std::move(actions), b);
    // holding times of acyclic options are bounded by their longest path
    if (bounded) c.model.set_tail(BoundedTail{1.0, static_cast<double>(longest)});
    require_valid(c.model);
    return c;
}

OptionRun execute_option(const MdpModel& mdp, const OptionSpec& option, StateId start, Rng& rng,
                         std::size_t max_steps) {
    const SmdpModel& m = mdp.smdp();
    OptionRun run;
    StateId x = start;
    for (std::size_t k = 0; k < max_steps; ++k) {
        std::size_t a = option.policy[x];
        if (a == kNoAction) throw ValidationError("option policy undefined at state " + std::to_string(x));
        Transition t = sample_transition(m, x, a, rng);
        run.holding += 1.0;
        run.reward += t.reward;
        x = t.next;
        if (draw_termination(option.termination[x], rng)) {
            run.end = x;
            return run;
        }
    }
    throw RunAbort("option did not terminate within the step cap");
}

FlatController::FlatController(const MdpModel& mdp, const OptionSet& set, const CompiledOptions& compiled,
                               StationaryPolicy policy)
    : mdp_(&mdp), set_(&set), compiled_(&compiled), policy_(std::move(policy)) {
    check_policy(compiled.model, policy_);
}

std::size_t FlatController::act(StateId s) {
    if (active_ == kNoAction) {
        std::size_t x = compiled_->base_to_smdp.at(s);
        if (x == kNoAction) throw ValidationError("decision required in a state where no option starts");
        active_ = compiled_->action_option[x][policy_.action[x]];
        ++decisions_;
    }
    std::size_t a = set_->options[active_].policy[s];
    if (a == kNoAction || a >= mdp_->smdp().num_actions(s)) throw ValidationError("option policy undefined");
    return a;
}

void FlatController::observe(StateId next, double reward, Rng& rng) {
    if (active_ == kNoAction) throw std::logic_error("observe without an active option");
    ++time_;
    reward_ += reward;
    if (draw_termination(set_->options[active_].termination[next], rng)) active_ = kNoAction;
}

FlatController lift_policy(const MdpModel& mdp, const OptionSet& set, const CompiledOptions& compiled,
                           const StationaryPolicy& smdp_policy) {
    return FlatController(mdp, set, compiled, smdp_policy);
}

} // namespace smdp
