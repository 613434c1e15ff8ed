#include <algorithm>
#include <cmath>

#include "smdp/learning.hpp"

namespace smdp {

UcrlSmdpAgent::UcrlSmdpAgent(std::vector<std::size_t> actions_per_state, AgentConfig config)
    : config_(std::move(config)), counters_(actions_per_state) {
    const auto& b = config_.bounds;
    if (!(b.tau_min > 0.0) || b.tau_min > b.tau_max || !(b.r_max > 0.0))
        throw ValidationError("agent bounds are inconsistent");
    if (!(config_.delta > 0.0 && config_.delta < 1.0)) throw ValidationError("delta must lie in (0,1)");
    if (!(config_.tau_fraction > 0.0 && config_.tau_fraction < 1.0))
        throw ValidationError("uniformization fraction must lie in (0,1)");
    for (std::size_t a : actions_per_state)
        if (a == 0) throw ValidationError("every state needs at least one action");
}

BoundedParameterSmdp UcrlSmdpAgent::plausible_set(double i) const {
    BoundedParameterSmdp bp;
    bp.bounds = config_.bounds;
    const std::size_t S = counters_.num_states();
    const std::size_t A = counters_.max_actions();
    bp.pairs.resize(counters_.num_pairs());
    for (StateId s = 0; s < S; ++s) {
        bp.pair_offset.push_back(bp.pair_offset.back() + counters_.num_actions(s));
        for (std::size_t a = 0; a < counters_.num_actions(s); ++a) {
            const std::size_t k = counters_.pair(s, a);
            PlausiblePair& pp = bp.pairs[k];
            const double n = static_cast<double>(counters_.total(k));
            Radii r = confidence_radii(config_.confidence, config_.bounds, S, A, i, config_.delta, n);
            pp.beta_r = r.beta_r;
            pp.beta_tau = r.beta_tau;
            pp.beta_p = r.beta_p;
            if (counters_.total(k) == 0) continue;
            pp.sampled = true;
            pp.r_hat = counters_.reward_sum(k) / n;
            pp.tau_hat = counters_.holding_sum(k) / n;
            for (const auto& [next, c] : counters_.next_counts(k)) {
                pp.p_hat.idx.push_back(next);
                pp.p_hat.p.push_back(static_cast<double>(c) / n);
            }
        }
    }
    return bp;
}

EpisodeSummary UcrlSmdpAgent::run_episode(Environment& env, StateId& state, Rng& rng, RegretLedger* ledger,
                                          std::uint64_t max_steps, double time_budget) {
    const std::size_t S = counters_.num_states();
    if (env.num_states() != S) throw ValidationError("environment does not match the agent's state space");
    if (state >= S) throw ValidationError("start state out of range");

    counters_.start_episode();
    EpisodeSummary sum;
    sum.k = ++episode_;
    sum.i_k = counters_.step_index();
    sum.epsilon = config_.bounds.r_max / std::sqrt(static_cast<double>(sum.i_k));

    BoundedParameterSmdp bp = plausible_set(static_cast<double>(sum.i_k));
    if (truth_) sum.truth_contained = contains(bp, *truth_);
    EviOptions opt;
    opt.max_sweeps = config_.max_sweeps;
    opt.record_spans = config_.record_spans;
    EviSolution sol = extended_value_iteration(bp, tau(), sum.epsilon, opt);
    sum.optimistic_gain = sol.gain;
    sum.evi_iterations = sol.iterations;
    if (!sol.span_history.empty()) sum.max_span = *std::max_element(sol.span_history.begin(), sol.span_history.end());
    sum.policy = sol.policy;

    for (;;) {
        const std::size_t a = sol.policy.action[state];
        const std::size_t k = counters_.pair(state, a);
        if (counters_.in_episode(k) >= std::max<std::uint64_t>(1, counters_.prior(k))) {
            sum.ended_by_doubling = true;
            sum.trigger_state = state;
            sum.trigger_action = a;
            break;
        }
        if (max_steps && steps() >= max_steps) break;
        if (time_budget > 0.0 && elapsed_ >= time_budget) break;
        Transition t = env.step(state, a, rng);
        if (t.next >= S) throw RunAbort("environment returned a state outside the state space");
        if (!(t.holding > 0.0) || !std::isfinite(t.reward)) throw RunAbort("environment returned an invalid sample");
        counters_.record(state, a, t.next, t.reward, t.holding);
        if (ledger) ledger->append(state, a, t.holding, t.reward);
        elapsed_ += t.holding;
        state = t.next;
        ++sum.length;
    }
    return sum;
}

std::vector<EpisodeSummary> UcrlSmdpAgent::run(Environment& env, StateId start, Rng& rng, RegretLedger& ledger,
                                               const RunLimits& limits) {
    std::vector<EpisodeSummary> out;
    StateId state = start;
    ledger.provenance = env.provenance();
    for (;;) {
        if (limits.max_steps && steps() >= limits.max_steps) break;
        if (limits.time_budget > 0.0 && elapsed_ >= limits.time_budget) break;
        if (limits.max_episodes && out.size() >= limits.max_episodes) break;
        EpisodeSummary e = run_episode(env, state, rng, &ledger, limits.max_steps, limits.time_budget);
        e.policy.action.clear();
        out.push_back(std::move(e));
    }
    ledger.primitive_reward_total = env.primitive_reward_total();
    return out;
}

} // namespace smdp
