#include <cmath>
#include <memory>

#include "smdp/environments.hpp"
#include "smdp/learning.hpp"

namespace smdp {

CoverageReport coverage_test(const SmdpModel& truth, const AgentConfig& config, std::size_t episodes,
                             std::uint64_t seed, std::size_t episodes_per_run) {
    if (episodes_per_run == 0) throw ValidationError("episodes_per_run must be positive");
    std::vector<std::size_t> na(truth.num_states());
    for (StateId s = 0; s < truth.num_states(); ++s) na[s] = truth.num_actions(s);
    auto shared = std::make_shared<const SmdpModel>(truth);

    CoverageReport rep;
    for (std::uint64_t run = 0; rep.episodes < episodes; ++run) {
        UcrlSmdpAgent agent(na, config);
        agent.set_truth(shared.get());
        ModelEnvironment env(shared);
        Rng rng(seed + run);
        StateId state = 0;
        for (std::size_t e = 0; e < episodes_per_run && rep.episodes < episodes; ++e) {
            EpisodeSummary sum = agent.run_episode(env, state, rng, nullptr, 0, 0.0);
            ++rep.episodes;
            if (sum.truth_contained.value_or(false)) ++rep.covered;
        }
    }
    return rep;
}

RegretDecomposition regret_decomposition(double rho_mdp, double rho_options, const RegretLedger& ledger) {
    const double T = ledger.total_time();
    const double decision = ledger.total_reward();
    const double primitive = ledger.primitive_reward_total.value_or(decision);
    RegretDecomposition d;
    d.mdp_regret = T * rho_mdp - primitive;
    d.smdp_regret = T * rho_options - decision;
    d.linear_term = T * (rho_mdp - rho_options);
    d.residual = d.mdp_regret - d.smdp_regret - d.linear_term;
    return d;
}

RegretDecomposition regret_decomposition(const MdpModel& mdp, const OptionSet& set, const RegretLedger& ledger) {
    const std::string expected = "options:" + fingerprint(set);
    if (ledger.provenance != expected)
        throw ValidationError("ledger was produced in '" + ledger.provenance + "', not with this option set");
    CompiledOptions c = compile(mdp, set);
    return regret_decomposition(optimal_gain(mdp.smdp()), optimal_gain(c.model), ledger);
}

double optimal_gain(const SmdpModel& m, double epsilon) {
    UniformizedMdp meq(m, default_tau(m));
    return value_iteration(meq, epsilon).gain;
}

} // namespace smdp
