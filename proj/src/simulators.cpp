#include "smdp/environments.hpp"

namespace smdp {

ModelEnvironment::ModelEnvironment(std::shared_ptr<const SmdpModel> m, std::string provenance)
    : m_(std::move(m)), provenance_(std::move(provenance)) {
    if (!m_) throw ValidationError("environment needs a model");
}

Transition ModelEnvironment::step(StateId s, std::size_t a, Rng& rng) {
    if (s >= m_->num_states() || a >= m_->num_actions(s))
        throw ValidationError("illegal action " + std::to_string(a) + " in state " + std::to_string(s));
    Transition t = sample_transition(*m_, s, a, rng);
    total_ += t.reward;
    return t;
}

OptionEnvironment::OptionEnvironment(std::shared_ptr<const MdpModel> mdp, std::shared_ptr<const OptionSet> set,
                                     std::shared_ptr<const CompiledOptions> compiled)
    : mdp_(std::move(mdp)), set_(std::move(set)), compiled_(std::move(compiled)) {
    if (!mdp_ || !set_ || !compiled_) throw ValidationError("option environment is incomplete");
}

Transition OptionEnvironment::step(StateId s, std::size_t a, Rng& rng) {
    if (s >= num_states() || a >= num_actions(s))
        throw ValidationError("illegal option " + std::to_string(a) + " in state " + std::to_string(s));
    const std::size_t o = compiled_->action_option[s][a];
    OptionRun run = execute_option(*mdp_, set_->options[o], compiled_->smdp_to_base[s], rng);
    steps_ += static_cast<std::uint64_t>(run.holding);
    total_ += run.reward;
    return {compiled_->base_to_smdp[run.end], run.reward, run.holding};
}

} // namespace smdp
