#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "smdp/distribution.hpp"
#include "smdp/errors.hpp"
#include "smdp/rng.hpp"

namespace smdp {

/// One possible next state of a state-action pair with its reward and holding laws.
struct Outcome {
    StateId next = 0;
    double prob = 0.0;
    DistributionSpec reward = Dirac{0.0};
    DistributionSpec holding = Dirac{1.0};
};

struct ActionEntry {
    std::vector<Outcome> outcomes;
    /// When set, the reward of a transition is this rate times its holding time
    /// and the `reward` field of the outcomes is only informative.
    std::optional<double> reward_rate;
    std::string label;
};

/// Bounds the learner is allowed to know in advance.
struct ModelBounds {
    double r_max = 1.0;   ///< bound on mean reward per unit time
    double tau_min = 1.0; ///< smallest mean holding time
    double tau_max = 1.0; ///< largest mean holding time
};

/// Concentration parameters for sub-exponential rewards and holding times.
struct SubExpTail {
    double sigma_r = 1.0, b_r = 1.0;
    double sigma_tau = 1.0, b_tau = 1.0;
};

/// Support bounds for bounded holding times.
struct BoundedTail {
    double t_min = 1.0, t_max = 1.0;
};

using TailParams = std::variant<std::monostate, SubExpTail, BoundedTail>;

/// Finite semi-Markov decision process with per-state action sets.
class SmdpModel {
public:
    SmdpModel() = default;
    /// Bounds default to the tightest values implied by the model itself.
    explicit SmdpModel(std::vector<std::vector<ActionEntry>> actions, std::optional<ModelBounds> bounds = std::nullopt);

    std::size_t num_states() const { return actions_.size(); }
    std::size_t num_actions(StateId s) const { return actions_[s].size(); }
    std::size_t max_actions() const { return max_actions_; }
    std::size_t num_pairs() const { return pair_offset_.back(); }
    std::size_t pair_index(StateId s, std::size_t a) const { return pair_offset_[s] + a; }

    const ActionEntry& action(StateId s, std::size_t a) const { return actions_[s][a]; }
    const std::vector<std::vector<ActionEntry>>& actions() const { return actions_; }

    /// Mean reward r(s,a) and mean holding time tau(s,a).
    double expected_reward(StateId s, std::size_t a) const { return r_bar_[pair_index(s, a)]; }
    double expected_holding(StateId s, std::size_t a) const { return tau_bar_[pair_index(s, a)]; }
    /// Mean reward and holding of a single outcome.
    double outcome_reward(StateId s, std::size_t a, std::size_t k) const;
    double outcome_holding(StateId s, std::size_t a, std::size_t k) const;
    /// Aggregated p(s'|s,a).
    double transition_probability(StateId s, std::size_t a, StateId next) const;

    const ModelBounds& bounds() const { return bounds_; }
    void set_bounds(const ModelBounds& b) { bounds_ = b; }
    const TailParams& tail() const { return tail_; }
    void set_tail(const TailParams& t) { tail_ = t; }

    /// Cumulative outcome masses of a pair, used by the sampler.
    const std::vector<double>& cumulative(StateId s, std::size_t a) const { return cum_[pair_index(s, a)]; }

private:
    std::vector<std::vector<ActionEntry>> actions_;
    std::vector<std::size_t> pair_offset_{0};
    std::vector<double> r_bar_, tau_bar_;
    std::vector<std::vector<double>> cum_;
    std::size_t max_actions_ = 0;
    ModelBounds bounds_;
    TailParams tail_;
};

/// Tightest bounds implied by a model: max reward rate, min and max mean holding.
ModelBounds derive_bounds(const SmdpModel& m);

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
    std::string summary() const;
};

/// Checks probabilities, distributions, bounds and communication.
ValidationReport validate(const SmdpModel& m);
/// Throws ValidationError with the report summary when validation fails.
void require_valid(const SmdpModel& m);

/// Strong connectivity of the graph that joins every positive-probability transition.
bool is_communicating(const SmdpModel& m);

struct Transition {
    StateId next = 0;
    double reward = 0.0;
    double holding = 1.0;
};

/// Draws next state, then holding time, then reward (coupled or independent).
Transition sample_transition(const SmdpModel& m, StateId s, std::size_t a, Rng& rng);

/// An SMDP whose holding times are all the constant 1.
class MdpModel {
public:
    MdpModel() = default;
    explicit MdpModel(SmdpModel m);
    const SmdpModel& smdp() const { return m_; }
    std::size_t num_states() const { return m_.num_states(); }

private:
    SmdpModel m_;
};

/// Deterministic stationary policy: one action index per state.
struct StationaryPolicy {
    std::vector<std::size_t> action;
};

void check_policy(const SmdpModel& m, const StationaryPolicy& pi);

} // namespace smdp
