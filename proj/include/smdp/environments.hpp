#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "smdp/environment.hpp"
#include "smdp/learning.hpp"
#include "smdp/options.hpp"

namespace smdp {

// ---------------------------------------------------------------- grid world

enum class OptionMode { Interruptible, Deterministic, PrimitiveOnly };

/// d x d grid, states indexed row-major (s = row * d + col). The target is the
/// bottom-right corner. Primitive actions: 0 left, 1 right, 2 up, 3 down.
struct GridConfig {
    std::size_t d = 5;
    std::size_t m = 1;
    double r_max = 1.0;
    OptionMode option_mode = OptionMode::Interruptible;
};

enum GridAction : std::size_t { kLeft = 0, kRight = 1, kUp = 2, kDown = 3 };

StateId grid_target(std::size_t d);
void check_grid_config(const GridConfig& c);

/// Walls self-loop; leaving the target pays r_max and resets uniformly to another cell.
MdpModel build_grid_mdp(const GridConfig& c);
/// Four interruptible options per non-target cell plus the target's one-step reset.
OptionSet build_grid_options(const GridConfig& c);
/// Options that move exactly m cells, fewer when a wall is closer.
OptionSet build_grid_deterministic_options(const GridConfig& c);

// ------------------------------------------------------ two-state families

enum class LowerBoundVariant {
    General,          ///< independent two-point rewards and holding times
    OptionsCompatible ///< reward equals r_max times holding time in s1
};

enum class LowerBoundLayout {
    Merged, ///< two states, copies * actions actions each
    Tree    ///< one two-state copy per leaf, s0 states linked by a tree of moves
};

struct LowerBoundConfig {
    LowerBoundVariant variant = LowerBoundVariant::General;
    LowerBoundLayout layout = LowerBoundLayout::Merged;
    double delta = 0.1;
    double epsilon = 0.02;
    double eta = 0.02;
    double p = 0.25;          ///< options variant: mass of t_max; general variant: derived from tau_bar
    double tau_bar = 1.5;     ///< general variant: mean holding time
    double t_min = 1.0;
    double t_max = 3.0;
    double r_max = 1.0;
    std::size_t copies = 1;
    std::size_t actions = 2;  ///< actions per state of one copy
    std::size_t best_copy = 0;
    std::size_t a0_star = 0;  ///< index among the main actions of s0
    std::size_t a1_star = 0;
};

void check_lower_bound_config(const LowerBoundConfig& c);
SmdpModel build_lower_bound_smdp(const LowerBoundConfig& c);
/// State ids of s0 and s1 in the copy holding the good actions.
std::pair<StateId, StateId> lower_bound_best_states(const LowerBoundConfig& c);
/// Action indices of the good actions at those states.
std::pair<std::size_t, std::size_t> lower_bound_best_actions(const LowerBoundConfig& c);
/// Closed-form optimal gain.
double lower_bound_optimal_gain(const LowerBoundConfig& c);

// -------------------------------------------------------------- simulators

/// Samples directly from a model.
class ModelEnvironment : public Environment {
public:
    explicit ModelEnvironment(std::shared_ptr<const SmdpModel> m, std::string provenance = "model");
    std::size_t num_states() const override { return m_->num_states(); }
    std::size_t num_actions(StateId s) const override { return m_->num_actions(s); }
    Transition step(StateId s, std::size_t a, Rng& rng) override;
    double primitive_reward_total() const override { return total_; }
    std::string provenance() const override { return provenance_; }

private:
    std::shared_ptr<const SmdpModel> m_;
    std::string provenance_;
    double total_ = 0.0;
};

/// Executes options on the base MDP one primitive step at a time; states and
/// actions are those of the compiled SMDP.
class OptionEnvironment : public Environment {
public:
    OptionEnvironment(std::shared_ptr<const MdpModel> mdp, std::shared_ptr<const OptionSet> set,
                      std::shared_ptr<const CompiledOptions> compiled);
    std::size_t num_states() const override { return compiled_->model.num_states(); }
    std::size_t num_actions(StateId s) const override { return compiled_->model.num_actions(s); }
    Transition step(StateId s, std::size_t a, Rng& rng) override;
    double primitive_reward_total() const override { return total_; }
    std::string provenance() const override { return "options:" + fingerprint(*set_); }
    std::uint64_t primitive_steps() const { return steps_; }

private:
    std::shared_ptr<const MdpModel> mdp_;
    std::shared_ptr<const OptionSet> set_;
    std::shared_ptr<const CompiledOptions> compiled_;
    double total_ = 0.0;
    std::uint64_t steps_ = 0;
};

// ---------------------------------------------------------------- registry

/// Everything needed to learn in, plan on and score a named environment.
struct EnvironmentBundle {
    std::string name;
    std::shared_ptr<const SmdpModel> model;       ///< exact model of what the learner faces
    std::shared_ptr<const MdpModel> base;         ///< primitive MDP, when options are involved
    std::shared_ptr<const OptionSet> options;
    std::shared_ptr<const CompiledOptions> compiled;
    double reference_gain = 0.0;                  ///< optimal gain of the primitive problem

    std::unique_ptr<Environment> simulator() const;
    AgentConfig agent_config(ConfidenceMode mode, double delta) const;
};

using ParamMap = std::map<std::string, std::string>;

std::vector<std::string> environment_names();
/// Builds a registered environment. Unknown names or parameters raise ValidationError.
EnvironmentBundle make_environment(const std::string& name, const ParamMap& params);
/// Bundle around a model read from a file.
EnvironmentBundle bundle_from_model(SmdpModel m, const std::string& name = "model");
/// Bundle for a base MDP plus an option set read from files.
EnvironmentBundle bundle_from_options(MdpModel mdp, OptionSet set, const std::string& name = "options");

} // namespace smdp
