#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "smdp/model.hpp"

namespace smdp {

inline constexpr std::size_t kNoAction = std::numeric_limits<std::size_t>::max();

/// Temporally extended action on a base MDP.
struct OptionSpec {
    std::vector<StateId> initiation;  ///< states where the option may start
    std::vector<double> termination;  ///< beta(s) for every base state
    std::vector<std::size_t> policy;  ///< primitive action per base state, kNoAction if undefined
    std::string label;
};

struct OptionSet {
    std::size_t num_base_states = 0;
    std::vector<OptionSpec> options;
};

/// Stable hash of an option set, used to tag ledgers produced with it.
std::string fingerprint(const OptionSet& set);

enum class HoldingClass { BoundedHolding, SubExponentialUnbounded };

struct PhaseTypeAnalysis {
    std::size_t option = 0;
    StateId start = 0;
    HoldingClass holding_class = HoldingClass::BoundedHolding;
    double spectral_radius = 0.0;
    std::vector<StateId> ends;              ///< base states the option can stop in
    std::vector<std::vector<double>> pmf;   ///< pmf[k-1][e] = P(tau = k, end = ends[e])
    double tail_mass = 0.0;                 ///< mass beyond the tabulated horizon
    std::shared_ptr<const PhaseTypeChain> chain;
};

/// Result of turning an MDP plus options into an SMDP.
struct CompiledOptions {
    SmdpModel model;
    std::vector<StateId> smdp_to_base;
    std::vector<std::size_t> base_to_smdp;                 ///< kNoAction for base states outside the SMDP
    std::vector<std::vector<std::size_t>> action_option;   ///< option index of each SMDP action
};

/// Absorbing chain of option `o` started in base state `start`.
std::shared_ptr<const PhaseTypeChain> build_option_chain(const MdpModel& mdp, const OptionSet& set, std::size_t o,
                                                         StateId start);

/// Holding-time law of one option from one start: class, pmf table and tail.
PhaseTypeAnalysis analyze_holding(const MdpModel& mdp, const OptionSet& set, std::size_t o, StateId start,
                                  double tail_tolerance = 1e-12);

/// Builds the SMDP over initiation states whose actions are the options.
CompiledOptions compile(const MdpModel& mdp, const OptionSet& set);

struct OptionRun {
    StateId end = 0;
    double holding = 0.0;
    double reward = 0.0;
};

/// Runs option `o` from `start` on the base MDP until it terminates.
OptionRun execute_option(const MdpModel& mdp, const OptionSpec& option, StateId start, Rng& rng,
                         std::size_t max_steps = 100000000);

/// Executes an SMDP policy over options one primitive step at a time.
class FlatController {
public:
    FlatController(const MdpModel& mdp, const OptionSet& set, const CompiledOptions& compiled, StationaryPolicy policy);

    /// Primitive action for base state s; starts a new option when none is running.
    std::size_t act(StateId s);
    /// Reports the primitive transition just taken; may terminate the option.
    void observe(StateId next, double reward, Rng& rng);

    bool in_option() const { return active_ != kNoAction; }
    std::size_t current_option() const { return active_; }
    std::size_t decisions() const { return decisions_; }
    std::size_t time() const { return time_; }
    double reward() const { return reward_; }

private:
    const MdpModel* mdp_;
    const OptionSet* set_;
    const CompiledOptions* compiled_;
    StationaryPolicy policy_;
    std::size_t active_ = kNoAction;
    std::size_t decisions_ = 0;
    std::size_t time_ = 0;
    double reward_ = 0.0;
};

/// Convenience wrapper matching the compile step.
FlatController lift_policy(const MdpModel& mdp, const OptionSet& set, const CompiledOptions& compiled,
                           const StationaryPolicy& smdp_policy);

/// Draws whether an option with termination probability beta stops; no draw when beta is 0 or 1.
bool draw_termination(double beta, Rng& rng);

} // namespace smdp
