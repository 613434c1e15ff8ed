#pragma once

#include <cstddef>
#include <string>

#include "smdp/model.hpp"
#include "smdp/rng.hpp"

namespace smdp {

/// Something a learner can act in: it only sees states, rewards and holding times.
class Environment {
public:
    virtual ~Environment() = default;
    virtual std::size_t num_states() const = 0;
    virtual std::size_t num_actions(StateId s) const = 0;
    /// One decision step from s with action a.
    virtual Transition step(StateId s, std::size_t a, Rng& rng) = 0;
    /// Sum of the rewards of every primitive step taken so far; equals the
    /// decision-level sum for environments without temporal abstraction.
    virtual double primitive_reward_total() const = 0;
    /// Tag written into ledgers produced in this environment.
    virtual std::string provenance() const = 0;
};

} // namespace smdp
