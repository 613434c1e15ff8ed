#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "smdp/rng.hpp"

namespace smdp {

using StateId = std::size_t;

struct Dirac {
    double value = 0.0;
};

/// Takes `high` with probability `p_high`, `low` otherwise.
struct TwoPoint {
    double low = 0.0;
    double high = 0.0;
    double p_high = 0.0;
};

struct DiscreteTable {
    std::vector<double> values;
    std::vector<double> masses;
};

/// Distributions allowed on a single primitive transition.
using PrimitiveDist = std::variant<Dirac, TwoPoint, DiscreteTable>;

double mean(const PrimitiveDist& d);
double sample(const PrimitiveDist& d, Rng& rng);
/// Smallest and largest value in the support.
std::pair<double, double> support_range(const PrimitiveDist& d);

/**
 * Absorbing Markov chain describing one option started at one state.
 *
 * Transient state 0 is the start. Every arc goes from a transient state either
 * to another transient state or to one of the absorbing end copies; an arc
 * carries the reward distribution of the primitive step it stands for. The
 * holding time is the number of arcs traversed.
 */
class PhaseTypeChain {
public:
    struct Arc {
        int from = 0;
        int to_transient = -1; ///< index of a transient state, or -1
        int to_end = -1;       ///< index of an end state, or -1
        double prob = 0.0;
        PrimitiveDist reward = Dirac{0.0};
    };

    PhaseTypeChain(std::vector<StateId> transient_states, std::vector<StateId> end_states, std::vector<Arc> arcs);

    const std::vector<StateId>& transient_states() const { return transient_; }
    const std::vector<StateId>& end_states() const { return ends_; }
    const std::vector<Arc>& arcs() const { return arcs_; }
    std::size_t num_transient() const { return transient_.size(); }
    std::size_t num_ends() const { return ends_.size(); }

    /// Probability of absorbing into end e from the start.
    double end_probability(std::size_t e) const { return end_prob_[e]; }
    /// E[tau | end e] and E[r | end e]; zero when the end has no mass.
    double conditional_holding(std::size_t e) const { return cond_tau_[e]; }
    double conditional_reward(std::size_t e) const { return cond_r_[e]; }
    /// Absorption probability into end e from transient state i.
    double absorption(std::size_t e, std::size_t i) const { return h_[e][i]; }

    double spectral_radius() const { return spectral_radius_; }
    /// True when the transient part has no cycles, i.e. Q is nilpotent.
    bool nilpotent() const { return nilpotent_; }
    /// Longest possible holding time when nilpotent.
    std::size_t max_holding() const { return max_holding_; }

    /// Row-major dense transient matrix Q and transient-to-end matrix R.
    const std::vector<double>& q_dense() const { return q_; }
    const std::vector<double>& r_dense() const { return r_; }

    struct Draw {
        double holding = 0.0;
        double reward = 0.0;
    };
    /// Joint draw of (holding, reward) conditioned on absorbing into end e.
    Draw sample_conditional(std::size_t e, Rng& rng) const;

private:
    std::vector<StateId> transient_;
    std::vector<StateId> ends_;
    std::vector<Arc> arcs_;
    std::vector<std::vector<std::size_t>> out_arcs_;
    std::vector<double> q_, r_;
    std::vector<std::vector<double>> h_;
    std::vector<double> end_prob_, cond_tau_, cond_r_;
    double spectral_radius_ = 0.0;
    bool nilpotent_ = false;
    std::size_t max_holding_ = 0;
};

enum class PhaseQuantity { Holding, Reward };

/// One component of an option's outcome: the holding time or the reward,
/// conditioned on terminating in end `end` of `chain`.
struct PhaseType {
    std::shared_ptr<const PhaseTypeChain> chain;
    std::size_t end = 0;
    PhaseQuantity quantity = PhaseQuantity::Holding;
};

using DistributionSpec = std::variant<Dirac, TwoPoint, DiscreteTable, PhaseType>;

double mean(const DistributionSpec& d);
double sample(const DistributionSpec& d, Rng& rng);
bool is_phase_type(const DistributionSpec& d);
/// Short name used in diagnostics and the model file format.
std::string kind_name(const DistributionSpec& d);

/// Checks masses are nonnegative and sum to one; returns an empty string when fine.
std::string check_distribution(const DistributionSpec& d);

} // namespace smdp
