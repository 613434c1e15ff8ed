#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "smdp/model.hpp"

namespace smdp {

/// Sparse probability row; indices ascending.
struct SparseRow {
    std::vector<StateId> idx;
    std::vector<double> p;
};

/// Discrete-time MDP with the same average-reward behaviour as an SMDP.
/// Keeps a pointer to the base model, which must outlive it.
class UniformizedMdp {
public:
    UniformizedMdp(const SmdpModel& base, double tau);

    const SmdpModel& base() const { return *base_; }
    double tau() const { return tau_; }
    std::size_t num_states() const { return base_->num_states(); }
    std::size_t num_actions(StateId s) const { return base_->num_actions(s); }
    double reward(StateId s, std::size_t a) const { return r_[base_->pair_index(s, a)]; }
    const SparseRow& row(StateId s, std::size_t a) const { return rows_[base_->pair_index(s, a)]; }

    /// Same process written as an SMDP with unit holding times.
    SmdpModel as_model() const;

private:
    const SmdpModel* base_;
    double tau_;
    std::vector<double> r_;
    std::vector<SparseRow> rows_;
};

/// Default uniformization constant: 0.9 of the smallest mean holding time.
double default_tau(const SmdpModel& m);
UniformizedMdp uniformize(const SmdpModel& m, double tau);

struct EviOptions {
    std::size_t max_sweeps = 10000000;
    bool record_spans = false;
    /// Starting values; zero when empty.
    std::vector<double> initial_u;
};

struct EviSolution {
    double gain = 0.0;              ///< midpoint of the last increment range
    std::vector<double> bias;       ///< last iterate, shifted so its minimum is 0
    StationaryPolicy policy;        ///< greedy w.r.t. the second to last iterate
    std::size_t iterations = 0;
    double increment_span = 0.0;    ///< span of the last increment
    std::vector<double> span_history; ///< span of every iterate, when recorded
    /// Optimistic parameters chosen for the greedy action of each state.
    std::vector<double> r_tilde, tau_tilde;
    std::vector<SparseRow> p_tilde;
};

/// Relative value iteration on a uniformized MDP; stops when the span of the increment drops below epsilon.
EviSolution value_iteration(const UniformizedMdp& meq, double epsilon, const EviOptions& opt = {});

/// Empirical estimates and radii for one state-action pair.
struct PlausiblePair {
    bool sampled = false; ///< false when no sample exists; the pair is then unconstrained
    double r_hat = 0.0, tau_hat = 0.0;
    SparseRow p_hat;
    double beta_r = 0.0, beta_tau = 0.0, beta_p = 0.0;
};

/// Set of SMDPs compatible with the estimates, with the known bounds.
struct BoundedParameterSmdp {
    std::vector<std::size_t> pair_offset{0};
    std::vector<PlausiblePair> pairs;
    ModelBounds bounds;

    std::size_t num_states() const { return pair_offset.size() - 1; }
    std::size_t num_actions(StateId s) const { return pair_offset[s + 1] - pair_offset[s]; }
    const PlausiblePair& pair(StateId s, std::size_t a) const { return pairs[pair_offset[s] + a]; }
};

/// Empty when every pair has a nonempty feasible set, else a description.
std::string check_feasible(const BoundedParameterSmdp& bp);
/// True when the model's means lie inside every confidence interval.
bool contains(const BoundedParameterSmdp& bp, const SmdpModel& truth);

/// Optimistic reward: estimate plus radius, capped at r_max * tau_max.
double optimistic_reward(const PlausiblePair& pp, const ModelBounds& b);

/// Maximizes p.u over the L1 ball of radius beta around p_hat intersected with the simplex.
/// s_star is the argmax of u. Writes the maximizer to `out` and returns p.u.
double optimistic_transition(const SparseRow& p_hat, double beta, const std::vector<double>& u, StateId s_star,
                             SparseRow& out);

/// Holding time chosen by the sign rule given the bracket r + tau (p.u - u(s)).
double optimistic_holding(const PlausiblePair& pp, const ModelBounds& b, double r_tilde, double bracket);

/// Extended value iteration over a bounded-parameter SMDP.
EviSolution extended_value_iteration(const BoundedParameterSmdp& bp, double tau, double epsilon,
                                     const EviOptions& opt = {});

/// Long-run reward per unit time of a policy, per start state, from its recurrent classes.
std::vector<double> policy_gain(const SmdpModel& m, const StationaryPolicy& pi);
/// Gain of a policy on a uniformized MDP from the limit of the powered transition matrix.
std::vector<double> policy_gain_eq(const UniformizedMdp& meq, const StationaryPolicy& pi);

struct GainResult {
    double gain = 0.0;
    StationaryPolicy policy;
    std::size_t policies_checked = 0;
};

/// Exhaustive search over deterministic stationary policies; throws when there are more than `budget`.
GainResult gain_oracle(const SmdpModel& m, std::size_t budget = 1000000);

struct DiameterResult {
    double diameter = 0.0;
    StateId from = 0, to = 0;
};

/// Largest over state pairs of the minimal expected time to travel between them.
DiameterResult diameter(const SmdpModel& m);
/// Minimal expected hitting times of `target` from every state.
std::vector<double> hitting_times(const SmdpModel& m, StateId target);

struct EquivalentDiameterCheck {
    double d_smdp = 0.0;
    double d_equivalent = 0.0;
    double tau = 0.0;
    double residual = 0.0; ///< |d_smdp - tau * d_equivalent|
};

EquivalentDiameterCheck equivalent_diameter_check(const SmdpModel& m, double tau);

} // namespace smdp
