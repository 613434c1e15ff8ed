#include <cmath>

#include "smdp/environments.hpp"

namespace smdp {

namespace {

bool general(const LowerBoundConfig& c) { return c.variant == LowerBoundVariant::General; }

/// Mass of the long holding time.
double holding_p(const LowerBoundConfig& c) {
    return general(c) ? (c.tau_bar - c.t_min) / (c.t_max - c.t_min) : c.p;
}

/// Mean holding time of an ordinary action.
double mean_holding(const LowerBoundConfig& c) {
    return general(c) ? c.tau_bar : c.t_min + c.p * (c.t_max - c.t_min);
}

/// Probability of the high reward for the general variant.
double reward_p(const LowerBoundConfig& c) { return c.tau_bar / c.t_max; }

ActionEntry main_action(const LowerBoundConfig& c, bool at_s1, bool good, StateId self, StateId other) {
    ActionEntry e;
    const double move = at_s1 ? c.delta : c.delta + (good ? c.epsilon : 0.0);
    DistributionSpec tau, r;
    if (general(c)) {
        tau = TwoPoint{c.t_min, c.t_max, holding_p(c)};
        if (at_s1) r = TwoPoint{0.0, 0.5 * c.r_max * c.t_max, reward_p(c) + (good ? c.eta : 0.0)};
        else r = Dirac{0.0};
    } else {
        const double ph = c.p + (at_s1 && good ? c.eta : 0.0);
        tau = TwoPoint{c.t_min, c.t_max, ph};
        if (at_s1) {
            e.reward_rate = c.r_max;
            r = TwoPoint{c.r_max * c.t_min, c.r_max * c.t_max, ph};
        } else {
            r = Dirac{0.0};
        }
    }
    if (move < 1.0) e.outcomes.push_back({self, 1.0 - move, r, tau});
    if (move > 0.0) e.outcomes.push_back({other, move, r, tau});
    return e;
}

} // namespace

void check_lower_bound_config(const LowerBoundConfig& c) {
    auto fail = [](const std::string& msg) { throw ValidationError("lower-bound config: " + msg); };
    if (!(c.t_min > 0.0 && c.t_max > c.t_min)) fail("need 0 < t_min < t_max");
    if (!(c.r_max > 0.0)) fail("r_max must be positive");
    if (c.copies < 1 || c.actions < 1) fail("need at least one copy and one action");
    if (c.best_copy >= c.copies) fail("best_copy out of range");
    if (c.a0_star >= c.actions || c.a1_star >= c.actions) fail("best action out of range");
    if (!(c.epsilon >= 0.0) || !(c.eta >= 0.0)) fail("epsilon and eta must be non-negative");
    if (general(c)) {
        if (!(c.tau_bar > c.t_min)) fail("tau_bar must exceed t_min");
        const double p = reward_p(c);
        if (!(p <= 1.0 / 3.0)) fail("tau_bar / t_max must be at most 1/3");
        if (!(c.delta > 0.0 && c.delta <= 1.0 / 3.0)) fail("delta must lie in (0, 1/3]");
        if (!(c.epsilon < c.delta)) fail("epsilon must be below delta");
        if (!(c.eta < p)) fail("eta must be below tau_bar / t_max");
    } else {
        if (!(c.p > 0.0 && c.p < 1.0 / 3.0)) fail("p must lie in (0, 1/3)");
        if (!(c.delta > 0.0 && c.delta < 0.5)) fail("delta must lie in (0, 1/2)");
        if (!(c.epsilon <= c.delta)) fail("epsilon must not exceed delta");
        if (!(c.eta <= 1.0 - 2.0 * c.p)) fail("eta must not exceed 1 - 2p");
    }
}

SmdpModel build_lower_bound_smdp(const LowerBoundConfig& c) {
    check_lower_bound_config(c);
    const bool tree = c.layout == LowerBoundLayout::Tree;
    const std::size_t states = tree ? 2 * c.copies : 2;
    std::vector<std::vector<ActionEntry>> actions(states);

    for (std::size_t copy = 0; copy < c.copies; ++copy) {
        const StateId s0 = tree ? 2 * copy : 0, s1 = s0 + 1;
        const bool best = copy == c.best_copy;
        for (std::size_t a = 0; a < c.actions; ++a) {
            ActionEntry e0 = main_action(c, false, best && a == c.a0_star, s0, s1);
            ActionEntry e1 = main_action(c, true, best && a == c.a1_star, s1, s0);
            e0.label = "c" + std::to_string(copy) + ":a" + std::to_string(a);
            e1.label = e0.label;
            actions[s0].push_back(std::move(e0));
            actions[s1].push_back(std::move(e1));
        }
    }
    if (tree) {
        // A'-ary tree over the s0 states in heap order, every move deterministic
        const std::size_t arity = c.actions;
        for (std::size_t copy = 0; copy < c.copies; ++copy) {
            auto move = [&](std::size_t to, const std::string& label) {
                ActionEntry e;
                e.label = label;
                e.outcomes.push_back({2 * to, 1.0, Dirac{0.0}, Dirac{c.t_min}});
                actions[2 * copy].push_back(std::move(e));
            };
            move(copy == 0 ? 0 : (copy - 1) / arity, "parent");
            for (std::size_t j = 0; j < arity; ++j) {
                std::size_t child = copy * arity + 1 + j;
                move(child < c.copies ? child : copy, "child" + std::to_string(j));
            }
        }
    }
    SmdpModel tmp(actions);
    ModelBounds b = derive_bounds(tmp);
    b.r_max = c.r_max;
    SmdpModel m(std::move(actions), b);
    m.set_tail(BoundedTail{c.t_min, c.t_max});
    require_valid(m);
    return m;
}

std::pair<StateId, StateId> lower_bound_best_states(const LowerBoundConfig& c) {
    if (c.layout == LowerBoundLayout::Tree) return {2 * c.best_copy, 2 * c.best_copy + 1};
    return {0, 1};
}

std::pair<std::size_t, std::size_t> lower_bound_best_actions(const LowerBoundConfig& c) {
    if (c.layout == LowerBoundLayout::Tree) return {c.a0_star, c.a1_star};
    const std::size_t base = c.best_copy * c.actions;
    return {base + c.a0_star, base + c.a1_star};
}

double lower_bound_optimal_gain(const LowerBoundConfig& c) {
    check_lower_bound_config(c);
    const double d = c.delta, e = c.epsilon;
    if (general(c))
        return 0.5 * c.r_max * (d + e) * (c.tau_bar + c.eta * c.t_max) / ((2.0 * d + e) * c.tau_bar);
    // stationary mass (d+e)/(2d+e) on s1, whose good action also holds longer
    const double span = c.t_max - c.t_min, tau = mean_holding(c);
    return c.r_max * (d + e) * (tau + c.eta * span) / ((2.0 * d + e) * tau + (d + e) * c.eta * span);
}

} // namespace smdp
