#include <algorithm>
#include <cmath>

#include "smdp/learning.hpp"

namespace smdp {

namespace {

double sub_exp_radius(double sigma, double b, double n, double count, double log_term, double log_switch) {
    const double threshold = 2.0 * b * b / (sigma * sigma) * log_switch;
    if (count >= threshold) return sigma * std::sqrt(14.0 * log_term / n);
    return 14.0 * b * log_term / n;
}

double scaled(double beta, double scale) {
    if (scale == 0.0) return 0.0;
    if (std::isinf(scale)) return INFINITY;
    return beta * scale;
}

} // namespace

Radii confidence_radii(const ConfidencePolicy& policy, const ModelBounds& bounds, std::size_t num_states,
                       std::size_t num_actions, double i_k, double delta, double count) {
    const double S = static_cast<double>(num_states);
    const double A = static_cast<double>(num_actions);
    const double n = std::max(1.0, count);
    const double log_term = std::log(2.0 * S * A * i_k / delta);
    Radii r;
    r.beta_p = std::sqrt(14.0 * S * std::log(2.0 * A * i_k / delta) / n);
    if (policy.mode == ConfidenceMode::SubExponential) {
        // log(240 S A i^7 / delta) without forming i^7
        const double log_switch = std::log(240.0 * S * A / delta) + 7.0 * std::log(i_k);
        r.beta_r = sub_exp_radius(policy.sigma_r, policy.b_r, n, count, log_term, log_switch);
        r.beta_tau = sub_exp_radius(policy.sigma_tau, policy.b_tau, n, count, log_term, log_switch);
    } else {
        const double root = std::sqrt(14.0 * log_term / n);
        r.beta_r = bounds.r_max * policy.t_max * root;
        r.beta_tau = (policy.t_max - policy.t_min) * root;
    }
    r.beta_p = scaled(r.beta_p, policy.radius_scale);
    r.beta_r = scaled(r.beta_r, policy.radius_scale);
    r.beta_tau = scaled(r.beta_tau, policy.radius_scale);
    return r;
}

Counters::Counters(const std::vector<std::size_t>& actions_per_state) {
    for (std::size_t a : actions_per_state) {
        offset_.push_back(offset_.back() + a);
        max_actions_ = std::max(max_actions_, a);
    }
    const std::size_t k = offset_.back();
    count_.assign(k, 0);
    prior_.assign(k, 0);
    reward_.assign(k, 0.0);
    holding_.assign(k, 0.0);
    next_.assign(k, {});
}

void Counters::record(StateId s, std::size_t a, StateId next, double reward, double holding) {
    const std::size_t k = pair(s, a);
    ++count_[k];
    reward_[k] += reward;
    holding_[k] += holding;
    auto& row = next_[k];
    auto it = std::lower_bound(row.begin(), row.end(), next,
                               [](const std::pair<StateId, std::uint64_t>& e, StateId x) { return e.first < x; });
    if (it != row.end() && it->first == next) ++it->second;
    else row.insert(it, {next, 1});
    ++steps_;
}

void Counters::start_episode() { prior_ = count_; }

AgentConfig default_agent_config(const SmdpModel& m, ConfidenceMode mode, double delta) {
    AgentConfig c;
    c.bounds = m.bounds();
    c.delta = delta;
    c.confidence.mode = mode;
    if (auto t = std::get_if<SubExpTail>(&m.tail())) {
        c.confidence.sigma_r = t->sigma_r;
        c.confidence.b_r = t->b_r;
        c.confidence.sigma_tau = t->sigma_tau;
        c.confidence.b_tau = t->b_tau;
    }
    if (auto t = std::get_if<BoundedTail>(&m.tail())) {
        c.confidence.t_min = t->t_min;
        c.confidence.t_max = t->t_max;
    } else {
        c.confidence.t_min = m.bounds().tau_min;
        c.confidence.t_max = m.bounds().tau_max;
    }
    return c;
}

} // namespace smdp
