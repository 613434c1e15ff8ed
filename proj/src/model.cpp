#include "smdp/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace smdp {

namespace {

bool le_tol(double a, double b) { return a <= b + 1e-12 * std::max(1.0, std::abs(b)); }

double min_support(const DistributionSpec& d) {
    if (std::holds_alternative<PhaseType>(d)) return 1.0;
    return std::visit([](const auto& x) -> double {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, PhaseType>) return 1.0;
        else return support_range(PrimitiveDist{x}).first;
    }, d);
}

} // namespace

SmdpModel::SmdpModel(std::vector<std::vector<ActionEntry>> actions, std::optional<ModelBounds> bounds)
    : actions_(std::move(actions)) {
    for (std::size_t s = 0; s < actions_.size(); ++s) {
        pair_offset_.push_back(pair_offset_.back() + actions_[s].size());
        max_actions_ = std::max(max_actions_, actions_[s].size());
    }
    r_bar_.resize(num_pairs());
    tau_bar_.resize(num_pairs());
    cum_.resize(num_pairs());
    for (std::size_t s = 0; s < actions_.size(); ++s) {
        for (std::size_t a = 0; a < actions_[s].size(); ++a) {
            const auto& e = actions_[s][a];
            double r = 0.0, t = 0.0, c = 0.0;
            auto& cum = cum_[pair_index(s, a)];
            for (std::size_t k = 0; k < e.outcomes.size(); ++k) {
                const Outcome& o = e.outcomes[k];
                double th = mean(o.holding);
                double rh = e.reward_rate ? *e.reward_rate * th : mean(o.reward);
                r += o.prob * rh;
                t += o.prob * th;
                c += o.prob;
                cum.push_back(c);
            }
            r_bar_[pair_index(s, a)] = r;
            tau_bar_[pair_index(s, a)] = t;
        }
    }
    bounds_ = bounds ? *bounds : derive_bounds(*this);
}

double SmdpModel::outcome_holding(StateId s, std::size_t a, std::size_t k) const {
    return mean(actions_[s][a].outcomes[k].holding);
}

double SmdpModel::outcome_reward(StateId s, std::size_t a, std::size_t k) const {
    const auto& e = actions_[s][a];
    return e.reward_rate ? *e.reward_rate * mean(e.outcomes[k].holding) : mean(e.outcomes[k].reward);
}

double SmdpModel::transition_probability(StateId s, std::size_t a, StateId next) const {
    double p = 0.0;
    for (const auto& o : actions_[s][a].outcomes)
        if (o.next == next) p += o.prob;
    return p;
}

ModelBounds derive_bounds(const SmdpModel& m) {
    ModelBounds b{0.0, INFINITY, 0.0};
    for (StateId s = 0; s < m.num_states(); ++s) {
        for (std::size_t a = 0; a < m.num_actions(s); ++a) {
            double t = m.expected_holding(s, a);
            b.tau_min = std::min(b.tau_min, t);
            b.tau_max = std::max(b.tau_max, t);
            if (t > 0.0) b.r_max = std::max(b.r_max, m.expected_reward(s, a) / t);
        }
    }
    if (!std::isfinite(b.tau_min)) b.tau_min = 1.0;
    if (b.r_max <= 0.0) b.r_max = 1.0;
    return b;
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i) os << "; ";
        os << violations[i];
    }
    return os.str();
}

bool is_communicating(const SmdpModel& m) {
    const std::size_t n = m.num_states();
    if (n == 0) return false;
    std::vector<std::vector<StateId>> fwd(n), bwd(n);
    for (StateId s = 0; s < n; ++s)
        for (const auto& e : m.actions()[s])
            for (const auto& o : e.outcomes)
                if (o.prob > 0.0 && o.next < n) {
                    fwd[s].push_back(o.next);
                    bwd[o.next].push_back(s);
                }
    auto reach_all = [n](const std::vector<std::vector<StateId>>& g) {
        std::vector<char> seen(n, 0);
        std::vector<StateId> stack{0};
        seen[0] = 1;
        std::size_t count = 1;
        while (!stack.empty()) {
            StateId s = stack.back();
            stack.pop_back();
            for (StateId t : g[s])
                if (!seen[t]) {
                    seen[t] = 1;
                    ++count;
                    stack.push_back(t);
                }
        }
        return count == n;
    };
    return reach_all(fwd) && reach_all(bwd);
}

ValidationReport validate(const SmdpModel& m) {
    ValidationReport rep;
    const auto& b = m.bounds();
    auto add = [&](StateId s, std::size_t a, const std::string& what) {
        std::ostringstream os;
        os << "(" << s << "," << a << "): " << what;
        rep.violations.push_back(os.str());
    };
    if (m.num_states() == 0) {
        rep.violations.push_back("model has no states");
        return rep;
    }
    if (!(b.tau_min > 0.0) || !le_tol(b.tau_min, b.tau_max)) rep.violations.push_back("inconsistent holding bounds");
    if (!(b.r_max > 0.0)) rep.violations.push_back("reward bound must be positive");

    bool structural = true;
    for (StateId s = 0; s < m.num_states(); ++s) {
        if (m.num_actions(s) == 0) {
            add(s, 0, "state has no actions");
            structural = false;
        }
        for (std::size_t a = 0; a < m.num_actions(s); ++a) {
            const auto& e = m.action(s, a);
            if (e.outcomes.empty()) {
                add(s, a, "no outcomes");
                structural = false;
                continue;
            }
            double total = 0.0;
            for (const auto& o : e.outcomes) {
                if (o.next >= m.num_states()) {
                    add(s, a, "next state out of range");
                    structural = false;
                }
                if (o.prob < 0.0) add(s, a, "negative probability");
                total += o.prob;
                for (const auto* d : {&o.reward, &o.holding}) {
                    std::string err = check_distribution(*d);
                    if (!err.empty()) add(s, a, err);
                }
                if (!(min_support(o.holding) > 0.0)) add(s, a, "holding time support must be positive");
            }
            if (std::abs(total - 1.0) > 1e-12) add(s, a, "transition probabilities do not sum to one");
            if (e.reward_rate && *e.reward_rate < 0.0) add(s, a, "negative reward rate");
            double t = m.expected_holding(s, a);
            if (!le_tol(b.tau_min, t) || !le_tol(t, b.tau_max)) add(s, a, "mean holding time outside bounds");
            if (t > 0.0 && !le_tol(m.expected_reward(s, a) / t, b.r_max)) add(s, a, "reward per unit time exceeds bound");
            if (m.expected_reward(s, a) < -1e-12) add(s, a, "negative mean reward");
        }
    }
    if (structural && !is_communicating(m)) rep.violations.push_back("model is not communicating");
    return rep;
}

void require_valid(const SmdpModel& m) {
    auto rep = validate(m);
    if (!rep.ok()) throw ValidationError("invalid model: " + rep.summary());
}

Transition sample_transition(const SmdpModel& m, StateId s, std::size_t a, Rng& rng) {
    if (s >= m.num_states() || a >= m.num_actions(s)) throw std::out_of_range("state-action pair out of range");
    const auto& e = m.action(s, a);
    std::size_t k = 0;
    if (e.outcomes.size() > 1) {
        const auto& cum = m.cumulative(s, a);
        double u = rng.uniform() * cum.back();
        k = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
        if (k >= e.outcomes.size()) k = e.outcomes.size() - 1;
        while (e.outcomes[k].prob <= 0.0 && k > 0) --k;
    }
    const Outcome& o = e.outcomes[k];
    Transition t;
    t.next = o.next;
    const auto* ph = std::get_if<PhaseType>(&o.holding);
    const auto* pr = std::get_if<PhaseType>(&o.reward);
    if (ph && pr && ph->chain == pr->chain && ph->end == pr->end && !e.reward_rate) {
        auto d = ph->chain->sample_conditional(ph->end, rng);
        t.holding = d.holding;
        t.reward = d.reward;
        return t;
    }
    t.holding = sample(o.holding, rng);
    t.reward = e.reward_rate ? *e.reward_rate * t.holding : sample(o.reward, rng);
    return t;
}

MdpModel::MdpModel(SmdpModel m) : m_(std::move(m)) {
    for (StateId s = 0; s < m_.num_states(); ++s)
        for (const auto& e : m_.actions()[s])
            for (const auto& o : e.outcomes) {
                const auto* d = std::get_if<Dirac>(&o.holding);
                if (!d || d->value != 1.0) throw ValidationError("MDP holding times must all be the constant 1");
            }
}

void check_policy(const SmdpModel& m, const StationaryPolicy& pi) {
    if (pi.action.size() != m.num_states()) throw ValidationError("policy length does not match state count");
    for (StateId s = 0; s < m.num_states(); ++s)
        if (pi.action[s] >= m.num_actions(s)) throw ValidationError("policy selects an unavailable action");
}

} // namespace smdp
