#pragma once

// Small models shared by the unit and acceptance tests.

#include <cmath>
#include <vector>

#include "smdp/model.hpp"
#include "smdp/rng.hpp"

namespace fixtures {

using namespace smdp;

/// Random communicating SMDP with S states, A actions and discrete reward and holding laws.
inline SmdpModel random_smdp(std::size_t S, std::size_t A, std::uint64_t seed) {
    Rng rng(seed);
    for (;;) {
        std::vector<std::vector<ActionEntry>> acts(S);
        for (StateId s = 0; s < S; ++s)
            for (std::size_t a = 0; a < A; ++a) {
                ActionEntry e;
                std::vector<double> w(S);
                double tot = 0.0;
                for (auto& x : w) {
                    x = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
                    tot += x;
                }
                if (tot == 0.0) {
                    w[rng.below(S)] = 1.0;
                    tot = 1.0;
                }
                for (StateId t = 0; t < S; ++t) {
                    if (w[t] == 0.0) continue;
                    Outcome o;
                    o.next = t;
                    o.prob = w[t] / tot;
                    double h1 = 1.0 + 3.0 * rng.uniform(), h2 = 1.0 + 3.0 * rng.uniform();
                    o.holding = DiscreteTable{{h1, h2}, {0.5, 0.5}};
                    double r = rng.uniform() * std::min(h1, h2);
                    o.reward = DiscreteTable{{0.0, 2.0 * r}, {0.5, 0.5}};
                    e.outcomes.push_back(o);
                }
                // masses must sum to one exactly enough for validation
                double sum = 0.0;
                for (auto& o : e.outcomes) sum += o.prob;
                e.outcomes.back().prob += 1.0 - sum;
                acts[s].push_back(std::move(e));
            }
        SmdpModel m(std::move(acts));
        if (is_communicating(m)) return m;
    }
}

/// Random stationary policy.
inline StationaryPolicy random_policy(const SmdpModel& m, Rng& rng) {
    StationaryPolicy pi;
    for (StateId s = 0; s < m.num_states(); ++s) pi.action.push_back(rng.below(m.num_actions(s)));
    return pi;
}

/// Three-state SMDP with two-point holding times in [1, 3] and bounded rewards.
inline SmdpModel three_state() {
    std::vector<std::vector<ActionEntry>> acts(3);
    auto out = [](StateId t, double p, double r_hi, double pr) {
        return Outcome{t, p, TwoPoint{0.0, r_hi, pr}, TwoPoint{1.0, 3.0, 0.5}};
    };
    acts[0].push_back({{out(0, 0.6, 1.0, 0.2), out(1, 0.4, 1.0, 0.2)}, std::nullopt, "stay"});
    acts[0].push_back({{out(1, 0.9, 1.0, 0.1), out(2, 0.1, 1.0, 0.1)}, std::nullopt, "go"});
    acts[1].push_back({{out(2, 0.7, 2.0, 0.5), out(0, 0.3, 2.0, 0.5)}, std::nullopt, "on"});
    acts[1].push_back({{out(1, 0.5, 1.0, 0.5), out(0, 0.5, 1.0, 0.5)}, std::nullopt, "back"});
    acts[2].push_back({{out(0, 1.0, 3.0, 0.8)}, std::nullopt, "home"});
    acts[2].push_back({{out(2, 0.8, 1.0, 0.3), out(1, 0.2, 1.0, 0.3)}, std::nullopt, "wait"});
    SmdpModel m(std::move(acts));
    ModelBounds b = m.bounds();
    b.r_max = 1.5;
    m.set_bounds(b);
    m.set_tail(BoundedTail{1.0, 3.0});
    return m;
}

} // namespace fixtures
