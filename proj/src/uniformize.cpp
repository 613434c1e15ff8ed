#include "smdp/planning.hpp"

#include <map>

namespace smdp {

UniformizedMdp::UniformizedMdp(const SmdpModel& base, double tau) : base_(&base), tau_(tau) {
    const double tmin = base.bounds().tau_min;
    if (!(tau > 0.0) || !(tau < tmin)) throw ValidationError("uniformization constant must lie in (0, tau_min)");
    r_.resize(base.num_pairs());
    rows_.resize(base.num_pairs());
    for (StateId s = 0; s < base.num_states(); ++s) {
        for (std::size_t a = 0; a < base.num_actions(s); ++a) {
            double tb = base.expected_holding(s, a);
            if (tb < tau) throw ValidationError("mean holding time below the uniformization constant");
            std::size_t k = base.pair_index(s, a);
            r_[k] = base.expected_reward(s, a) / tb;
            std::map<StateId, double> p;
            for (const auto& o : base.action(s, a).outcomes) p[o.next] += o.prob;
            double ratio = tau / tb;
            p[s] += 0.0;
            for (auto& [j, v] : p) {
                double delta = j == s ? 1.0 : 0.0;
                v = ratio * (v - delta) + delta;
            }
            for (const auto& [j, v] : p) {
                if (v == 0.0) continue;
                rows_[k].idx.push_back(j);
                rows_[k].p.push_back(v);
            }
        }
    }
}

SmdpModel UniformizedMdp::as_model() const {
    std::vector<std::vector<ActionEntry>> actions(num_states());
    for (StateId s = 0; s < num_states(); ++s) {
        for (std::size_t a = 0; a < num_actions(s); ++a) {
            ActionEntry e;
            const auto& row = this->row(s, a);
            for (std::size_t k = 0; k < row.idx.size(); ++k)
                e.outcomes.push_back({row.idx[k], row.p[k], Dirac{reward(s, a)}, Dirac{1.0}});
            actions[s].push_back(std::move(e));
        }
    }
    ModelBounds b{base_->bounds().r_max, 1.0, 1.0};
    return SmdpModel(std::move(actions), b);
}

double default_tau(const SmdpModel& m) { return 0.9 * m.bounds().tau_min; }

UniformizedMdp uniformize(const SmdpModel& m, double tau) { return UniformizedMdp(m, tau); }

} // namespace smdp
