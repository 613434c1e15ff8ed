#include "smdp/planning.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace smdp {

EviSolution value_iteration(const UniformizedMdp& meq, double epsilon, const EviOptions& opt) {
    if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
    const std::size_t n = meq.num_states();
    std::vector<double> u = opt.initial_u.empty() ? std::vector<double>(n, 0.0) : opt.initial_u;
    if (u.size() != n) throw ValidationError("initial values have the wrong length");
    std::vector<double> next(n);
    EviSolution sol;
    sol.policy.action.assign(n, 0);
    for (std::size_t it = 1; it <= opt.max_sweeps; ++it) {
        double inc_max = -INFINITY, inc_min = INFINITY;
        for (StateId s = 0; s < n; ++s) {
            double best = -INFINITY;
            std::size_t arg = 0;
            for (std::size_t a = 0; a < meq.num_actions(s); ++a) {
                const auto& row = meq.row(s, a);
                double pu = 0.0;
                for (std::size_t k = 0; k < row.idx.size(); ++k) pu += row.p[k] * u[row.idx[k]];
                double v = meq.reward(s, a) + pu;
                if (v > best) {
                    best = v;
                    arg = a;
                }
            }
            next[s] = best;
            sol.policy.action[s] = arg;
            double inc = best - u[s];
            inc_max = std::max(inc_max, inc);
            inc_min = std::min(inc_min, inc);
        }
        double lo = *std::min_element(next.begin(), next.end());
        if (opt.record_spans) sol.span_history.push_back(*std::max_element(next.begin(), next.end()) - lo);
        for (double& x : next) x -= lo;
        u.swap(next);
        if (inc_max - inc_min < epsilon) {
            sol.gain = 0.5 * (inc_max + inc_min);
            sol.increment_span = inc_max - inc_min;
            sol.iterations = it;
            sol.bias = u;
            return sol;
        }
    }
    std::ostringstream os;
    os << "value iteration did not reach span " << epsilon << " within " << opt.max_sweeps << " sweeps";
    throw RunAbort(os.str());
}

} // namespace smdp
