#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "smdp/planning.hpp"

namespace smdp {

namespace {

double inner_max(const SparseRow& p_hat, double beta, const std::vector<double>& u, StateId s_star, SparseRow& out,
                 std::vector<std::size_t>& order) {
    out.idx.clear();
    out.p.clear();
    bool placed = false;
    std::size_t pos = 0;
    for (std::size_t k = 0; k < p_hat.idx.size(); ++k) {
        if (!placed && p_hat.idx[k] >= s_star) {
            pos = out.idx.size();
            placed = true;
            if (p_hat.idx[k] != s_star) {
                out.idx.push_back(s_star);
                out.p.push_back(0.0);
            }
        }
        out.idx.push_back(p_hat.idx[k]);
        out.p.push_back(p_hat.p[k]);
    }
    if (!placed) {
        pos = out.idx.size();
        out.idx.push_back(s_star);
        out.p.push_back(0.0);
    }
    out.p[pos] = std::min(1.0, out.p[pos] + beta / 2.0);
    double total = 0.0;
    for (double x : out.p) total += x;
    if (total > 1.0) {
        order.resize(out.idx.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            double ua = u[out.idx[a]], ub = u[out.idx[b]];
            if (ua != ub) return ua < ub;
            return out.idx[a] < out.idx[b];
        });
        for (std::size_t l : order) {
            if (total <= 1.0) break;
            if (l == pos) continue;
            double take = std::min(out.p[l], total - 1.0);
            out.p[l] -= take;
            total -= take;
        }
    }
    double v = 0.0;
    for (std::size_t k = 0; k < out.idx.size(); ++k) v += out.p[k] * u[out.idx[k]];
    return v;
}

} // namespace

double optimistic_reward(const PlausiblePair& pp, const ModelBounds& b) {
    const double cap = b.r_max * b.tau_max;
    if (!pp.sampled) return cap;
    return std::min(pp.r_hat + pp.beta_r, cap);
}

double optimistic_holding(const PlausiblePair& pp, const ModelBounds& b, double r_tilde, double bracket) {
    const double lower = std::max(b.tau_min, r_tilde / b.r_max);
    double t;
    if (bracket > 0.0) t = pp.sampled ? pp.tau_hat - pp.beta_tau : -INFINITY;
    else if (bracket < 0.0) t = pp.sampled ? pp.tau_hat + pp.beta_tau : INFINITY;
    else t = pp.sampled ? pp.tau_hat : lower;
    return std::min(b.tau_max, std::max(lower, t));
}

double optimistic_transition(const SparseRow& p_hat, double beta, const std::vector<double>& u, StateId s_star,
                             SparseRow& out) {
    std::vector<std::size_t> order;
    return inner_max(p_hat, beta, u, s_star, out, order);
}

std::string check_feasible(const BoundedParameterSmdp& bp) {
    const auto& b = bp.bounds;
    std::ostringstream os;
    if (!(b.tau_min > 0.0) || b.tau_min > b.tau_max) return "inconsistent holding bounds";
    if (!(b.r_max > 0.0)) return "reward bound must be positive";
    for (StateId s = 0; s < bp.num_states(); ++s) {
        if (bp.num_actions(s) == 0) return "state without actions";
        for (std::size_t a = 0; a < bp.num_actions(s); ++a) {
            const auto& pp = bp.pair(s, a);
            if (!pp.sampled) continue;
            if (pp.beta_r < 0.0 || pp.beta_tau < 0.0 || pp.beta_p < 0.0) return "negative radius";
            // slack absorbs rounding when an estimate sits exactly on a bound
            const double slack = 1e-12 * std::max(1.0, b.r_max * b.tau_max);
            if (std::max(b.tau_min, pp.tau_hat - pp.beta_tau) > std::min(b.tau_max, pp.tau_hat + pp.beta_tau) + slack) {
                os << "empty holding interval at (" << s << "," << a << ")";
                return os.str();
            }
            if (pp.r_hat - pp.beta_r > b.r_max * b.tau_max + slack) {
                os << "empty reward interval at (" << s << "," << a << ")";
                return os.str();
            }
            double total = 0.0;
            for (double x : pp.p_hat.p) total += x;
            if (std::abs(total - 1.0) > 1e-9) {
                os << "transition estimate does not sum to one at (" << s << "," << a << ")";
                return os.str();
            }
        }
    }
    return {};
}

bool contains(const BoundedParameterSmdp& bp, const SmdpModel& truth) {
    if (bp.num_states() != truth.num_states()) return false;
    for (StateId s = 0; s < truth.num_states(); ++s) {
        if (bp.num_actions(s) != truth.num_actions(s)) return false;
        for (std::size_t a = 0; a < truth.num_actions(s); ++a) {
            const auto& pp = bp.pair(s, a);
            if (!pp.sampled) continue;
            if (std::abs(pp.r_hat - truth.expected_reward(s, a)) > pp.beta_r) return false;
            if (std::abs(pp.tau_hat - truth.expected_holding(s, a)) > pp.beta_tau) return false;
            std::vector<double> p(truth.num_states(), 0.0);
            for (const auto& o : truth.action(s, a).outcomes) p[o.next] += o.prob;
            for (std::size_t k = 0; k < pp.p_hat.idx.size(); ++k) p[pp.p_hat.idx[k]] -= pp.p_hat.p[k];
            double l1 = 0.0;
            for (double x : p) l1 += std::abs(x);
            if (l1 > pp.beta_p) return false;
        }
    }
    return true;
}

EviSolution extended_value_iteration(const BoundedParameterSmdp& bp, double tau, double epsilon,
                                     const EviOptions& opt) {
    const auto& b = bp.bounds;
    if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
    if (!(tau > 0.0 && tau < b.tau_min)) throw ValidationError("uniformization constant must lie in (0, tau_min)");
    if (!(b.tau_min > 0.0) || b.tau_min > b.tau_max) throw ValidationError("inconsistent holding bounds");
    const std::size_t n = bp.num_states();

    std::vector<double> r_tilde(bp.pairs.size());
    for (std::size_t k = 0; k < bp.pairs.size(); ++k) r_tilde[k] = optimistic_reward(bp.pairs[k], b);

    std::vector<double> u = opt.initial_u.empty() ? std::vector<double>(n, 0.0) : opt.initial_u;
    if (u.size() != n) throw ValidationError("initial values have the wrong length");
    std::vector<double> next(n);
    SparseRow scratch;
    std::vector<std::size_t> order;
    static const SparseRow empty_row;

    EviSolution sol;
    sol.policy.action.assign(n, 0);
    for (std::size_t it = 1; it <= opt.max_sweeps; ++it) {
        StateId s_star = static_cast<StateId>(std::max_element(u.begin(), u.end()) - u.begin());
        double inc_max = -INFINITY, inc_min = INFINITY;
        for (StateId s = 0; s < n; ++s) {
            double best = -INFINITY;
            std::size_t arg = 0;
            for (std::size_t a = 0; a < bp.num_actions(s); ++a) {
                const std::size_t k = bp.pair_offset[s] + a;
                const PlausiblePair& pp = bp.pairs[k];
                double pu = pp.sampled ? inner_max(pp.p_hat, pp.beta_p, u, s_star, scratch, order)
                                       : inner_max(empty_row, INFINITY, u, s_star, scratch, order);
                const double rt = r_tilde[k];
                const double diff = pu - u[s];
                const double tt = optimistic_holding(pp, b, rt, rt + tau * diff);
                const double v = rt / tt + tau / tt * diff + u[s];
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
        if (!std::isfinite(inc_max) || !std::isfinite(inc_min)) throw RunAbort("extended value iteration diverged");
        if (inc_max - inc_min < epsilon) {
            // record the optimistic parameters of the greedy actions against the iterate they were chosen from
            sol.r_tilde.resize(n);
            sol.tau_tilde.resize(n);
            sol.p_tilde.resize(n);
            for (StateId s = 0; s < n; ++s) {
                const std::size_t k = bp.pair_offset[s] + sol.policy.action[s];
                const PlausiblePair& pp = bp.pairs[k];
                double pu = pp.sampled ? inner_max(pp.p_hat, pp.beta_p, u, s_star, sol.p_tilde[s], order)
                                       : inner_max(empty_row, INFINITY, u, s_star, sol.p_tilde[s], order);
                sol.r_tilde[s] = r_tilde[k];
                sol.tau_tilde[s] = optimistic_holding(pp, b, r_tilde[k], r_tilde[k] + tau * (pu - u[s]));
            }
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
    os << "extended value iteration did not reach span " << epsilon << " within " << opt.max_sweeps << " sweeps";
    throw RunAbort(os.str());
}

} // namespace smdp
