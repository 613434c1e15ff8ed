#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "smdp/planning.hpp"

namespace smdp {

namespace {

double q_value(const SmdpModel& m, const std::vector<double>& h, StateId s, std::size_t a, StateId target) {
    double v = m.expected_holding(s, a);
    for (const auto& o : m.action(s, a).outcomes)
        if (o.next != target) v += o.prob * h[o.next];
    return v;
}

bool reaches(const SmdpModel& m, StateId target) {
    const std::size_t n = m.num_states();
    std::vector<std::vector<StateId>> back(n);
    for (StateId s = 0; s < n; ++s)
        for (const auto& e : m.actions()[s])
            for (const auto& o : e.outcomes)
                if (o.prob > 0.0) back[o.next].push_back(s);
    std::vector<char> seen(n, 0);
    std::vector<StateId> stack{target};
    seen[target] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
        StateId x = stack.back();
        stack.pop_back();
        for (StateId y : back[x])
            if (!seen[y]) {
                seen[y] = 1;
                ++count;
                stack.push_back(y);
            }
    }
    return count == n;
}

/// Exact cost-to-go of a fixed policy; false if the system is singular.
bool evaluate(const SmdpModel& m, const std::vector<std::size_t>& pol, StateId target, std::vector<double>& h) {
    const std::size_t n = m.num_states();
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd b(n);
    for (StateId s = 0; s < n; ++s) {
        if (s == target) {
            trip.emplace_back(s, s, 1.0);
            b(s) = 0.0;
            continue;
        }
        trip.emplace_back(s, s, 1.0);
        for (const auto& o : m.action(s, pol[s]).outcomes)
            if (o.next != target && o.prob > 0.0) trip.emplace_back(s, o.next, -o.prob);
        b(s) = m.expected_holding(s, pol[s]);
    }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) return false;
    Eigen::VectorXd x = lu.solve(b);
    if (lu.info() != Eigen::Success) return false;
    for (StateId s = 0; s < n; ++s) {
        if (!std::isfinite(x(s)) || x(s) < -1e-9) return false;
        h[s] = x(s);
    }
    return true;
}

} // namespace

std::vector<double> hitting_times(const SmdpModel& m, StateId target) {
    const std::size_t n = m.num_states();
    if (target >= n) throw ValidationError("target out of range");
    if (!reaches(m, target)) throw ValidationError("model is not communicating: target unreachable");
    std::vector<double> h(n, 0.0);
    std::vector<std::size_t> pol(n, 0);
    for (std::size_t sweep = 0; sweep < 10000000; ++sweep) {
        double change = 0.0, top = 1.0;
        for (StateId s = 0; s < n; ++s) {
            if (s == target) continue;
            double best = INFINITY;
            for (std::size_t a = 0; a < m.num_actions(s); ++a) {
                double v = q_value(m, h, s, a, target);
                if (v < best) {
                    best = v;
                    pol[s] = a;
                }
            }
            change = std::max(change, std::abs(best - h[s]));
            top = std::max(top, best);
            h[s] = best;
        }
        if (change <= 1e-9 * top) break;
    }
    // policy iteration from the value-iteration policy makes the result exact up to round-off
    std::vector<double> exact(n, 0.0);
    for (int round = 0; round < 100; ++round) {
        if (!evaluate(m, pol, target, exact)) return h;
        bool stable = true;
        for (StateId s = 0; s < n; ++s) {
            if (s == target) continue;
            for (std::size_t a = 0; a < m.num_actions(s); ++a) {
                if (a == pol[s]) continue;
                if (q_value(m, exact, s, a, target) < exact[s] - 1e-12 * std::max(1.0, exact[s])) {
                    pol[s] = a;
                    stable = false;
                }
            }
        }
        h = exact;
        if (stable) break;
    }
    return h;
}

DiameterResult diameter(const SmdpModel& m) {
    DiameterResult res;
    const std::size_t n = m.num_states();
    for (StateId t = 0; t < n; ++t) {
        auto h = hitting_times(m, t);
        for (StateId s = 0; s < n; ++s)
            if (s != t && h[s] > res.diameter) {
                res.diameter = h[s];
                res.from = s;
                res.to = t;
            }
    }
    return res;
}

EquivalentDiameterCheck equivalent_diameter_check(const SmdpModel& m, double tau) {
    EquivalentDiameterCheck c;
    c.tau = tau;
    c.d_smdp = diameter(m).diameter;
    UniformizedMdp meq(m, tau);
    c.d_equivalent = diameter(meq.as_model()).diameter;
    c.residual = std::abs(c.d_smdp - tau * c.d_equivalent);
    return c;
}

} // namespace smdp
