#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>

#include "smdp/planning.hpp"

namespace smdp {

namespace {

/// Strongly connected components (Tarjan); returns component id per node.
std::vector<int> scc(const std::vector<std::vector<std::size_t>>& g, int& count) {
    const std::size_t n = g.size();
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<char> on(n, 0);
    std::vector<std::size_t> stack;
    int counter = 0;
    count = 0;
    std::function<void(std::size_t)> strong = [&](std::size_t v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on[v] = 1;
        for (std::size_t w : g[v]) {
            if (index[w] < 0) {
                strong(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            for (;;) {
                std::size_t w = stack.back();
                stack.pop_back();
                on[w] = 0;
                comp[w] = count;
                if (w == v) break;
            }
            ++count;
        }
    };
    for (std::size_t v = 0; v < n; ++v)
        if (index[v] < 0) strong(v);
    return comp;
}

} // namespace

std::vector<double> policy_gain(const SmdpModel& m, const StationaryPolicy& pi) {
    check_policy(m, pi);
    const std::size_t n = m.num_states();
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd r(n), t(n);
    std::vector<std::vector<std::size_t>> g(n);
    for (StateId s = 0; s < n; ++s) {
        std::size_t a = pi.action[s];
        for (const auto& o : m.action(s, a).outcomes) P(s, o.next) += o.prob;
        for (StateId j = 0; j < n; ++j)
            if (P(s, j) > 0.0) g[s].push_back(j);
        r(s) = m.expected_reward(s, a);
        t(s) = m.expected_holding(s, a);
    }
    int nc = 0;
    std::vector<int> comp = scc(g, nc);
    std::vector<char> closed(nc, 1);
    for (StateId s = 0; s < n; ++s)
        for (std::size_t j : g[s])
            if (comp[j] != comp[s]) closed[comp[s]] = 0;

    std::vector<double> class_gain(nc, 0.0);
    for (int c = 0; c < nc; ++c) {
        if (!closed[c]) continue;
        std::vector<std::size_t> members;
        for (StateId s = 0; s < n; ++s)
            if (comp[s] == c) members.push_back(s);
        const std::size_t k = members.size();
        // mu (P_c - I) = 0 with the last equation replaced by sum(mu) = 1
        Eigen::MatrixXd A(k, k);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) A(j, i) = P(members[i], members[j]) - (i == j ? 1.0 : 0.0);
        A.row(k - 1).setOnes();
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
        rhs(k - 1) = 1.0;
        Eigen::VectorXd mu = A.fullPivLu().solve(rhs);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            num += mu(i) * r(members[i]);
            den += mu(i) * t(members[i]);
        }
        class_gain[c] = num / den;
    }

    std::vector<std::size_t> transient;
    std::vector<long> tpos(n, -1);
    for (StateId s = 0; s < n; ++s)
        if (!closed[comp[s]]) {
            tpos[s] = static_cast<long>(transient.size());
            transient.push_back(s);
        }
    std::vector<double> gain(n, 0.0);
    for (StateId s = 0; s < n; ++s)
        if (closed[comp[s]]) gain[s] = class_gain[comp[s]];
    if (!transient.empty()) {
        const std::size_t k = transient.size();
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(k, k);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
        for (std::size_t i = 0; i < k; ++i) {
            StateId s = transient[i];
            for (StateId j = 0; j < n; ++j) {
                if (P(s, j) == 0.0) continue;
                if (tpos[j] >= 0) A(i, tpos[j]) -= P(s, j);
                else b(i) += P(s, j) * class_gain[comp[j]];
            }
        }
        Eigen::VectorXd x = A.fullPivLu().solve(b);
        for (std::size_t i = 0; i < k; ++i) gain[transient[i]] = x(i);
    }
    return gain;
}

std::vector<double> policy_gain_eq(const UniformizedMdp& meq, const StationaryPolicy& pi) {
    check_policy(meq.base(), pi);
    const std::size_t n = meq.num_states();
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd r(n);
    for (StateId s = 0; s < n; ++s) {
        const auto& row = meq.row(s, pi.action[s]);
        for (std::size_t k = 0; k < row.idx.size(); ++k) P(s, row.idx[k]) += row.p[k];
        r(s) = meq.reward(s, pi.action[s]);
    }
    for (int k = 0; k < 200; ++k) {
        Eigen::MatrixXd P2 = P * P;
        // renormalize so rounding cannot compound over the squarings
        Eigen::VectorXd sums = P2.rowwise().sum();
        for (std::size_t s = 0; s < n; ++s) P2.row(s) /= sums(s);
        double diff = (P2 - P).cwiseAbs().maxCoeff();
        P.swap(P2);
        if (diff < 1e-14) break;
    }
    Eigen::VectorXd g = P * r;
    return std::vector<double>(g.data(), g.data() + n);
}

GainResult gain_oracle(const SmdpModel& m, std::size_t budget) {
    const std::size_t n = m.num_states();
    double total = 1.0;
    for (StateId s = 0; s < n; ++s) total *= static_cast<double>(m.num_actions(s));
    if (total > static_cast<double>(budget)) throw ValidationError("too many policies to enumerate");
    GainResult best;
    best.gain = -INFINITY;
    StationaryPolicy pi;
    pi.action.assign(n, 0);
    for (;;) {
        auto g = policy_gain(m, pi);
        double worst = *std::min_element(g.begin(), g.end());
        ++best.policies_checked;
        if (worst > best.gain) {
            best.gain = worst;
            best.policy = pi;
        }
        std::size_t s = 0;
        while (s < n && ++pi.action[s] == m.num_actions(s)) {
            pi.action[s] = 0;
            ++s;
        }
        if (s == n) break;
    }
    return best;
}

} // namespace smdp
