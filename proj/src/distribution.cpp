#include "smdp/distribution.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace smdp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double table_mean(const DiscreteTable& t) {
    double m = 0.0;
    for (std::size_t i = 0; i < t.values.size(); ++i) m += t.values[i] * t.masses[i];
    return m;
}

double table_sample(const DiscreteTable& t, Rng& rng) {
    double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < t.values.size(); ++i) {
        acc += t.masses[i];
        if (u < acc) return t.values[i];
    }
    return t.values.back();
}

} // namespace

double mean(const PrimitiveDist& d) {
    return std::visit(overloaded{
                          [](const Dirac& x) { return x.value; },
                          [](const TwoPoint& x) { return x.low + x.p_high * (x.high - x.low); },
                          [](const DiscreteTable& x) { return table_mean(x); },
                      },
                      d);
}

double sample(const PrimitiveDist& d, Rng& rng) {
    return std::visit(overloaded{
                          [](const Dirac& x) { return x.value; },
                          [&](const TwoPoint& x) {
                              // degenerate cases consume no randomness
                              if (x.p_high <= 0.0) return x.low;
                              if (x.p_high >= 1.0) return x.high;
                              return rng.uniform() < x.p_high ? x.high : x.low;
                          },
                          [&](const DiscreteTable& x) { return table_sample(x, rng); },
                      },
                      d);
}

std::pair<double, double> support_range(const PrimitiveDist& d) {
    return std::visit(overloaded{
                          [](const Dirac& x) { return std::make_pair(x.value, x.value); },
                          [](const TwoPoint& x) { return std::make_pair(std::min(x.low, x.high), std::max(x.low, x.high)); },
                          [](const DiscreteTable& x) {
                              double lo = x.values.front(), hi = x.values.front();
                              for (double v : x.values) {
                                  lo = std::min(lo, v);
                                  hi = std::max(hi, v);
                              }
                              return std::make_pair(lo, hi);
                          },
                      },
                      d);
}

PhaseTypeChain::PhaseTypeChain(std::vector<StateId> transient_states, std::vector<StateId> end_states,
                               std::vector<Arc> arcs)
    : transient_(std::move(transient_states)), ends_(std::move(end_states)), arcs_(std::move(arcs)) {
    const std::size_t n = transient_.size();
    const std::size_t m = ends_.size();
    if (n == 0) throw std::invalid_argument("phase-type chain needs a start state");

    out_arcs_.assign(n, {});
    q_.assign(n * n, 0.0);
    r_.assign(n * m, 0.0);
    std::vector<double> row_sum(n, 0.0);
    for (std::size_t k = 0; k < arcs_.size(); ++k) {
        const Arc& a = arcs_[k];
        if (a.from < 0 || static_cast<std::size_t>(a.from) >= n) throw std::invalid_argument("arc source out of range");
        if ((a.to_transient < 0) == (a.to_end < 0)) throw std::invalid_argument("arc must target exactly one state");
        if (a.prob < 0.0) throw std::invalid_argument("negative arc probability");
        if (a.to_transient >= 0) {
            if (static_cast<std::size_t>(a.to_transient) >= n) throw std::invalid_argument("arc target out of range");
            q_[a.from * n + a.to_transient] += a.prob;
        } else {
            if (static_cast<std::size_t>(a.to_end) >= m) throw std::invalid_argument("arc end out of range");
            r_[a.from * m + a.to_end] += a.prob;
        }
        row_sum[a.from] += a.prob;
        out_arcs_[a.from].push_back(k);
    }
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(row_sum[i] - 1.0) > 1e-9) throw std::invalid_argument("phase-type chain row does not sum to one");

    Eigen::MatrixXd Q(n, n), R(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) Q(i, j) = q_[i * n + j];
        for (std::size_t e = 0; e < m; ++e) R(i, e) = r_[i * m + e];
    }

    if (n == 1) {
        spectral_radius_ = std::abs(Q(0, 0));
    } else {
        Eigen::EigenSolver<Eigen::MatrixXd> es(Q, false);
        spectral_radius_ = es.eigenvalues().cwiseAbs().maxCoeff();
    }
    if (spectral_radius_ >= 1.0 - 1e-12) throw std::invalid_argument("option terminates with probability below one");

    // cycle detection and longest path over positive transient arcs
    std::vector<int> colour(n, 0);
    std::vector<std::size_t> depth(n, 0);
    bool cyclic = false;
    std::function<std::size_t(std::size_t)> visit = [&](std::size_t i) -> std::size_t {
        if (colour[i] == 2) return depth[i];
        if (colour[i] == 1) {
            cyclic = true;
            return 0;
        }
        colour[i] = 1;
        std::size_t best = 1;
        for (std::size_t k : out_arcs_[i]) {
            const Arc& a = arcs_[k];
            if (a.prob <= 0.0 || a.to_transient < 0) continue;
            best = std::max(best, 1 + visit(static_cast<std::size_t>(a.to_transient)));
        }
        colour[i] = 2;
        depth[i] = best;
        return best;
    };
    for (std::size_t i = 0; i < n; ++i) visit(i);
    nilpotent_ = !cyclic;
    max_holding_ = nilpotent_ ? depth[0] : 0;

    Eigen::MatrixXd IminusQ = Eigen::MatrixXd::Identity(n, n) - Q;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(IminusQ);
    Eigen::MatrixXd H = lu.solve(R);             // absorption probabilities
    Eigen::MatrixXd NH = lu.solve(H);            // (I-Q)^-2 R
    Eigen::VectorXd n0 = Eigen::PartialPivLU<Eigen::MatrixXd>(IminusQ.transpose()).solve(Eigen::VectorXd::Unit(n, 0)); // row 0 of N

    h_.assign(m, std::vector<double>(n, 0.0));
    end_prob_.assign(m, 0.0);
    cond_tau_.assign(m, 0.0);
    cond_r_.assign(m, 0.0);
    for (std::size_t e = 0; e < m; ++e) {
        for (std::size_t i = 0; i < n; ++i) h_[e][i] = std::max(0.0, H(i, e));
        Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
        for (const Arc& a : arcs_) {
            double rbar = mean(a.reward);
            if (a.to_transient >= 0)
                w(a.from) += a.prob * rbar * h_[e][a.to_transient];
            else if (static_cast<std::size_t>(a.to_end) == e)
                w(a.from) += a.prob * rbar;
        }
        end_prob_[e] = h_[e][0];
        if (end_prob_[e] > 0.0) {
            cond_tau_[e] = NH(0, e) / end_prob_[e];
            cond_r_[e] = n0.dot(w) / end_prob_[e];
        }
    }
}

PhaseTypeChain::Draw PhaseTypeChain::sample_conditional(std::size_t e, Rng& rng) const {
    if (e >= ends_.size() || end_prob_[e] <= 0.0) throw std::invalid_argument("conditioning on an end with no mass");
    const std::vector<double>& h = h_[e];
    Draw d;
    std::size_t i = 0;
    std::vector<double> w;
    for (;;) {
        const auto& out = out_arcs_[i];
        w.assign(out.size(), 0.0);
        double total = 0.0;
        for (std::size_t k = 0; k < out.size(); ++k) {
            const Arc& a = arcs_[out[k]];
            if (a.to_transient >= 0)
                w[k] = a.prob * h[a.to_transient];
            else if (static_cast<std::size_t>(a.to_end) == e)
                w[k] = a.prob;
            total += w[k];
        }
        double u = rng.uniform() * total;
        std::size_t pick = out.size();
        double acc = 0.0;
        for (std::size_t k = 0; k < out.size(); ++k) {
            if (w[k] <= 0.0) continue;
            acc += w[k];
            pick = k;
            if (u < acc) break;
        }
        const Arc& a = arcs_[out[pick]];
        d.holding += 1.0;
        d.reward += sample(a.reward, rng);
        if (a.to_end >= 0) return d;
        i = static_cast<std::size_t>(a.to_transient);
    }
}

double mean(const DistributionSpec& d) {
    return std::visit(overloaded{
                          [](const PhaseType& x) {
                              return x.quantity == PhaseQuantity::Holding ? x.chain->conditional_holding(x.end)
                                                                          : x.chain->conditional_reward(x.end);
                          },
                          [](const auto& x) { return mean(PrimitiveDist{x}); },
                      },
                      d);
}

double sample(const DistributionSpec& d, Rng& rng) {
    return std::visit(overloaded{
                          [&](const PhaseType& x) {
                              auto draw = x.chain->sample_conditional(x.end, rng);
                              return x.quantity == PhaseQuantity::Holding ? draw.holding : draw.reward;
                          },
                          [&](const auto& x) { return sample(PrimitiveDist{x}, rng); },
                      },
                      d);
}

bool is_phase_type(const DistributionSpec& d) { return std::holds_alternative<PhaseType>(d); }

std::string kind_name(const DistributionSpec& d) {
    return std::visit(overloaded{
                          [](const Dirac&) { return std::string("dirac"); },
                          [](const TwoPoint&) { return std::string("two_point"); },
                          [](const DiscreteTable&) { return std::string("discrete"); },
                          [](const PhaseType&) { return std::string("phase_type"); },
                      },
                      d);
}

std::string check_distribution(const DistributionSpec& d) {
    return std::visit(overloaded{
                          [](const Dirac& x) { return std::isfinite(x.value) ? std::string() : std::string("non-finite value"); },
                          [](const TwoPoint& x) {
                              if (!(x.p_high >= 0.0 && x.p_high <= 1.0)) return std::string("two-point mass outside [0,1]");
                              return std::string();
                          },
                          [](const DiscreteTable& x) {
                              if (x.values.empty() || x.values.size() != x.masses.size())
                                  return std::string("discrete table shape mismatch");
                              double s = 0.0;
                              for (double w : x.masses) {
                                  if (w < 0.0) return std::string("negative mass");
                                  s += w;
                              }
                              if (std::abs(s - 1.0) > 1e-12) return std::string("discrete masses do not sum to one");
                              return std::string();
                          },
                          [](const PhaseType& x) {
                              if (!x.chain) return std::string("phase-type without chain");
                              if (x.end >= x.chain->num_ends()) return std::string("phase-type end out of range");
                              return std::string();
                          },
                      },
                      d);
}

} // namespace smdp
