#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "smdp/environment.hpp"
#include "smdp/options.hpp"
#include "smdp/planning.hpp"

namespace smdp {

enum class ConfidenceMode { SubExponential, Bounded };

struct ConfidencePolicy {
    ConfidenceMode mode = ConfidenceMode::Bounded;
    double sigma_r = 1.0, b_r = 1.0;
    double sigma_tau = 1.0, b_tau = 1.0;
    double t_min = 1.0, t_max = 1.0; ///< support of holding times in bounded mode
    /// Multiplies every radius; 0 and infinity are allowed for diagnostics.
    double radius_scale = 1.0;
};

struct Radii {
    double beta_r = 0.0, beta_tau = 0.0, beta_p = 0.0;
};

/// Radii for a pair seen `count` times at step index i_k.
Radii confidence_radii(const ConfidencePolicy& policy, const ModelBounds& bounds, std::size_t num_states,
                       std::size_t num_actions, double i_k, double delta, double count);

/// Sample counts and sums per state-action pair.
class Counters {
public:
    Counters() = default;
    explicit Counters(const std::vector<std::size_t>& actions_per_state);

    std::size_t num_states() const { return offset_.size() - 1; }
    std::size_t num_actions(StateId s) const { return offset_[s + 1] - offset_[s]; }
    std::size_t max_actions() const { return max_actions_; }
    std::size_t pair(StateId s, std::size_t a) const { return offset_[s] + a; }
    std::size_t num_pairs() const { return offset_.back(); }

    void record(StateId s, std::size_t a, StateId next, double reward, double holding);
    /// Freezes the current counts as the prior counts of a new episode.
    void start_episode();

    /// Total visits, visits before the current episode, and visits within it.
    std::uint64_t total(std::size_t k) const { return count_[k]; }
    std::uint64_t prior(std::size_t k) const { return prior_[k]; }
    std::uint64_t in_episode(std::size_t k) const { return count_[k] - prior_[k]; }
    double reward_sum(std::size_t k) const { return reward_[k]; }
    double holding_sum(std::size_t k) const { return holding_[k]; }
    const std::vector<std::pair<StateId, std::uint64_t>>& next_counts(std::size_t k) const { return next_[k]; }
    /// Index of the next decision step, counted from 1.
    std::uint64_t step_index() const { return 1 + steps_; }

private:
    std::vector<std::size_t> offset_{0};
    std::size_t max_actions_ = 0;
    std::vector<std::uint64_t> count_, prior_;
    std::vector<double> reward_, holding_;
    std::vector<std::vector<std::pair<StateId, std::uint64_t>>> next_;
    std::uint64_t steps_ = 0;
};

struct AgentConfig {
    ConfidencePolicy confidence;
    ModelBounds bounds;          ///< r_max, tau_min, tau_max known to the learner
    double delta = 0.05;
    double tau_fraction = 0.9;   ///< uniformization constant as a fraction of tau_min
    std::size_t max_sweeps = 10000000;
    bool record_spans = false;
};

struct EpisodeSummary {
    std::size_t k = 0;
    std::uint64_t i_k = 0;
    std::uint64_t length = 0;
    double epsilon = 0.0;
    double optimistic_gain = 0.0;
    std::size_t evi_iterations = 0;
    double max_span = 0.0;              ///< largest span over the iterates, when recorded
    StateId trigger_state = 0;
    std::size_t trigger_action = 0;
    bool ended_by_doubling = false;     ///< false when the run budget cut it short
    std::optional<bool> truth_contained;
    StationaryPolicy policy;
};

/// Decision-level record: index, state, action, holding time, reward.
struct StepRecord {
    std::uint64_t i = 0;
    StateId s = 0;
    std::size_t a = 0;
    double tau = 0.0;
    double r = 0.0;
};

/**
 * Per-step regret bookkeeping. Full retention keeps every record; checkpoint
 * retention keeps the records straddling each requested time point plus the
 * last one, while cumulative totals stay exact.
 */
class RegretLedger {
public:
    struct Row {
        std::uint64_t i = 0;
        StateId s = 0;
        std::size_t a = 0;
        double tau = 0.0, r = 0.0;
        double Tn = 0.0, cum_reward = 0.0;
    };

    RegretLedger() = default;
    /// Checkpoint retention at the given increasing time points.
    explicit RegretLedger(std::vector<double> checkpoints);

    void append(StateId s, std::size_t a, double tau, double r);

    bool full() const { return full_; }
    std::uint64_t steps() const { return steps_; }
    double total_time() const { return time_; }
    double total_reward() const { return reward_; }
    /// Retained rows, always ending with the latest record.
    std::vector<Row> rows() const;

    void set_reference_gain(double rho) { rho_ = rho; }
    double reference_gain() const { return rho_; }
    double regret() const { return time_ * rho_ - reward_; }

    std::string provenance;
    std::optional<double> primitive_reward_total;

    /// Regret and step count at elapsed time T, interpolated between retained rows.
    double regret_at_time(double T) const;
    double steps_at_time(double T) const;

    void write_csv(const std::string& path) const;
    std::string csv() const;
    /// Reads the rows of a ledger file; the reference gain is recovered from the regret column.
    static RegretLedger read_csv(const std::string& path);

private:
    bool full_ = true;
    std::vector<double> checkpoints_;
    std::size_t next_cp_ = 0;
    std::vector<Row> kept_;
    Row last_;
    bool last_kept_ = true;
    std::uint64_t steps_ = 0;
    double time_ = 0.0, reward_ = 0.0;
    double rho_ = 0.0;
};

/// The optimistic learner over an SMDP with unknown parameters.
class UcrlSmdpAgent {
public:
    UcrlSmdpAgent(std::vector<std::size_t> actions_per_state, AgentConfig config);

    const AgentConfig& config() const { return config_; }
    const Counters& counters() const { return counters_; }
    double tau() const { return config_.tau_fraction * config_.bounds.tau_min; }

    /// Plausible set built from the current counts at step index i.
    BoundedParameterSmdp plausible_set(double i) const;

    /// Attach a true model; episodes then report whether it lies in the plausible set.
    void set_truth(const SmdpModel* truth) { truth_ = truth; }

    /// Plays one episode from `state`, which is updated in place. Stops early
    /// once the agent has taken `max_steps` decision steps in total or used `time_budget` time.
    EpisodeSummary run_episode(Environment& env, StateId& state, Rng& rng, RegretLedger* ledger,
                               std::uint64_t max_steps, double time_budget);

    struct RunLimits {
        std::uint64_t max_steps = 0;   ///< 0 means unlimited
        double time_budget = 0.0;      ///< 0 means unlimited
        std::size_t max_episodes = 0;  ///< 0 means unlimited
    };

    /// Runs episodes until a limit is hit; returns all episode summaries.
    std::vector<EpisodeSummary> run(Environment& env, StateId start, Rng& rng, RegretLedger& ledger,
                                    const RunLimits& limits);

    std::uint64_t steps() const { return counters_.step_index() - 1; }
    double elapsed() const { return elapsed_; }

private:
    AgentConfig config_;
    Counters counters_;
    const SmdpModel* truth_ = nullptr;
    std::size_t episode_ = 0;
    double elapsed_ = 0.0;
};

/// Agent configuration derived from a model's bounds and tail information.
AgentConfig default_agent_config(const SmdpModel& m, ConfidenceMode mode, double delta);

struct CoverageReport {
    std::size_t episodes = 0;
    std::size_t covered = 0;
    double rate() const { return episodes ? static_cast<double>(covered) / static_cast<double>(episodes) : 0.0; }
};

/// Runs independent seeds of the agent on `truth` until `episodes` episodes were
/// observed and counts those whose plausible set contains the truth.
CoverageReport coverage_test(const SmdpModel& truth, const AgentConfig& config, std::size_t episodes,
                             std::uint64_t seed = 1, std::size_t episodes_per_run = 20);

struct RegretDecomposition {
    double mdp_regret = 0.0;    ///< T_n rho(M) - primitive reward
    double smdp_regret = 0.0;   ///< T_n rho(M_O) - decision-level reward
    double linear_term = 0.0;   ///< T_n (rho(M) - rho(M_O))
    double residual = 0.0;
};

RegretDecomposition regret_decomposition(double rho_mdp, double rho_options, const RegretLedger& ledger);
/// Computes both optimal gains by value iteration and checks the ledger came from this option set.
RegretDecomposition regret_decomposition(const MdpModel& mdp, const OptionSet& set, const RegretLedger& ledger);

/// Optimal gain of a model by value iteration on its uniformization.
double optimal_gain(const SmdpModel& m, double epsilon = 1e-10);

} // namespace smdp
