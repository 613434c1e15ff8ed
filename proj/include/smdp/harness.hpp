#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "smdp/environments.hpp"

namespace smdp {

/// Sweep over grid sizes, option lengths and seeds, comparing an option arm
/// with a primitive arm at matched elapsed time.
struct ExperimentPlan {
    std::vector<std::size_t> d{20};
    std::vector<std::size_t> m{1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8};
    double time_budget = 5e6;      ///< T_n per run; ignored when steps > 0
    std::uint64_t steps = 0;       ///< decision budget n per run
    std::size_t checkpoints = 40;  ///< log-spaced comparison times
    double first_checkpoint = 1e3; ///< earliest comparison time
    double delta = 0.05;
    ConfidenceMode mode = ConfidenceMode::Bounded;
    double radius_scale = 1.0;
    std::string option_env = "grid-options";
    std::string primitive_env = "grid";
};

void check_plan(const ExperimentPlan& p);
ExperimentPlan parse_plan(const std::string& json_text);
std::string dump_plan(const ExperimentPlan& p);
ExperimentPlan read_plan_file(const std::string& path);

/// Increasing comparison times, log-spaced up to the budget.
std::vector<double> plan_checkpoints(const ExperimentPlan& p);

struct AggregateRow {
    std::size_t d = 0, m = 0, seed_count = 0;
    double Tn = 0.0;
    double regret_opt_mean = 0.0, regret_opt_se = 0.0;
    double regret_prim_mean = 0.0, regret_prim_se = 0.0;
    double ratio = 0.0;      ///< NaN when the primitive regret is degenerate
    double tn_over_n = 0.0;  ///< option arm, mean over seeds
};

struct WarningRow {
    std::size_t d = 0, m = 0;
    double Tn = 0.0;
    std::string message;
};

struct TheoryRow {
    std::size_t d = 0, m = 0;
    double tn_over_n = 0.0;
    double theoretical_ratio = 0.0;
};

struct AggregateResult {
    std::vector<AggregateRow> rows;
    std::vector<WarningRow> warnings;
    std::vector<TheoryRow> theory;
};

/// Upper-bound ratio for the grid with options of length m, given n / T_n.
double theoretical_ratio(std::size_t d, std::size_t m, double n_over_tn);

/// Runs one arm for one seed and returns its checkpoint ledger.
RegretLedger run_arm(const EnvironmentBundle& env, const ExperimentPlan& plan, std::uint64_t seed);

/// Aggregates one (d, m) cell from option-arm and primitive-arm ledgers.
void aggregate_cell(std::size_t d, std::size_t m, const std::vector<RegretLedger>& opt,
                    const std::vector<RegretLedger>& prim, const std::vector<double>& times, AggregateResult& out);

std::string ledger_name(std::size_t d, std::size_t m, std::uint64_t seed);
std::string primitive_ledger_name(std::size_t d, std::uint64_t seed);

/// Recomputes every aggregate from the ledger files under `dir`/ledgers.
AggregateResult aggregate_directory(const ExperimentPlan& plan, const std::string& dir);

using Progress = std::function<void(const std::string&)>;

/// Executes all runs with `jobs` workers, writes ledgers and aggregate files to `dir`.
AggregateResult run_plan(const ExperimentPlan& plan, const std::string& dir, std::size_t jobs = 1,
                         const Progress& progress = {});

std::string aggregate_csv(const std::vector<AggregateRow>& rows);
std::vector<AggregateRow> parse_aggregate_csv(const std::string& text);
/// Writes aggregate.csv, warnings.csv and theory.csv into `dir`.
void emit_csv(const AggregateResult& r, const std::string& dir);

} // namespace smdp
