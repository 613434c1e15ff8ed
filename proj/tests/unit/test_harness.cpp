#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "smdp/harness.hpp"
#include "smdp/model_io.hpp"

using namespace smdp;
namespace fs = std::filesystem;

namespace {

ExperimentPlan small_plan() {
    ExperimentPlan p;
    p.d = {4};
    p.m = {1, 2};
    p.seeds = {1, 2};
    p.time_budget = 4000;
    p.checkpoints = 6;
    p.first_checkpoint = 100;
    return p;
}

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    return p;
}

} // namespace

TEST_CASE("theoretical ratio against an expanded form") {
    for (std::size_t d : {5, 10, 20})
        for (std::size_t m = 1; m < d; ++m)
            for (double x : {1.0, 0.5, 0.2}) {
                const double dd = static_cast<double>(d), mm = static_cast<double>(m);
                const double expanded = (1.0 + (mm * mm + mm) / (2 * dd - 2) + mm / ((2 * dd - 2) * dd)) * std::sqrt(x);
                CHECK(theoretical_ratio(d, m, x) == doctest::Approx(expanded).epsilon(1e-14));
            }
    CHECK_THROWS_AS(theoretical_ratio(1, 1, 1.0), ValidationError);
    CHECK_THROWS_AS(theoretical_ratio(5, 1, 0.0), ValidationError);
}

TEST_CASE("best option length grows with the grid") {
    // n / T_n = 2 / (m + 1) for uniform option lengths
    std::size_t prev = 0;
    for (std::size_t d : {10, 20, 40, 80}) {
        std::size_t best = 1;
        for (std::size_t m = 1; m < d; ++m)
            if (theoretical_ratio(d, m, 2.0 / (m + 1.0)) < theoretical_ratio(d, best, 2.0 / (best + 1.0))) best = m;
        CHECK(best > prev);
        // on the small grid even the best length cannot beat primitive actions
        if (d >= 20) CHECK(theoretical_ratio(d, best, 2.0 / (best + 1.0)) < 1.0);
        else CHECK(theoretical_ratio(d, best, 2.0 / (best + 1.0)) > 1.0);
        prev = best;
    }
}

TEST_CASE("aggregate CSV round trip keeps every bit") {
    std::vector<AggregateRow> rows(3);
    rows[0] = {20, 3, 8, 1234.5, 0.1 + 0.2, 1e-300, 7.0 / 3.0, 0.0, std::nan(""), 1.9999999999999998};
    rows[1] = {20, 4, 8, 5e6, -12.25, 3.5, 1e10, 2.0, 1.0 / 3.0, 2.5};
    rows[2] = {5, 1, 1, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0};
    std::string text = aggregate_csv(rows);
    auto back = parse_aggregate_csv(text);
    REQUIRE(back.size() == 3);
    CHECK(aggregate_csv(back) == text);
    CHECK(std::isnan(back[0].ratio));
    CHECK(back[0].regret_opt_mean == 0.1 + 0.2);
    CHECK(back[1].ratio == 1.0 / 3.0);
    CHECK(aggregate_csv({}) ==
          "d,m,seed_count,Tn,regret_opt_mean,regret_opt_se,regret_prim_mean,regret_prim_se,ratio,tn_over_n\n");
    CHECK_THROWS_AS(parse_aggregate_csv("d,m\n1,2\n"), ValidationError);
    CHECK_THROWS_AS(parse_aggregate_csv(aggregate_csv({}) + "1,2,3\n"), ValidationError);
    CHECK_THROWS_AS(parse_aggregate_csv(aggregate_csv({}) + "1,2,3,4,5,6,7,8,x,10\n"), ValidationError);
}

TEST_CASE("aggregation of hand-made ledgers") {
    auto make = [](double rho, double reward_per_step, double tau) {
        RegretLedger l;
        l.set_reference_gain(rho);
        for (int i = 0; i < 100; ++i) l.append(0, 0, tau, reward_per_step);
        return l;
    };
    std::vector<RegretLedger> opt{make(0.5, 0.5, 2.0), make(0.5, 0.0, 2.0)};
    std::vector<RegretLedger> prim{make(0.5, 0.25, 1.0), make(0.5, 0.0, 1.0)};
    AggregateResult res;
    aggregate_cell(7, 2, opt, prim, {100.0}, res);
    REQUIRE(res.rows.size() == 1);
    const auto& r = res.rows[0];
    // regrets at T=100: opt {25, 50}, prim {25, 50}
    CHECK(r.regret_opt_mean == doctest::Approx(37.5));
    CHECK(r.regret_opt_se == doctest::Approx(12.5));
    CHECK(r.regret_prim_mean == doctest::Approx(37.5));
    CHECK(r.ratio == doctest::Approx(1.0));
    CHECK(r.tn_over_n == doctest::Approx(2.0));
    REQUIRE(res.theory.size() == 1);
    CHECK(res.theory[0].theoretical_ratio == doctest::Approx(theoretical_ratio(7, 2, 0.5)));
    CHECK(res.warnings.empty());
}

TEST_CASE("zero primitive regret gives a NaN ratio and a warning") {
    RegretLedger a, b;
    a.set_reference_gain(1.0);
    b.set_reference_gain(1.0);
    for (int i = 0; i < 10; ++i) {
        a.append(0, 0, 1.0, 0.5);
        b.append(0, 0, 1.0, 1.0);
    }
    AggregateResult res;
    aggregate_cell(5, 2, {a}, {b}, {5.0}, res);
    CHECK(std::isnan(res.rows[0].ratio));
    REQUIRE(res.warnings.size() == 1);
    CHECK(res.warnings[0].Tn == 5.0);
}

TEST_CASE("plan files") {
    ExperimentPlan p = small_plan();
    ExperimentPlan back = parse_plan(dump_plan(p));
    CHECK(dump_plan(back) == dump_plan(p));
    CHECK(parse_plan("{}").d == std::vector<std::size_t>{20});
    CHECK_THROWS_AS(parse_plan("{"), ValidationError);
    CHECK_THROWS_AS(parse_plan(R"({"dd": [4]})"), ValidationError);
    CHECK_THROWS_AS(parse_plan(R"({"d": "four"})"), ValidationError);
    CHECK_THROWS_AS(parse_plan(R"({"d": [4], "m": [4]})"), ValidationError);
    CHECK_THROWS_AS(parse_plan(R"({"mode": "fast"})"), ValidationError);
    CHECK_THROWS_AS(parse_plan(R"({"option_env": "lb-options"})"), ValidationError);
    CHECK_THROWS_AS(parse_plan(R"({"format": "smdp-model"})"), ValidationError);
    CHECK_THROWS_AS(parse_plan(R"({"seeds": []})"), ValidationError);
}

TEST_CASE("checkpoints are log-spaced and end at the budget") {
    ExperimentPlan p = small_plan();
    auto t = plan_checkpoints(p);
    REQUIRE(t.size() == 6);
    CHECK(t.front() == doctest::Approx(100.0));
    CHECK(t.back() == 4000.0);
    for (std::size_t k = 1; k + 1 < t.size(); ++k)
        CHECK(t[k + 1] / t[k] == doctest::Approx(t[1] / t[0]).epsilon(1e-9));
    p.checkpoints = 1;
    CHECK(plan_checkpoints(p) == std::vector<double>{4000.0});
}

TEST_CASE("small experiment is reproducible across worker counts") {
    ExperimentPlan p = small_plan();
    fs::path a = scratch("smdp_exp_serial"), b = scratch("smdp_exp_parallel");
    AggregateResult ra = run_plan(p, a.string(), 1);
    AggregateResult rb = run_plan(p, b.string(), 3);
    CHECK(aggregate_csv(ra.rows) == aggregate_csv(rb.rows));
    for (const char* f : {"aggregate.csv", "warnings.csv", "theory.csv", "plan.json"})
        CHECK(read_text_file((a / f).string()) == read_text_file((b / f).string()));
    for (auto seed : p.seeds) {
        CHECK(read_text_file((a / "ledgers" / ledger_name(4, 2, seed)).string()) ==
              read_text_file((b / "ledgers" / ledger_name(4, 2, seed)).string()));
    }
    REQUIRE(ra.rows.size() == 12);
    // one-step options are the primitive actions
    for (const auto& r : ra.rows)
        if (r.m == 1) {
            CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(r.tn_over_n == doctest::Approx(1.0).epsilon(1e-12));
        }
    // re-aggregating the stored ledgers reproduces the outputs
    const std::string before = read_text_file((a / "aggregate.csv").string());
    AggregateResult again = aggregate_directory(parse_plan(read_text_file((a / "plan.json").string())), a.string());
    CHECK(aggregate_csv(again.rows) == before);
    CHECK(parse_aggregate_csv(before).size() == 12);
    const std::string theory = read_text_file((a / "theory.csv").string());
    CHECK(theory.rfind("d,m,tn_over_n,theoretical_ratio\n", 0) == 0);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("missing ledgers are an error") {
    fs::path dir = scratch("smdp_exp_missing");
    fs::create_directories(dir / "ledgers");
    CHECK_THROWS_AS(aggregate_directory(small_plan(), dir.string()), ValidationError);
    fs::remove_all(dir);
}
