#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "smdp/environments.hpp"
#include "smdp/model_io.hpp"

using namespace smdp;

namespace {

/// Empirical next-state, reward and holding moments of env.step against the exact model.
void check_agreement(Environment& env, const SmdpModel& m, StateId s, std::size_t a, int N, Rng& rng) {
    std::vector<double> freq(m.num_states(), 0.0);
    double r = 0.0, r2 = 0.0, t = 0.0, t2 = 0.0;
    for (int i = 0; i < N; ++i) {
        Transition x = env.step(s, a, rng);
        freq[x.next] += 1.0;
        r += x.reward;
        r2 += x.reward * x.reward;
        t += x.holding;
        t2 += x.holding * x.holding;
    }
    for (StateId y = 0; y < m.num_states(); ++y) {
        double p = m.transition_probability(s, a, y);
        CHECK(std::abs(freq[y] / N - p) <= 4 * std::sqrt(std::max(p * (1 - p), 1e-12) / N) + 1e-12);
    }
    double rm = r / N, tm = t / N;
    CHECK(std::abs(rm - m.expected_reward(s, a)) <= 4 * std::sqrt(std::max(r2 / N - rm * rm, 0.0) / N) + 1e-12);
    CHECK(std::abs(tm - m.expected_holding(s, a)) <= 4 * std::sqrt(std::max(t2 / N - tm * tm, 0.0) / N) + 1e-12);
}

} // namespace

TEST_CASE("grid primitive moves") {
    GridConfig c{5, 1, 1.0, OptionMode::PrimitiveOnly};
    SmdpModel m = build_grid_mdp(c).smdp();
    CHECK(grid_target(5) == 24);
    CHECK(m.num_states() == 25);
    // interior cell 12 = (2, 2)
    CHECK(m.transition_probability(12, kLeft, 11) == 1.0);
    CHECK(m.transition_probability(12, kRight, 13) == 1.0);
    CHECK(m.transition_probability(12, kUp, 7) == 1.0);
    CHECK(m.transition_probability(12, kDown, 17) == 1.0);
    CHECK(m.expected_reward(12, kLeft) == 0.0);
    CHECK(m.expected_holding(12, kLeft) == 1.0);
    // corners bump into walls
    CHECK(m.transition_probability(0, kLeft, 0) == 1.0);
    CHECK(m.transition_probability(0, kUp, 0) == 1.0);
    REQUIRE(m.num_actions(24) == 1);
    CHECK(m.expected_reward(24, 0) == doctest::Approx(1.0).epsilon(1e-14));
    for (StateId y = 0; y < 24; ++y) CHECK(m.transition_probability(24, 0, y) == doctest::Approx(1.0 / 24.0));
    CHECK(m.transition_probability(24, 0, 24) == 0.0);
}

TEST_CASE("grid configuration errors") {
    CHECK_THROWS_AS(check_grid_config({1, 1, 1.0, OptionMode::Interruptible}), ValidationError);
    CHECK_THROWS_AS(check_grid_config({5, 5, 1.0, OptionMode::Interruptible}), ValidationError);
    CHECK_THROWS_AS(check_grid_config({5, 0, 1.0, OptionMode::Interruptible}), ValidationError);
    CHECK_THROWS_AS(check_grid_config({5, 2, 0.0, OptionMode::Interruptible}), ValidationError);
}

TEST_CASE("grid options keep the optimal gain") {
    for (std::size_t m : {2, 3}) {
        GridConfig c{5, m, 1.0, OptionMode::Interruptible};
        MdpModel mdp = build_grid_mdp(c);
        const double rho = gain_oracle(build_grid_mdp({3, 1, 1.0, OptionMode::PrimitiveOnly}).smdp()).gain;
        CHECK(rho == doctest::Approx(4.0 / 13.0).epsilon(1e-12));
        const double base = optimal_gain(mdp.smdp());
        CHECK(optimal_gain(compile(mdp, build_grid_options(c)).model) == doctest::Approx(base).epsilon(1e-8));
        c.option_mode = OptionMode::Deterministic;
        CHECK(optimal_gain(compile(mdp, build_grid_deterministic_options(c)).model) ==
              doctest::Approx(base).epsilon(1e-8));
    }
}

TEST_CASE("interruptible options stretch the diameter by at most m(m+1)") {
    const double D = 18.0;
    for (std::size_t m : {2, 3, 4}) {
        GridConfig c{10, m, 1.0, OptionMode::Interruptible};
        MdpModel mdp = build_grid_mdp(c);
        const double dO = diameter(compile(mdp, build_grid_options(c)).model).diameter;
        CHECK(dO >= D - 1e-9);
        CHECK(dO <= D + static_cast<double>(m * (m + 1)) + 1e-9);
    }
}

TEST_CASE("deterministic options sit inside the stretched interval") {
    GridConfig c{6, 3, 1.0, OptionMode::Deterministic};
    MdpModel mdp = build_grid_mdp(c);
    const double D = 10.0;
    const double dO = diameter(compile(mdp, build_grid_deterministic_options(c)).model).diameter;
    CHECK(dO >= D - 1e-9);
    CHECK(dO <= D * (1.0 + 9.0) + 1e-9);
}

TEST_CASE("option mean holding time by simulation") {
    auto b = make_environment("grid-options", {{"d", "10"}, {"m", "3"}});
    auto sim = b.simulator();
    Rng rng(12);
    const int N = 1000000;
    double t = 0.0;
    for (int i = 0; i < N; ++i) t += sim->step(55, kLeft, rng).holding;
    CHECK(std::abs(t / N - 2.0) <= 0.01);
}

TEST_CASE("target exit resets uniformly") {
    auto b = make_environment("grid", {{"d", "5"}});
    auto sim = b.simulator();
    Rng rng(77);
    const int N = 100000;
    std::vector<double> freq(25, 0.0);
    for (int i = 0; i < N; ++i) {
        Transition x = sim->step(24, 0, rng);
        CHECK(x.reward == 1.0);
        freq[x.next] += 1.0;
    }
    CHECK(freq[24] == 0.0);
    const double e = N / 24.0;
    double chi2 = 0.0;
    for (int s = 0; s < 24; ++s) chi2 += (freq[s] - e) * (freq[s] - e) / e;
    // 0.99 quantile of chi-square with 23 degrees of freedom
    CHECK(chi2 < 41.638);
}

TEST_CASE("simulators agree with their models") {
    Rng rng(19);
    auto lb = make_environment("lb-smdp", {});
    auto lbs = lb.simulator();
    for (StateId s = 0; s < lb.model->num_states(); ++s)
        for (std::size_t a = 0; a < lb.model->num_actions(s); ++a) check_agreement(*lbs, *lb.model, s, a, 100000, rng);

    auto g = make_environment("grid-options", {{"d", "4"}, {"m", "2"}});
    auto gs = g.simulator();
    for (StateId s : {StateId{0}, StateId{5}, StateId{14}, StateId{15}})
        for (std::size_t a = 0; a < g.model->num_actions(s); ++a) check_agreement(*gs, *g.model, s, a, 100000, rng);

    CHECK_THROWS_AS(gs->step(15, 3, rng), ValidationError);
}

TEST_CASE("coupled two-state family pays r_max per unit time in s1 only") {
    auto b = make_environment("lb-options", {});
    auto sim = b.simulator();
    Rng rng(4);
    for (int i = 0; i < 20000; ++i) {
        StateId s = static_cast<StateId>(i % 2);
        std::size_t a = static_cast<std::size_t>(i / 2) % b.model->num_actions(s);
        Transition x = sim->step(s, a, rng);
        CHECK(x.reward == (s == 1 ? x.holding : 0.0));
    }
}

TEST_CASE("two-state families: optimal policy, gain and diameter") {
    for (auto variant : {LowerBoundVariant::General, LowerBoundVariant::OptionsCompatible}) {
        LowerBoundConfig c;
        c.variant = variant;
        if (variant == LowerBoundVariant::General) c.t_max = 6.0;
        c.actions = 3;
        c.a0_star = 2;
        c.a1_star = 1;
        SmdpModel m = build_lower_bound_smdp(c);
        GainResult g = gain_oracle(m);
        CHECK(g.gain == doctest::Approx(lower_bound_optimal_gain(c)).epsilon(1e-9));
        CHECK(optimal_gain(m) == doctest::Approx(lower_bound_optimal_gain(c)).epsilon(1e-9));
        CHECK(g.policy.action[0] == 2);
        CHECK(g.policy.action[1] == 1);
        const double tb = variant == LowerBoundVariant::General ? c.tau_bar : c.t_min + c.p * (c.t_max - c.t_min);
        CHECK(diameter(m).diameter == doctest::Approx(tb / c.delta).epsilon(1e-9));
    }
}

TEST_CASE("two-state family layouts") {
    LowerBoundConfig c;
    c.copies = 4;
    c.actions = 2;
    c.best_copy = 2;
    c.a0_star = 1;
    c.t_max = 6.0;
    SmdpModel merged = build_lower_bound_smdp(c);
    CHECK(merged.num_states() == 2);
    CHECK(merged.num_actions(0) == 8);
    CHECK(lower_bound_best_actions(c).first == 5);
    const double rho = lower_bound_optimal_gain(c);
    CHECK(optimal_gain(merged) == doctest::Approx(rho).epsilon(1e-9));

    c.layout = LowerBoundLayout::Tree;
    SmdpModel tree = build_lower_bound_smdp(c);
    CHECK(tree.num_states() == 8);
    CHECK(lower_bound_best_states(c) == std::pair<StateId, StateId>{4, 5});
    CHECK(is_communicating(tree));
    CHECK(optimal_gain(tree) == doctest::Approx(rho).epsilon(1e-9));
}

TEST_CASE("two-state family configuration errors") {
    LowerBoundConfig c;
    c.t_max = 6.0;
    auto bad = [&](auto edit) {
        LowerBoundConfig x = c;
        edit(x);
        return x;
    };
    CHECK_NOTHROW(check_lower_bound_config(c));
    CHECK_THROWS_AS(check_lower_bound_config(bad([](auto& x) { x.delta = 0.5; })), ValidationError);
    CHECK_THROWS_AS(check_lower_bound_config(bad([](auto& x) { x.epsilon = x.delta; })), ValidationError);
    CHECK_THROWS_AS(check_lower_bound_config(bad([](auto& x) { x.tau_bar = x.t_min; })), ValidationError);
    CHECK_THROWS_AS(check_lower_bound_config(bad([](auto& x) { x.t_max = 3.0; })), ValidationError);
    CHECK_THROWS_AS(check_lower_bound_config(bad([](auto& x) { x.a0_star = 2; })), ValidationError);
    c.variant = LowerBoundVariant::OptionsCompatible;
    c.t_max = 3.0;
    CHECK_NOTHROW(check_lower_bound_config(c));
    CHECK_THROWS_AS(check_lower_bound_config(bad([](auto& x) { x.p = 0.4; })), ValidationError);
    CHECK_THROWS_AS(check_lower_bound_config(bad([](auto& x) { x.eta = 0.9; })), ValidationError);
}

TEST_CASE("registry") {
    auto names = environment_names();
    CHECK(names.size() == 5);
    for (const auto& n : names) {
        auto b = make_environment(n, {});
        CHECK(b.model);
        CHECK(b.reference_gain > 0.0);
        CHECK(b.reference_gain == doctest::Approx(optimal_gain(b.compiled ? b.base->smdp() : *b.model)).epsilon(1e-8));
    }
    CHECK_THROWS_AS(make_environment("nope", {}), ValidationError);
    CHECK_THROWS_AS(make_environment("grid", {{"size", "4"}}), ValidationError);
    CHECK_THROWS_AS(make_environment("grid", {{"d", "four"}}), ValidationError);
    CHECK_THROWS_AS(make_environment("grid", {{"d", "2.5"}}), ValidationError);
    CHECK_THROWS_AS(make_environment("lb-smdp", {{"layout", "ring"}}), ValidationError);
    CHECK(make_environment("grid", {}).simulator()->provenance() == "model:grid");
}

TEST_CASE("exported environments load back") {
    auto b = make_environment("grid-options", {{"d", "4"}, {"m", "2"}});
    auto dir = std::filesystem::temp_directory_path() / "smdp_export_test";
    std::filesystem::create_directories(dir);
    write_model_file((dir / "base.json").string(), b.base->smdp());
    write_options_file((dir / "opts.json").string(), *b.options);
    auto back = bundle_from_options(MdpModel(read_model_file((dir / "base.json").string())),
                                    read_options_file((dir / "opts.json").string()));
    CHECK(dump_model(*back.model) == dump_model(*b.model));
    CHECK(fingerprint(*back.options) == fingerprint(*b.options));
    CHECK(back.reference_gain == doctest::Approx(b.reference_gain).epsilon(1e-8));
    std::filesystem::remove_all(dir);
}
