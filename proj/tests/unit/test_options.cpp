#include <cmath>
#include <map>

#include "doctest.h"
#include "smdp/environments.hpp"
#include "smdp/model_io.hpp"
#include "smdp/planning.hpp"

using namespace smdp;

namespace {

std::size_t option_index(std::size_t s, std::size_t a) { return 4 * s + a; }

std::vector<double> holding_pmf(const PhaseTypeAnalysis& an) {
    std::vector<double> out;
    for (const auto& row : an.pmf) {
        double t = 0.0;
        for (double x : row) t += x;
        out.push_back(t);
    }
    return out;
}

/// Two base states; the option from 0 loops on 0 with probability 1/2.
MdpModel loop_mdp() {
    std::vector<std::vector<ActionEntry>> acts(2);
    acts[0].push_back({{{0, 0.5, Dirac{1.0}, Dirac{1.0}}, {1, 0.5, Dirac{0.0}, Dirac{1.0}}}, std::nullopt, "coin"});
    acts[1].push_back({{{0, 1.0, Dirac{0.5}, Dirac{1.0}}}, std::nullopt, "back"});
    return MdpModel(SmdpModel(acts));
}

OptionSet loop_options(double beta_back) {
    OptionSet set;
    set.num_base_states = 2;
    OptionSpec a{{0}, {0.0, 1.0}, {0, kNoAction}, "flip"};
    OptionSpec b{{1}, {beta_back, 0.0}, {0, 0}, "return"};
    set.options = {a, b};
    return set;
}

} // namespace

TEST_CASE("interruptible grid option has a uniform holding law") {
    GridConfig c{10, 3, 1.0, OptionMode::Interruptible};
    MdpModel mdp = build_grid_mdp(c);
    OptionSet set = build_grid_options(c);
    // interior cell, far from every wall
    auto an = analyze_holding(mdp, set, option_index(55, kRight), 55);
    auto pmf = holding_pmf(an);
    REQUIRE(pmf.size() == 3);
    for (double p : pmf) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(an.holding_class == HoldingClass::BoundedHolding);
    CHECK(an.tail_mass == 0.0);
    CHECK(an.ends == std::vector<StateId>{56, 57, 58});

    auto ch = build_option_chain(mdp, set, option_index(55, kRight), 55);
    double tau = 0.0;
    for (std::size_t e = 0; e < ch->num_ends(); ++e) tau += ch->end_probability(e) * ch->conditional_holding(e);
    CHECK(tau == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("wall truncation shortens the option") {
    GridConfig c{10, 3, 1.0, OptionMode::Interruptible};
    MdpModel mdp = build_grid_mdp(c);
    OptionSet set = build_grid_options(c);
    // column 7 is two cells from the right wall
    auto pmf = holding_pmf(analyze_holding(mdp, set, option_index(57, kRight), 57));
    REQUIRE(pmf.size() == 2);
    CHECK(pmf[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(pmf[1] == doctest::Approx(0.5).epsilon(1e-12));
    // against the wall: one step in place
    auto an = analyze_holding(mdp, set, option_index(59, kRight), 59);
    CHECK(holding_pmf(an) == std::vector<double>{1.0});
    CHECK(an.ends == std::vector<StateId>{59});
}

TEST_CASE("deterministic grid options move exactly m cells") {
    GridConfig c{10, 4, 1.0, OptionMode::Deterministic};
    MdpModel mdp = build_grid_mdp(c);
    OptionSet set = build_grid_deterministic_options(c);
    auto an = analyze_holding(mdp, set, option_index(33, kDown), 33);
    auto pmf = holding_pmf(an);
    REQUIRE(pmf.size() == 4);
    CHECK(pmf[3] == 1.0);
    CHECK(an.ends == std::vector<StateId>{73});
}

TEST_CASE("compiled grid keeps every state and four options") {
    GridConfig c{6, 2, 1.0, OptionMode::Interruptible};
    MdpModel mdp = build_grid_mdp(c);
    CompiledOptions co = compile(mdp, build_grid_options(c));
    CHECK(co.model.num_states() == 36);
    for (StateId s = 0; s + 1 < 36; ++s) CHECK(co.model.num_actions(s) == 4);
    CHECK(co.model.num_actions(35) == 1);
    CHECK(std::holds_alternative<BoundedTail>(co.model.tail()));
    CHECK(std::get<BoundedTail>(co.model.tail()).t_max == 2.0);
}

TEST_CASE("compiled transition rows agree with executed options") {
    GridConfig c{7, 3, 1.0, OptionMode::Interruptible};
    MdpModel mdp = build_grid_mdp(c);
    OptionSet set = build_grid_options(c);
    CompiledOptions co = compile(mdp, set);
    Rng rng(23);
    const int N = 100000;
    for (StateId s : {StateId{0}, StateId{24}, StateId{47}}) {
        for (std::size_t a = 0; a < 4; ++a) {
            std::map<StateId, double> freq;
            double tau = 0.0, tau2 = 0.0;
            for (int i = 0; i < N; ++i) {
                OptionRun run = execute_option(mdp, set.options[option_index(s, a)], s, rng);
                freq[run.end] += 1.0;
                tau += run.holding;
                tau2 += run.holding * run.holding;
            }
            for (StateId y = 0; y < 49; ++y) {
                double p = co.model.transition_probability(s, a, y);
                double f = freq.count(y) ? freq[y] / N : 0.0;
                CHECK(std::abs(f - p) <= 4 * std::sqrt(std::max(p * (1 - p), 1e-12) / N) + 1e-12);
            }
            double m = tau / N;
            CHECK(std::abs(m - co.model.expected_holding(s, a)) <= 4 * std::sqrt((tau2 / N - m * m) / N) + 1e-12);
        }
    }
}

TEST_CASE("looping option has an unbounded geometric holding time") {
    MdpModel mdp = loop_mdp();
    OptionSet set = loop_options(1.0);
    auto an = analyze_holding(mdp, set, 0, 0);
    CHECK(an.holding_class == HoldingClass::SubExponentialUnbounded);
    CHECK(an.spectral_radius == doctest::Approx(0.5).epsilon(1e-12));
    auto pmf = holding_pmf(an);
    for (std::size_t k = 0; k < 10; ++k) CHECK(pmf[k] == doctest::Approx(std::pow(0.5, k + 1)).epsilon(1e-12));
    CHECK(an.tail_mass < 1e-12);

    CompiledOptions co = compile(mdp, set);
    CHECK(co.model.expected_holding(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    // reward 1 on every loop step: E[tau] - 1
    CHECK(co.model.expected_reward(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::holds_alternative<std::monostate>(co.model.tail()));
}

TEST_CASE("conditional laws of a phase-type chain") {
    // the return option may stop in either state
    MdpModel mdp = loop_mdp();
    OptionSet set = loop_options(0.5);
    set.options[1].termination = {0.5, 0.5};
    auto ch = build_option_chain(mdp, set, 1, 1);
    // ends are sorted by base state
    REQUIRE(ch->end_states() == std::vector<StateId>{0, 1});
    Rng rng(31);
    const int N = 200000;
    for (std::size_t e = 0; e < 2; ++e) {
        double t = 0.0, t2 = 0.0, r = 0.0;
        for (int i = 0; i < N; ++i) {
            auto d = ch->sample_conditional(e, rng);
            t += d.holding;
            t2 += d.holding * d.holding;
            r += d.reward;
        }
        double m = t / N;
        CHECK(std::abs(m - ch->conditional_holding(e)) <= 4 * std::sqrt((t2 / N - m * m) / N));
        CHECK(r / N == doctest::Approx(ch->conditional_reward(e)).epsilon(0.02));
    }
    CHECK(ch->end_probability(0) + ch->end_probability(1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("options that never stop are rejected") {
    MdpModel mdp = loop_mdp();
    OptionSet set = loop_options(0.0);
    set.options[1].termination = {0.0, 0.0};
    CHECK_THROWS_AS(compile(mdp, set), ValidationError);
}

TEST_CASE("stopping where no option starts is rejected") {
    MdpModel mdp = loop_mdp();
    OptionSet set = loop_options(1.0);
    set.options[1].initiation = {0};
    set.options[1].policy = {0, kNoAction};
    CHECK_THROWS_AS(compile(mdp, set), ValidationError);
}

TEST_CASE("policy must cover reachable states") {
    MdpModel mdp = loop_mdp();
    OptionSet set = loop_options(1.0);
    set.options[0].termination = {0.0, 0.0};
    set.options[0].policy = {0, kNoAction};
    CHECK_THROWS_AS(compile(mdp, set), ValidationError);
}

TEST_CASE("fingerprint tracks the option set") {
    GridConfig c{5, 2, 1.0, OptionMode::Interruptible};
    OptionSet a = build_grid_options(c), b = build_grid_options(c);
    CHECK(fingerprint(a) == fingerprint(b));
    b.options[3].termination[4] = 0.25;
    CHECK(fingerprint(a) != fingerprint(b));
    CHECK(fingerprint(parse_options(dump_options(a))) == fingerprint(a));
}

TEST_CASE("lifted policy reproduces the option-level run") {
    GridConfig c{6, 3, 1.0, OptionMode::Interruptible};
    auto mdp = std::make_shared<const MdpModel>(build_grid_mdp(c));
    auto set = std::make_shared<const OptionSet>(build_grid_options(c));
    auto co = std::make_shared<const CompiledOptions>(compile(*mdp, *set));
    UniformizedMdp meq(co->model, default_tau(co->model));
    StationaryPolicy pi = value_iteration(meq, 1e-10).policy;

    OptionEnvironment env(mdp, set, co);
    Rng r1(41), r2(41);
    StateId x = 0;
    double t_opt = 0.0, r_opt = 0.0;
    for (int i = 0; i < 2000; ++i) {
        Transition t = env.step(x, pi.action[x], r1);
        t_opt += t.holding;
        r_opt += t.reward;
        x = t.next;
    }
    FlatController ctl = lift_policy(*mdp, *set, *co, pi);
    StateId s = 0;
    while (ctl.decisions() < 2000 || ctl.in_option()) {
        std::size_t a = ctl.act(s);
        Transition t = sample_transition(mdp->smdp(), s, a, r2);
        ctl.observe(t.next, t.reward, r2);
        s = t.next;
    }
    CHECK(ctl.time() == doctest::Approx(t_opt));
    CHECK(ctl.reward() == doctest::Approx(r_opt));
    CHECK(env.primitive_steps() == static_cast<std::uint64_t>(t_opt));
}
