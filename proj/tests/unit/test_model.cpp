#include <cmath>

#include "doctest.h"
#include "../support/fixtures.hpp"
#include "smdp/model_io.hpp"

using namespace smdp;

namespace {

SmdpModel two_state_coupled() {
    std::vector<std::vector<ActionEntry>> acts(2);
    ActionEntry a0;
    a0.outcomes.push_back({1, 1.0, Dirac{0.0}, TwoPoint{1.0, 3.0, 0.25}});
    acts[0].push_back(a0);
    ActionEntry a1;
    a1.reward_rate = 1.0;
    a1.outcomes.push_back({0, 0.5, Dirac{0.0}, TwoPoint{1.0, 3.0, 0.25}});
    a1.outcomes.push_back({1, 0.5, Dirac{0.0}, TwoPoint{1.0, 3.0, 0.25}});
    acts[1].push_back(a1);
    return SmdpModel(std::move(acts));
}

} // namespace

TEST_CASE("distribution means") {
    CHECK(mean(PrimitiveDist{Dirac{2.5}}) == 2.5);
    // T_min + p (T_max - T_min) with T_min=1, T_max=3, p=1/4
    CHECK(mean(PrimitiveDist{TwoPoint{1.0, 3.0, 0.25}}) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(mean(PrimitiveDist{DiscreteTable{{1.0, 2.0, 4.0}, {0.5, 0.25, 0.25}}}) == doctest::Approx(2.0));
    CHECK(check_distribution(DiscreteTable{{1.0, 2.0}, {0.5, 0.4}}) != "");
    CHECK(check_distribution(TwoPoint{1.0, 2.0, 1.5}) != "");
    CHECK(check_distribution(TwoPoint{1.0, 2.0, 0.5}) == "");
}

TEST_CASE("two-point with a degenerate mass never consumes randomness") {
    Rng a(3), b(3);
    CHECK(sample(PrimitiveDist{TwoPoint{1.0, 3.0, 0.0}}, a) == 1.0);
    CHECK(sample(PrimitiveDist{TwoPoint{1.0, 3.0, 1.0}}, a) == 3.0);
    CHECK(a.uniform() == b.uniform());
}

TEST_CASE("expected reward and holding are outcome-weighted means") {
    SmdpModel m = fixtures::random_smdp(3, 2, 11);
    for (StateId s = 0; s < 3; ++s)
        for (std::size_t a = 0; a < 2; ++a) {
            double r = 0.0, t = 0.0;
            for (const auto& o : m.action(s, a).outcomes) {
                r += o.prob * mean(o.reward);
                t += o.prob * mean(o.holding);
            }
            CHECK(m.expected_reward(s, a) == doctest::Approx(r).epsilon(1e-14));
            CHECK(m.expected_holding(s, a) == doctest::Approx(t).epsilon(1e-14));
        }
}

TEST_CASE("reward rate couples reward to holding time") {
    SmdpModel m = two_state_coupled();
    // r = R_max * tau_bar with R_max = 1 and tau_bar = 1.5
    CHECK(m.expected_reward(1, 0) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(m.expected_reward(0, 0) == 0.0);
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        Transition t = sample_transition(m, 1, 0, rng);
        CHECK(t.reward == t.holding);
    }
}

TEST_CASE("derived bounds") {
    SmdpModel m = two_state_coupled();
    ModelBounds b = derive_bounds(m);
    CHECK(b.tau_min == doctest::Approx(1.5));
    CHECK(b.tau_max == doctest::Approx(1.5));
    CHECK(b.r_max == doctest::Approx(1.0));
}

TEST_CASE("validation reports corrupted models") {
    SmdpModel good = fixtures::three_state();
    CHECK(validate(good).ok());

    auto corrupt = [&](auto edit) {
        auto acts = good.actions();
        edit(acts);
        SmdpModel m(acts, good.bounds());
        return validate(m);
    };
    CHECK_FALSE(corrupt([](auto& a) { a[0][0].outcomes[0].prob = 0.7; }).ok());
    CHECK_FALSE(corrupt([](auto& a) { a[0][0].outcomes[0].next = 9; }).ok());
    CHECK_FALSE(corrupt([](auto& a) { a[1][0].outcomes[0].holding = Dirac{0.0}; }).ok());
    CHECK_FALSE(corrupt([](auto& a) { a[2][0].outcomes[0].reward = Dirac{-1.0}; }).ok());
    CHECK_FALSE(corrupt([](auto& a) { a[2][0].outcomes[0].reward = Dirac{100.0}; }).ok());
    CHECK_FALSE(corrupt([](auto& a) { a[1].clear(); }).ok());
    // cut every way into state 2
    auto rep = corrupt([](auto& a) {
        a[0][1].outcomes = {{1, 1.0, Dirac{0.0}, Dirac{2.0}}};
        a[1][0].outcomes = {{0, 1.0, Dirac{0.0}, Dirac{2.0}}};
        a[2][1].outcomes = {{1, 1.0, Dirac{0.0}, Dirac{2.0}}};
    });
    CHECK_FALSE(rep.ok());
    CHECK(rep.summary().find("communicating") != std::string::npos);
    CHECK_THROWS_AS(require_valid(SmdpModel{}), ValidationError);
}

TEST_CASE("MDP models require unit holding times") {
    CHECK_THROWS_AS(MdpModel(fixtures::three_state()), ValidationError);
}

TEST_CASE("sampler frequencies match the model") {
    SmdpModel m = fixtures::three_state();
    Rng rng(17);
    const int N = 200000;
    for (StateId s = 0; s < 3; ++s)
        for (std::size_t a = 0; a < 2; ++a) {
            std::vector<double> freq(3, 0.0);
            double r = 0.0, r2 = 0.0, t = 0.0, t2 = 0.0;
            for (int i = 0; i < N; ++i) {
                Transition x = sample_transition(m, s, a, rng);
                freq[x.next] += 1.0;
                r += x.reward;
                r2 += x.reward * x.reward;
                t += x.holding;
                t2 += x.holding * x.holding;
            }
            for (StateId y = 0; y < 3; ++y) {
                double p = m.transition_probability(s, a, y);
                double se = std::sqrt(std::max(p * (1 - p), 1e-12) / N);
                CHECK(std::abs(freq[y] / N - p) <= 4 * se + 1e-12);
            }
            double rm = r / N, tm = t / N;
            CHECK(std::abs(rm - m.expected_reward(s, a)) <= 4 * std::sqrt((r2 / N - rm * rm) / N) + 1e-12);
            CHECK(std::abs(tm - m.expected_holding(s, a)) <= 4 * std::sqrt((t2 / N - tm * tm) / N) + 1e-12);
        }
}

TEST_CASE("model files round-trip") {
    SmdpModel m = fixtures::three_state();
    std::string text = dump_model(m);
    SmdpModel back = parse_model(text);
    CHECK(dump_model(back) == text);
    CHECK(back.num_pairs() == m.num_pairs());
    for (StateId s = 0; s < 3; ++s)
        for (std::size_t a = 0; a < 2; ++a) {
            CHECK(back.expected_reward(s, a) == m.expected_reward(s, a));
            CHECK(back.expected_holding(s, a) == m.expected_holding(s, a));
        }
    CHECK(std::holds_alternative<BoundedTail>(back.tail()));

    SmdpModel c = two_state_coupled();
    CHECK(dump_model(parse_model(dump_model(c))) == dump_model(c));
}

TEST_CASE("malformed model files are rejected") {
    CHECK_THROWS_AS(parse_model("{"), ValidationError);
    CHECK_THROWS_AS(parse_model(R"({"format":"smdp-model","version":1,"states":[]})"), ValidationError);
    std::string text = dump_model(fixtures::three_state());
    auto pos = text.find("\"p\": 0.6");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 8, "\"p\": 0.65");
    CHECK_THROWS_AS(parse_model(text), ValidationError);
}

TEST_CASE("communication check") {
    CHECK(is_communicating(fixtures::three_state()));
    std::vector<std::vector<ActionEntry>> acts(2);
    acts[0].push_back({{{0, 1.0, Dirac{0.0}, Dirac{1.0}}}, std::nullopt, ""});
    acts[1].push_back({{{0, 1.0, Dirac{0.0}, Dirac{1.0}}}, std::nullopt, ""});
    CHECK_FALSE(is_communicating(SmdpModel(acts)));
}
