#include <cmath>

#include "doctest.h"
#include "tarc/augment.hpp"
#include "tarc/pendulum_env.hpp"
#include "test_support.hpp"

using namespace tarc;
using test::EarlyStopEnv;
using test::ToyEnv;
using test::naive_augment_step;

TEST_CASE("frequency_of") {
    CHECK(frequency_of(1, 30.0) == 30.0);
    CHECK(frequency_of(10, 30.0) == 3.0);
    CHECK(frequency_of(4, 50.0) == 12.5);
    CHECK_THROWS_AS(frequency_of(0, 30.0), std::invalid_argument);
    CHECK_THROWS_AS(frequency_of(-2, 30.0), std::invalid_argument);

    for (int repeat = 1; repeat <= 10; ++repeat) {
        const double f = frequency_of(repeat, 30.0);
        CHECK(f >= 30.0 / 10 - 1e-12);
        CHECK(f <= 30.0 + 1e-12);
    }
}

TEST_CASE("observe concatenates state and normalized time") {
    CHECK(observe({{0.0, 0.0}, 0}, 200) == Vec{0.0, 0.0, 0.0});
    CHECK(observe({{1.0, 2.0}, 100}, 200) == Vec{1.0, 2.0, 0.5});
    CHECK(observe({{1.0}, 200}, 200) == Vec{1.0, 1.0});
}

TEST_CASE("augment_step constant-reward examples") {
    ToyEnv env(50, 1.0);  // base reward identically 1
    const AugmentedState s{env.reset(0), 0};

    SUBCASE("gamma 1, repeat 3, cost 0.1") {
        const AugmentConfig cfg{3, 0.1, 1.0};
        const auto tr = augment_step(env, s, {{0.2}, 3}, cfg);
        CHECK(tr.reward == doctest::Approx(2.9).epsilon(1e-15));
        CHECK(tr.steps_consumed == 3);
        CHECK(tr.next.t == 3);
    }
    SUBCASE("gamma 0.5, repeat 3, cost 0") {
        const AugmentConfig cfg{3, 0.0, 0.5};
        const auto tr = augment_step(env, s, {{0.2}, 3}, cfg);
        CHECK(tr.reward == doctest::Approx(1.75).epsilon(1e-15));
    }
}

TEST_CASE("augment_step with repeat 1 and no cost equals one base step") {
    ToyEnv env;
    const AugmentedState s{env.reset(7), 0};
    const Vec action{0.37};
    const AugmentConfig cfg{1, 0.0, 1.0};
    const auto tr = augment_step(env, s, {action, 1}, cfg);
    const StepResult base = env.step(s.x, action, 0);
    CHECK(tr.next.x == base.next_state);
    CHECK(tr.reward == base.reward);
    CHECK(tr.steps_consumed == 1);
}

TEST_CASE("augment_step matches the naive-loop oracle bit-exactly") {
    ToyEnv env;
    Rng rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        env.reset(trial);
        const AugmentedState s{{rng.uniform(-1, 1), rng.uniform(-1, 1)},
                               rng.uniform_int(0, env.horizon() - 1)};
        const int max_repeat = rng.uniform_int(1, 10);
        const AugmentConfig cfg{max_repeat, rng.uniform(0.0, 0.5), rng.uniform(0.1, 1.0)};
        const AugmentedAction u{{rng.uniform(-1, 1)}, rng.uniform_int(1, max_repeat)};
        const auto got = augment_step(env, s, u, cfg);
        const auto want = naive_augment_step(env, s, u, cfg);
        CHECK(got.reward == want.reward);
        CHECK(got.next.x == want.next.x);
        CHECK(got.next.t == want.next.t);
        CHECK(got.steps_consumed == want.steps_consumed);
        CHECK(got.base_rewards == want.base_rewards);
        CHECK(got.done == want.done);
    }
}

TEST_CASE("augment_step on the pendulum matches the oracle for repeat 4") {
    PendulumEnv env{PendulumConfig{}};
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        env.reset(trial);
        const AugmentedState s{{rng.uniform(-1, 1), rng.uniform(-2, 2)}, 10 * trial};
        const AugmentConfig cfg{4, 0.1, 0.99};
        const AugmentedAction u{{rng.uniform(-1, 1)}, 4};
        const auto got = augment_step(env, s, u, cfg);
        const auto want = naive_augment_step(env, s, u, cfg);
        CHECK(got.reward == want.reward);
        CHECK(got.next.x == want.next.x);
    }
}

TEST_CASE("augment_step rejects bad durations and terminal states") {
    ToyEnv env;
    const AugmentedState s{env.reset(0), 0};
    const AugmentConfig cfg{4, 0.0, 1.0};
    CHECK_THROWS_AS(augment_step(env, s, {{0.0}, 0}, cfg), std::invalid_argument);
    CHECK_THROWS_AS(augment_step(env, s, {{0.0}, 5}, cfg), std::invalid_argument);
    const AugmentedState terminal{s.x, env.horizon()};
    CHECK_THROWS_AS(augment_step(env, terminal, {{0.0}, 1}, cfg), std::invalid_argument);
}

TEST_CASE("augment_step stops early on done and still charges the switch cost") {
    EarlyStopEnv env;
    const AugmentedState s{env.reset(0), 0};
    const AugmentConfig cfg{8, 0.25, 1.0};
    // action 1.0 crosses the 2.5 threshold after 3 steps
    const auto tr = augment_step(env, s, {{1.0}, 8}, cfg);
    CHECK(tr.steps_consumed == 3);
    CHECK(tr.done);
    CHECK(tr.reward == doctest::Approx(3.0 - 0.25).epsilon(1e-15));
    CHECK(tr.next.t == 3);
}

TEST_CASE("augment_step truncates at the horizon mid-repeat") {
    ToyEnv env(50, 1.0);
    const AugmentedState s{env.reset(0), 48};
    const AugmentConfig cfg{10, 0.0, 1.0};
    const auto tr = augment_step(env, s, {{0.0}, 10}, cfg);
    CHECK(tr.steps_consumed == 2);
    CHECK(tr.next.t == 50);
    CHECK(tr.done);
}

TEST_CASE("rollout decision counts for constant durations") {
    ToyEnv env(200);
    const AugmentConfig cfg{3, 0.0, 1.0};

    SUBCASE("repeat 1 gives one decision per base step") {
        const auto traj = rollout(
            env, [](const Vec&) { return AugmentedAction{{0.1}, 1}; }, {1, 0.0, 1.0}, 5);
        CHECK(traj.decisions.size() == 200);
        CHECK(traj.total_base_steps() == 200);
    }
    SUBCASE("repeat 3 gives ceil(200/3) decisions, last consuming 2") {
        const auto traj = rollout(
            env, [](const Vec&) { return AugmentedAction{{0.1}, 3}; }, cfg, 5);
        CHECK(traj.decisions.size() == 67);
        CHECK(traj.decisions.back().transition.steps_consumed == 2);
        CHECK(traj.total_base_steps() == 200);
    }
}

TEST_CASE("rollout is deterministic given seed and policy") {
    ToyEnv env(100);
    const AugmentConfig cfg{4, 0.05, 0.99};
    auto policy = [](const Vec& obs) {
        const double a = std::sin(17.0 * obs[0] + 3.0 * obs[1]);
        return AugmentedAction{{a}, 1 + static_cast<int>(std::fabs(a) * 3.9)};
    };
    const auto t1 = rollout(env, policy, cfg, 99);
    const auto t2 = rollout(env, policy, cfg, 99);
    REQUIRE(t1.decisions.size() == t2.decisions.size());
    for (size_t k = 0; k < t1.decisions.size(); ++k) {
        CHECK(t1.decisions[k].transition.reward == t2.decisions[k].transition.reward);
        CHECK(t1.decisions[k].transition.next.x == t2.decisions[k].transition.next.x);
    }
}

TEST_CASE("rollout invariants: time monotone, penalty accounting, frequency bound") {
    ToyEnv env(100);
    const AugmentConfig cfg{5, 0.13, 1.0};
    Rng rng(11);
    auto policy = [&rng](const Vec&) {
        return AugmentedAction{{rng.uniform(-1, 1)}, rng.uniform_int(1, 5)};
    };
    const auto traj = rollout(env, policy, cfg, 4);

    int prev_t = -1;
    double unpenalized = 0.0;
    for (const Decision& d : traj.decisions) {
        CHECK(d.state.t > prev_t);
        prev_t = d.state.t;
        CHECK(d.transition.next.t <= env.horizon());
        const double f = frequency_of(d.action.repeat, env.f_max());
        CHECK(f >= env.f_max() / cfg.max_repeat - 1e-12);
        CHECK(f <= env.f_max() + 1e-12);
        for (double r : d.transition.base_rewards) unpenalized += r;
    }
    const double penalized = traj.total_reward();
    CHECK(penalized ==
          doctest::Approx(unpenalized - cfg.switch_cost * traj.decisions.size()).epsilon(1e-12));
}

TEST_CASE("baseline reduction: i=1, c=0 rollout equals the un-augmented loop") {
    ToyEnv env(80);
    const AugmentConfig cfg{1, 0.0, 1.0};
    auto act = [](const Vec& obs) { return std::tanh(obs[0] - obs[1]); };
    const auto traj = rollout(
        env, [&act](const Vec& obs) { return AugmentedAction{{act(obs)}, 1}; }, cfg, 21);

    // plain-environment transcription
    Vec x = env.reset(21);
    double total = 0.0;
    int steps = 0;
    for (int t = 0; t < env.horizon(); ++t) {
        const Vec obs = observe({env.make_observation(x), t}, env.horizon());
        const StepResult res = env.step(x, {act(obs)}, t);
        total += res.reward;
        x = res.next_state;
        ++steps;
    }
    CHECK(traj.decisions.size() == static_cast<size_t>(steps));
    CHECK(traj.total_reward() == total);
    CHECK(traj.decisions.back().transition.next.x == x);
}
