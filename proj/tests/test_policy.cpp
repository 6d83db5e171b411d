#include <cmath>

#include "doctest.h"
#include "tarc/policy.hpp"

using namespace tarc;

namespace {

PolicyConfig small_cfg() {
    PolicyConfig cfg;
    cfg.obs_dim = 4;
    cfg.action_dim = 2;
    cfg.max_repeat = 4;
    cfg.hidden = {8, 8};
    return cfg;
}

double fd_grad_policy(PolicyParams& p, int k, const std::function<double()>& f,
                      double h = 1e-5) {
    double* target = nullptr;
    int idx = 0;
    for_each_param(p, [&](double& v) {
        if (idx == k) target = &v;
        ++idx;
    });
    const double saved = *target;
    *target = saved + h;
    const double up = f();
    *target = saved - h;
    const double down = f();
    *target = saved;
    return (up - down) / (2.0 * h);
}

void check_rel(double analytic, double fd) {
    CHECK(std::fabs(analytic - fd) <=
          1e-4 * std::max({std::fabs(analytic), std::fabs(fd), 1e-4}));
}

}  // namespace

TEST_CASE("zero weights give uniform duration probabilities") {
    const PolicyConfig cfg = small_cfg();
    const PolicyParams p = make_policy_params(cfg);
    const PolicyOutput out = policy_forward(p, Vec(4, 0.3));
    REQUIRE(out.dur_probs.size() == 4);
    for (double prob : out.dur_probs) CHECK(prob == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(out.mean == Vec{0.0, 0.0});
}

TEST_CASE("max_repeat 1 yields a degenerate duration head") {
    PolicyConfig cfg = small_cfg();
    cfg.max_repeat = 1;
    const PolicyParams p = init_policy_params(cfg, 3);
    const PolicyOutput out = policy_forward(p, Vec(4, 0.1));
    REQUIRE(out.dur_probs.size() == 1);
    CHECK(out.dur_probs[0] == 1.0);
    CHECK(out.dur_log_probs[0] == 0.0);

    // and sampling consumes no randomness for the duration
    Rng r1(9), r2(9);
    const SampledDecision d = policy_sample(out, r1);
    CHECK(d.repeat == 1);
    r2.normal();
    r2.normal();  // the two action dims
    CHECK(r1.next_u64() == r2.next_u64());
}

TEST_CASE("forward output is finite, probabilities sum to 1, forward is pure") {
    const PolicyConfig cfg = small_cfg();
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const PolicyParams p = init_policy_params(cfg, trial);
        Vec obs(4);
        for (double& o : obs) o = rng.uniform(-2, 2);
        const PolicyOutput out = policy_forward(p, obs);
        double sum = 0.0;
        for (double prob : out.dur_probs) {
            CHECK(std::isfinite(prob));
            CHECK(prob >= 0.0);
            sum += prob;
        }
        CHECK(std::fabs(sum - 1.0) < 1e-6);
        for (double s : out.std_dev) CHECK(s > 0.0);
        CHECK(std::isfinite(out.value));

        const PolicyOutput again = policy_forward(p, obs);
        CHECK(out.mean == again.mean);
        CHECK(out.dur_probs == again.dur_probs);
        CHECK(out.value == again.value);
    }
}

TEST_CASE("sampling: degenerate cases") {
    SUBCASE("vanishing std gives the mean action") {
        PolicyConfig cfg = small_cfg();
        PolicyParams p = init_policy_params(cfg, 0);
        for (double& ls : p.log_std) ls = -40.0;  // clamped to -5: std ~ 6.7e-3
        // drive the limit directly through the output
        PolicyOutput out = policy_forward(p, Vec(4, 0.2));
        for (double& s : out.std_dev) s = 0.0;
        Rng rng(1);
        const SampledDecision d = policy_sample(out, rng);
        CHECK(d.action == out.mean);
    }
    SUBCASE("deterministic duration category") {
        PolicyOutput out;
        out.mean = {0.0};
        out.log_std = {0.0};
        out.std_dev = {1.0};
        out.dur_probs = {1.0, 0.0, 0.0};
        out.dur_log_probs = {0.0, -1e9, -1e9};
        Rng rng(2);
        for (int k = 0; k < 20; ++k) {
            const SampledDecision d = policy_sample(out, rng);
            CHECK(d.repeat == 1);
        }
    }
}

TEST_CASE("empirical duration frequencies match probabilities within 3 sigma") {
    const PolicyConfig cfg = small_cfg();
    const PolicyParams p = init_policy_params(cfg, 42);
    const PolicyOutput out = policy_forward(p, Vec(4, 0.5));
    const int n = 100000;
    std::vector<int> counts(4, 0);
    Rng rng(7);
    for (int k = 0; k < n; ++k) counts[policy_sample(out, rng).repeat - 1] += 1;
    for (int j = 0; j < 4; ++j) {
        const double prob = out.dur_probs[j];
        const double sigma = std::sqrt(prob * (1 - prob) * n);
        CHECK(std::fabs(counts[j] - prob * n) <= 3.0 * sigma);
    }
}

TEST_CASE("re-evaluating a sampled pair reproduces the log-prob exactly") {
    const PolicyConfig cfg = small_cfg();
    const PolicyParams p = init_policy_params(cfg, 8);
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        Vec obs(4);
        for (double& o : obs) o = rng.uniform(-1, 1);
        const SampledDecision d = policy_sample(policy_forward(p, obs), rng);
        const auto [lp, entropy] = log_prob_and_entropy(p, obs, d.action, d.repeat);
        CHECK(lp == d.log_prob);
        CHECK(std::isfinite(entropy));
    }
}

TEST_CASE("uniform duration head over 4 choices has categorical entropy ln 4") {
    const PolicyConfig cfg = small_cfg();
    const PolicyParams p = make_policy_params(cfg);  // zero weights: uniform head
    const auto [lp, entropy] = log_prob_and_entropy(p, Vec(4, 0.0), {0.0, 0.0}, 2);
    // subtract the Gaussian part to isolate the categorical entropy
    const double gauss = 2 * (0.5 + 0.5 * std::log(2.0 * M_PI) + 0.0);
    CHECK(entropy - gauss == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    CHECK(lp < 0.0);
}

TEST_CASE("log_prob_and_entropy rejects out-of-range durations") {
    const PolicyConfig cfg = small_cfg();
    const PolicyParams p = init_policy_params(cfg, 0);
    CHECK_THROWS_AS(log_prob_and_entropy(p, Vec(4, 0.0), {0.0, 0.0}, 0), std::invalid_argument);
    CHECK_THROWS_AS(log_prob_and_entropy(p, Vec(4, 0.0), {0.0, 0.0}, 5), std::invalid_argument);
}

TEST_CASE("log-prob, entropy and value gradients match finite differences") {
    const PolicyConfig cfg = small_cfg();
    PolicyParams p = init_policy_params(cfg, 19);
    Rng rng(31);
    Vec obs(4), action(2);
    for (double& o : obs) o = rng.uniform(-1, 1);
    for (double& a : action) a = rng.uniform(-1, 1);
    const int repeat = 3;

    const PolicyEval ev = policy_eval(p, obs, action, repeat);

    PolicyParams g_logp = make_policy_params(cfg);
    policy_backward(p, ev, 1.0, 0.0, 0.0, g_logp);
    PolicyParams g_entropy = make_policy_params(cfg);
    policy_backward(p, ev, 0.0, 1.0, 0.0, g_entropy);
    PolicyParams g_value = make_policy_params(cfg);
    policy_backward(p, ev, 0.0, 0.0, 1.0, g_value);

    const Vec flat_logp = flatten_params(g_logp);
    const Vec flat_entropy = flatten_params(g_entropy);
    const Vec flat_value = flatten_params(g_value);

    const int n = param_count(p);
    Rng pick(77);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = pick.uniform_int(0, n - 1);
        check_rel(flat_logp[k], fd_grad_policy(p, k, [&]() {
                      return policy_eval(p, obs, action, repeat).log_prob;
                  }));
        check_rel(flat_entropy[k], fd_grad_policy(p, k, [&]() {
                      return policy_eval(p, obs, action, repeat).entropy;
                  }));
        check_rel(flat_value[k], fd_grad_policy(p, k, [&]() {
                      return policy_eval(p, obs, action, repeat).value;
                  }));
    }
}

TEST_CASE("flatten/unflatten round-trips parameters") {
    const PolicyConfig cfg = small_cfg();
    PolicyParams p = init_policy_params(cfg, 2);
    const Vec flat = flatten_params(p);
    PolicyParams q = make_policy_params(cfg);
    unflatten_params(flat, q);
    CHECK(flatten_params(q) == flat);
    CHECK(param_count(p) == static_cast<int>(flat.size()));
}
