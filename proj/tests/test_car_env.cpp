#include <cmath>

#include "doctest.h"
#include "tarc/augment.hpp"
#include "tarc/car_env.hpp"

using namespace tarc;

namespace {

// Term-by-term transcription of the blended bicycle model, written
// independently from the implementation for cross-checking.
CarState transcribed_derivative(const CarState& x, double steer_cmd, double throttle,
                                const CarParams& p) {
    const double steer = steer_cmd * p.max_steer;
    CarState d;
    d.px = x.vx * std::cos(x.heading) - x.vy * std::sin(x.heading);
    d.py = x.vx * std::sin(x.heading) + x.vy * std::cos(x.heading);
    d.heading = x.yaw_rate;

    auto sgn = [](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); };
    const double fx =
        (p.cm1 - p.cm2 * x.vx) * throttle - p.cd * x.vx * x.vx * sgn(x.vx) - p.croll * sgn(x.vx);

    double dvx_dyn = 0, dvy_dyn = 0, dw_dyn = 0;
    if (std::fabs(x.vx) > 1e-9) {
        const double af = std::atan((x.vy + p.lf * x.yaw_rate) / x.vx) - steer;
        const double ar = std::atan((x.vy - p.lr * x.yaw_rate) / x.vx);
        const double fyf =
            -p.front.peak_d * std::sin(p.front.shape_c * std::atan(p.front.stiffness_b * af));
        const double fyr =
            -p.rear.peak_d * std::sin(p.rear.shape_c * std::atan(p.rear.stiffness_b * ar));
        dvx_dyn = (fx - fyf * std::sin(steer)) / p.mass + x.vy * x.yaw_rate;
        dvy_dyn = (fyr + fyf * std::cos(steer)) / p.mass - x.vx * x.yaw_rate;
        dw_dyn = (p.lf * fyf * std::cos(steer) - p.lr * fyr) / p.inertia_z;
    }

    const double wb = p.lf + p.lr;
    const double dvx_kin = fx / p.mass;
    const double w_tgt = x.vx * std::tan(steer) / wb;
    const double dvy_kin =
        (p.lr * std::tan(steer) / wb) * dvx_kin + 10.0 * (p.lr * w_tgt - x.vy);
    const double dw_kin = (std::tan(steer) / wb) * dvx_kin + 10.0 * (w_tgt - x.yaw_rate);

    double lam = (std::fabs(x.vx) - p.blend_lo) / (p.blend_hi - p.blend_lo);
    lam = lam < 0 ? 0 : (lam > 1 ? 1 : lam);
    d.vx = lam * dvx_dyn + (1 - lam) * dvx_kin;
    d.vy = lam * dvy_dyn + (1 - lam) * dvy_kin;
    d.yaw_rate = lam * dw_dyn + (1 - lam) * dw_kin;
    return d;
}

CarState mirrored(const CarState& s) {
    return {s.px, -s.py, -s.heading, s.vx, -s.vy, -s.yaw_rate};
}

}  // namespace

TEST_CASE("lateral_tire_force: zero slip, frozen value, odd symmetry, saturation") {
    const PacejkaCoeffs tire{10.0, 1.9, 1.0};
    CHECK(lateral_tire_force(0.0, tire) == 0.0);
    // frozen from a scalar evaluation of D sin(C atan(B * 0.1))
    CHECK(lateral_tire_force(0.1, tire) == doctest::Approx(0.996917333733).epsilon(1e-10));

    Rng rng(1);
    for (int k = 0; k < 10000; ++k) {
        const double a = rng.uniform(-1.5, 1.5);
        const double f = lateral_tire_force(a, tire);
        CHECK(f == -lateral_tire_force(-a, tire));
        CHECK(std::fabs(f) <= tire.peak_d + 1e-12);
    }
}

TEST_CASE("slip_angles") {
    const CarParams p = nominal_car_params();

    SUBCASE("pure longitudinal motion has no slip") {
        const CarState x{0, 0, 0, 2.0, 0, 0};
        const auto [af, ar] = slip_angles(x, 0.0, p);
        CHECK(af == 0.0);
        CHECK(ar == 0.0);
    }
    SUBCASE("lateral velocity produces atan(vy/vx) at both axles") {
        const CarState x{0, 0, 0, 2.0, 0.2, 0};
        const auto [af, ar] = slip_angles(x, 0.0, p);
        CHECK(af == doctest::Approx(0.099668652491).epsilon(1e-10));
        CHECK(ar == doctest::Approx(0.099668652491).epsilon(1e-10));
    }
    SUBCASE("steering enters the front slip with negative sign") {
        const CarState x{0, 0, 0, 2.0, 0, 0};
        const auto [af, ar] = slip_angles(x, 0.2, p);
        CHECK(af == doctest::Approx(-0.2).epsilon(1e-12));
        CHECK(ar == 0.0);
    }
}

TEST_CASE("dynamics_derivative equilibrium and launch") {
    const CarParams p = nominal_car_params();
    SUBCASE("at rest with zero action the car stays put") {
        const CarState rest{1.0, -2.0, 0.4, 0, 0, 0};
        const CarState d = dynamics_derivative(rest, {0.0, 0.0}, p);
        CHECK(d.px == 0.0);
        CHECK(d.py == 0.0);
        CHECK(d.heading == 0.0);
        CHECK(d.vx == 0.0);
        CHECK(d.vy == 0.0);
        CHECK(d.yaw_rate == 0.0);
    }
    SUBCASE("full throttle at rest accelerates by cm1/m with no lateral terms") {
        const CarState rest{0, 0, 0, 0, 0, 0};
        const CarState d = dynamics_derivative(rest, {0.0, 1.0}, p);
        CHECK(d.vx == doctest::Approx(p.cm1 / p.mass).epsilon(1e-12));
        CHECK(d.vy == 0.0);
        CHECK(d.yaw_rate == 0.0);
    }
}

TEST_CASE("dynamics_derivative matches an independent transcription") {
    const CarParams p = nominal_car_params();
    Rng rng(17);
    for (int k = 0; k < 300; ++k) {
        const CarState x{rng.uniform(-3, 3),     rng.uniform(-3, 3), rng.uniform(-4, 4),
                         rng.uniform(-2.5, 2.5), rng.uniform(-1, 1), rng.uniform(-3, 3)};
        const double steer = rng.uniform(-1, 1), throttle = rng.uniform(-1, 1);
        const CarState got = dynamics_derivative(x, {steer, throttle}, p);
        const CarState want = transcribed_derivative(x, steer, throttle, p);
        CHECK(got.px == doctest::Approx(want.px).epsilon(1e-12));
        CHECK(got.py == doctest::Approx(want.py).epsilon(1e-12));
        CHECK(got.heading == doctest::Approx(want.heading).epsilon(1e-12));
        CHECK(got.vx == doctest::Approx(want.vx).epsilon(1e-12));
        CHECK(got.vy == doctest::Approx(want.vy).epsilon(1e-12));
        CHECK(got.yaw_rate == doctest::Approx(want.yaw_rate).epsilon(1e-12));
    }
}

TEST_CASE("integrate_rk4 basics") {
    CarParams p = nominal_car_params();
    SUBCASE("zero state, zero action is a fixed point") {
        const CarState out = integrate_rk4(CarState{}, {0.0, 0.0}, p, 1.0 / 30.0);
        CHECK(out.px == 0.0);
        CHECK(out.vx == 0.0);
        CHECK(out.yaw_rate == 0.0);
    }
    SUBCASE("coasting straight at constant speed advances px by vx*dt exactly") {
        p.cd = 0.0;
        p.croll = 0.0;  // no decel: vx stays constant
        const CarState x{0, 0, 0, 1.0, 0, 0};
        const CarState out = integrate_rk4(x, {0.0, 0.0}, p, 1.0 / 30.0);
        CHECK(out.px == doctest::Approx(1.0 / 30.0).epsilon(1e-14));
        CHECK(out.vx == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("integrate_rk4 agrees with 30 sub-steps of Euler on smooth regions") {
    // The smooth regime is straight-line driving: with the tire model engaged
    // the lateral dynamics are stiff (poles of a few hundred 1/s) and the
    // Euler reference itself is no longer 1e-4-accurate.
    const CarParams p = nominal_car_params();
    const double dt = 1.0 / 30.0;
    Rng rng(23);
    for (int trial = 0; trial < 40; ++trial) {
        const CarState x{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-3, 3),
                         rng.uniform(0.9, 2.5), 0.0, 0.0};
        const Vec a{0.0, rng.uniform(-0.8, 0.8)};

        CarState euler = x;
        const int n_sub = 30;
        for (int k = 0; k < n_sub; ++k) {
            const CarState d = dynamics_derivative(euler, a, p);
            euler.px += dt / n_sub * d.px;
            euler.py += dt / n_sub * d.py;
            euler.heading += dt / n_sub * d.heading;
            euler.vx += dt / n_sub * d.vx;
            euler.vy += dt / n_sub * d.vy;
            euler.yaw_rate += dt / n_sub * d.yaw_rate;
        }
        const CarState rk4 = integrate_rk4(x, a, p, dt);
        const double diff =
            std::sqrt(std::pow(rk4.px - euler.px, 2) + std::pow(rk4.py - euler.py, 2) +
                      std::pow(rk4.heading - euler.heading, 2) + std::pow(rk4.vx - euler.vx, 2) +
                      std::pow(rk4.vy - euler.vy, 2) + std::pow(rk4.yaw_rate - euler.yaw_rate, 2));
        const double scale = std::max(
            1.0, std::sqrt(euler.px * euler.px + euler.py * euler.py +
                           euler.heading * euler.heading + euler.vx * euler.vx +
                           euler.vy * euler.vy + euler.yaw_rate * euler.yaw_rate));
        CHECK(diff / scale < 1e-4);
    }
}

TEST_CASE("control-step integration is converged on drift states") {
    const CarParams p = nominal_car_params();
    const double dt = 1.0 / 30.0;
    Rng rng(29);
    for (int trial = 0; trial < 20; ++trial) {
        const CarState x{0, 0, rng.uniform(-3, 3),      rng.uniform(0.8, 2.5),
                         rng.uniform(-0.5, 0.5), rng.uniform(-3, 3)};
        const Vec a{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const CarState got = integrate_control_step(x, a, p, dt, 10);
        const CarState ref = integrate_control_step(x, a, p, dt, 1000);
        CHECK(std::fabs(got.vx - ref.vx) < 5e-5);
        CHECK(std::fabs(got.vy - ref.vy) < 5e-5);
        CHECK(std::fabs(got.yaw_rate - ref.yaw_rate) < 5e-4);
        CHECK(std::fabs(got.heading - ref.heading) < 5e-5);
    }
}

TEST_CASE("car_reset determinism and parameter sampling") {
    CarEnvConfig cfg;
    CarEnv env(cfg);

    SUBCASE("fixed seed reproduces state and params") {
        const Vec s1 = env.reset(1234);
        const CarParams p1 = env.episode_params();
        const Vec s2 = env.reset(1234);
        const CarParams p2 = env.episode_params();
        CHECK(s1 == s2);
        CHECK(p1.mass == p2.mass);
        CHECK(p1.cm1 == p2.cm1);
        CHECK(p1.front.stiffness_b == p2.front.stiffness_b);
        CHECK(p1.lf == p2.lf);
    }
    SUBCASE("degenerate ranges reproduce the nominal parameters exactly") {
        CarEnvConfig fixed = cfg;
        fixed.randomization = DomainRandomizationSpec{{1, 1}, {1, 1}, {1, 1}, {1, 1}};
        CarEnv fixed_env(fixed);
        fixed_env.reset(7);
        const CarParams p = fixed_env.episode_params();
        CHECK(p.mass == cfg.nominal.mass);
        CHECK(p.cm1 == cfg.nominal.cm1);
        CHECK(p.front.stiffness_b == cfg.nominal.front.stiffness_b);
        CHECK(p.lf == cfg.nominal.lf);
    }
    SUBCASE("1000 resets keep every sampled parameter inside its interval") {
        for (int k = 0; k < 1000; ++k) {
            env.reset(k);
            const CarParams p = env.episode_params();
            CHECK(p.mass >= cfg.nominal.mass * cfg.randomization.mass_range[0] - 1e-12);
            CHECK(p.mass <= cfg.nominal.mass * cfg.randomization.mass_range[1] + 1e-12);
            CHECK(p.cm1 >= cfg.nominal.cm1 * cfg.randomization.motor_range[0] - 1e-12);
            CHECK(p.cm1 <= cfg.nominal.cm1 * cfg.randomization.motor_range[1] + 1e-12);
            CHECK(p.front.stiffness_b >=
                  cfg.nominal.front.stiffness_b * cfg.randomization.stiffness_range[0] - 1e-12);
            CHECK(p.front.stiffness_b <=
                  cfg.nominal.front.stiffness_b * cfg.randomization.stiffness_range[1] + 1e-12);
        }
    }
    SUBCASE("start pose is ~2 m out, facing away") {
        const Vec s = env.reset(99);
        CHECK(s[0] == doctest::Approx(2.0).epsilon(0.1));
        CHECK(std::fabs(s[1]) <= cfg.start_pos_noise + 1e-12);
        CHECK(s[2] == doctest::Approx(M_PI).epsilon(0.05));
        CHECK(s[3] == 0.0);
        for (int j = 6; j < 12; ++j) CHECK(s[j] == 0.0);
    }
}

TEST_CASE("car_step applies the delayed action and shifts the buffer") {
    CarEnvConfig cfg;
    cfg.randomization = DomainRandomizationSpec{{1, 1}, {1, 1}, {1, 1}, {1, 1}};
    CarEnv env(cfg);
    Vec state = env.reset(3);
    const Vec big{0.9, 1.0};

    // first delay_steps steps: dynamics see the zero action regardless of command
    for (int t = 0; t < cfg.delay_steps; ++t) {
        const StepResult res = env.step(state, big, t);
        std::array<double, 6> x6;
        for (int j = 0; j < 6; ++j) x6[j] = state[j];
        const CarState want = integrate_control_step(CarState::from_array(x6), {0.0, 0.0},
                                                     env.episode_params(), 1.0 / 30.0,
                                                     cfg.integration_substeps);
        CHECK(res.next_state[3] == want.vx);
        CHECK(res.next_state[2] == want.heading);
        state = res.next_state;
    }
    // buffer is now saturated with the command; applied action equals it
    const StepResult res = env.step(state, big, cfg.delay_steps);
    std::array<double, 6> x6;
    for (int j = 0; j < 6; ++j) x6[j] = state[j];
    const CarState want = integrate_control_step(CarState::from_array(x6), big,
                                                 env.episode_params(), 1.0 / 30.0,
                                                 cfg.integration_substeps);
    CHECK(res.next_state[3] == want.vx);
    CHECK(res.next_state[5] == want.yaw_rate);

    // buffer contents are exactly the last three commands, oldest first
    CHECK(res.next_state[6] == big[0]);
    CHECK(res.next_state[10] == big[0]);
    CHECK(res.next_state[11] == big[1]);
}

TEST_CASE("car observation is 12-D, 13 with the time feature, heading wrapped") {
    CarEnvConfig cfg;
    CarEnv env(cfg);
    CHECK(env.state_dim() == 12);
    Vec state = env.reset(0);
    state[2] = 3.0 * M_PI + 0.1;  // unwrapped heading
    const Vec obs = env.make_observation(state);
    CHECK(obs.size() == 12);
    CHECK(obs[2] == doctest::Approx(M_PI + 0.1 - 2 * M_PI).epsilon(1e-12));
    const Vec full = policy_observation(env, AugmentedState{state, 100});
    CHECK(full.size() == 13);
    CHECK(full[12] == 0.5);
}

TEST_CASE("mirror symmetry: reflected commands give the reflected trajectory") {
    CarEnvConfig cfg;
    cfg.randomization = DomainRandomizationSpec{{1, 1}, {1, 1}, {1, 1}, {1, 1}};
    cfg.start_pos_noise = 0.0;
    cfg.start_heading_noise = 0.0;
    CarEnv env(cfg);

    Vec s = env.reset(0);
    Vec sm = s;  // mirrored start (py, heading, vy, w negated; here zero/pi anyway)
    sm[1] = -sm[1];
    sm[2] = -sm[2];
    sm[4] = -sm[4];
    sm[5] = -sm[5];

    Rng rng(31);
    for (int t = 0; t < 60; ++t) {
        const double steer = rng.uniform(-1, 1), throttle = rng.uniform(-1, 1);
        const StepResult a = env.step(s, {steer, throttle}, t);
        const StepResult b = env.step(sm, {-steer, throttle}, t);
        CHECK(b.next_state[0] == doctest::Approx(a.next_state[0]).epsilon(1e-9));
        CHECK(b.next_state[1] == doctest::Approx(-a.next_state[1]).epsilon(1e-9));
        CHECK(b.next_state[2] == doctest::Approx(-a.next_state[2]).epsilon(1e-9));
        CHECK(b.next_state[3] == doctest::Approx(a.next_state[3]).epsilon(1e-9));
        CHECK(b.next_state[4] == doctest::Approx(-a.next_state[4]).epsilon(1e-9));
        CHECK(b.next_state[5] == doctest::Approx(-a.next_state[5]).epsilon(1e-9));
        s = a.next_state;
        sm = b.next_state;
    }
}

TEST_CASE("car_step determinism: same seed and commands, same trajectory bits") {
    CarEnvConfig cfg;
    CarEnv env(cfg);
    auto run = [&env](uint64_t seed) {
        Vec s = env.reset(seed);
        Rng rng(seed + 1);
        for (int t = 0; t < 50; ++t) {
            s = env.step(s, {rng.uniform(-1, 1), rng.uniform(-1, 1)}, t).next_state;
        }
        return s;
    };
    CHECK(run(5) == run(5));
}

TEST_CASE("non-finite integration terminates the episode") {
    CarEnvConfig cfg;
    CarEnv env(cfg);
    Vec state = env.reset(0);
    state[3] = 1e300;  // absurd speed: drag force overflows
    const StepResult res = env.step(state, {0.0, 0.0}, 0);
    CHECK(res.done);
}

TEST_CASE("at-rest state with zero buffer is a fixed point of car_step") {
    CarEnvConfig cfg;
    CarEnv env(cfg);
    env.reset(0);
    const Vec rest(12, 0.0);
    const StepResult res = env.step(rest, {0.0, 0.0}, 0);
    for (int j = 0; j < 12; ++j) CHECK(res.next_state[j] == 0.0);
}
