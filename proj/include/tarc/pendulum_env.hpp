#ifndef TARC_PENDULUM_ENV_HPP_
#define TARC_PENDULUM_ENV_HPP_

#include <array>
#include <vector>

#include "tarc/augment.hpp"
#include "tarc/env.hpp"
#include "tarc/rewards.hpp"
#include "tarc/rng.hpp"

namespace tarc {

struct PushEvent {
    int step = 0;       // base-step index at which the impulse is applied
    double impulse = 0; // rad/s added to the angular velocity
};

// Angular-velocity perturbations for an episode. Either an explicit list of
// events, or a per-episode random draw (random_count > 0) of that many pushes
// with uniform magnitude in impulse_magnitude and random sign, at distinct
// steps inside step_window.
// With max_torque 2.5 against gravity m*g*L = 9.81, the upright equilibrium
// can only absorb impulses up to ~0.8 rad/s before the fall becomes
// unrecoverable; the default magnitudes stay below that.
//
// When burst_gap is set, each random push spawns a same-sign follow-up
// impulse (scaled by burst_scale) a few steps later, modeling a shove spread
// over ~100-200 ms. Mid-recovery impulses are where reaction latency decides
// the outcome, so bursts reward fast re-decisions much more than single kicks.
struct PushSpec {
    std::vector<PushEvent> events;
    int random_count = 0;
    std::array<double, 2> impulse_magnitude{0.4, 0.8};
    std::array<int, 2> step_window{100, 900};
    std::array<int, 2> burst_gap{0, 0};  // steps between follow-ups; {0,0} = off
    int burst_count = 1;                 // follow-ups per push when bursts are on
    double burst_scale = 0.6;            // per-follow-up magnitude decay

    void validate(int horizon) const;
};

struct PendulumConfig {
    double mass = 1.0;
    double length = 1.0;
    double gravity = 9.81;
    double max_torque = 2.5;
    double damping = 0.1;
    double f_max = 50.0;
    int horizon = 1000;
    double reset_angle_noise = 0.1;     // rad around upright
    double reset_velocity_noise = 0.1;  // rad/s
    PushSpec push;
    ToleranceSpec tol{0.0, 0.0, M_PI / 2.0, 0.1};
    double action_penalty_weight = 0.005;
};

// Torque-limited pendulum stabilized around upright (angle 0), with optional
// scheduled pushes. State is (angle, angular velocity); integration is
// semi-implicit Euler at 1/f_max.
class PendulumEnv : public BaseEnv {
public:
    explicit PendulumEnv(PendulumConfig cfg);

    int state_dim() const override { return 2; }
    int action_dim() const override { return 1; }
    double f_max() const override { return cfg_.f_max; }
    int horizon() const override { return cfg_.horizon; }

    Vec reset(uint64_t seed) override;
    StepResult step(const Vec& state, const Vec& action, int t) const override;
    Vec make_observation(const Vec& state) const override;

    const std::vector<PushEvent>& episode_pushes() const { return episode_pushes_; }
    const PendulumConfig& config() const { return cfg_; }

private:
    PendulumConfig cfg_;
    std::vector<PushEvent> episode_pushes_;  // fixed at reset
};

struct FreqTracePoint {
    int step = 0;        // base-step index at which the decision starts
    double time_s = 0.0; // step / f_max
    int repeat = 1;
    double hz = 0.0;
    bool push = false;   // a scheduled push fell inside this decision's window
};

// Runs one episode and returns the per-decision frequency trace annotated
// with the episode's push times.
std::vector<FreqTracePoint> perturbation_trace(PendulumEnv& env, const PolicyFn& policy,
                                               const AugmentConfig& cfg, uint64_t seed);

std::vector<FreqTracePoint> frequency_trace(const Trajectory& traj, double f_max,
                                            const std::vector<int>& push_steps);

}  // namespace tarc

#endif  // TARC_PENDULUM_ENV_HPP_
