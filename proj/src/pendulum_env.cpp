#include "tarc/pendulum_env.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace tarc {

void PushSpec::validate(int horizon) const {
    for (size_t k = 0; k < events.size(); ++k) {
        if (events[k].step < 0 || events[k].step >= horizon) {
            throw std::invalid_argument("push schedule: step outside horizon");
        }
        if (k > 0 && events[k].step <= events[k - 1].step) {
            throw std::invalid_argument("push schedule: steps must be strictly increasing");
        }
    }
    if (random_count < 0) throw std::invalid_argument("push schedule: negative count");
    if (random_count > 0) {
        if (step_window[0] < 0 || step_window[1] >= horizon || step_window[0] > step_window[1]) {
            throw std::invalid_argument("push schedule: window outside horizon");
        }
        if (impulse_magnitude[0] > impulse_magnitude[1]) {
            throw std::invalid_argument("push schedule: bad impulse range");
        }
    }
    if (burst_gap[1] > 0 && (burst_gap[0] < 1 || burst_gap[0] > burst_gap[1])) {
        throw std::invalid_argument("push schedule: bad burst gap range");
    }
    if (burst_scale < 0.0) throw std::invalid_argument("push schedule: negative burst scale");
    if (burst_count < 0) throw std::invalid_argument("push schedule: negative burst count");
}

PendulumEnv::PendulumEnv(PendulumConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.push.validate(cfg_.horizon);
    cfg_.tol.validate();
    episode_pushes_ = cfg_.push.events;
}

Vec PendulumEnv::reset(uint64_t seed) {
    Rng rng(seed);
    Vec state(2);
    state[0] = rng.uniform(-cfg_.reset_angle_noise, cfg_.reset_angle_noise);
    state[1] = rng.uniform(-cfg_.reset_velocity_noise, cfg_.reset_velocity_noise);

    if (cfg_.push.random_count > 0) {
        std::set<int> steps;
        while (static_cast<int>(steps.size()) < cfg_.push.random_count) {
            steps.insert(rng.uniform_int(cfg_.push.step_window[0], cfg_.push.step_window[1]));
        }
        std::map<int, double> schedule;
        for (int s : steps) {
            const double mag =
                rng.uniform(cfg_.push.impulse_magnitude[0], cfg_.push.impulse_magnitude[1]);
            const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
            schedule[s] = sign * mag;
            if (cfg_.push.burst_gap[1] > 0) {
                int at = s;
                double impulse = sign * mag;
                for (int k = 0; k < cfg_.push.burst_count; ++k) {
                    at += rng.uniform_int(cfg_.push.burst_gap[0], cfg_.push.burst_gap[1]);
                    impulse *= cfg_.push.burst_scale;
                    if (at >= cfg_.horizon) break;
                    if (schedule.find(at) == schedule.end()) schedule[at] = impulse;
                }
            }
        }
        episode_pushes_.clear();
        for (const auto& [s, impulse] : schedule) episode_pushes_.push_back({s, impulse});
    } else {
        episode_pushes_ = cfg_.push.events;
    }
    return state;
}

StepResult PendulumEnv::step(const Vec& state, const Vec& action, int t) const {
    if (state.size() != 2 || action.size() != 1) {
        throw std::invalid_argument("pendulum env: state/action size mismatch");
    }
    double angle = state[0];
    double vel = state[1];
    for (const PushEvent& e : episode_pushes_) {
        if (e.step == t) vel += e.impulse;
    }

    const double torque = clamp(action[0], -1.0, 1.0) * cfg_.max_torque;
    const double ml2 = cfg_.mass * cfg_.length * cfg_.length;
    const double accel = (cfg_.gravity / cfg_.length) * std::sin(angle) +
                         (torque - cfg_.damping * vel) / ml2;
    const double dt = 1.0 / cfg_.f_max;
    vel += dt * accel;
    angle += dt * vel;

    StepResult res;
    res.next_state = {angle, vel};
    res.reward = tolerance(std::fabs(wrap_angle(angle)), cfg_.tol) -
                 cfg_.action_penalty_weight * std::fabs(clamp(action[0], -1.0, 1.0));
    res.done = false;
    return res;
}

Vec PendulumEnv::make_observation(const Vec& state) const {
    return {wrap_angle(state[0]), state[1]};
}

std::vector<FreqTracePoint> frequency_trace(const Trajectory& traj, double f_max,
                                            const std::vector<int>& push_steps) {
    std::vector<FreqTracePoint> trace;
    trace.reserve(traj.decisions.size());
    for (const Decision& d : traj.decisions) {
        FreqTracePoint p;
        p.step = d.state.t;
        p.time_s = static_cast<double>(d.state.t) / f_max;
        p.repeat = d.action.repeat;
        p.hz = frequency_of(d.action.repeat, f_max);
        for (int s : push_steps) {
            if (s >= d.state.t && s < d.state.t + d.transition.steps_consumed) {
                p.push = true;
            }
        }
        trace.push_back(p);
    }
    return trace;
}

std::vector<FreqTracePoint> perturbation_trace(PendulumEnv& env, const PolicyFn& policy,
                                               const AugmentConfig& cfg, uint64_t seed) {
    const Trajectory traj = rollout(env, policy, cfg, seed);
    std::vector<int> push_steps;
    for (const PushEvent& e : env.episode_pushes()) push_steps.push_back(e.step);
    return frequency_trace(traj, env.f_max(), push_steps);
}

}  // namespace tarc
