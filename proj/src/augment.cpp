#include "tarc/augment.hpp"

#include <stdexcept>

namespace tarc {

void AugmentConfig::validate() const {
    if (max_repeat < 1) throw std::invalid_argument("augment: max_repeat must be >= 1");
    if (switch_cost < 0.0) throw std::invalid_argument("augment: switch_cost must be >= 0");
    if (!(discount > 0.0 && discount <= 1.0)) {
        throw std::invalid_argument("augment: discount must be in (0, 1]");
    }
}

double frequency_of(int repeat, double f_max) {
    if (repeat <= 0) throw std::invalid_argument("frequency_of: repeat must be >= 1");
    if (f_max <= 0.0) throw std::invalid_argument("frequency_of: f_max must be > 0");
    return f_max / repeat;
}

Vec observe(const AugmentedState& s, int horizon) {
    Vec obs = s.x;
    obs.push_back(static_cast<double>(s.t) / static_cast<double>(horizon));
    return obs;
}

Vec policy_observation(const BaseEnv& env, const AugmentedState& s) {
    AugmentedState mapped{env.make_observation(s.x), s.t};
    return observe(mapped, env.horizon());
}

AugmentedTransition augment_step(const BaseEnv& env, const AugmentedState& s,
                                 const AugmentedAction& u, const AugmentConfig& cfg) {
    if (u.repeat < 1 || u.repeat > cfg.max_repeat) {
        throw std::invalid_argument("augment_step: duration outside {1..max_repeat}");
    }
    if (s.t >= env.horizon()) {
        throw std::invalid_argument("augment_step: called on a terminal state");
    }

    AugmentedTransition tr;
    Vec x = s.x;
    int t = s.t;
    double total = 0.0;
    double disc = 1.0;
    bool env_done = false;
    for (int k = 0; k < u.repeat; ++k) {
        StepResult res = env.step(x, u.action, t);
        tr.base_rewards.push_back(res.reward);
        total = total + disc * res.reward;
        disc *= cfg.discount;
        x = std::move(res.next_state);
        t += 1;
        if (res.done) {
            env_done = true;
            break;
        }
        if (t >= env.horizon()) break;
    }
    tr.steps_consumed = t - s.t;
    tr.reward = total - cfg.switch_cost;
    tr.next = AugmentedState{std::move(x), t};
    tr.done = env_done || t >= env.horizon();
    return tr;
}

int Trajectory::total_base_steps() const {
    int n = 0;
    for (const Decision& d : decisions) n += d.transition.steps_consumed;
    return n;
}

double Trajectory::total_reward() const {
    double r = 0.0;
    for (const Decision& d : decisions) r += d.transition.reward;
    return r;
}

Trajectory rollout(BaseEnv& env, const PolicyFn& policy, const AugmentConfig& cfg,
                   uint64_t seed) {
    cfg.validate();
    Trajectory traj;
    AugmentedState s{env.reset(seed), 0};
    while (s.t < env.horizon()) {
        AugmentedAction u = policy(policy_observation(env, s));
        AugmentedTransition tr = augment_step(env, s, u, cfg);
        AugmentedState next = tr.next;
        traj.decisions.push_back(Decision{std::move(s), std::move(u), std::move(tr)});
        if (traj.decisions.back().transition.done) break;
        s = std::move(next);
    }
    return traj;
}

}  // namespace tarc
