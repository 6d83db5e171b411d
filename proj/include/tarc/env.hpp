#ifndef TARC_ENV_HPP_
#define TARC_ENV_HPP_

#include <cstdint>

#include "tarc/common.hpp"

namespace tarc {

struct StepResult {
    Vec next_state;
    double reward = 0.0;
    bool done = false;
};

// Fixed-frequency environment contract. Episode-level randomness (sampled
// physics parameters, push schedules, initial pose) is fixed by reset(seed);
// step is then a pure function of (state, action, base-step index), so a
// transition can be replayed from any stored state.
class BaseEnv {
public:
    virtual ~BaseEnv() = default;

    virtual int state_dim() const = 0;
    virtual int action_dim() const = 0;
    virtual double f_max() const = 0;
    virtual int horizon() const = 0;

    // Resets episode-level sampled parameters and returns the initial state.
    // Equal seeds yield identical initial states and parameters.
    virtual Vec reset(uint64_t seed) = 0;

    // Advances one base step. `t` is the base-step index within the episode
    // (time is part of the augmented state). The `done` flag covers failure
    // terminations only; the time limit is enforced by the augmentation layer.
    virtual StepResult step(const Vec& state, const Vec& action, int t) const = 0;

    // Maps a raw state to what the policy observes (e.g. wrapped angles).
    virtual Vec make_observation(const Vec& state) const { return state; }

    // Whole-step actuation delay between command and execution, if any.
    virtual int action_delay_steps() const { return 0; }
};

}  // namespace tarc

#endif  // TARC_ENV_HPP_
