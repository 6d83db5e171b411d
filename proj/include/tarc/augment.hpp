#ifndef TARC_AUGMENT_HPP_
#define TARC_AUGMENT_HPP_

#include <functional>
#include <vector>

#include "tarc/env.hpp"

namespace tarc {

// Parameters of the time-adaptive extension of a base environment.
struct AugmentConfig {
    int max_repeat = 1;       // i: longest application duration in base steps
    double switch_cost = 0.0; // c: charged once per decision
    double discount = 1.0;    // gamma in (0, 1]

    void validate() const;
};

// State of the extended MDP: environment state plus the base-step index.
struct AugmentedState {
    Vec x;
    int t = 0;
};

// Decision of a time-adaptive policy: an action and how many base steps to
// hold it for.
struct AugmentedAction {
    Vec action;
    int repeat = 1;  // duration in {1..max_repeat}
};

struct AugmentedTransition {
    AugmentedState next;
    double reward = 0.0;             // sum of discounted base rewards minus switch cost
    std::vector<double> base_rewards;
    int steps_consumed = 0;
    bool done = false;
};

// Effective control frequency of a decision holding its action for `repeat`
// base steps: f_max / repeat.
double frequency_of(int repeat, double f_max);

// Feature vector for function approximators: the state followed by the
// normalized time index t/horizon.
Vec observe(const AugmentedState& s, int horizon);

// Observation as the policy sees it: env-mapped state plus normalized time.
Vec policy_observation(const BaseEnv& env, const AugmentedState& s);

// Executes one augmented decision: holds u.action constant for u.repeat base
// steps, accumulating discount^k-weighted base rewards in ascending k and
// subtracting the switch cost once. Stops early if the base env terminates or
// the episode horizon is reached mid-repeat.
AugmentedTransition augment_step(const BaseEnv& env, const AugmentedState& s,
                                 const AugmentedAction& u, const AugmentConfig& cfg);

struct Decision {
    AugmentedState state;
    AugmentedAction action;
    AugmentedTransition transition;
};

struct Trajectory {
    std::vector<Decision> decisions;

    int total_base_steps() const;
    double total_reward() const;  // sum of aggregated (switch-cost-penalized) rewards
};

using PolicyFn = std::function<AugmentedAction(const Vec& observation)>;

// Runs one full episode from reset(seed) until termination or the horizon.
Trajectory rollout(BaseEnv& env, const PolicyFn& policy, const AugmentConfig& cfg,
                   uint64_t seed);

}  // namespace tarc

#endif  // TARC_AUGMENT_HPP_
