#ifndef TARC_REWARDS_HPP_
#define TARC_REWARDS_HPP_

#include <array>

#include "tarc/common.hpp"

namespace tarc {

// Tolerance-shaped state reward: 1 inside [lo, hi], gaussian decay outside,
// reaching value_at_margin at a distance of `margin` past the bounds.
struct ToleranceSpec {
    double lo = 0.0;
    double hi = 0.0;
    double margin = 1.0;
    double value_at_margin = 0.1;

    void validate() const;
};

double tolerance(double distance, const ToleranceSpec& spec);

struct CarRewardConfig {
    double action_penalty_weight = 0.005;                       // w
    std::array<double, 6> target{0, 0, 0, 0, 0, 0};             // pose + zero velocities
    std::array<double, 6> distance_weights{1, 1, 1, 0.2, 0.2, 0.2};
    ToleranceSpec tol{0.0, 0.0, 20.0, 0.1};
};

// Weighted distance between a 6-D car state and the target pose. The heading
// component (index 2) uses the wrapped angular difference.
double car_state_distance(const std::array<double, 6>& x, const CarRewardConfig& cfg);

// r = tolerance(d(x, target)) - w * ||a||_2
double car_reward(const std::array<double, 6>& x, const Vec& action,
                  const CarRewardConfig& cfg);

}  // namespace tarc

#endif  // TARC_REWARDS_HPP_
