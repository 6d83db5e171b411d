#include "tarc/rewards.hpp"

#include <cmath>
#include <stdexcept>

namespace tarc {

void ToleranceSpec::validate() const {
    if (lo > hi) throw std::invalid_argument("tolerance: lo must be <= hi");
    if (margin <= 0.0) throw std::invalid_argument("tolerance: margin must be > 0");
    if (!(value_at_margin > 0.0 && value_at_margin < 1.0)) {
        throw std::invalid_argument("tolerance: value_at_margin must be in (0, 1)");
    }
}

double tolerance(double distance, const ToleranceSpec& spec) {
    if (distance < 0.0) throw std::invalid_argument("tolerance: distance must be >= 0");
    if (distance >= spec.lo && distance <= spec.hi) return 1.0;
    const double excess = distance < spec.lo ? spec.lo - distance : distance - spec.hi;
    // Gaussian sigmoid scaled so the value at excess == margin is exactly
    // value_at_margin.
    const double scale = std::sqrt(-2.0 * std::log(spec.value_at_margin));
    const double z = excess / spec.margin * scale;
    return std::exp(-0.5 * z * z);
}

double car_state_distance(const std::array<double, 6>& x, const CarRewardConfig& cfg) {
    double s = 0.0;
    for (int j = 0; j < 6; ++j) {
        double diff = x[j] - cfg.target[j];
        if (j == 2) diff = wrap_angle(diff);
        const double wd = cfg.distance_weights[j] * diff;
        s += wd * wd;
    }
    return std::sqrt(s);
}

double car_reward(const std::array<double, 6>& x, const Vec& action,
                  const CarRewardConfig& cfg) {
    return tolerance(car_state_distance(x, cfg), cfg.tol) -
           cfg.action_penalty_weight * norm2(action);
}

}  // namespace tarc
