#ifndef TARC_CAR_ENV_HPP_
#define TARC_CAR_ENV_HPP_

#include <array>
#include <utility>

#include "tarc/env.hpp"
#include "tarc/rewards.hpp"
#include "tarc/rng.hpp"

namespace tarc {

// 6-D vehicle state: global position, heading, body-frame velocities, yaw
// rate. Heading is stored unwrapped; it is wrapped only for reward and
// observation.
struct CarState {
    double px = 0.0;
    double py = 0.0;
    double heading = 0.0;
    double vx = 0.0;
    double vy = 0.0;
    double yaw_rate = 0.0;

    std::array<double, 6> to_array() const { return {px, py, heading, vx, vy, yaw_rate}; }
    static CarState from_array(const std::array<double, 6>& a) {
        return {a[0], a[1], a[2], a[3], a[4], a[5]};
    }
};

struct PacejkaCoeffs {
    double stiffness_b = 10.0;
    double shape_c = 1.9;
    double peak_d = 1.0;  // set from friction and axle load, see finalize_tire_peaks
};

struct CarParams {
    double mass = 1.65;        // kg
    double inertia_z = 0.027;  // kg m^2
    double lf = 0.16;          // m, CoM to front axle
    double lr = 0.16;          // m, CoM to rear axle
    double max_steer = 0.35;   // rad
    double cm1 = 8.0;          // drivetrain: peak motor force
    double cm2 = 1.5;          // drivetrain: back-EMF slope
    double cd = 0.3;           // aerodynamic drag
    double croll = 0.5;        // rolling resistance
    double friction = 0.8;     // tire-road friction coefficient
    double blend_lo = 0.3;     // m/s, below: kinematic model
    double blend_hi = 0.6;     // m/s, above: dynamic model
    PacejkaCoeffs front;
    PacejkaCoeffs rear;

    void validate() const;
};

// Sets front/rear peak lateral force from friction and static axle loads.
void finalize_tire_peaks(CarParams& p);

CarParams nominal_car_params();

// Per-episode multiplicative sampling intervals around nominal values. Each
// interval must contain 1.0. The CoM interval scales the lf share of the
// (fixed) wheelbase.
struct DomainRandomizationSpec {
    std::array<double, 2> mass_range{0.85, 1.15};
    std::array<double, 2> motor_range{0.85, 1.15};      // cm1
    std::array<double, 2> stiffness_range{0.80, 1.20};  // Pacejka B, both axles
    std::array<double, 2> com_range{0.90, 1.10};        // lf fraction of wheelbase

    void validate() const;
};

CarParams sample_car_params(const CarParams& nominal, const DomainRandomizationSpec& dr,
                            Rng& rng);

// Normalized lateral force of the simplified magic formula: D sin(C atan(B a)).
double lateral_tire_force(double slip_angle, const PacejkaCoeffs& tire);

// Front and rear slip angles for the bicycle geometry at wheel angle `steer`.
std::pair<double, double> slip_angles(const CarState& x, double steer, const CarParams& p);

// Blended kinematic/dynamic bicycle-model state derivative.
CarState dynamics_derivative(const CarState& x, const Vec& action, const CarParams& p);

// Classical RK4 step with the action held constant.
CarState integrate_rk4(const CarState& x, const Vec& action, const CarParams& p, double dt);

// One control interval integrated as `substeps` RK4 steps. The tire model is
// stiff (cornering stiffness gives lateral poles of a few hundred 1/s), so a
// single RK4 step at 30 Hz is outside its stability region; throws on
// non-finite states mid-integration.
CarState integrate_control_step(const CarState& x, const Vec& action, const CarParams& p,
                                double dt, int substeps);

struct CarEnvConfig {
    CarParams nominal = nominal_car_params();
    DomainRandomizationSpec randomization;
    CarRewardConfig reward;
    double f_max = 30.0;
    int horizon = 200;
    int delay_steps = 3;          // 80 ms actuation delay rounded up to whole steps
    int integration_substeps = 10;
    double start_distance = 2.0;  // m from target
    double start_pos_noise = 0.1;
    double start_heading_noise = 0.1;
};

// Reverse-parking task: the car starts ~2 m from the target facing the
// opposite way and must end parked on the target pose. The environment state
// is 12-D: the 6-D vehicle state plus the last `delay_steps` commanded
// actions (oldest first); the action applied to the dynamics each step is the
// oldest buffered command.
class CarEnv : public BaseEnv {
public:
    explicit CarEnv(CarEnvConfig cfg);

    int state_dim() const override { return 6 + 2 * cfg_.delay_steps; }
    int action_dim() const override { return 2; }
    double f_max() const override { return cfg_.f_max; }
    int horizon() const override { return cfg_.horizon; }
    int action_delay_steps() const override { return cfg_.delay_steps; }

    Vec reset(uint64_t seed) override;
    StepResult step(const Vec& state, const Vec& action, int t) const override;
    Vec make_observation(const Vec& state) const override;

    const CarParams& episode_params() const { return params_; }
    const CarEnvConfig& config() const { return cfg_; }

private:
    CarEnvConfig cfg_;
    CarParams params_;  // sampled at reset
};

}  // namespace tarc

#endif  // TARC_CAR_ENV_HPP_
