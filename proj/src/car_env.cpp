#include "tarc/car_env.hpp"

#include <cmath>
#include <stdexcept>

namespace tarc {

namespace {

constexpr double kGravity = 9.81;

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

CarState scale_add(const CarState& x, const CarState& d, double h) {
    return {x.px + h * d.px,           x.py + h * d.py, x.heading + h * d.heading,
            x.vx + h * d.vx,           x.vy + h * d.vy, x.yaw_rate + h * d.yaw_rate};
}

}  // namespace

void CarParams::validate() const {
    if (mass <= 0.0 || inertia_z <= 0.0 || lf <= 0.0 || lr <= 0.0) {
        throw std::invalid_argument("car params: masses, inertias, lengths must be > 0");
    }
    if (blend_lo >= blend_hi) {
        throw std::invalid_argument("car params: blend_lo must be < blend_hi");
    }
    for (const PacejkaCoeffs* t : {&front, &rear}) {
        if (t->stiffness_b <= 0.0 || t->shape_c <= 0.0 || t->peak_d <= 0.0) {
            throw std::invalid_argument("car params: Pacejka B, C, D must be > 0");
        }
    }
}

void finalize_tire_peaks(CarParams& p) {
    const double wheelbase = p.lf + p.lr;
    p.front.peak_d = p.friction * p.mass * kGravity * (p.lr / wheelbase);
    p.rear.peak_d = p.friction * p.mass * kGravity * (p.lf / wheelbase);
}

CarParams nominal_car_params() {
    CarParams p;
    finalize_tire_peaks(p);
    p.validate();
    return p;
}

void DomainRandomizationSpec::validate() const {
    for (const auto* r : {&mass_range, &motor_range, &stiffness_range, &com_range}) {
        if ((*r)[0] > (*r)[1] || (*r)[0] > 1.0 || (*r)[1] < 1.0) {
            throw std::invalid_argument(
                "domain randomization: each interval must contain 1.0");
        }
        if ((*r)[0] <= 0.0) {
            throw std::invalid_argument("domain randomization: bounds must be > 0");
        }
    }
}

CarParams sample_car_params(const CarParams& nominal, const DomainRandomizationSpec& dr,
                            Rng& rng) {
    CarParams p = nominal;
    p.mass = nominal.mass * rng.uniform(dr.mass_range[0], dr.mass_range[1]);
    p.cm1 = nominal.cm1 * rng.uniform(dr.motor_range[0], dr.motor_range[1]);
    const double b_scale = rng.uniform(dr.stiffness_range[0], dr.stiffness_range[1]);
    p.front.stiffness_b = nominal.front.stiffness_b * b_scale;
    p.rear.stiffness_b = nominal.rear.stiffness_b * b_scale;
    const double wheelbase = nominal.lf + nominal.lr;
    p.lf = nominal.lf * rng.uniform(dr.com_range[0], dr.com_range[1]);
    p.lr = wheelbase - p.lf;
    finalize_tire_peaks(p);
    p.validate();
    return p;
}

double lateral_tire_force(double slip_angle, const PacejkaCoeffs& tire) {
    return tire.peak_d * std::sin(tire.shape_c * std::atan(tire.stiffness_b * slip_angle));
}

std::pair<double, double> slip_angles(const CarState& x, double steer, const CarParams& p) {
    const double af = std::atan((x.vy + p.lf * x.yaw_rate) / x.vx) - steer;
    const double ar = std::atan((x.vy - p.lr * x.yaw_rate) / x.vx);
    return {af, ar};
}

CarState dynamics_derivative(const CarState& x, const Vec& action, const CarParams& p) {
    if (!std::isfinite(x.px + x.py + x.heading + x.vx + x.vy + x.yaw_rate)) {
        throw std::invalid_argument("car dynamics: non-finite state");
    }
    const double steer = clamp(action[0], -1.0, 1.0) * p.max_steer;
    const double throttle = clamp(action[1], -1.0, 1.0);

    CarState d;
    const double cos_h = std::cos(x.heading);
    const double sin_h = std::sin(x.heading);
    d.px = x.vx * cos_h - x.vy * sin_h;
    d.py = x.vx * sin_h + x.vy * cos_h;
    d.heading = x.yaw_rate;

    const double fx = (p.cm1 - p.cm2 * x.vx) * throttle - p.cd * x.vx * x.vx * sign_of(x.vx) -
                      p.croll * sign_of(x.vx);

    // Dynamic branch: Pacejka lateral forces at each axle. With slip angles
    // measured velocity-minus-steer, the tire force opposes the slip.
    const double speed = std::fabs(x.vx);
    double dvx_dyn = 0.0, dvy_dyn = 0.0, dw_dyn = 0.0;
    if (speed > 1e-9) {
        const auto [af, ar] = slip_angles(x, steer, p);
        const double fyf = -lateral_tire_force(af, p.front);
        const double fyr = -lateral_tire_force(ar, p.rear);
        dvx_dyn = (fx - fyf * std::sin(steer)) / p.mass + x.vy * x.yaw_rate;
        dvy_dyn = (fyr + fyf * std::cos(steer)) / p.mass - x.vx * x.yaw_rate;
        dw_dyn = (p.lf * fyf * std::cos(steer) - p.lr * fyr) / p.inertia_z;
    }

    // Kinematic branch: longitudinal force only, with lateral velocity and yaw
    // rate relaxed toward the no-slip bicycle geometry.
    const double wheelbase = p.lf + p.lr;
    const double dvx_kin = fx / p.mass;
    const double w_target = x.vx * std::tan(steer) / wheelbase;
    const double vy_target = p.lr * w_target;
    constexpr double relax_rate = 10.0;  // 1/s
    const double dvy_kin = (p.lr * std::tan(steer) / wheelbase) * dvx_kin +
                           relax_rate * (vy_target - x.vy);
    const double dw_kin = (std::tan(steer) / wheelbase) * dvx_kin +
                          relax_rate * (w_target - x.yaw_rate);

    const double lam = clamp((speed - p.blend_lo) / (p.blend_hi - p.blend_lo), 0.0, 1.0);
    d.vx = lam * dvx_dyn + (1.0 - lam) * dvx_kin;
    d.vy = lam * dvy_dyn + (1.0 - lam) * dvy_kin;
    d.yaw_rate = lam * dw_dyn + (1.0 - lam) * dw_kin;
    return d;
}

CarState integrate_rk4(const CarState& x, const Vec& action, const CarParams& p, double dt) {
    const CarState k1 = dynamics_derivative(x, action, p);
    const CarState k2 = dynamics_derivative(scale_add(x, k1, dt / 2.0), action, p);
    const CarState k3 = dynamics_derivative(scale_add(x, k2, dt / 2.0), action, p);
    const CarState k4 = dynamics_derivative(scale_add(x, k3, dt), action, p);
    CarState out = x;
    out.px += dt / 6.0 * (k1.px + 2.0 * k2.px + 2.0 * k3.px + k4.px);
    out.py += dt / 6.0 * (k1.py + 2.0 * k2.py + 2.0 * k3.py + k4.py);
    out.heading += dt / 6.0 * (k1.heading + 2.0 * k2.heading + 2.0 * k3.heading + k4.heading);
    out.vx += dt / 6.0 * (k1.vx + 2.0 * k2.vx + 2.0 * k3.vx + k4.vx);
    out.vy += dt / 6.0 * (k1.vy + 2.0 * k2.vy + 2.0 * k3.vy + k4.vy);
    out.yaw_rate += dt / 6.0 * (k1.yaw_rate + 2.0 * k2.yaw_rate + 2.0 * k3.yaw_rate + k4.yaw_rate);
    return out;
}

CarState integrate_control_step(const CarState& x, const Vec& action, const CarParams& p,
                                double dt, int substeps) {
    CarState out = x;
    for (int k = 0; k < substeps; ++k) out = integrate_rk4(out, action, p, dt / substeps);
    return out;
}

CarEnv::CarEnv(CarEnvConfig cfg) : cfg_(std::move(cfg)), params_(cfg_.nominal) {
    cfg_.nominal.validate();
    cfg_.randomization.validate();
    cfg_.reward.tol.validate();
    if (cfg_.delay_steps < 0) throw std::invalid_argument("car env: delay_steps must be >= 0");
    if (cfg_.integration_substeps < 1) {
        throw std::invalid_argument("car env: integration_substeps must be >= 1");
    }
}

Vec CarEnv::reset(uint64_t seed) {
    Rng rng(seed);
    params_ = sample_car_params(cfg_.nominal, cfg_.randomization, rng);

    CarState s;
    s.px = cfg_.reward.target[0] + cfg_.start_distance +
           rng.uniform(-cfg_.start_pos_noise, cfg_.start_pos_noise);
    s.py = cfg_.reward.target[1] + rng.uniform(-cfg_.start_pos_noise, cfg_.start_pos_noise);
    s.heading = cfg_.reward.target[2] + M_PI +
                rng.uniform(-cfg_.start_heading_noise, cfg_.start_heading_noise);

    Vec state(state_dim(), 0.0);
    const auto arr = s.to_array();
    for (int j = 0; j < 6; ++j) state[j] = arr[j];
    return state;  // delay buffer zero-initialized
}

StepResult CarEnv::step(const Vec& state, const Vec& action, int /*t*/) const {
    if (static_cast<int>(state.size()) != state_dim() ||
        static_cast<int>(action.size()) != action_dim()) {
        throw std::invalid_argument("car env: state/action size mismatch");
    }
    const Vec commanded{clamp(action[0], -1.0, 1.0), clamp(action[1], -1.0, 1.0)};
    const Vec applied{state[6], state[7]};  // oldest buffered command

    std::array<double, 6> arr;
    for (int j = 0; j < 6; ++j) arr[j] = state[j];

    StepResult res;
    std::array<double, 6> next_arr;
    bool finite = true;
    try {
        const CarState next = integrate_control_step(CarState::from_array(arr), applied,
                                                     params_, 1.0 / cfg_.f_max,
                                                     cfg_.integration_substeps);
        next_arr = next.to_array();
        for (double v : next_arr) finite = finite && std::isfinite(v);
    } catch (const std::invalid_argument&) {
        finite = false;  // state blew up mid-integration
    }
    if (!finite) {
        // Integration failure: terminate the episode.
        res.next_state = state;
        res.reward = 0.0;
        res.done = true;
        return res;
    }

    res.next_state.resize(state_dim());
    for (int j = 0; j < 6; ++j) res.next_state[j] = next_arr[j];
    // Shift the delay buffer and append the new command.
    for (int j = 6; j < state_dim() - 2; ++j) res.next_state[j] = state[j + 2];
    res.next_state[state_dim() - 2] = commanded[0];
    res.next_state[state_dim() - 1] = commanded[1];

    res.reward = car_reward(next_arr, commanded, cfg_.reward);
    res.done = false;  // the time limit is handled by the augmentation layer
    return res;
}

Vec CarEnv::make_observation(const Vec& state) const {
    Vec obs = state;
    obs[2] = wrap_angle(obs[2]);
    return obs;
}

}  // namespace tarc
