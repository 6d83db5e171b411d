#include "tarc/config.hpp"

#include <fstream>

namespace tarc {

namespace {

using nlohmann::json;

const json* find(const json& j, const std::string& key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double get_num(const json& j, const std::string& path, const std::string& key, double dflt) {
    const json* v = find(j, key);
    if (!v) return dflt;
    if (!v->is_number()) throw ConfigError(path + key, "expected a number");
    return v->get<double>();
}

int get_int(const json& j, const std::string& path, const std::string& key, int dflt) {
    const json* v = find(j, key);
    if (!v) return dflt;
    if (!v->is_number_integer()) throw ConfigError(path + key, "expected an integer");
    return v->get<int>();
}

long get_long(const json& j, const std::string& path, const std::string& key, long dflt) {
    const json* v = find(j, key);
    if (!v) return dflt;
    if (!v->is_number_integer()) throw ConfigError(path + key, "expected an integer");
    return v->get<long>();
}

std::string get_str(const json& j, const std::string& path, const std::string& key,
                    const std::string& dflt) {
    const json* v = find(j, key);
    if (!v) return dflt;
    if (!v->is_string()) throw ConfigError(path + key, "expected a string");
    return v->get<std::string>();
}

template <size_t N>
void get_range(const json& j, const std::string& path, const std::string& key,
               std::array<double, N>& out) {
    const json* v = find(j, key);
    if (!v) return;
    if (!v->is_array() || v->size() != N) {
        throw ConfigError(path + key, "expected an array of " + std::to_string(N) + " numbers");
    }
    for (size_t k = 0; k < N; ++k) out[k] = (*v)[k].get<double>();
}

void parse_augment(const json& j, AugmentConfig& cfg) {
    cfg.max_repeat = get_int(j, "augment.", "max_repeat", cfg.max_repeat);
    cfg.switch_cost = get_num(j, "augment.", "switch_cost", cfg.switch_cost);
    cfg.discount = get_num(j, "augment.", "discount", cfg.discount);
    try {
        cfg.validate();
    } catch (const std::exception& ex) {
        throw ConfigError("augment", ex.what());
    }
}

void parse_ppo(const json& j, PPOConfig& cfg) {
    cfg.gae_lambda = get_num(j, "ppo.", "gae_lambda", cfg.gae_lambda);
    cfg.clip_eps = get_num(j, "ppo.", "clip_eps", cfg.clip_eps);
    cfg.learning_rate = get_num(j, "ppo.", "learning_rate", cfg.learning_rate);
    cfg.epochs = get_int(j, "ppo.", "epochs", cfg.epochs);
    cfg.minibatch_size = get_int(j, "ppo.", "minibatch_size", cfg.minibatch_size);
    cfg.entropy_coef = get_num(j, "ppo.", "entropy_coef", cfg.entropy_coef);
    cfg.value_coef = get_num(j, "ppo.", "value_coef", cfg.value_coef);
    cfg.num_envs = get_int(j, "ppo.", "num_envs", cfg.num_envs);
    cfg.total_env_steps = get_long(j, "ppo.", "total_env_steps", cfg.total_env_steps);
    cfg.steps_per_env = get_int(j, "ppo.", "steps_per_env", cfg.steps_per_env);
    cfg.collect_workers = get_int(j, "ppo.", "collect_workers", cfg.collect_workers);
    try {
        cfg.validate();
    } catch (const std::exception& ex) {
        throw ConfigError("ppo", ex.what());
    }
}

void parse_push(const json& j, PushSpec& push, int horizon) {
    if (const json* ev = find(j, "events")) {
        if (!ev->is_array()) throw ConfigError("push.events", "expected an array");
        push.events.clear();
        for (const json& e : *ev) {
            if (!e.is_array() || e.size() != 2) {
                throw ConfigError("push.events", "each event is [step, impulse]");
            }
            push.events.push_back({e[0].get<int>(), e[1].get<double>()});
        }
    }
    push.random_count = get_int(j, "push.", "random_count", push.random_count);
    get_range(j, "push.", "impulse_magnitude", push.impulse_magnitude);
    std::array<double, 2> window{static_cast<double>(push.step_window[0]),
                                 static_cast<double>(push.step_window[1])};
    get_range(j, "push.", "step_window", window);
    push.step_window = {static_cast<int>(window[0]), static_cast<int>(window[1])};
    std::array<double, 2> gap{static_cast<double>(push.burst_gap[0]),
                              static_cast<double>(push.burst_gap[1])};
    get_range(j, "push.", "burst_gap", gap);
    push.burst_gap = {static_cast<int>(gap[0]), static_cast<int>(gap[1])};
    push.burst_count = get_int(j, "push.", "burst_count", push.burst_count);
    push.burst_scale = get_num(j, "push.", "burst_scale", push.burst_scale);
    try {
        push.validate(horizon);
    } catch (const std::exception& ex) {
        throw ConfigError("push", ex.what());
    }
}

void parse_pendulum(const json& j, PendulumConfig& cfg) {
    cfg.mass = get_num(j, "pendulum.", "mass", cfg.mass);
    cfg.length = get_num(j, "pendulum.", "length", cfg.length);
    cfg.gravity = get_num(j, "pendulum.", "gravity", cfg.gravity);
    cfg.max_torque = get_num(j, "pendulum.", "max_torque", cfg.max_torque);
    cfg.damping = get_num(j, "pendulum.", "damping", cfg.damping);
    cfg.f_max = get_num(j, "pendulum.", "f_max", cfg.f_max);
    cfg.horizon = get_int(j, "pendulum.", "horizon", cfg.horizon);
    cfg.reset_angle_noise = get_num(j, "pendulum.", "reset_angle_noise", cfg.reset_angle_noise);
    cfg.reset_velocity_noise =
        get_num(j, "pendulum.", "reset_velocity_noise", cfg.reset_velocity_noise);
    cfg.tol.margin = get_num(j, "pendulum.", "tolerance_margin", cfg.tol.margin);
    cfg.tol.value_at_margin =
        get_num(j, "pendulum.", "tolerance_value_at_margin", cfg.tol.value_at_margin);
    cfg.action_penalty_weight =
        get_num(j, "pendulum.", "action_penalty_weight", cfg.action_penalty_weight);
    if (const json* p = find(j, "push")) parse_push(*p, cfg.push, cfg.horizon);
}

void parse_car(const json& j, CarEnvConfig& cfg) {
    if (const json* p = find(j, "params")) {
        CarParams& cp = cfg.nominal;
        cp.mass = get_num(*p, "car.params.", "mass", cp.mass);
        cp.inertia_z = get_num(*p, "car.params.", "inertia_z", cp.inertia_z);
        cp.lf = get_num(*p, "car.params.", "lf", cp.lf);
        cp.lr = get_num(*p, "car.params.", "lr", cp.lr);
        cp.max_steer = get_num(*p, "car.params.", "max_steer", cp.max_steer);
        cp.cm1 = get_num(*p, "car.params.", "cm1", cp.cm1);
        cp.cm2 = get_num(*p, "car.params.", "cm2", cp.cm2);
        cp.cd = get_num(*p, "car.params.", "cd", cp.cd);
        cp.croll = get_num(*p, "car.params.", "croll", cp.croll);
        cp.friction = get_num(*p, "car.params.", "friction", cp.friction);
        cp.blend_lo = get_num(*p, "car.params.", "blend_lo", cp.blend_lo);
        cp.blend_hi = get_num(*p, "car.params.", "blend_hi", cp.blend_hi);
        cp.front.stiffness_b = get_num(*p, "car.params.", "pacejka_b", cp.front.stiffness_b);
        cp.rear.stiffness_b = cp.front.stiffness_b;
        cp.front.shape_c = get_num(*p, "car.params.", "pacejka_c", cp.front.shape_c);
        cp.rear.shape_c = cp.front.shape_c;
        finalize_tire_peaks(cp);
        try {
            cp.validate();
        } catch (const std::exception& ex) {
            throw ConfigError("car.params", ex.what());
        }
    }
    if (const json* r = find(j, "randomization")) {
        get_range(*r, "car.randomization.", "mass_range", cfg.randomization.mass_range);
        get_range(*r, "car.randomization.", "motor_range", cfg.randomization.motor_range);
        get_range(*r, "car.randomization.", "stiffness_range",
                  cfg.randomization.stiffness_range);
        get_range(*r, "car.randomization.", "com_range", cfg.randomization.com_range);
        try {
            cfg.randomization.validate();
        } catch (const std::exception& ex) {
            throw ConfigError("car.randomization", ex.what());
        }
    }
    if (const json* r = find(j, "reward")) {
        cfg.reward.action_penalty_weight =
            get_num(*r, "car.reward.", "action_penalty_weight", cfg.reward.action_penalty_weight);
        cfg.reward.tol.margin = get_num(*r, "car.reward.", "tolerance_margin", cfg.reward.tol.margin);
        cfg.reward.tol.value_at_margin = get_num(*r, "car.reward.", "tolerance_value_at_margin",
                                                 cfg.reward.tol.value_at_margin);
        if (const json* t = find(*r, "target")) {
            if (!t->is_array() || t->size() != 6) {
                throw ConfigError("car.reward.target", "expected 6 numbers");
            }
            for (int k = 0; k < 6; ++k) cfg.reward.target[k] = (*t)[k].get<double>();
        }
        if (const json* w = find(*r, "distance_weights")) {
            if (!w->is_array() || w->size() != 6) {
                throw ConfigError("car.reward.distance_weights", "expected 6 numbers");
            }
            for (int k = 0; k < 6; ++k) cfg.reward.distance_weights[k] = (*w)[k].get<double>();
        }
    }
    cfg.f_max = get_num(j, "car.", "f_max", cfg.f_max);
    cfg.horizon = get_int(j, "car.", "horizon", cfg.horizon);
    cfg.delay_steps = get_int(j, "car.", "delay_steps", cfg.delay_steps);
    cfg.integration_substeps = get_int(j, "car.", "integration_substeps",
                                       cfg.integration_substeps);
    cfg.start_distance = get_num(j, "car.", "start_distance", cfg.start_distance);
    cfg.start_pos_noise = get_num(j, "car.", "start_pos_noise", cfg.start_pos_noise);
    cfg.start_heading_noise = get_num(j, "car.", "start_heading_noise", cfg.start_heading_noise);
}

}  // namespace

std::string variant_label(const AugmentConfig& cfg) {
    if (cfg.max_repeat == 1 && cfg.switch_cost == 0.0) return "baseline";
    return "TARC-" + std::to_string(cfg.max_repeat);
}

RunConfig parse_run_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("(root)", "config must be a JSON object");
    RunConfig cfg;
    cfg.env_id = get_str(j, "", "env", "");
    if (cfg.env_id != "car" && cfg.env_id != "pendulum") {
        throw ConfigError("env", "must be \"car\" or \"pendulum\"");
    }
    cfg.out_dir = get_str(j, "", "out_dir", cfg.out_dir);

    const json* seeds = find(j, "seeds");
    if (!seeds) throw ConfigError("seeds", "missing required field");
    if (!seeds->is_array() || seeds->empty()) {
        throw ConfigError("seeds", "must be a non-empty array of integers");
    }
    cfg.seeds.clear();
    for (const json& s : *seeds) {
        if (!s.is_number_integer()) throw ConfigError("seeds", "entries must be integers");
        cfg.seeds.push_back(s.get<uint64_t>());
    }

    if (const json* a = find(j, "augment")) parse_augment(*a, cfg.augment);
    if (const json* p = find(j, "ppo")) parse_ppo(*p, cfg.ppo);
    cfg.ppo.gamma = cfg.augment.discount;  // shared discount

    if (const json* n = find(j, "network")) {
        if (const json* h = find(*n, "hidden")) {
            if (!h->is_array() || h->empty()) {
                throw ConfigError("network.hidden", "expected a non-empty array");
            }
            cfg.hidden.clear();
            for (const json& v : *h) cfg.hidden.push_back(v.get<int>());
        }
    }
    if (const json* e = find(j, "eval")) {
        cfg.eval_episodes = get_int(*e, "eval.", "episodes", cfg.eval_episodes);
    }
    if (cfg.eval_episodes <= 0) throw ConfigError("eval.episodes", "must be > 0");

    if (cfg.env_id == "pendulum") {
        if (const json* p = find(j, "pendulum")) parse_pendulum(*p, cfg.pendulum);
    } else if (const json* c = find(j, "car")) {
        parse_car(*c, cfg.car);
    }
    cfg.run_name = get_str(j, "", "run_name", variant_label(cfg.augment));
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("(file)", "cannot open config file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& ex) {
        throw ConfigError("(file)", std::string("invalid JSON: ") + ex.what());
    }
    return parse_run_config(j);
}

nlohmann::json run_config_to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["env"] = cfg.env_id;
    j["run_name"] = cfg.run_name;
    j["out_dir"] = cfg.out_dir;
    j["seeds"] = cfg.seeds;
    j["augment"] = {{"max_repeat", cfg.augment.max_repeat},
                    {"switch_cost", cfg.augment.switch_cost},
                    {"discount", cfg.augment.discount}};
    j["ppo"] = {{"gae_lambda", cfg.ppo.gae_lambda},
                {"clip_eps", cfg.ppo.clip_eps},
                {"learning_rate", cfg.ppo.learning_rate},
                {"epochs", cfg.ppo.epochs},
                {"minibatch_size", cfg.ppo.minibatch_size},
                {"entropy_coef", cfg.ppo.entropy_coef},
                {"value_coef", cfg.ppo.value_coef},
                {"num_envs", cfg.ppo.num_envs},
                {"total_env_steps", cfg.ppo.total_env_steps},
                {"steps_per_env", cfg.ppo.steps_per_env},
                {"collect_workers", cfg.ppo.collect_workers}};
    j["network"] = {{"hidden", network_hidden(cfg)}};
    j["eval"] = {{"episodes", cfg.eval_episodes}};
    if (cfg.env_id == "pendulum") {
        const PendulumConfig& p = cfg.pendulum;
        nlohmann::json events = nlohmann::json::array();
        for (const PushEvent& e : p.push.events) {
            events.push_back({e.step, e.impulse});
        }
        j["pendulum"] = {{"mass", p.mass},
                         {"length", p.length},
                         {"gravity", p.gravity},
                         {"max_torque", p.max_torque},
                         {"damping", p.damping},
                         {"f_max", p.f_max},
                         {"horizon", p.horizon},
                         {"reset_angle_noise", p.reset_angle_noise},
                         {"reset_velocity_noise", p.reset_velocity_noise},
                         {"tolerance_margin", p.tol.margin},
                         {"tolerance_value_at_margin", p.tol.value_at_margin},
                         {"action_penalty_weight", p.action_penalty_weight},
                         {"push",
                          {{"events", events},
                           {"random_count", p.push.random_count},
                           {"impulse_magnitude", p.push.impulse_magnitude},
                           {"step_window", p.push.step_window},
                           {"burst_gap", p.push.burst_gap},
                           {"burst_count", p.push.burst_count},
                           {"burst_scale", p.push.burst_scale}}}};
    } else {
        const CarEnvConfig& c = cfg.car;
        j["car"] = {
            {"params",
             {{"mass", c.nominal.mass},
              {"inertia_z", c.nominal.inertia_z},
              {"lf", c.nominal.lf},
              {"lr", c.nominal.lr},
              {"max_steer", c.nominal.max_steer},
              {"cm1", c.nominal.cm1},
              {"cm2", c.nominal.cm2},
              {"cd", c.nominal.cd},
              {"croll", c.nominal.croll},
              {"friction", c.nominal.friction},
              {"blend_lo", c.nominal.blend_lo},
              {"blend_hi", c.nominal.blend_hi},
              {"pacejka_b", c.nominal.front.stiffness_b},
              {"pacejka_c", c.nominal.front.shape_c}}},
            {"randomization",
             {{"mass_range", c.randomization.mass_range},
              {"motor_range", c.randomization.motor_range},
              {"stiffness_range", c.randomization.stiffness_range},
              {"com_range", c.randomization.com_range}}},
            {"reward",
             {{"action_penalty_weight", c.reward.action_penalty_weight},
              {"tolerance_margin", c.reward.tol.margin},
              {"tolerance_value_at_margin", c.reward.tol.value_at_margin},
              {"target", c.reward.target},
              {"distance_weights", c.reward.distance_weights}}},
            {"f_max", c.f_max},
            {"horizon", c.horizon},
            {"delay_steps", c.delay_steps},
            {"integration_substeps", c.integration_substeps},
            {"start_distance", c.start_distance},
            {"start_pos_noise", c.start_pos_noise},
            {"start_heading_noise", c.start_heading_noise}};
    }
    return j;
}

std::unique_ptr<BaseEnv> make_env(const RunConfig& cfg) {
    if (cfg.env_id == "car") return std::make_unique<CarEnv>(cfg.car);
    return std::make_unique<PendulumEnv>(cfg.pendulum);
}

std::vector<int> network_hidden(const RunConfig& cfg) {
    if (!cfg.hidden.empty()) return cfg.hidden;
    if (cfg.env_id == "car") return {128, 128, 128};
    return {64, 64};
}

PolicyConfig policy_config_for(const RunConfig& cfg) {
    const std::unique_ptr<BaseEnv> env = make_env(cfg);
    PolicyConfig pc;
    pc.obs_dim = env->state_dim() + 1;  // time feature
    pc.action_dim = env->action_dim();
    pc.max_repeat = cfg.augment.max_repeat;
    pc.hidden = network_hidden(cfg);
    return pc;
}

std::string config_hash(const RunConfig& cfg) {
    const std::unique_ptr<BaseEnv> env = make_env(cfg);
    nlohmann::json j;
    j["env"] = cfg.env_id;
    j["state_dim"] = env->state_dim();
    j["action_dim"] = env->action_dim();
    j["horizon"] = env->horizon();
    j["f_max"] = env->f_max();
    j["max_repeat"] = cfg.augment.max_repeat;
    j["hidden"] = network_hidden(cfg);
    const std::string dump = j.dump();
    uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace tarc
