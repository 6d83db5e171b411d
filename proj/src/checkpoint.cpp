#include "tarc/checkpoint.hpp"

#include <fstream>

namespace tarc {

namespace {

using nlohmann::json;

json linear_to_json(const Linear& l) {
    json rows = json::array();
    for (int r = 0; r < l.out_dim(); ++r) {
        json row = json::array();
        for (int c = 0; c < l.in_dim(); ++c) row.push_back(l.w(r, c));
        rows.push_back(row);
    }
    return {{"w", rows}, {"b", l.b}};
}

Linear linear_from_json(const json& j) {
    const json& rows = j.at("w");
    Linear l(static_cast<int>(rows.size()), static_cast<int>(rows.at(0).size()));
    for (int r = 0; r < l.out_dim(); ++r) {
        for (int c = 0; c < l.in_dim(); ++c) l.w(r, c) = rows[r][c].get<double>();
    }
    l.b = j.at("b").get<Vec>();
    if (static_cast<int>(l.b.size()) != l.out_dim()) {
        throw std::runtime_error("checkpoint: bias shape mismatch");
    }
    return l;
}

json mlp_to_json(const Mlp& net) {
    json layers = json::array();
    for (const Linear& l : net.layers) layers.push_back(linear_to_json(l));
    return {{"layers", layers}, {"tanh_output", net.tanh_output}};
}

Mlp mlp_from_json(const json& j) {
    Mlp net;
    net.tanh_output = j.at("tanh_output").get<bool>();
    for (const json& l : j.at("layers")) net.layers.push_back(linear_from_json(l));
    return net;
}

}  // namespace

json checkpoint_to_json(const Checkpoint& ck) {
    json j;
    j["format_version"] = ck.format_version;
    j["env"] = ck.env_id;
    j["label"] = ck.label;
    j["config_hash"] = ck.config_hash;
    j["seed"] = ck.seed;
    j["augment"] = {{"max_repeat", ck.augment.max_repeat},
                    {"switch_cost", ck.augment.switch_cost},
                    {"discount", ck.augment.discount}};
    j["policy_config"] = {{"obs_dim", ck.policy_cfg.obs_dim},
                          {"action_dim", ck.policy_cfg.action_dim},
                          {"max_repeat", ck.policy_cfg.max_repeat},
                          {"hidden", ck.policy_cfg.hidden}};
    j["weights"] = {{"trunk", mlp_to_json(ck.params.trunk)},
                    {"mean_head", linear_to_json(ck.params.mean_head)},
                    {"log_std", ck.params.log_std},
                    {"dur_head", linear_to_json(ck.params.dur_head)},
                    {"value_net", mlp_to_json(ck.params.value_net)}};
    return j;
}

Checkpoint checkpoint_from_json(const json& j) {
    Checkpoint ck;
    ck.format_version = j.at("format_version").get<int>();
    if (ck.format_version != 1) {
        throw std::runtime_error("checkpoint: unsupported format version");
    }
    ck.env_id = j.at("env").get<std::string>();
    ck.label = j.at("label").get<std::string>();
    ck.config_hash = j.at("config_hash").get<std::string>();
    ck.seed = j.at("seed").get<uint64_t>();
    const json& a = j.at("augment");
    ck.augment.max_repeat = a.at("max_repeat").get<int>();
    ck.augment.switch_cost = a.at("switch_cost").get<double>();
    ck.augment.discount = a.at("discount").get<double>();
    const json& pc = j.at("policy_config");
    ck.policy_cfg.obs_dim = pc.at("obs_dim").get<int>();
    ck.policy_cfg.action_dim = pc.at("action_dim").get<int>();
    ck.policy_cfg.max_repeat = pc.at("max_repeat").get<int>();
    ck.policy_cfg.hidden = pc.at("hidden").get<std::vector<int>>();
    const json& w = j.at("weights");
    ck.params.trunk = mlp_from_json(w.at("trunk"));
    ck.params.mean_head = linear_from_json(w.at("mean_head"));
    ck.params.log_std = w.at("log_std").get<Vec>();
    ck.params.dur_head = linear_from_json(w.at("dur_head"));
    ck.params.value_net = mlp_from_json(w.at("value_net"));
    return ck;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
    out << checkpoint_to_json(ck).dump(1) << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
    json j;
    in >> j;
    return checkpoint_from_json(j);
}

}  // namespace tarc
