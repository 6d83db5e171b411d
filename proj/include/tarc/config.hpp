#ifndef TARC_CONFIG_HPP_
#define TARC_CONFIG_HPP_

#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "tarc/augment.hpp"
#include "tarc/car_env.hpp"
#include "tarc/pendulum_env.hpp"
#include "tarc/policy.hpp"
#include "tarc/ppo.hpp"

namespace tarc {

// Config parsing/validation failure; `field` names the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

// One file fully determines a run: environment, augmentation, trainer,
// network, evaluation and output settings.
struct RunConfig {
    std::string env_id = "pendulum";  // "car" | "pendulum"
    std::string run_name;             // defaults to the variant label
    std::string out_dir = "runs";
    std::vector<uint64_t> seeds{0};
    AugmentConfig augment;
    PPOConfig ppo;                    // ppo.gamma mirrors augment.discount
    std::vector<int> hidden;          // empty: per-environment default
    int eval_episodes = 20;
    CarEnvConfig car;
    PendulumConfig pendulum;
};

RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

// Normalized serialization: every field explicit, keys sorted. Parsing then
// re-serializing is idempotent.
nlohmann::json run_config_to_json(const RunConfig& cfg);

// "baseline" for max_repeat 1 with zero switch cost, else "TARC-<i>".
std::string variant_label(const AugmentConfig& cfg);

std::unique_ptr<BaseEnv> make_env(const RunConfig& cfg);

// Network sizes: configured, or 64x2 (pendulum) / 128x3 (car).
std::vector<int> network_hidden(const RunConfig& cfg);

PolicyConfig policy_config_for(const RunConfig& cfg);

// Hash over the policy/environment compatibility surface (environment id and
// dims, horizon, f_max, max repeat, network shape). Checkpoints carry it;
// evaluation refuses mismatching artifacts.
std::string config_hash(const RunConfig& cfg);

}  // namespace tarc

#endif  // TARC_CONFIG_HPP_
