#ifndef TARC_CHECKPOINT_HPP_
#define TARC_CHECKPOINT_HPP_

#include <string>

#include "json.hpp"
#include "tarc/augment.hpp"
#include "tarc/policy.hpp"

namespace tarc {

// Portable policy checkpoint: JSON with layer shapes, full-precision weights,
// a config hash binding it to its environment, and run metadata.
struct Checkpoint {
    int format_version = 1;
    std::string env_id;
    std::string label;        // "baseline" or "TARC-<i>"
    std::string config_hash;
    uint64_t seed = 0;
    AugmentConfig augment;
    PolicyConfig policy_cfg;
    PolicyParams params;
};

nlohmann::json checkpoint_to_json(const Checkpoint& ck);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace tarc

#endif  // TARC_CHECKPOINT_HPP_
