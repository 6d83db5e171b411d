#ifndef TARC_PPO_HPP_
#define TARC_PPO_HPP_

#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tarc/augment.hpp"
#include "tarc/env.hpp"
#include "tarc/nn.hpp"
#include "tarc/policy.hpp"

namespace tarc {

struct PPOConfig {
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double clip_eps = 0.2;
    double learning_rate = 3e-4;
    int epochs = 4;
    int minibatch_size = 256;
    double entropy_coef = 0.01;
    double value_coef = 0.5;
    int num_envs = 32;
    long total_env_steps = 200000;  // budget in base env steps, not decisions
    int steps_per_env = 256;        // base steps collected per env per iteration
    int collect_workers = 1;
    uint64_t seed = 0;

    void validate() const;
};

// Per-decision experience of one training iteration, ordered by environment
// index, then time. Segments mark each environment's contiguous slice along
// with the value bootstrap at its truncation point.
struct RolloutBatch {
    std::vector<Vec> observations;
    std::vector<Vec> actions;          // raw pre-clamp samples
    std::vector<int> repeats;          // chosen durations
    std::vector<int> steps_consumed;
    std::vector<double> log_probs;     // joint (action, duration) log-probs
    std::vector<double> rewards;       // aggregated switch-cost rewards R
    std::vector<double> values;
    std::vector<uint8_t> dones;

    struct Segment {
        int begin = 0;
        int end = 0;
        double bootstrap_value = 0.0;  // V(s_end); ignored if the last record is done
    };
    std::vector<Segment> segments;

    struct EpisodeStat {
        double penalized_return = 0.0;    // plain base-reward sum minus c * decisions
        double unpenalized_return = 0.0;  // plain base-reward sum
        int decisions = 0;
        int base_steps = 0;
    };
    std::vector<EpisodeStat> completed_episodes;

    int size() const { return static_cast<int>(observations.size()); }
    long base_steps() const;
};

// Duration-aware generalized advantage estimation: the next value and the
// advantage carry are discounted by gamma^(steps consumed by the decision).
struct GaeResult {
    Vec advantages;
    Vec returns;
};
GaeResult compute_gae(const RolloutBatch& batch, double gamma, double lambda);

// In-place batch normalization to mean 0, std 1 (population std, +1e-8).
void normalize_advantages(Vec& advantages);

struct LossTerms {
    double total = 0.0;
    double policy = 0.0;   // -mean(min(ratio * A, clip(ratio) * A))
    double value = 0.0;    // mean((V - returns)^2)
    double entropy = 0.0;  // mean joint entropy
};

// Clipped-surrogate PPO loss over the given batch indices; advantages are
// expected to be normalized already. When grad is non-null, accumulates the
// exact gradient of the total loss.
LossTerms ppo_loss(const PolicyParams& params, const RolloutBatch& batch,
                   const Vec& advantages, const Vec& returns,
                   const std::vector<int>& indices, const PPOConfig& cfg,
                   PolicyParams* grad);

struct TrainLogRow {
    int iteration = 0;
    long env_steps = 0;
    double mean_penalized_return = 0.0;
    double mean_unpenalized_return = 0.0;
    double mean_repeat = 0.0;
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
};

std::string train_log_header();
std::string train_log_row_csv(const TrainLogRow& row);

struct TrainResult {
    PolicyParams params;
    std::vector<TrainLogRow> log;
};

class TrainingDiverged : public std::runtime_error {
public:
    explicit TrainingDiverged(const std::string& what) : std::runtime_error(what) {}
};

using EnvFactory = std::function<std::unique_ptr<BaseEnv>()>;

// PPO over the time-augmented MDP. The fixed-frequency baseline is this same
// trainer with max_repeat = 1 and switch_cost = 0.
class Trainer {
public:
    Trainer(const EnvFactory& factory, PolicyConfig policy_cfg, PPOConfig cfg,
            AugmentConfig augment_cfg);

    // Collects one iteration of experience through the augmented step path.
    RolloutBatch collect();

    // GAE, normalization, clipped-surrogate epochs with Adam. Throws
    // TrainingDiverged on non-finite loss.
    LossTerms update(const RolloutBatch& batch);

    // Folds an iteration's stats into the running log state and returns the row.
    TrainLogRow log_iteration(const RolloutBatch& batch, const LossTerms& losses);

    // Full collect/update loop until the base-step budget is exhausted.
    TrainResult train();

    const PolicyParams& params() const { return params_; }
    void set_params(const PolicyParams& p);
    long env_steps_done() const { return env_steps_done_; }

private:
    struct EnvSlot {
        std::unique_ptr<BaseEnv> env;
        AugmentedState state;
        bool needs_reset = true;
        long episode_count = 0;
        Rng sample_rng;
        RolloutBatch::EpisodeStat acc;

        EnvSlot(std::unique_ptr<BaseEnv> e, Rng rng)
            : env(std::move(e)), sample_rng(rng) {}
    };

    void collect_env(int env_index, RolloutBatch& out);

    PolicyConfig policy_cfg_;
    PPOConfig cfg_;
    AugmentConfig augment_cfg_;
    PolicyParams params_;
    std::vector<EnvSlot> slots_;
    Adam adam_;
    Rng shuffle_rng_;
    long env_steps_done_ = 0;
    int iteration_ = 0;
    std::deque<RolloutBatch::EpisodeStat> recent_episodes_;  // trailing window for the log
};

// Wraps policy parameters as a rollout policy. Stochastic mode samples with
// the provided RNG; deterministic mode uses the mean action and the modal
// duration.
PolicyFn make_policy_fn(const PolicyParams& params, Rng* rng);
PolicyFn make_deterministic_policy_fn(const PolicyParams& params);

}  // namespace tarc

#endif  // TARC_PPO_HPP_
