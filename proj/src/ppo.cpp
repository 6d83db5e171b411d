#include "tarc/ppo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <thread>

namespace tarc {

namespace {

constexpr size_t kEpisodeStatWindow = 10;

double pow_int(double base, int n) {
    double out = 1.0;
    for (int k = 0; k < n; ++k) out *= base;
    return out;
}

void fisher_yates(std::vector<int>& idx, Rng& rng) {
    for (size_t k = idx.size(); k > 1; --k) {
        const size_t j = static_cast<size_t>(rng.uniform() * static_cast<double>(k));
        std::swap(idx[k - 1], idx[j]);
    }
}

}  // namespace

void PPOConfig::validate() const {
    if (clip_eps <= 0.0) throw std::invalid_argument("ppo: clip_eps must be > 0");
    if (gae_lambda < 0.0 || gae_lambda > 1.0) {
        throw std::invalid_argument("ppo: gae_lambda must be in [0, 1]");
    }
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("ppo: gamma in (0, 1]");
    if (epochs <= 0 || minibatch_size <= 0 || num_envs <= 0 || steps_per_env <= 0 ||
        total_env_steps <= 0 || collect_workers <= 0) {
        throw std::invalid_argument("ppo: counts must be positive");
    }
    if (learning_rate < 0.0) throw std::invalid_argument("ppo: learning_rate must be >= 0");
    if (entropy_coef < 0.0 || value_coef < 0.0) {
        throw std::invalid_argument("ppo: loss coefficients must be >= 0");
    }
}

long RolloutBatch::base_steps() const {
    long n = 0;
    for (int s : steps_consumed) n += s;
    return n;
}

GaeResult compute_gae(const RolloutBatch& batch, double gamma, double lambda) {
    GaeResult out;
    out.advantages.assign(batch.size(), 0.0);
    out.returns.assign(batch.size(), 0.0);
    for (const RolloutBatch::Segment& seg : batch.segments) {
        double carry = 0.0;
        for (int k = seg.end - 1; k >= seg.begin; --k) {
            const double nonterminal = batch.dones[k] ? 0.0 : 1.0;
            const double next_value =
                (k == seg.end - 1) ? seg.bootstrap_value : batch.values[k + 1];
            const double disc = pow_int(gamma, batch.steps_consumed[k]);
            const double delta =
                batch.rewards[k] + disc * next_value * nonterminal - batch.values[k];
            carry = delta + disc * lambda * nonterminal * carry;
            out.advantages[k] = carry;
        }
    }
    for (int k = 0; k < batch.size(); ++k) {
        out.returns[k] = out.advantages[k] + batch.values[k];
    }
    return out;
}

LossTerms ppo_loss(const PolicyParams& params, const RolloutBatch& batch,
                   const Vec& advantages, const Vec& returns,
                   const std::vector<int>& indices, const PPOConfig& cfg,
                   PolicyParams* grad) {
    LossTerms terms;
    const double n = static_cast<double>(indices.size());
    for (int idx : indices) {
        PolicyEval ev = policy_eval(params, batch.observations[idx], batch.actions[idx],
                                    batch.repeats[idx]);
        const double adv = advantages[idx];
        const double ratio = std::exp(ev.log_prob - batch.log_probs[idx]);
        const double surr1 = ratio * adv;
        const double surr2 = clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps) * adv;
        terms.policy += -std::min(surr1, surr2);
        const double vdiff = ev.value - returns[idx];
        terms.value += vdiff * vdiff;
        terms.entropy += ev.entropy;
        if (grad) {
            const double d_logp = (surr1 <= surr2) ? -adv * ratio / n : 0.0;
            const double d_value = cfg.value_coef * 2.0 * vdiff / n;
            const double d_entropy = -cfg.entropy_coef / n;
            policy_backward(params, ev, d_logp, d_entropy, d_value, *grad);
        }
    }
    terms.policy /= n;
    terms.value /= n;
    terms.entropy /= n;
    terms.total = terms.policy + cfg.value_coef * terms.value - cfg.entropy_coef * terms.entropy;
    return terms;
}

std::string train_log_header() {
    return "iteration,env_steps,mean_penalized_return,mean_unpenalized_return,mean_dt,"
           "policy_loss,value_loss,entropy";
}

std::string train_log_row_csv(const TrainLogRow& row) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%d,%ld,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g",
                  row.iteration, row.env_steps, row.mean_penalized_return,
                  row.mean_unpenalized_return, row.mean_repeat, row.policy_loss,
                  row.value_loss, row.entropy);
    return buf;
}

Trainer::Trainer(const EnvFactory& factory, PolicyConfig policy_cfg, PPOConfig cfg,
                 AugmentConfig augment_cfg)
    : policy_cfg_(std::move(policy_cfg)),
      cfg_(cfg),
      augment_cfg_(augment_cfg),
      params_(init_policy_params(policy_cfg_, cfg.seed)),
      adam_(param_count(params_), cfg.learning_rate),
      shuffle_rng_(derive_seed(cfg.seed, 0x5affeULL)) {
    cfg_.validate();
    augment_cfg_.validate();
    slots_.reserve(cfg_.num_envs);
    for (int e = 0; e < cfg_.num_envs; ++e) {
        slots_.emplace_back(factory(), Rng(derive_seed(cfg_.seed, 0xac7ULL, e)));
    }
}

void Trainer::set_params(const PolicyParams& p) {
    params_ = p;
    adam_ = Adam(param_count(params_), cfg_.learning_rate);
}

void Trainer::collect_env(int env_index, RolloutBatch& out) {
    EnvSlot& slot = slots_[env_index];
    BaseEnv& env = *slot.env;
    const int begin = out.size();
    int steps_this_iter = 0;
    bool last_done = false;
    Vec bootstrap_obs;

    while (steps_this_iter < cfg_.steps_per_env) {
        if (slot.needs_reset) {
            const uint64_t ep_seed =
                derive_seed(cfg_.seed, static_cast<uint64_t>(env_index),
                            static_cast<uint64_t>(slot.episode_count));
            slot.state = AugmentedState{env.reset(ep_seed), 0};
            slot.episode_count += 1;
            slot.needs_reset = false;
            slot.acc = RolloutBatch::EpisodeStat{};
        }

        const Vec obs = policy_observation(env, slot.state);
        const PolicyOutput pol = policy_forward(params_, obs);
        const SampledDecision dec = policy_sample(pol, slot.sample_rng);
        const AugmentedAction u{dec.action, dec.repeat};
        const AugmentedTransition tr = augment_step(env, slot.state, u, augment_cfg_);

        out.observations.push_back(obs);
        out.actions.push_back(dec.action);
        out.repeats.push_back(dec.repeat);
        out.steps_consumed.push_back(tr.steps_consumed);
        out.log_probs.push_back(dec.log_prob);
        out.rewards.push_back(tr.reward);
        out.values.push_back(pol.value);
        out.dones.push_back(tr.done ? 1 : 0);

        for (double r : tr.base_rewards) slot.acc.unpenalized_return += r;
        slot.acc.decisions += 1;
        slot.acc.base_steps += tr.steps_consumed;
        steps_this_iter += tr.steps_consumed;
        last_done = tr.done;

        if (tr.done) {
            slot.acc.penalized_return =
                slot.acc.unpenalized_return - augment_cfg_.switch_cost * slot.acc.decisions;
            out.completed_episodes.push_back(slot.acc);
            slot.needs_reset = true;
        } else {
            slot.state = tr.next;
        }
        if (steps_this_iter >= cfg_.steps_per_env) {
            bootstrap_obs = tr.done ? Vec{} : policy_observation(env, slot.state);
        }
    }

    RolloutBatch::Segment seg;
    seg.begin = begin;
    seg.end = out.size();
    seg.bootstrap_value = (last_done || bootstrap_obs.empty())
                              ? 0.0
                              : policy_value(params_, bootstrap_obs);
    out.segments.push_back(seg);
}

RolloutBatch Trainer::collect() {
    RolloutBatch batch;
    if (cfg_.collect_workers <= 1) {
        for (int e = 0; e < cfg_.num_envs; ++e) collect_env(e, batch);
        return batch;
    }

    // Parallel collection: each env fills a private sub-batch against a
    // read-only parameter snapshot; results are merged in env order so the
    // outcome is identical to the sequential path.
    std::vector<RolloutBatch> parts(cfg_.num_envs);
    std::vector<std::thread> pool;
    std::atomic_int next{0};
    for (int w = 0; w < cfg_.collect_workers; ++w) {
        pool.emplace_back([this, &parts, &next]() {
            for (int e = next.fetch_add(1); e < cfg_.num_envs; e = next.fetch_add(1)) {
                collect_env(e, parts[e]);
            }
        });
    }
    for (std::thread& th : pool) th.join();
    for (RolloutBatch& part : parts) {
        const int offset = batch.size();
        for (int k = 0; k < part.size(); ++k) {
            batch.observations.push_back(std::move(part.observations[k]));
            batch.actions.push_back(std::move(part.actions[k]));
            batch.repeats.push_back(part.repeats[k]);
            batch.steps_consumed.push_back(part.steps_consumed[k]);
            batch.log_probs.push_back(part.log_probs[k]);
            batch.rewards.push_back(part.rewards[k]);
            batch.values.push_back(part.values[k]);
            batch.dones.push_back(part.dones[k]);
        }
        for (RolloutBatch::Segment seg : part.segments) {
            seg.begin += offset;
            seg.end += offset;
            batch.segments.push_back(seg);
        }
        for (const auto& ep : part.completed_episodes) {
            batch.completed_episodes.push_back(ep);
        }
    }
    return batch;
}

void normalize_advantages(Vec& advantages) {
    const double n = static_cast<double>(advantages.size());
    double mean = 0.0;
    for (double a : advantages) mean += a;
    mean /= n;
    double var = 0.0;
    for (double a : advantages) var += (a - mean) * (a - mean);
    var /= n;
    const double inv_std = 1.0 / (std::sqrt(var) + 1e-8);
    for (double& a : advantages) a = (a - mean) * inv_std;
}

LossTerms Trainer::update(const RolloutBatch& batch) {
    GaeResult gae = compute_gae(batch, cfg_.gamma, cfg_.gae_lambda);
    normalize_advantages(gae.advantages);

    const int n = batch.size();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);

    PolicyParams grad = make_policy_params(policy_cfg_);
    Vec flat = flatten_params(params_);
    LossTerms sums;
    int n_updates = 0;
    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
        fisher_yates(order, shuffle_rng_);
        for (int start = 0; start < n; start += cfg_.minibatch_size) {
            const int end = std::min(n, start + cfg_.minibatch_size);
            const std::vector<int> chunk(order.begin() + start, order.begin() + end);
            zero_gradients(grad);
            const LossTerms terms =
                ppo_loss(params_, batch, gae.advantages, gae.returns, chunk, cfg_, &grad);
            if (!std::isfinite(terms.total)) {
                throw TrainingDiverged("non-finite PPO loss at iteration " +
                                       std::to_string(iteration_) + ", epoch " +
                                       std::to_string(epoch));
            }
            flat = flatten_params(params_);
            const Vec flat_grad = flatten_params(grad);
            adam_.step(flat, flat_grad);
            unflatten_params(flat, params_);
            sums.total += terms.total;
            sums.policy += terms.policy;
            sums.value += terms.value;
            sums.entropy += terms.entropy;
            ++n_updates;
        }
    }
    sums.total /= n_updates;
    sums.policy /= n_updates;
    sums.value /= n_updates;
    sums.entropy /= n_updates;
    return sums;
}

TrainLogRow Trainer::log_iteration(const RolloutBatch& batch, const LossTerms& losses) {
    iteration_ += 1;
    env_steps_done_ += batch.base_steps();
    for (const auto& ep : batch.completed_episodes) {
        recent_episodes_.push_back(ep);
        while (recent_episodes_.size() > kEpisodeStatWindow) recent_episodes_.pop_front();
    }

    TrainLogRow row;
    row.iteration = iteration_;
    row.env_steps = env_steps_done_;
    if (recent_episodes_.empty()) {
        row.mean_penalized_return = std::nan("");
        row.mean_unpenalized_return = std::nan("");
    } else {
        for (const auto& ep : recent_episodes_) {
            row.mean_penalized_return += ep.penalized_return;
            row.mean_unpenalized_return += ep.unpenalized_return;
        }
        row.mean_penalized_return /= static_cast<double>(recent_episodes_.size());
        row.mean_unpenalized_return /= static_cast<double>(recent_episodes_.size());
    }
    double repeat_sum = 0.0;
    for (int r : batch.repeats) repeat_sum += r;
    row.mean_repeat = batch.size() > 0 ? repeat_sum / batch.size() : 0.0;
    row.policy_loss = losses.policy;
    row.value_loss = losses.value;
    row.entropy = losses.entropy;
    return row;
}

TrainResult Trainer::train() {
    TrainResult result;
    while (env_steps_done_ < cfg_.total_env_steps) {
        const RolloutBatch batch = collect();
        const LossTerms losses = update(batch);
        result.log.push_back(log_iteration(batch, losses));
    }
    result.params = params_;
    return result;
}

PolicyFn make_policy_fn(const PolicyParams& params, Rng* rng) {
    return [&params, rng](const Vec& obs) {
        const PolicyOutput out = policy_forward(params, obs);
        const SampledDecision dec = policy_sample(out, *rng);
        return AugmentedAction{dec.action, dec.repeat};
    };
}

PolicyFn make_deterministic_policy_fn(const PolicyParams& params) {
    return [&params](const Vec& obs) {
        const PolicyOutput out = policy_forward(params, obs);
        const SampledDecision dec = policy_mode(out);
        return AugmentedAction{dec.action, dec.repeat};
    };
}

}  // namespace tarc
