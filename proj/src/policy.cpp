#include "tarc/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tarc {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * ln(2*pi)

double gaussian_log_prob(const Vec& action, const Vec& mean, const Vec& log_std,
                         const Vec& std_dev) {
    double lp = 0.0;
    for (size_t j = 0; j < action.size(); ++j) {
        const double z = (action[j] - mean[j]) / std_dev[j];
        lp += -0.5 * z * z - log_std[j] - kHalfLog2Pi;
    }
    return lp;
}

double gaussian_entropy(const Vec& log_std) {
    double h = 0.0;
    for (double ls : log_std) h += 0.5 + kHalfLog2Pi + ls;
    return h;
}

double categorical_entropy(const Vec& log_probs, const Vec& probs) {
    double h = 0.0;
    for (size_t k = 0; k < probs.size(); ++k) h -= probs[k] * log_probs[k];
    return h;
}

}  // namespace

void PolicyConfig::validate() const {
    if (obs_dim <= 0 || action_dim <= 0) {
        throw std::invalid_argument("policy config: dims must be positive");
    }
    if (max_repeat < 1) throw std::invalid_argument("policy config: max_repeat must be >= 1");
    if (hidden.empty()) throw std::invalid_argument("policy config: need >= 1 hidden layer");
    for (int h : hidden) {
        if (h <= 0) throw std::invalid_argument("policy config: hidden sizes must be positive");
    }
}

PolicyParams make_policy_params(const PolicyConfig& cfg) {
    cfg.validate();
    PolicyParams p;
    std::vector<int> trunk_dims{cfg.obs_dim};
    trunk_dims.insert(trunk_dims.end(), cfg.hidden.begin(), cfg.hidden.end());
    p.trunk = make_mlp(trunk_dims, /*tanh_output=*/true);
    p.mean_head = Linear(cfg.action_dim, cfg.hidden.back());
    p.log_std.assign(cfg.action_dim, 0.0);
    p.dur_head = Linear(cfg.max_repeat, cfg.hidden.back());
    std::vector<int> value_dims = trunk_dims;
    value_dims.push_back(1);
    p.value_net = make_mlp(value_dims, /*tanh_output=*/false);
    return p;
}

PolicyParams init_policy_params(const PolicyConfig& cfg, uint64_t seed) {
    PolicyParams p = make_policy_params(cfg);
    Rng rng(derive_seed(seed, 0x9011CFULL));
    init_mlp(p.trunk, rng);
    init_linear(p.mean_head, rng, 0.01);
    init_linear(p.dur_head, rng, 0.01);
    init_mlp(p.value_net, rng);
    std::fill(p.log_std.begin(), p.log_std.end(), -0.5);
    return p;
}

void for_each_param(PolicyParams& p, const std::function<void(double&)>& fn) {
    for_each_param(p.trunk, fn);
    for_each_param(p.mean_head, fn);
    for (double& v : p.log_std) fn(v);
    for_each_param(p.dur_head, fn);
    for_each_param(p.value_net, fn);
}

int param_count(const PolicyParams& p) {
    int n = 0;
    auto count = [&n](double&) { ++n; };
    for_each_param(const_cast<PolicyParams&>(p), count);
    return n;
}

Vec flatten_params(const PolicyParams& p) {
    Vec flat;
    flat.reserve(param_count(p));
    for_each_param(const_cast<PolicyParams&>(p), [&flat](double& v) { flat.push_back(v); });
    return flat;
}

void unflatten_params(const Vec& flat, PolicyParams& p) {
    size_t k = 0;
    for_each_param(p, [&flat, &k](double& v) { v = flat[k++]; });
    if (k != flat.size()) throw std::invalid_argument("unflatten_params: size mismatch");
}

void zero_gradients(PolicyParams& g) {
    for_each_param(g, [](double& v) { v = 0.0; });
}

PolicyOutput policy_forward(const PolicyParams& p, const Vec& obs) {
    PolicyEval ev = policy_eval(p, obs, Vec(p.mean_head.out_dim(), 0.0), 1);
    return ev.out;
}

SampledDecision policy_sample(const PolicyOutput& out, Rng& rng) {
    SampledDecision d;
    d.action.resize(out.mean.size());
    for (size_t j = 0; j < out.mean.size(); ++j) {
        d.action[j] = out.mean[j] + out.std_dev[j] * rng.normal();
    }
    if (out.dur_probs.size() == 1) {
        d.repeat = 1;
    } else {
        d.repeat = rng.categorical(out.dur_probs) + 1;
    }
    d.log_prob = gaussian_log_prob(d.action, out.mean, out.log_std, out.std_dev) +
                 out.dur_log_probs[d.repeat - 1];
    return d;
}

SampledDecision policy_mode(const PolicyOutput& out) {
    SampledDecision d;
    d.action = out.mean;
    d.repeat = 1 + static_cast<int>(std::distance(
                       out.dur_probs.begin(),
                       std::max_element(out.dur_probs.begin(), out.dur_probs.end())));
    d.log_prob = gaussian_log_prob(d.action, out.mean, out.log_std, out.std_dev) +
                 out.dur_log_probs[d.repeat - 1];
    return d;
}

std::pair<double, double> log_prob_and_entropy(const PolicyParams& p, const Vec& obs,
                                               const Vec& action, int repeat) {
    PolicyEval ev = policy_eval(p, obs, action, repeat);
    return {ev.log_prob, ev.entropy};
}

double policy_value(const PolicyParams& p, const Vec& obs) {
    return mlp_forward(p.value_net, obs)[0];
}

PolicyEval policy_eval(const PolicyParams& p, const Vec& obs, const Vec& action, int repeat) {
    const int n_dur = p.dur_head.out_dim();
    if (repeat < 1 || repeat > n_dur) {
        throw std::invalid_argument("policy_eval: duration out of range");
    }
    PolicyEval ev;
    ev.obs = obs;
    ev.action = action;
    ev.repeat = repeat;

    const Vec trunk_out = mlp_forward(p.trunk, obs, &ev.trunk_cache);
    ev.out.mean = linear_forward(p.mean_head, trunk_out);

    ev.out.log_std.resize(p.log_std.size());
    ev.out.std_dev.resize(p.log_std.size());
    for (size_t j = 0; j < p.log_std.size(); ++j) {
        ev.out.log_std[j] = clamp(p.log_std[j], kLogStdMin, kLogStdMax);
        ev.out.std_dev[j] = std::exp(ev.out.log_std[j]);
    }

    const Vec logits = linear_forward(p.dur_head, trunk_out);
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    double sum_exp = 0.0;
    for (double l : logits) sum_exp += std::exp(l - max_logit);
    const double lse = max_logit + std::log(sum_exp);
    ev.out.dur_log_probs.resize(n_dur);
    ev.out.dur_probs.resize(n_dur);
    for (int k = 0; k < n_dur; ++k) {
        ev.out.dur_log_probs[k] = logits[k] - lse;
        ev.out.dur_probs[k] = std::exp(ev.out.dur_log_probs[k]);
    }

    ev.out.value = mlp_forward(p.value_net, obs, &ev.value_cache)[0];
    ev.value = ev.out.value;

    ev.log_prob = gaussian_log_prob(action, ev.out.mean, ev.out.log_std, ev.out.std_dev) +
                  ev.out.dur_log_probs[repeat - 1];
    ev.entropy = gaussian_entropy(ev.out.log_std) +
                 categorical_entropy(ev.out.dur_log_probs, ev.out.dur_probs);
    return ev;
}

void policy_backward(const PolicyParams& p, const PolicyEval& ev, double d_logp,
                     double d_entropy, double d_value, PolicyParams& grad) {
    const size_t n_act = ev.out.mean.size();
    const int n_dur = static_cast<int>(ev.out.dur_probs.size());

    // Gaussian head.
    Vec d_mean(n_act, 0.0);
    for (size_t j = 0; j < n_act; ++j) {
        const double z = (ev.action[j] - ev.out.mean[j]) / ev.out.std_dev[j];
        d_mean[j] = d_logp * z / ev.out.std_dev[j];
        // log-std gradient passes through the clamp only where it is inactive
        const bool active = p.log_std[j] > kLogStdMin && p.log_std[j] < kLogStdMax;
        if (active) {
            grad.log_std[j] += d_logp * (z * z - 1.0) + d_entropy * 1.0;
        }
    }

    // Duration head: d logp / d logit_k = 1{k = repeat-1} - p_k;
    // d entropy / d logit_k = -p_k (log p_k + H).
    const double h_cat = categorical_entropy(ev.out.dur_log_probs, ev.out.dur_probs);
    Vec d_logits(n_dur, 0.0);
    for (int k = 0; k < n_dur; ++k) {
        const double indicator = (k == ev.repeat - 1) ? 1.0 : 0.0;
        d_logits[k] = d_logp * (indicator - ev.out.dur_probs[k]) -
                      d_entropy * ev.out.dur_probs[k] * (ev.out.dur_log_probs[k] + h_cat);
    }

    const Vec& trunk_out = ev.trunk_cache.output;
    Vec d_trunk = linear_backward(p.mean_head, trunk_out, d_mean, grad.mean_head);
    const Vec d_trunk2 = linear_backward(p.dur_head, trunk_out, d_logits, grad.dur_head);
    for (size_t j = 0; j < d_trunk.size(); ++j) d_trunk[j] += d_trunk2[j];
    mlp_backward(p.trunk, ev.trunk_cache, d_trunk, grad.trunk);

    if (d_value != 0.0) {
        mlp_backward(p.value_net, ev.value_cache, Vec{d_value}, grad.value_net);
    }
}

}  // namespace tarc
