#ifndef TARC_POLICY_HPP_
#define TARC_POLICY_HPP_

#include <utility>
#include <vector>

#include "tarc/nn.hpp"
#include "tarc/rng.hpp"

namespace tarc {

struct PolicyConfig {
    int obs_dim = 0;
    int action_dim = 0;
    int max_repeat = 1;
    std::vector<int> hidden{64, 64};

    void validate() const;
};

// Two-headed stochastic policy: a shared tanh trunk feeding a Gaussian action
// head (state-independent log-std) and a categorical duration head over
// {1..max_repeat}, plus a separate value network.
struct PolicyParams {
    Mlp trunk;        // obs -> hidden representation (tanh output)
    Linear mean_head; // hidden -> action_dim
    Vec log_std;      // action_dim, clamped to [-5, 2] at use
    Linear dur_head;  // hidden -> max_repeat logits
    Mlp value_net;    // obs -> 1
};

constexpr double kLogStdMin = -5.0;
constexpr double kLogStdMax = 2.0;

PolicyParams make_policy_params(const PolicyConfig& cfg);  // zero-initialized
PolicyParams init_policy_params(const PolicyConfig& cfg, uint64_t seed);

void for_each_param(PolicyParams& p, const std::function<void(double&)>& fn);
int param_count(const PolicyParams& p);
Vec flatten_params(const PolicyParams& p);
void unflatten_params(const Vec& flat, PolicyParams& p);
void zero_gradients(PolicyParams& g);

struct PolicyOutput {
    Vec mean;
    Vec log_std;        // clamped
    Vec std_dev;        // exp(log_std)
    Vec dur_log_probs;  // stable log-softmax of the duration logits
    Vec dur_probs;
    double value = 0.0;
};

PolicyOutput policy_forward(const PolicyParams& p, const Vec& obs);

struct SampledDecision {
    Vec action;      // raw Gaussian draw; environments clamp before dynamics
    int repeat = 1;
    double log_prob = 0.0;  // joint over (action, duration)
};

// Draws action ~ N(mean, std^2) and duration ~ categorical. With a single
// duration category no randomness is consumed for it, so a max_repeat=1
// policy consumes the same random stream as a plain action-only policy.
SampledDecision policy_sample(const PolicyOutput& out, Rng& rng);

// Deterministic evaluation decision: mean action, argmax duration.
SampledDecision policy_mode(const PolicyOutput& out);

// Joint log-probability and entropy of a given (action, duration) pair.
std::pair<double, double> log_prob_and_entropy(const PolicyParams& p, const Vec& obs,
                                               const Vec& action, int repeat);

double policy_value(const PolicyParams& p, const Vec& obs);

// Forward pass with cached intermediates, for gradient computation.
struct PolicyEval {
    double log_prob = 0.0;
    double entropy = 0.0;
    double value = 0.0;
    PolicyOutput out;
    MlpCache trunk_cache;
    MlpCache value_cache;
    Vec obs;
    Vec action;
    int repeat = 1;
};

PolicyEval policy_eval(const PolicyParams& p, const Vec& obs, const Vec& action, int repeat);

// Accumulates d(d_logp * log_prob + d_entropy * entropy + d_value * value)/dparams
// into grad. Exact reverse-mode differentiation of the forward computation.
void policy_backward(const PolicyParams& p, const PolicyEval& ev, double d_logp,
                     double d_entropy, double d_value, PolicyParams& grad);

}  // namespace tarc

#endif  // TARC_POLICY_HPP_
