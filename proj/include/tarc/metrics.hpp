#ifndef TARC_METRICS_HPP_
#define TARC_METRICS_HPP_

#include <string>
#include <vector>

#include "tarc/augment.hpp"
#include "tarc/pendulum_env.hpp"

namespace tarc {

// Per-episode evaluation metrics.
struct EpisodeReport {
    double penalized_return = 0.0;    // unpenalized - switch_cost * n_decisions
    double unpenalized_return = 0.0;  // plain sum of base rewards
    int n_decisions = 0;
    int n_base_steps = 0;
    double avg_frequency = 0.0;       // decisions per second of simulated time
    std::vector<double> jitter;       // ||a_t - a_{t-1}|| over applied actions
    std::vector<FreqTracePoint> frequency_trace;

    double mean_jitter() const;
};

// Euclidean norms of consecutive action differences; length n-1.
std::vector<double> jitter_series(const std::vector<Vec>& applied_actions);

// Expands a trajectory's decisions into the per-base-step applied-action
// sequence: each commanded action (clamped to the actuation range) repeated
// for its consumed steps, shifted by the actuation delay with zero padding.
std::vector<Vec> applied_action_sequence(const Trajectory& traj, int action_dim,
                                         int delay_steps);

EpisodeReport episode_metrics(const Trajectory& traj, const AugmentConfig& cfg,
                              double f_max, int delay_steps = 0,
                              const std::vector<int>& push_steps = {});

struct MetricStat {
    double mean = 0.0;
    double std_dev = 0.0;   // sample standard deviation
    double std_err = 0.0;   // std_dev / sqrt(count)
};

MetricStat stat_of(const std::vector<double>& values);

// Mean and standard error of each metric across seeds (one report per seed).
struct AggregateReport {
    int count = 0;
    bool single_sample = false;  // < 2 reports: means only, flagged
    MetricStat penalized_return;
    MetricStat unpenalized_return;
    MetricStat avg_frequency;
    MetricStat n_decisions;
    MetricStat mean_jitter;
};

AggregateReport aggregate(const std::vector<EpisodeReport>& reports);

// Element-wise mean of several episode reports (scalar fields only), used to
// reduce a seed's evaluation episodes to one report before seed aggregation.
EpisodeReport mean_report(const std::vector<EpisodeReport>& reports);

// CSV / JSON emitters. All writers are deterministic given their inputs.
std::string episodes_csv(const std::vector<EpisodeReport>& reports);
std::string jitter_csv(const std::vector<double>& jitter);
std::string freq_trace_csv(const std::vector<FreqTracePoint>& trace);
std::string summary_json(const AggregateReport& report);

}  // namespace tarc

#endif  // TARC_METRICS_HPP_
