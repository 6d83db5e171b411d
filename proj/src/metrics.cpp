#include "tarc/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace tarc {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

double EpisodeReport::mean_jitter() const {
    if (jitter.empty()) return 0.0;
    double s = 0.0;
    for (double j : jitter) s += j;
    return s / static_cast<double>(jitter.size());
}

std::vector<double> jitter_series(const std::vector<Vec>& applied_actions) {
    if (applied_actions.size() < 2) {
        throw std::invalid_argument("jitter_series: need at least 2 actions");
    }
    std::vector<double> out;
    out.reserve(applied_actions.size() - 1);
    for (size_t k = 1; k < applied_actions.size(); ++k) {
        double s = 0.0;
        for (size_t j = 0; j < applied_actions[k].size(); ++j) {
            const double d = applied_actions[k][j] - applied_actions[k - 1][j];
            s += d * d;
        }
        out.push_back(std::sqrt(s));
    }
    return out;
}

std::vector<Vec> applied_action_sequence(const Trajectory& traj, int action_dim,
                                         int delay_steps) {
    std::vector<Vec> commanded;
    for (const Decision& d : traj.decisions) {
        Vec clamped(action_dim);
        for (int j = 0; j < action_dim; ++j) clamped[j] = clamp(d.action.action[j], -1.0, 1.0);
        for (int k = 0; k < d.transition.steps_consumed; ++k) commanded.push_back(clamped);
    }
    std::vector<Vec> applied;
    applied.reserve(commanded.size());
    for (size_t t = 0; t < commanded.size(); ++t) {
        if (static_cast<int>(t) < delay_steps) {
            applied.emplace_back(action_dim, 0.0);
        } else {
            applied.push_back(commanded[t - delay_steps]);
        }
    }
    return applied;
}

EpisodeReport episode_metrics(const Trajectory& traj, const AugmentConfig& cfg,
                              double f_max, int delay_steps,
                              const std::vector<int>& push_steps) {
    if (traj.decisions.empty()) {
        throw std::invalid_argument("episode_metrics: empty trajectory");
    }
    EpisodeReport rep;
    for (const Decision& d : traj.decisions) {
        for (double r : d.transition.base_rewards) rep.unpenalized_return += r;
    }
    rep.n_decisions = static_cast<int>(traj.decisions.size());
    rep.penalized_return = rep.unpenalized_return - cfg.switch_cost * rep.n_decisions;
    rep.n_base_steps = traj.total_base_steps();
    rep.avg_frequency =
        static_cast<double>(rep.n_decisions) * f_max / static_cast<double>(rep.n_base_steps);

    const int action_dim = static_cast<int>(traj.decisions.front().action.action.size());
    const std::vector<Vec> applied = applied_action_sequence(traj, action_dim, delay_steps);
    if (applied.size() >= 2) rep.jitter = jitter_series(applied);
    rep.frequency_trace = frequency_trace(traj, f_max, push_steps);
    return rep;
}

MetricStat stat_of(const std::vector<double>& values) {
    MetricStat s;
    const int n = static_cast<int>(values.size());
    if (n == 0) return s;
    for (double v : values) s.mean += v;
    s.mean /= n;
    if (n < 2) return s;
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    var /= (n - 1);
    s.std_dev = std::sqrt(var);
    s.std_err = s.std_dev / std::sqrt(static_cast<double>(n));
    return s;
}

AggregateReport aggregate(const std::vector<EpisodeReport>& reports) {
    if (reports.empty()) throw std::invalid_argument("aggregate: no reports");
    AggregateReport agg;
    agg.count = static_cast<int>(reports.size());
    agg.single_sample = agg.count < 2;
    std::vector<double> pen, unpen, freq, ndec, jit;
    for (const EpisodeReport& r : reports) {
        pen.push_back(r.penalized_return);
        unpen.push_back(r.unpenalized_return);
        freq.push_back(r.avg_frequency);
        ndec.push_back(static_cast<double>(r.n_decisions));
        jit.push_back(r.mean_jitter());
    }
    agg.penalized_return = stat_of(pen);
    agg.unpenalized_return = stat_of(unpen);
    agg.avg_frequency = stat_of(freq);
    agg.n_decisions = stat_of(ndec);
    agg.mean_jitter = stat_of(jit);
    return agg;
}

EpisodeReport mean_report(const std::vector<EpisodeReport>& reports) {
    if (reports.empty()) throw std::invalid_argument("mean_report: no reports");
    EpisodeReport m;
    double ndec = 0.0, nsteps = 0.0, jit = 0.0;
    for (const EpisodeReport& r : reports) {
        m.penalized_return += r.penalized_return;
        m.unpenalized_return += r.unpenalized_return;
        m.avg_frequency += r.avg_frequency;
        ndec += r.n_decisions;
        nsteps += r.n_base_steps;
        jit += r.mean_jitter();
    }
    const double n = static_cast<double>(reports.size());
    m.penalized_return /= n;
    m.unpenalized_return /= n;
    m.avg_frequency /= n;
    m.n_decisions = static_cast<int>(std::lround(ndec / n));
    m.n_base_steps = static_cast<int>(std::lround(nsteps / n));
    m.jitter = {jit / n};  // carries the mean jitter scalar
    return m;
}

std::string episodes_csv(const std::vector<EpisodeReport>& reports) {
    std::ostringstream os;
    os << "episode,penalized_return,unpenalized_return,n_decisions,n_base_steps,"
          "avg_frequency_hz,mean_jitter\n";
    for (size_t k = 0; k < reports.size(); ++k) {
        const EpisodeReport& r = reports[k];
        os << k << ',' << fmt(r.penalized_return) << ',' << fmt(r.unpenalized_return) << ','
           << r.n_decisions << ',' << r.n_base_steps << ',' << fmt(r.avg_frequency) << ','
           << fmt(r.mean_jitter()) << '\n';
    }
    return os.str();
}

std::string jitter_csv(const std::vector<double>& jitter) {
    std::ostringstream os;
    os << "step,value\n";
    for (size_t k = 0; k < jitter.size(); ++k) {
        os << (k + 1) << ',' << fmt(jitter[k]) << '\n';
    }
    return os.str();
}

std::string freq_trace_csv(const std::vector<FreqTracePoint>& trace) {
    std::ostringstream os;
    os << "time_s,dt,hz,push_flag\n";
    for (const FreqTracePoint& p : trace) {
        os << fmt(p.time_s) << ',' << p.repeat << ',' << fmt(p.hz) << ',' << (p.push ? 1 : 0)
           << '\n';
    }
    return os.str();
}

std::string summary_json(const AggregateReport& report) {
    nlohmann::json j;
    j["seed_count"] = report.count;
    j["single_sample"] = report.single_sample;
    auto put = [&j](const char* name, const MetricStat& s) {
        j["metrics"][name] = {{"mean", s.mean}, {"std_dev", s.std_dev}, {"std_err", s.std_err}};
    };
    put("penalized_return", report.penalized_return);
    put("unpenalized_return", report.unpenalized_return);
    put("avg_frequency_hz", report.avg_frequency);
    put("n_decisions", report.n_decisions);
    put("mean_jitter", report.mean_jitter);
    return j.dump(2) + "\n";
}

}  // namespace tarc
