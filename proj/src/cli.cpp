#include "tarc/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "tarc/checkpoint.hpp"
#include "tarc/metrics.hpp"

namespace tarc {

namespace fs = std::filesystem;

namespace {

class ArtifactError : public std::runtime_error {
public:
    explicit ArtifactError(const std::string& what) : std::runtime_error(what) {}
};

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

// Runs jobs 0..n_jobs-1 on up to `workers` threads; rethrows the first
// failure after all threads join.
void run_jobs(int workers, int n_jobs, const std::function<void(int)>& job) {
    if (workers <= 1 || n_jobs <= 1) {
        for (int k = 0; k < n_jobs; ++k) job(k);
        return;
    }
    std::atomic_int next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    const int n_threads = std::min(workers, n_jobs);
    for (int w = 0; w < n_threads; ++w) {
        pool.emplace_back([&]() {
            for (int k = next.fetch_add(1); k < n_jobs; k = next.fetch_add(1)) {
                try {
                    job(k);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

fs::path run_dir(const RunConfig& cfg) { return fs::path(cfg.out_dir) / cfg.run_name; }

fs::path seed_dir(const fs::path& base, uint64_t seed) {
    return base / ("seed_" + std::to_string(seed));
}

Checkpoint train_one_seed(const RunConfig& cfg, uint64_t seed, const fs::path& dir) {
    PPOConfig ppo = cfg.ppo;
    ppo.seed = seed;
    const PolicyConfig pc = policy_config_for(cfg);
    Trainer trainer([&cfg]() { return make_env(cfg); }, pc, ppo, cfg.augment);
    const TrainResult result = trainer.train();

    std::string log = train_log_header() + "\n";
    for (const TrainLogRow& row : result.log) log += train_log_row_csv(row) + "\n";
    write_file(dir / "train_log.csv", log);

    Checkpoint ck;
    ck.env_id = cfg.env_id;
    ck.label = variant_label(cfg.augment);
    ck.config_hash = config_hash(cfg);
    ck.seed = seed;
    ck.augment = cfg.augment;
    ck.policy_cfg = pc;
    ck.params = result.params;
    save_checkpoint((dir / "checkpoint.json").string(), ck);
    return ck;
}

struct SeedEval {
    std::vector<EpisodeReport> episodes;
    EpisodeReport seed_mean;
};

SeedEval eval_checkpoint(const RunConfig& cfg, const Checkpoint& ck, int episodes,
                         bool deterministic) {
    const std::unique_ptr<BaseEnv> env = make_env(cfg);
    AugmentConfig roll = ck.augment;
    roll.switch_cost = cfg.augment.switch_cost;  // evaluation-time switch cost
    roll.discount = 1.0;                         // metrics use plain sums

    SeedEval ev;
    Rng sample_rng(derive_seed(ck.seed, 0x57A7ULL));
    const PolicyFn policy = deterministic ? make_deterministic_policy_fn(ck.params)
                                          : make_policy_fn(ck.params, &sample_rng);
    for (int ep = 0; ep < episodes; ++ep) {
        const uint64_t ep_seed = derive_seed(ck.seed, 0xE7A1ULL, static_cast<uint64_t>(ep));
        const Trajectory traj = rollout(*env, policy, roll, ep_seed);
        std::vector<int> push_steps;
        if (const auto* pend = dynamic_cast<const PendulumEnv*>(env.get())) {
            for (const PushEvent& e : pend->episode_pushes()) push_steps.push_back(e.step);
        }
        ev.episodes.push_back(episode_metrics(traj, roll, env->f_max(),
                                              env->action_delay_steps(), push_steps));
    }
    ev.seed_mean = mean_report(ev.episodes);
    return ev;
}

// Accepts a run directory with seed_*/checkpoint.json children, a seed
// directory, or a checkpoint file.
std::vector<fs::path> resolve_checkpoints(const std::string& path) {
    fs::path p(path);
    if (fs::is_regular_file(p)) return {p};
    if (fs::is_directory(p)) {
        if (fs::exists(p / "checkpoint.json")) return {p / "checkpoint.json"};
        std::vector<fs::path> found;
        for (const auto& entry : fs::directory_iterator(p)) {
            if (entry.is_directory() && entry.path().filename().string().rfind("seed_", 0) == 0 &&
                fs::exists(entry.path() / "checkpoint.json")) {
                found.push_back(entry.path() / "checkpoint.json");
            }
        }
        std::sort(found.begin(), found.end());
        if (!found.empty()) return found;
    }
    throw ArtifactError("no checkpoint found at " + path);
}

std::string format_c(double c) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", c);
    return buf;
}

std::string fmt10(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

int cmd_train(const RunConfig& cfg, int workers) {
    const fs::path base = run_dir(cfg);
    run_jobs(workers, static_cast<int>(cfg.seeds.size()), [&](int k) {
        const uint64_t seed = cfg.seeds[k];
        train_one_seed(cfg, seed, seed_dir(base, seed));
    });

    nlohmann::json meta;
    meta["label"] = variant_label(cfg.augment);
    meta["config_hash"] = config_hash(cfg);
    meta["config"] = run_config_to_json(cfg);
    write_file(base / "run_meta.json", meta.dump(2) + "\n");
    std::cout << "trained " << cfg.seeds.size() << " seed(s) -> " << base.string() << "\n";
    return kExitOk;
}

int cmd_eval(const RunConfig& cfg, const std::string& checkpoint_path, int episodes,
             const std::string& out_dir, bool deterministic) {
    const std::vector<fs::path> paths = resolve_checkpoints(checkpoint_path);
    const std::string expect_hash = config_hash(cfg);
    const fs::path out =
        out_dir.empty() ? (fs::is_directory(checkpoint_path)
                               ? fs::path(checkpoint_path)
                               : fs::path(checkpoint_path).parent_path())
                        : fs::path(out_dir);

    const bool single_file = paths.size() == 1 && fs::is_regular_file(checkpoint_path);
    std::vector<EpisodeReport> seed_means;
    for (const fs::path& path : paths) {
        const Checkpoint ck = load_checkpoint(path.string());
        if (ck.config_hash != expect_hash) {
            throw ArtifactError("checkpoint " + path.string() + " hash " + ck.config_hash +
                                " does not match eval config hash " + expect_hash);
        }
        const SeedEval ev = eval_checkpoint(cfg, ck, episodes, deterministic);
        const fs::path dir = single_file ? out : seed_dir(out, ck.seed);
        write_file(dir / "episodes.csv", episodes_csv(ev.episodes));
        write_file(dir / "jitter.csv", jitter_csv(ev.episodes.front().jitter));
        write_file(dir / "freq_trace.csv", freq_trace_csv(ev.episodes.front().frequency_trace));
        seed_means.push_back(ev.seed_mean);
    }
    write_file(out / "summary.json", summary_json(aggregate(seed_means)));
    std::cout << "evaluated " << paths.size() << " checkpoint(s) x " << episodes
              << " episode(s) -> " << out.string() << "\n";
    return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, std::vector<double> switch_costs, int workers) {
    if (switch_costs.empty()) throw ConfigError("switch-costs", "need at least one value");
    std::sort(switch_costs.begin(), switch_costs.end());

    const fs::path base = fs::path(cfg.out_dir) / (cfg.run_name + "_sweep");
    const int n_seeds = static_cast<int>(cfg.seeds.size());
    const int n_jobs = static_cast<int>(switch_costs.size()) * n_seeds;
    std::vector<EpisodeReport> results(n_jobs);

    run_jobs(workers, n_jobs, [&](int k) {
        const int ci = k / n_seeds;
        const int si = k % n_seeds;
        RunConfig sub = cfg;
        sub.augment.switch_cost = switch_costs[ci];
        sub.run_name = cfg.run_name + "_c" + format_c(switch_costs[ci]);
        const fs::path dir = seed_dir(base / ("c_" + format_c(switch_costs[ci])), cfg.seeds[si]);
        const Checkpoint ck = train_one_seed(sub, cfg.seeds[si], dir);
        const SeedEval ev = eval_checkpoint(sub, ck, cfg.eval_episodes, true);
        write_file(dir / "episodes.csv", episodes_csv(ev.episodes));
        results[k] = ev.seed_mean;
    });

    std::string rows = "c,seed,penalized_return,unpenalized_return,avg_frequency_hz\n";
    std::string summary =
        "c,penalized_mean,penalized_stderr,unpenalized_mean,unpenalized_stderr,"
        "avg_frequency_mean,avg_frequency_stderr\n";
    for (size_t ci = 0; ci < switch_costs.size(); ++ci) {
        std::vector<EpisodeReport> per_c;
        for (int si = 0; si < n_seeds; ++si) {
            const EpisodeReport& r = results[ci * n_seeds + si];
            rows += format_c(switch_costs[ci]) + "," + std::to_string(cfg.seeds[si]) + "," +
                    fmt10(r.penalized_return) + "," + fmt10(r.unpenalized_return) + "," +
                    fmt10(r.avg_frequency) + "\n";
            per_c.push_back(r);
        }
        const AggregateReport agg = aggregate(per_c);
        summary += format_c(switch_costs[ci]) + "," + fmt10(agg.penalized_return.mean) + "," +
                   fmt10(agg.penalized_return.std_err) + "," +
                   fmt10(agg.unpenalized_return.mean) + "," +
                   fmt10(agg.unpenalized_return.std_err) + "," +
                   fmt10(agg.avg_frequency.mean) + "," + fmt10(agg.avg_frequency.std_err) + "\n";
    }
    write_file(base / "sweep.csv", rows);
    write_file(base / "sweep_summary.csv", summary);
    std::cout << "sweep over " << switch_costs.size() << " switch cost(s) -> " << base.string()
              << "\n";
    return kExitOk;
}

int cmd_perturb(const RunConfig& cfg, const std::string& checkpoint_path,
                const std::string& out_dir) {
    if (cfg.env_id != "pendulum") {
        throw ArtifactError("perturb requires a pendulum config");
    }
    const std::vector<fs::path> paths = resolve_checkpoints(checkpoint_path);
    const std::string expect_hash = config_hash(cfg);
    const fs::path out =
        out_dir.empty() ? (fs::is_directory(checkpoint_path)
                               ? fs::path(checkpoint_path)
                               : fs::path(checkpoint_path).parent_path())
                        : fs::path(out_dir);

    for (const fs::path& path : paths) {
        const Checkpoint ck = load_checkpoint(path.string());
        if (ck.env_id != "pendulum") {
            throw ArtifactError("checkpoint " + path.string() + " is not a pendulum policy");
        }
        if (ck.config_hash != expect_hash) {
            throw ArtifactError("checkpoint " + path.string() + " hash " + ck.config_hash +
                                " does not match config hash " + expect_hash);
        }
        // the demo uses the config's explicit events, not the training-time
        // random push distribution
        PendulumConfig pcfg = cfg.pendulum;
        pcfg.push.random_count = 0;
        PendulumEnv env(pcfg);
        AugmentConfig roll = ck.augment;
        roll.discount = 1.0;
        const PolicyFn policy = make_deterministic_policy_fn(ck.params);
        const std::vector<FreqTracePoint> trace =
            perturbation_trace(env, policy, roll, derive_seed(ck.seed, 0x9E27ULL));
        write_file(seed_dir(out, ck.seed) / "freq_trace.csv", freq_trace_csv(trace));
    }
    std::cout << "perturbation traces for " << paths.size() << " checkpoint(s) -> "
              << out.string() << "\n";
    return kExitOk;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"time-adaptive control lab: train/eval/sweep/perturb"};
    app.require_subcommand(1);

    std::string config_path, checkpoint_path, out_override, seeds_override, costs_csv;
    int workers = 1;
    int episodes = -1;
    bool deterministic = true;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "run config file (JSON)")->required();
        sub->add_option("--out", out_override, "output directory override");
        sub->add_option("--seeds", seeds_override, "comma-separated seed override");
        sub->add_option("--workers", workers, "parallel worker count");
        sub->add_flag("--deterministic,!--stochastic", deterministic,
                      "deterministic-mode policy at evaluation (default on)");
    };

    CLI::App* train = app.add_subcommand("train", "train one run per seed");
    add_common(train);
    CLI::App* eval = app.add_subcommand("eval", "evaluate trained checkpoints");
    add_common(eval);
    eval->add_option("--checkpoint", checkpoint_path, "checkpoint file or run directory")
        ->required();
    eval->add_option("--episodes", episodes, "episodes per seed");
    CLI::App* sweep = app.add_subcommand("sweep", "train/evaluate across switch costs");
    add_common(sweep);
    sweep->add_option("--switch-costs", costs_csv, "comma-separated switch cost values")
        ->required();
    CLI::App* perturb = app.add_subcommand("perturb", "frequency trace under pushes");
    add_common(perturb);
    perturb->add_option("--checkpoint", checkpoint_path, "checkpoint file or run directory")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfigError;
    }

    try {
        RunConfig cfg = load_run_config(config_path);
        if (!out_override.empty()) cfg.out_dir = out_override;
        if (!seeds_override.empty()) {
            cfg.seeds.clear();
            std::stringstream ss(seeds_override);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                if (!tok.empty()) cfg.seeds.push_back(std::stoull(tok));
            }
            if (cfg.seeds.empty()) throw ConfigError("seeds", "override has no seeds");
        }
        if (workers < 1) throw ConfigError("workers", "must be >= 1");
        cfg.run_name = cfg.run_name.empty() ? variant_label(cfg.augment) : cfg.run_name;

        if (train->parsed()) return cmd_train(cfg, workers);
        if (eval->parsed()) {
            const int n = episodes > 0 ? episodes : (episodes == -1 ? cfg.eval_episodes : 0);
            if (n <= 0) throw ConfigError("episodes", "must be > 0");
            return cmd_eval(cfg, checkpoint_path, n, out_override, deterministic);
        }
        if (sweep->parsed()) {
            std::vector<double> costs;
            std::stringstream ss(costs_csv);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                if (!tok.empty()) costs.push_back(std::stod(tok));
            }
            return cmd_sweep(cfg, costs, workers);
        }
        return cmd_perturb(cfg, checkpoint_path, out_override);
    } catch (const ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return kExitConfigError;
    } catch (const TrainingDiverged& ex) {
        std::cerr << "training failure: " << ex.what() << "\n";
        return kExitTrainingFailure;
    } catch (const ArtifactError& ex) {
        std::cerr << "artifact mismatch: " << ex.what() << "\n";
        return kExitArtifactMismatch;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("tarc");
    for (const std::string& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace tarc
