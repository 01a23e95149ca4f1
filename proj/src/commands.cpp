#include "dcbia/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace dcbia {

namespace fs = std::filesystem;

ExperimentConfig resolve_config(const RunFlags& flags)
{
    ExperimentConfig cfg;
    std::optional<std::string> path = flags.config;
    if (!path) {
        if (const char* env = std::getenv(kConfigEnvVar); env && *env)
            path = env;
    }
    if (path)
        cfg = parse_config(*path);

    if (flags.strategy) {
        try {
            cfg.sim.strategy = strategy_from_string(*flags.strategy);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("experiment.strategy", e.what());
        }
    }
    if (flags.seed)
        cfg.sim.seed = *flags.seed;
    if (flags.episodes)
        cfg.sim.episodes = *flags.episodes;
    if (flags.density)
        cfg.sim.scenario.ap_density_per_km2 = *flags.density;
    if (flags.qi)
        cfg.sim.q_i = *flags.qi;
    if (flags.out)
        cfg.out_dir = *flags.out;
    cfg.sync_derived();
    validate_config(cfg);
    return cfg;
}

std::string series_label(const ExperimentConfig& cfg)
{
    if (cfg.sim.strategy == Strategy::sweep)
        return fmt::format("sweep_q{}", cfg.sim.q_i);
    return to_string(cfg.sim.strategy);
}

namespace {

std::ofstream open_output(const fs::path& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    return f;
}

std::string fmt_metric(double v)
{
    return std::isnan(v) ? std::string("nan") : fmt::format("{:.6g}", v);
}

} // namespace

int cmd_run(const RunFlags& flags, std::ostream& out, std::ostream& err)
{
    try {
        const ExperimentConfig cfg = resolve_config(flags);
        const fs::path dir(cfg.out_dir);
        fs::create_directories(dir);

        {
            auto yaml = open_output(dir / "run.yaml");
            yaml << emit_config(cfg);
        }

        auto events = open_output(dir / "events.csv");
        events << kEventCsvHeader << '\n';
        RunOptions options;
        options.keep_events = false;
        options.on_event = [&](const IaEvent& e) { write_event_row(events, e); };
        const ExperimentResult result = run_experiment(cfg.sim, options);
        events.close();
        if (!events)
            throw std::runtime_error("error writing events.csv");

        {
            auto metrics = open_output(dir / "metrics.csv");
            write_metrics_csv(metrics, result.metrics);
        }

        if (!result.agents.empty()) {
            fs::create_directories(dir / "agents");
            for (std::size_t m = 0; m < result.agents.size(); ++m) {
                auto ckpt = open_output(dir / "agents" / fmt::format("agent_{}.ckpt", m));
                save_agent(ckpt, *result.agents[m], cfg.save_replay_buffer);
            }
        }

        const auto& windows = result.metrics.windows;
        const MetricsWindow last = windows.empty() ? MetricsWindow{} : windows.back();
        fmt::print(out,
                   "strategy={} episodes={} aps={} events={} final_window_misdetection={} "
                   "final_window_mean_delay_ms={} outages={}\n",
                   to_string(cfg.sim.strategy), cfg.sim.episodes, result.scenario.aps.size(), result.total_events,
                   fmt_metric(last.misdetection_prob), fmt_metric(last.mean_delay_ms), result.total_outages);
        return 0;
    } catch (const std::exception& e) {
        fmt::print(err, "dcbia run: {}\n", e.what());
        return 1;
    }
}

namespace {

struct LoadedRun {
    fs::path dir;
    ExperimentConfig cfg;
    std::vector<IaEvent> events;
};

struct TailStats {
    long long events = 0;
    long long misdetections = 0;
    double misdetection_prob = IaEvent::none;
    double mean_delay_ms = IaEvent::none;
};

TailStats tail_stats(const std::vector<IaEvent>& events, long long tail, bool count_undetected)
{
    const auto n = static_cast<long long>(events.size());
    const long long begin = (tail > 0 && tail < n) ? n - tail : 0;
    TailStats s;
    long long denom = 0, delay_n = 0;
    CompensatedSum delay_sum;
    for (long long i = begin; i < n; ++i) {
        const auto& e = events[static_cast<std::size_t>(i)];
        ++s.events;
        if (e.detected || count_undetected) {
            ++denom;
            if (e.misdetected)
                ++s.misdetections;
        }
        if (!std::isnan(e.delay_ms)) {
            ++delay_n;
            delay_sum.add(e.delay_ms);
        }
    }
    if (denom > 0)
        s.misdetection_prob = static_cast<double>(s.misdetections) / static_cast<double>(denom);
    if (delay_n > 0)
        s.mean_delay_ms = delay_sum.value() / static_cast<double>(delay_n);
    return s;
}

} // namespace

int cmd_summarize(const SummarizeFlags& flags, std::ostream& out, std::ostream& err)
{
    try {
        if (flags.runs.empty())
            throw std::runtime_error("no run directories given");
        if (flags.window < 0 || flags.tail < 0)
            throw std::runtime_error("--window and --tail must be >= 0");

        // Load and check everything before producing any output.
        std::vector<LoadedRun> runs;
        std::map<std::string, fs::path> labels;
        for (const auto& r : flags.runs) {
            LoadedRun run;
            run.dir = r;
            const auto log_path = run.dir / "events.csv";
            std::ifstream log(log_path, std::ios::binary);
            if (!log)
                throw std::runtime_error("cannot open event log '" + log_path.string() + "'");
            run.cfg = parse_config((run.dir / "run.yaml").string());
            try {
                run.events = read_event_log(log);
            } catch (const std::exception& e) {
                throw std::runtime_error(log_path.string() + ": " + e.what());
            }
            const auto label = fmt::format("{}_d{}", series_label(run.cfg), run.cfg.sim.scenario.ap_density_per_km2);
            if (auto [it, fresh] = labels.emplace(label, run.dir); !fresh)
                throw std::runtime_error(fmt::format("runs '{}' and '{}' share the series label '{}'",
                                                     it->second.string(), r, label));
            runs.push_back(std::move(run));
        }

        const fs::path dir(flags.out_dir);
        fs::create_directories(dir);

        for (const auto& run : runs) {
            const int window = flags.window > 0 ? flags.window : run.cfg.sim.window;
            MetricsAccumulator acc(window, run.cfg.sim.count_undetected);
            for (const auto& e : run.events)
                acc.add(e);
            const auto label = fmt::format("{}_d{}", series_label(run.cfg), run.cfg.sim.scenario.ap_density_per_km2);
            auto curve = open_output(dir / fmt::format("curve_{}.csv", label));
            write_metrics_csv(curve, acc.finish());
        }

        std::vector<std::size_t> order(runs.size());
        for (std::size_t i = 0; i < order.size(); ++i)
            order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const auto& ca = runs[a].cfg;
            const auto& cb = runs[b].cfg;
            if (ca.sim.scenario.ap_density_per_km2 != cb.sim.scenario.ap_density_per_km2)
                return ca.sim.scenario.ap_density_per_km2 < cb.sim.scenario.ap_density_per_km2;
            return series_label(ca) < series_label(cb);
        });

        auto table = open_output(dir / "density_table.csv");
        table << "ap_density_per_km2,series,strategy,q_i,events,misdetections,misdetection_prob,mean_delay_ms\n";
        for (auto i : order) {
            const auto& run = runs[i];
            const auto s = tail_stats(run.events, flags.tail, run.cfg.sim.count_undetected);
            fmt::print(table, "{},{},{},{},{},{},{},{}\n", run.cfg.sim.scenario.ap_density_per_km2,
                       series_label(run.cfg), to_string(run.cfg.sim.strategy), run.cfg.sim.q_i, s.events,
                       s.misdetections, std::isnan(s.misdetection_prob) ? "" : fmt::format("{}", s.misdetection_prob),
                       std::isnan(s.mean_delay_ms) ? "" : fmt::format("{}", s.mean_delay_ms));
        }
        fmt::print(out, "summarized {} run(s) into {}\n", runs.size(), dir.string());
        return 0;
    } catch (const std::exception& e) {
        fmt::print(err, "dcbia summarize: {}\n", e.what());
        return 1;
    }
}

int cmd_checkpoint(const CheckpointFlags& flags, std::ostream& out, std::ostream& err)
{
    try {
        if (flags.action != "inspect" && flags.action != "strip")
            throw std::runtime_error("unknown checkpoint action '" + flags.action + "' (inspect | strip)");
        const ExperimentConfig cfg = flags.config ? parse_config(*flags.config) : ExperimentConfig{};
        std::ifstream in(flags.input, std::ios::binary);
        if (!in)
            throw std::runtime_error("cannot open checkpoint '" + flags.input + "'");
        Rng init(0);
        DcbAgent agent(cfg.sim.agent, init);
        load_agent(in, agent);

        if (flags.action == "inspect") {
            std::string layers;
            for (auto s : agent.net.layer_sizes)
                layers += fmt::format("{}{}", layers.empty() ? "" : "-", s);
            fmt::print(out,
                       "layers={} epsilon={} warmup_remaining={} training_steps={} adam_step={} buffer={}/{} "
                       "finite={}\n",
                       layers, agent.epsilon, agent.warmup_remaining, agent.training_steps, agent.adam.step,
                       agent.buffer.size(), agent.buffer.capacity(), agent.net.all_finite() ? "yes" : "no");
            return 0;
        }
        if (flags.output.empty())
            throw std::runtime_error("strip needs an output path");
        auto o = open_output(flags.output);
        save_agent(o, agent, false);
        fmt::print(out, "wrote {} without replay buffer\n", flags.output);
        return 0;
    } catch (const std::exception& e) {
        fmt::print(err, "dcbia checkpoint: {}\n", e.what());
        return 1;
    }
}

} // namespace dcbia
