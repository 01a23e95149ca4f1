// dcbia: run initial-access experiments, summarize their logs, manage agent checkpoints.

#include <iostream>

#include <CLI11.hpp>

#include "dcbia/commands.hpp"

namespace {

template <typename T>
void optional_option(CLI::App* app, const std::string& name, std::optional<T>& target, const std::string& help)
{
    app->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Initial-access experiments: deep contextual bandit vs. beam sweeping"};
    app.require_subcommand(1);

    dcbia::RunFlags run;
    auto* run_cmd = app.add_subcommand("run", "run one experiment and write its logs");
    optional_option(run_cmd, "--config", run.config,
                    std::string("YAML config (default: $") + dcbia::kConfigEnvVar + ", then built-in defaults)");
    optional_option(run_cmd, "--strategy", run.strategy, "dcb | sweep | oracle");
    optional_option(run_cmd, "--seed", run.seed, "master seed");
    optional_option(run_cmd, "--episodes", run.episodes, "number of episodes");
    optional_option(run_cmd, "--density", run.density, "AP density per km^2");
    optional_option(run_cmd, "--qi", run.qi, "per-beam interference probability (sweep)");
    optional_option(run_cmd, "--out", run.out, "output directory");

    dcbia::SummarizeFlags sum;
    auto* sum_cmd = app.add_subcommand("summarize", "turn run directories into plot-ready curves and a density table");
    sum_cmd->add_option("runs", sum.runs, "run directories written by `run`")->required();
    sum_cmd->add_option("--out", sum.out_dir, "summary directory")->capture_default_str();
    sum_cmd->add_option("--window", sum.window, "events per curve point (0: each run's window)")
        ->capture_default_str();
    sum_cmd->add_option("--tail", sum.tail, "density table uses the last N events (0: all)")->capture_default_str();

    dcbia::CheckpointFlags ck;
    auto* ck_cmd = app.add_subcommand("checkpoint", "inspect an agent checkpoint or strip its replay buffer");
    ck_cmd->add_option("action", ck.action, "inspect | strip")->required();
    ck_cmd->add_option("input", ck.input, "checkpoint file")->required();
    ck_cmd->add_option("output", ck.output, "output file (strip)");
    optional_option(ck_cmd, "--config", ck.config, "config the agent was trained with");

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed())
        return dcbia::cmd_run(run, std::cout, std::cerr);
    if (sum_cmd->parsed())
        return dcbia::cmd_summarize(sum, std::cout, std::cerr);
    return dcbia::cmd_checkpoint(ck, std::cout, std::cerr);
}
