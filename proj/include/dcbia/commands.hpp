#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dcbia/config.hpp"

namespace dcbia {

/// Flags shared by every command that builds an experiment. Unset flags leave the
/// config file value in place.
struct RunFlags {
    std::optional<std::string> config; ///< falls back to $DCBIA_CONFIG, then the defaults
    std::optional<std::string> strategy;
    std::optional<std::uint64_t> seed;
    std::optional<long long> episodes;
    std::optional<double> density;
    std::optional<double> qi;
    std::optional<std::string> out;
};

/// Config file + flag overrides, validated.
ExperimentConfig resolve_config(const RunFlags& flags);

/// Runs the experiment and writes, under the output directory:
///   events.csv, metrics.csv, run.yaml (the resolved config), agents/agent_<m>.ckpt (dcb).
/// Prints a one-line summary to `out`. Returns the process exit code.
int cmd_run(const RunFlags& flags, std::ostream& out, std::ostream& err);

struct SummarizeFlags {
    std::vector<std::string> runs; ///< run directories written by cmd_run
    std::string out_dir = "summary";
    int window = 0;                ///< events per curve point; 0 keeps each run's window
    long long tail = 0;            ///< density table uses the last `tail` events; 0 = all
};

/// Writes curve_<label>.csv per run (misdetection and delay against event index) and
/// density_table.csv (one row per run, sorted by density then series). Every log is read
/// and checked before any file is written.
int cmd_summarize(const SummarizeFlags& flags, std::ostream& out, std::ostream& err);

/// Label used for curve files and density-table rows: "dcb", "oracle", "sweep_q0.01".
std::string series_label(const ExperimentConfig& cfg);

struct CheckpointFlags {
    std::string action;      ///< "inspect" or "strip"
    std::string input;
    std::string output;      ///< strip only
    std::optional<std::string> config; ///< agent settings; defaults when unset
};

/// `inspect` prints the agent state; `strip` rewrites the checkpoint without its replay buffer.
int cmd_checkpoint(const CheckpointFlags& flags, std::ostream& out, std::ostream& err);

} // namespace dcbia
