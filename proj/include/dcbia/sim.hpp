#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "dcbia/beamforming.hpp"
#include "dcbia/channel.hpp"
#include "dcbia/dcb.hpp"
#include "dcbia/ia_dcb.hpp"
#include "dcbia/ia_sweep.hpp"
#include "dcbia/metrics.hpp"
#include "dcbia/rng.hpp"

namespace dcbia {

enum class Strategy { dcb, sweep, oracle };
enum class ApPlacement { grid, poisson };

const char* to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);
const char* to_string(ApPlacement p);
ApPlacement placement_from_string(const std::string& s);

struct ScenarioConfig {
    double area_width_m = 200.0;
    double area_height_m = 200.0;
    double ap_density_per_km2 = 200.0;
    int num_users = 30;
    double ap_height_m = 10.0;
    double user_height_m = 1.5;
    ApPlacement placement = ApPlacement::grid;
    bool frozen_users = false;

    double area_km2() const { return area_width_m * area_height_m * 1e-6; }
    /// round(density * area), the number of APs in the scenario.
    int ap_count() const;
    void validate() const;
    bool operator==(const ScenarioConfig&) const = default;
};

struct Scenario {
    double area_width_m = 0.0;
    double area_height_m = 0.0;
    double ap_density_per_km2 = 0.0;
    std::vector<Point3> aps;
    std::vector<Point3> users;
};

/// APs on a ceiling grid (or uniformly at random for `poisson`, conditioned on the count),
/// users uniform in the area.
Scenario generate_scenario(const ScenarioConfig& cfg, Rng& rng);
std::vector<Point3> place_users(const ScenarioConfig& cfg, Rng& rng);

/// Link powers in watts, threshold as a linear ratio.
struct LinkConfig {
    double ap_tx_power_w = 19.952623149688797;     // 43 dBm
    double user_tx_power_w = 0.19952623149688797;  // 23 dBm
    double detection_threshold = 1.0;              // 0 dB
    double t_msg_ms = 0.01;
    bool operator==(const LinkConfig&) const = default;
};

struct SimConfig {
    Strategy strategy = Strategy::dcb;
    long long episodes = 1000;
    std::uint64_t seed = 1;
    int window = 1000;
    int association_size = 3;
    bool shared_agent = false;
    bool count_undetected = true;

    ScenarioConfig scenario;
    ArrayGeometry array;
    std::string codebook_file; ///< empty: 2D-DFT codebook
    ChannelParams channel;
    LinkConfig link;
    double q_i = 0.0;
    AgentConfig agent;

    Codebook make_codebook() const;
    void validate() const;
    bool operator==(const SimConfig&) const = default;
};

struct IaEvent {
    static constexpr double none = std::numeric_limits<double>::quiet_NaN();

    long long episode = 0;
    int ap = 0;
    int user = 0;
    Strategy strategy = Strategy::oracle;
    int chosen_beam = -1; ///< -1 when undetected
    int best_beam = 0;
    bool detected = true;
    bool misdetected = false;
    double delay_ms = none;
    double reward = none;
    double epsilon = none;
    double loss = none;
};

struct MetricsWindow {
    long long window_start = 0; ///< first event index
    long long window_end = 0;   ///< one past the last event index
    double misdetection_prob = IaEvent::none;
    double mean_delay_ms = IaEvent::none;
    double mean_epsilon = IaEvent::none;
    double mean_loss = IaEvent::none;
};

struct MetricsSeries {
    int window_size = 0;
    std::vector<MetricsWindow> windows;
};

/// Streams events into non-overlapping windows of `window_size` events.
class MetricsAccumulator {
public:
    MetricsAccumulator(int window_size, bool count_undetected);
    void add(const IaEvent& e);
    /// Flushes a trailing partial window.
    MetricsSeries finish();

private:
    void close_window();

    MetricsSeries series_;
    bool count_undetected_;
    long long index_ = 0;
    long long start_ = 0;
    long long denom_ = 0, misdet_ = 0;
    long long delay_n_ = 0, eps_n_ = 0, loss_n_ = 0;
    CompensatedSum delay_sum_, eps_sum_, loss_sum_;
};

struct RunOptions {
    bool keep_events = true;
    std::function<void(const IaEvent&)> on_event;
};

struct ExperimentResult {
    Scenario scenario;
    std::vector<IaEvent> events;
    MetricsSeries metrics;
    std::vector<std::unique_ptr<DcbAgent>> agents;
    long long total_events = 0;
    long long total_outages = 0;          ///< (episode, user) pairs no AP detected
    long long degenerate_associations = 0;
    long long first_post_warmup_event = -1; ///< first event after every agent left warmup
};

ExperimentResult run_experiment(const SimConfig& config, const RunOptions& options = {});

/// Purposes keyed into the master-seed substreams.
enum StreamPurpose : std::uint64_t { kScenario = 0, kUsers = 1, kChannel = 2, kEvent = 3, kAgentInit = 4 };

/// The channel run_experiment draws for (episode, ap, user) given that episode's scenario.
/// Runs with frozen users keep the episode-0 draw for every episode.
ChannelRealization episode_channel(const SimConfig& config, const Scenario& scenario, long long episode, int ap,
                                   int user);
/// The scenario of episode 0.
Scenario initial_scenario(const SimConfig& config);

// CSV I/O ----------------------------------------------------------------------

inline constexpr const char* kEventCsvHeader =
    "episode,ap_id,user_id,strategy,chosen_beam,best_beam,detected,misdetected,delay_ms,reward,epsilon,loss";
inline constexpr const char* kMetricsCsvHeader =
    "window_start,window_end,misdetection_prob,mean_delay_ms,mean_epsilon,mean_loss";

void write_event_row(std::ostream& out, const IaEvent& e);
void write_metrics_csv(std::ostream& out, const MetricsSeries& series);
/// Parses an event log; throws std::runtime_error on a malformed or empty log.
std::vector<IaEvent> read_event_log(std::istream& in);

} // namespace dcbia
