#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "dcbia/sim.hpp"

namespace dcbia {

/// Raised for any configuration problem. `key()` names the offending dotted key when
/// there is one.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(key.empty() ? message : "config key '" + key + "': " + message), key_(std::move(key))
    {
    }
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);
double db_to_linear(double db);
/// Thermal noise power -174 dBm/Hz over `bandwidth_hz` plus the noise figure.
double thermal_noise_dbm(double bandwidth_hz, double noise_figure_db);

/// The experiment document. Values the user writes in dB / dBm / degrees live here;
/// `sim` carries the same settings in linear units and radians, refreshed by
/// `sync_derived()`.
struct ExperimentConfig {
    SimConfig sim;

    double ap_tx_power_dbm = 43.0;
    double user_tx_power_dbm = 23.0;
    double detection_threshold_db = 0.0;
    double bandwidth_hz = 15e6;
    double noise_figure_db = 3.0;
    std::optional<double> noise_power_dbm; ///< overrides the thermal computation
    double angular_spread_deg = 10.0;
    int codebook_size = 16;

    std::string out_dir = "out";
    bool save_replay_buffer = true;

    ExperimentConfig();

    /// Recomputes the linear-unit fields of `sim` from the document fields above.
    void sync_derived();
    bool operator==(const ExperimentConfig&) const = default;
};

/// Cross-field checks; throws ConfigError naming the keys involved.
void validate_config(const ExperimentConfig& cfg);

ExperimentConfig parse_config_text(const std::string& text, const std::string& source = "<string>");
/// Throws ConfigError for a missing file, malformed YAML, unknown keys, bad values or
/// cross-field violations. An empty file yields the defaults.
ExperimentConfig parse_config(const std::string& path);

/// Commented YAML document; parse_config_text(emit_config(c)) == c.
std::string emit_config(const ExperimentConfig& cfg);

/// Environment variable consulted for the default config path.
inline constexpr const char* kConfigEnvVar = "DCBIA_CONFIG";

} // namespace dcbia
