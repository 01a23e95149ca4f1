#include "dcbia/config.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <vector>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace dcbia {

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double thermal_noise_dbm(double bandwidth_hz, double noise_figure_db)
{
    return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

ExperimentConfig::ExperimentConfig()
{
    sync_derived();
}

void ExperimentConfig::sync_derived()
{
    sim.link.ap_tx_power_w = dbm_to_watts(ap_tx_power_dbm);
    sim.link.user_tx_power_w = dbm_to_watts(user_tx_power_dbm);
    sim.link.detection_threshold = db_to_linear(detection_threshold_db);
    sim.channel.noise_power_w = dbm_to_watts(noise_power_dbm ? *noise_power_dbm
                                                             : thermal_noise_dbm(bandwidth_hz, noise_figure_db));
    sim.channel.angular_spread_rad = angular_spread_deg * std::numbers::pi / 180.0;
}

// ---------------------------------------------------------------------------
// Field registry: one entry per document key, shared by the parser and emitter.

namespace {

using Reader = std::function<void(ExperimentConfig&, const YAML::Node&, const std::string&)>;
using Writer = std::function<std::string(const ExperimentConfig&)>;

struct Field {
    std::string section;
    std::string key;
    std::string comment;
    Reader read;
    Writer write;
};

template <typename T>
T scalar(const YAML::Node& n, const std::string& key, const char* what)
{
    if (!n.IsScalar())
        throw ConfigError(key, fmt::format("expected {}", what));
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(key, fmt::format("expected {}, got '{}'", what, n.Scalar()));
    }
}

std::string fmt_double(double v)
{
    return fmt::format("{}", v);
}

template <typename Get>
Field real(std::string section, std::string key, std::string comment, Get get)
{
    return {std::move(section), std::move(key), std::move(comment),
            [get](ExperimentConfig& c, const YAML::Node& n, const std::string& k) {
                const double v = scalar<double>(n, k, "a number");
                if (!std::isfinite(v))
                    throw ConfigError(k, "value must be finite");
                get(c) = v;
            },
            [get](const ExperimentConfig& c) { return fmt_double(get(const_cast<ExperimentConfig&>(c))); }};
}

template <typename T, typename Get>
Field integer(std::string section, std::string key, std::string comment, Get get)
{
    return {std::move(section), std::move(key), std::move(comment),
            [get](ExperimentConfig& c, const YAML::Node& n, const std::string& k) {
                get(c) = scalar<T>(n, k, "an integer");
            },
            [get](const ExperimentConfig& c) { return fmt::format("{}", get(const_cast<ExperimentConfig&>(c))); }};
}

template <typename Get>
Field boolean(std::string section, std::string key, std::string comment, Get get)
{
    return {std::move(section), std::move(key), std::move(comment),
            [get](ExperimentConfig& c, const YAML::Node& n, const std::string& k) {
                get(c) = scalar<bool>(n, k, "true or false");
            },
            [get](const ExperimentConfig& c) { return std::string(get(const_cast<ExperimentConfig&>(c)) ? "true" : "false"); }};
}

template <typename Get>
Field text(std::string section, std::string key, std::string comment, Get get)
{
    return {std::move(section), std::move(key), std::move(comment),
            [get](ExperimentConfig& c, const YAML::Node& n, const std::string& k) {
                get(c) = n.IsNull() ? std::string{} : scalar<std::string>(n, k, "a string");
            },
            [get](const ExperimentConfig& c) {
                YAML::Emitter e;
                e << YAML::DoubleQuoted << get(const_cast<ExperimentConfig&>(c));
                return std::string(e.c_str());
            }};
}

template <typename Parse, typename Show, typename Get>
Field choice(std::string section, std::string key, std::string comment, Parse parse, Show show, Get get)
{
    return {std::move(section), std::move(key), std::move(comment),
            [parse, get](ExperimentConfig& c, const YAML::Node& n, const std::string& k) {
                const auto s = scalar<std::string>(n, k, "a string");
                try {
                    get(c) = parse(s);
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(k, e.what());
                }
            },
            [show, get](const ExperimentConfig& c) { return std::string(show(get(const_cast<ExperimentConfig&>(c)))); }};
}

const std::vector<Field>& fields()
{
    using C = ExperimentConfig;
    static const std::vector<Field> table = {
        // experiment
        choice("experiment", "strategy", "dcb | sweep | oracle", strategy_from_string,
               [](Strategy s) { return to_string(s); }, [](C& c) -> Strategy& { return c.sim.strategy; }),
        integer<long long>("experiment", "episodes", "episodes to simulate",
                           [](C& c) -> long long& { return c.sim.episodes; }),
        integer<std::uint64_t>("experiment", "seed", "master seed", [](C& c) -> std::uint64_t& { return c.sim.seed; }),
        integer<int>("experiment", "window", "events per metrics window", [](C& c) -> int& { return c.sim.window; }),
        integer<int>("experiment", "association_size", "M, serving APs per user",
                     [](C& c) -> int& { return c.sim.association_size; }),
        boolean("experiment", "shared_agent", "one agent for all APs instead of one per AP",
                [](C& c) -> bool& { return c.sim.shared_agent; }),
        boolean("experiment", "count_undetected", "undetected references count in the misdetection denominator",
                [](C& c) -> bool& { return c.sim.count_undetected; }),
        text("experiment", "out_dir", "output directory for logs and checkpoints",
             [](C& c) -> std::string& { return c.out_dir; }),
        boolean("experiment", "save_replay_buffer", "include replay buffers in agent checkpoints",
                [](C& c) -> bool& { return c.save_replay_buffer; }),
        // scenario
        real("scenario", "area_width_m", "", [](C& c) -> double& { return c.sim.scenario.area_width_m; }),
        real("scenario", "area_height_m", "", [](C& c) -> double& { return c.sim.scenario.area_height_m; }),
        real("scenario", "ap_density_per_km2", "AP count = round(density * area)",
             [](C& c) -> double& { return c.sim.scenario.ap_density_per_km2; }),
        integer<int>("scenario", "num_users", "", [](C& c) -> int& { return c.sim.scenario.num_users; }),
        real("scenario", "ap_height_m", "", [](C& c) -> double& { return c.sim.scenario.ap_height_m; }),
        real("scenario", "user_height_m", "", [](C& c) -> double& { return c.sim.scenario.user_height_m; }),
        choice("scenario", "ap_placement", "grid | poisson", placement_from_string,
               [](ApPlacement p) { return to_string(p); },
               [](C& c) -> ApPlacement& { return c.sim.scenario.placement; }),
        boolean("scenario", "frozen_users", "keep user positions and their channels fixed across episodes",
                [](C& c) -> bool& { return c.sim.scenario.frozen_users; }),
        // array
        integer<int>("array", "width", "elements along the azimuth axis", [](C& c) -> int& { return c.sim.array.width; }),
        integer<int>("array", "height", "elements along the elevation axis",
                     [](C& c) -> int& { return c.sim.array.height; }),
        real("array", "element_spacing_wavelengths", "",
             [](C& c) -> double& { return c.sim.array.element_spacing; }),
        // codebook
        integer<int>("codebook", "size", "number of beams", [](C& c) -> int& { return c.codebook_size; }),
        text("codebook", "phase_file", "optional phase table, one beam per line; empty for the 2D-DFT codebook",
             [](C& c) -> std::string& { return c.sim.codebook_file; }),
        // channel
        real("channel", "carrier_frequency_hz", "", [](C& c) -> double& { return c.sim.channel.carrier_frequency_hz; }),
        real("channel", "bandwidth_hz", "", [](C& c) -> double& { return c.bandwidth_hz; }),
        real("channel", "noise_figure_db", "", [](C& c) -> double& { return c.noise_figure_db; }),
        {"channel", "noise_power_dbm", "optional; overrides -174 dBm/Hz + 10 log10(bandwidth) + noise figure",
         [](C& c, const YAML::Node& n, const std::string& k) {
             if (n.IsNull())
                 c.noise_power_dbm.reset();
             else
                 c.noise_power_dbm = scalar<double>(n, k, "a number");
         },
         [](const C& c) { return c.noise_power_dbm ? fmt_double(*c.noise_power_dbm) : std::string("null"); }},
        real("channel", "mean_clusters", "J = max(1, Poisson(mean_clusters))",
             [](C& c) -> double& { return c.sim.channel.mean_clusters; }),
        integer<int>("channel", "paths_per_cluster", "L", [](C& c) -> int& { return c.sim.channel.paths_per_cluster; }),
        real("channel", "los_alpha_db", "", [](C& c) -> double& { return c.sim.channel.los.alpha_db; }),
        real("channel", "los_beta", "", [](C& c) -> double& { return c.sim.channel.los.beta; }),
        real("channel", "los_shadow_sigma_db", "", [](C& c) -> double& { return c.sim.channel.los.shadow_sigma_db; }),
        real("channel", "nlos_alpha_db", "", [](C& c) -> double& { return c.sim.channel.nlos.alpha_db; }),
        real("channel", "nlos_beta", "", [](C& c) -> double& { return c.sim.channel.nlos.beta; }),
        real("channel", "nlos_shadow_sigma_db", "", [](C& c) -> double& { return c.sim.channel.nlos.shadow_sigma_db; }),
        real("channel", "los_decay_m", "P(LOS) = exp(-d / los_decay_m)",
             [](C& c) -> double& { return c.sim.channel.los_decay_m; }),
        boolean("channel", "outage_enabled", "", [](C& c) -> bool& { return c.sim.channel.outage_enabled; }),
        real("channel", "outage_decay_m", "P(outage) = max(0, 1 - exp(-d / outage_decay_m + outage_offset))",
             [](C& c) -> double& { return c.sim.channel.outage_decay_m; }),
        real("channel", "outage_offset", "", [](C& c) -> double& { return c.sim.channel.outage_offset; }),
        real("channel", "angular_spread_deg", "per-path deviation from the cluster centre",
             [](C& c) -> double& { return c.angular_spread_deg; }),
        real("channel", "cluster_power_exponent", "", [](C& c) -> double& { return c.sim.channel.cluster_power_exponent; }),
        real("channel", "cluster_power_sigma_db", "", [](C& c) -> double& { return c.sim.channel.cluster_power_sigma_db; }),
        real("channel", "antenna_gain_db", "element gain applied to every path",
             [](C& c) -> double& { return c.sim.channel.antenna_gain_db; }),
        // link
        real("link", "ap_tx_power_dbm", "", [](C& c) -> double& { return c.ap_tx_power_dbm; }),
        real("link", "user_tx_power_dbm", "", [](C& c) -> double& { return c.user_tx_power_dbm; }),
        real("link", "detection_threshold_db", "minimum uplink SNR of the reference signal",
             [](C& c) -> double& { return c.detection_threshold_db; }),
        real("link", "t_msg_ms", "air time of one IA message", [](C& c) -> double& { return c.sim.link.t_msg_ms; }),
        // sweep
        real("sweep", "qi", "per-beam interference probability", [](C& c) -> double& { return c.sim.q_i; }),
        // agent
        {"agent", "input_size", "2N",
         [](C& c, const YAML::Node& n, const std::string& k) { c.sim.agent.layer_sizes.front() = scalar<int>(n, k, "an integer"); },
         [](const C& c) { return fmt::format("{}", c.sim.agent.layer_sizes.front()); }},
        {"agent", "hidden_layers", "ReLU layer widths",
         [](C& c, const YAML::Node& n, const std::string& k) {
             if (!n.IsSequence())
                 throw ConfigError(k, "expected a list of integers");
             auto& sizes = c.sim.agent.layer_sizes;
             std::vector<int> out{sizes.front()};
             for (const auto& item : n)
                 out.push_back(scalar<int>(item, k, "an integer"));
             out.push_back(sizes.back());
             sizes = std::move(out);
         },
         [](const C& c) {
             const auto& s = c.sim.agent.layer_sizes;
             std::string r = "[";
             for (std::size_t i = 1; i + 1 < s.size(); ++i)
                 r += fmt::format("{}{}", i > 1 ? ", " : "", s[i]);
             return r + "]";
         }},
        {"agent", "output_size", "|C|",
         [](C& c, const YAML::Node& n, const std::string& k) { c.sim.agent.layer_sizes.back() = scalar<int>(n, k, "an integer"); },
         [](const C& c) { return fmt::format("{}", c.sim.agent.layer_sizes.back()); }},
        real("agent", "learning_rate", "Adam", [](C& c) -> double& { return c.sim.agent.learning_rate; }),
        real("agent", "adam_beta1", "", [](C& c) -> double& { return c.sim.agent.adam_beta1; }),
        real("agent", "adam_beta2", "", [](C& c) -> double& { return c.sim.agent.adam_beta2; }),
        real("agent", "adam_epsilon", "", [](C& c) -> double& { return c.sim.agent.adam_epsilon; }),
        real("agent", "epsilon_start", "", [](C& c) -> double& { return c.sim.agent.epsilon_start; }),
        real("agent", "epsilon_decay", "applied once per training step",
             [](C& c) -> double& { return c.sim.agent.epsilon_decay; }),
        real("agent", "epsilon_min", "", [](C& c) -> double& { return c.sim.agent.epsilon_min; }),
        integer<long long>("agent", "warmup", "initial random guesses", [](C& c) -> long long& { return c.sim.agent.warmup; }),
        integer<int>("agent", "batch_size", "", [](C& c) -> int& { return c.sim.agent.batch_size; }),
        integer<std::size_t>("agent", "replay_capacity", "", [](C& c) -> std::size_t& { return c.sim.agent.replay_capacity; }),
        choice("agent", "context_norm", "squared (divide by |g|^2) | unit (divide by |g|)", context_norm_from_string,
               [](ContextNorm n) { return to_string(n); }, [](C& c) -> ContextNorm& { return c.sim.agent.context_norm; }),
        real("agent", "reward_scale", "multiplies every reward", [](C& c) -> double& { return c.sim.agent.reward_scale; }),
    };
    return table;
}

const std::vector<std::string>& section_order()
{
    static const std::vector<std::string> order = {"experiment", "scenario", "array",  "codebook",
                                                   "channel",    "link",     "sweep",  "agent"};
    return order;
}

void check_range(bool ok, const char* key, const char* message)
{
    if (!ok)
        throw ConfigError(key, message);
}

} // namespace

void validate_config(const ExperimentConfig& cfg)
{
    const auto& s = cfg.sim;
    check_range(s.episodes >= 1, "experiment.episodes", "must be >= 1");
    check_range(s.window >= 1, "experiment.window", "must be >= 1");
    check_range(s.association_size >= 1, "experiment.association_size", "must be >= 1");
    check_range(s.scenario.area_width_m > 0.0, "scenario.area_width_m", "must be > 0");
    check_range(s.scenario.area_height_m > 0.0, "scenario.area_height_m", "must be > 0");
    check_range(s.scenario.ap_density_per_km2 > 0.0, "scenario.ap_density_per_km2", "must be > 0");
    check_range(s.scenario.ap_count() >= 1, "scenario.ap_density_per_km2", "density * area rounds to zero APs");
    check_range(s.scenario.num_users >= 1, "scenario.num_users", "must be >= 1");
    check_range(s.array.width >= 1, "array.width", "must be >= 1");
    check_range(s.array.height >= 1, "array.height", "must be >= 1");
    check_range(s.array.element_spacing > 0.0, "array.element_spacing_wavelengths", "must be > 0");
    check_range(s.q_i >= 0.0 && s.q_i <= 1.0, "sweep.qi", "must be in [0, 1]");
    check_range(s.link.t_msg_ms > 0.0, "link.t_msg_ms", "must be > 0");
    check_range(s.channel.paths_per_cluster >= 1, "channel.paths_per_cluster", "must be >= 1");
    check_range(s.channel.los.shadow_sigma_db >= 0.0, "channel.los_shadow_sigma_db", "must be >= 0");
    check_range(s.channel.nlos.shadow_sigma_db >= 0.0, "channel.nlos_shadow_sigma_db", "must be >= 0");
    check_range(cfg.bandwidth_hz > 0.0, "channel.bandwidth_hz", "must be > 0");

    const int n = s.array.size();
    const auto& layers = s.agent.layer_sizes;
    if (cfg.codebook_size != layers.back())
        throw ConfigError("codebook.size",
                          fmt::format("cross-field: codebook.size ({}) must equal agent.output_size ({})",
                                      cfg.codebook_size, layers.back()));
    if (layers.front() != 2 * n)
        throw ConfigError("agent.input_size",
                          fmt::format("cross-field: agent.input_size ({}) must equal 2 * array.width * array.height ({})",
                                      layers.front(), 2 * n));
    if (s.codebook_file.empty() && cfg.codebook_size != n)
        throw ConfigError("codebook.size",
                          fmt::format("cross-field: the 2D-DFT codebook has array.width * array.height ({}) beams, "
                                      "codebook.size is {}",
                                      n, cfg.codebook_size));
    if (!s.codebook_file.empty()) {
        Codebook cb;
        try {
            cb = load_codebook(s.codebook_file, s.array);
        } catch (const std::exception& e) {
            throw ConfigError("codebook.phase_file", e.what());
        }
        if (static_cast<int>(cb.size()) != cfg.codebook_size)
            throw ConfigError("codebook.size", fmt::format("cross-field: phase file has {} beams, codebook.size is {}",
                                                           cb.size(), cfg.codebook_size));
    }
    if (s.strategy == Strategy::dcb && s.q_i != 0.0)
        throw ConfigError("sweep.qi", "cross-field: must be 0 when experiment.strategy is dcb");

    try {
        s.agent.validate();
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("", e.what());
    }
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& source)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("", fmt::format("{}: malformed YAML at line {}, column {}: {}", source, e.mark.line + 1,
                                          e.mark.column + 1, e.msg));
    }

    ExperimentConfig cfg;
    if (root.IsNull())
        return cfg;
    if (!root.IsMap())
        throw ConfigError("", source + ": top level must be a mapping of sections");

    std::map<std::string, std::map<std::string, const Field*>> by_section;
    for (const auto& f : fields())
        by_section[f.section][f.key] = &f;

    for (const auto& sec : root) {
        const auto name = sec.first.as<std::string>();
        auto it = by_section.find(name);
        if (it == by_section.end())
            throw ConfigError(name, "unknown section");
        if (sec.second.IsNull())
            continue;
        if (!sec.second.IsMap())
            throw ConfigError(name, "section must be a mapping");
        for (const auto& kv : sec.second) {
            const auto key = kv.first.as<std::string>();
            const auto full = name + "." + key;
            auto f = it->second.find(key);
            if (f == it->second.end())
                throw ConfigError(full, "unknown key");
            f->second->read(cfg, kv.second, full);
        }
    }
    cfg.sync_derived();
    validate_config(cfg);
    return cfg;
}

ExperimentConfig parse_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("", "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

std::string emit_config(const ExperimentConfig& cfg)
{
    std::string out = "# dcbia experiment configuration\n";
    for (const auto& section : section_order()) {
        out += "\n" + section + ":\n";
        for (const auto& f : fields()) {
            if (f.section != section)
                continue;
            auto line = fmt::format("  {}: {}", f.key, f.write(cfg));
            if (!f.comment.empty())
                line = fmt::format("{:<40} # {}", line, f.comment);
            out += line + "\n";
        }
    }
    return out;
}

} // namespace dcbia
