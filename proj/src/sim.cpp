#include "dcbia/sim.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace dcbia {

const char* to_string(Strategy s)
{
    switch (s) {
    case Strategy::dcb: return "dcb";
    case Strategy::sweep: return "sweep";
    case Strategy::oracle: return "oracle";
    }
    return "?";
}

Strategy strategy_from_string(const std::string& s)
{
    if (s == "dcb")
        return Strategy::dcb;
    if (s == "sweep")
        return Strategy::sweep;
    if (s == "oracle")
        return Strategy::oracle;
    throw std::invalid_argument("unknown strategy '" + s + "' (expected dcb, sweep or oracle)");
}

const char* to_string(ApPlacement p)
{
    return p == ApPlacement::grid ? "grid" : "poisson";
}

ApPlacement placement_from_string(const std::string& s)
{
    if (s == "grid")
        return ApPlacement::grid;
    if (s == "poisson")
        return ApPlacement::poisson;
    throw std::invalid_argument("unknown ap placement '" + s + "' (expected grid or poisson)");
}

// --- Scenario -----------------------------------------------------------------

int ScenarioConfig::ap_count() const
{
    return static_cast<int>(std::lround(ap_density_per_km2 * area_km2()));
}

void ScenarioConfig::validate() const
{
    if (!(area_width_m > 0.0 && area_height_m > 0.0))
        throw std::invalid_argument("scenario: area dimensions must be > 0");
    if (!(ap_density_per_km2 > 0.0))
        throw std::invalid_argument("scenario: AP density must be > 0");
    if (ap_count() < 1)
        throw std::invalid_argument("scenario: density and area give zero APs");
    if (num_users < 1)
        throw std::invalid_argument("scenario: num_users must be >= 1");
    if (ap_height_m == user_height_m)
        throw std::invalid_argument("scenario: AP and user heights must differ");
}

std::vector<Point3> place_users(const ScenarioConfig& cfg, Rng& rng)
{
    std::vector<Point3> users(static_cast<std::size_t>(cfg.num_users));
    for (auto& u : users) {
        u.x = uniform_real(rng, 0.0, cfg.area_width_m);
        u.y = uniform_real(rng, 0.0, cfg.area_height_m);
        u.z = cfg.user_height_m;
    }
    return users;
}

Scenario generate_scenario(const ScenarioConfig& cfg, Rng& rng)
{
    cfg.validate();
    Scenario s;
    s.area_width_m = cfg.area_width_m;
    s.area_height_m = cfg.area_height_m;
    s.ap_density_per_km2 = cfg.ap_density_per_km2;
    const int n = cfg.ap_count();
    if (cfg.placement == ApPlacement::grid) {
        const double aspect = cfg.area_width_m / cfg.area_height_m;
        const int cols = std::max(1, static_cast<int>(std::lround(std::sqrt(n * aspect))));
        const int rows = (n + cols - 1) / cols;
        for (int i = 0; i < n; ++i) {
            const int r = i / cols;
            const int c = i % cols;
            s.aps.push_back({(c + 0.5) * cfg.area_width_m / cols, (r + 0.5) * cfg.area_height_m / rows,
                             cfg.ap_height_m});
        }
    } else {
        for (int i = 0; i < n; ++i)
            s.aps.push_back({uniform_real(rng, 0.0, cfg.area_width_m), uniform_real(rng, 0.0, cfg.area_height_m),
                             cfg.ap_height_m});
    }
    s.users = place_users(cfg, rng);
    return s;
}

// --- Config ------------------------------------------------------------------

Codebook SimConfig::make_codebook() const
{
    return codebook_file.empty() ? build_codebook(array) : load_codebook(codebook_file, array);
}

void SimConfig::validate() const
{
    if (episodes < 1)
        throw std::invalid_argument("experiment: episodes must be >= 1");
    if (window < 1)
        throw std::invalid_argument("experiment: window must be >= 1");
    if (association_size < 1)
        throw std::invalid_argument("experiment: association_size must be >= 1");
    scenario.validate();
    array.validate();
    channel.validate();
    SweepConfig{q_i, link.t_msg_ms}.validate();
    if (!(link.ap_tx_power_w > 0.0 && link.user_tx_power_w > 0.0))
        throw std::invalid_argument("link: transmit powers must be > 0");
    if (!(link.detection_threshold >= 0.0))
        throw std::invalid_argument("link: detection threshold must be >= 0");
    if (strategy == Strategy::dcb) {
        agent.validate();
        if (agent.layer_sizes.front() != 2 * array.size())
            throw std::invalid_argument("agent: input size must equal 2N");
    }
}

// --- Metrics -------------------------------------------------------------------

MetricsAccumulator::MetricsAccumulator(int window_size, bool count_undetected)
    : count_undetected_(count_undetected)
{
    if (window_size < 1)
        throw std::invalid_argument("metrics window must be >= 1");
    series_.window_size = window_size;
}

void MetricsAccumulator::add(const IaEvent& e)
{
    if (e.detected || count_undetected_) {
        ++denom_;
        misdet_ += e.misdetected ? 1 : 0;
    }
    if (!std::isnan(e.delay_ms)) {
        ++delay_n_;
        delay_sum_.add(e.delay_ms);
    }
    if (!std::isnan(e.epsilon)) {
        ++eps_n_;
        eps_sum_.add(e.epsilon);
    }
    if (!std::isnan(e.loss)) {
        ++loss_n_;
        loss_sum_.add(e.loss);
    }
    ++index_;
    if (index_ - start_ == series_.window_size)
        close_window();
}

void MetricsAccumulator::close_window()
{
    MetricsWindow w;
    w.window_start = start_;
    w.window_end = index_;
    if (denom_ > 0)
        w.misdetection_prob = static_cast<double>(misdet_) / static_cast<double>(denom_);
    if (delay_n_ > 0)
        w.mean_delay_ms = delay_sum_.value() / static_cast<double>(delay_n_);
    if (eps_n_ > 0)
        w.mean_epsilon = eps_sum_.value() / static_cast<double>(eps_n_);
    if (loss_n_ > 0)
        w.mean_loss = loss_sum_.value() / static_cast<double>(loss_n_);
    series_.windows.push_back(w);
    start_ = index_;
    denom_ = misdet_ = delay_n_ = eps_n_ = loss_n_ = 0;
    delay_sum_.reset();
    eps_sum_.reset();
    loss_sum_.reset();
}

MetricsSeries MetricsAccumulator::finish()
{
    if (index_ > start_)
        close_window();
    return series_;
}

// --- Experiment loop -------------------------------------------------------------

namespace {

IaEvent make_event(long long episode, int ap, int user, Strategy s)
{
    IaEvent e;
    e.episode = episode;
    e.ap = ap;
    e.user = user;
    e.strategy = s;
    return e;
}

} // namespace

ChannelRealization episode_channel(const SimConfig& config, const Scenario& scenario, long long episode, int ap,
                                   int user)
{
    const auto ep = config.scenario.frozen_users ? 0ULL : static_cast<std::uint64_t>(episode);
    Rng rng = make_substream(config.seed, {kChannel, ep, static_cast<std::uint64_t>(ap), static_cast<std::uint64_t>(user)});
    return sample_channel(scenario.aps[static_cast<std::size_t>(ap)], scenario.users[static_cast<std::size_t>(user)],
                          config.array, config.channel, rng);
}

Scenario initial_scenario(const SimConfig& config)
{
    Rng rng = make_substream(config.seed, {kScenario});
    return generate_scenario(config.scenario, rng);
}

ExperimentResult run_experiment(const SimConfig& config, const RunOptions& options)
{
    config.validate();
    const Codebook codebook = config.make_codebook();
    if (config.strategy == Strategy::dcb &&
        static_cast<std::size_t>(config.agent.layer_sizes.back()) != codebook.size())
        throw std::invalid_argument("agent: output size must equal the codebook size");

    ExperimentResult res;
    res.scenario = initial_scenario(config);
    const auto num_aps = res.scenario.aps.size();
    const auto num_users = static_cast<std::size_t>(config.scenario.num_users);
    if (config.strategy == Strategy::sweep && config.q_i > 0.0 && num_aps < 2)
        throw std::invalid_argument("sweep: q_i > 0 needs at least two APs to draw interference from");

    const LinkBudget budget{config.link.ap_tx_power_w, config.channel.noise_power_w};
    const SweepConfig sweep_cfg{config.q_i, config.link.t_msg_ms};
    const DcbIaParams dcb_params{config.link.user_tx_power_w, config.link.detection_threshold, config.link.t_msg_ms};

    std::vector<DcbAgent*> agent_of_ap(num_aps, nullptr);
    if (config.strategy == Strategy::dcb) {
        const std::size_t count = config.shared_agent ? 1 : num_aps;
        for (std::size_t m = 0; m < count; ++m) {
            Rng init = make_substream(config.seed, {kAgentInit, m});
            res.agents.push_back(std::make_unique<DcbAgent>(config.agent, init));
        }
        for (std::size_t m = 0; m < num_aps; ++m)
            agent_of_ap[m] = res.agents[config.shared_agent ? 0 : m].get();
    }

    MetricsAccumulator metrics(config.window, config.count_undetected);
    std::vector<ChannelRealization> channels(num_aps * num_users); // [user * num_aps + ap]
    std::vector<IaEvent> episode_events;
    std::vector<Rng> event_rngs(num_aps);
    std::vector<const ChannelRealization*> link_ptrs(num_aps);
    std::vector<const ChannelRealization*> interferers;

    for (long long ep = 0; ep < config.episodes; ++ep) {
        const auto uep = static_cast<std::uint64_t>(ep);
        if (!config.scenario.frozen_users && ep > 0) {
            Rng rng = make_substream(config.seed, {kUsers, uep});
            res.scenario.users = place_users(config.scenario, rng);
        }
        // frozen users keep their channel realizations; only estimation noise and agent
        // randomness change between episodes
        if (ep == 0 || !config.scenario.frozen_users)
            for (std::size_t k = 0; k < num_users; ++k)
                for (std::size_t m = 0; m < num_aps; ++m)
                    channels[k * num_aps + m] =
                        episode_channel(config, res.scenario, ep, static_cast<int>(m), static_cast<int>(k));

        const bool warm_before = std::all_of(res.agents.begin(), res.agents.end(),
                                             [](const auto& a) { return a->warmup_remaining == 0; });
        if (config.strategy == Strategy::dcb && warm_before && res.first_post_warmup_event < 0)
            res.first_post_warmup_event = res.total_events;

        episode_events.clear();
        for (std::size_t k = 0; k < num_users; ++k) {
            for (std::size_t m = 0; m < num_aps; ++m)
                link_ptrs[m] = &channels[k * num_aps + m];

            switch (config.strategy) {
            case Strategy::oracle:
                for (std::size_t m = 0; m < num_aps; ++m) {
                    auto e = make_event(ep, static_cast<int>(m), static_cast<int>(k), Strategy::oracle);
                    const auto best = best_beam_oracle(link_ptrs[m]->g, codebook);
                    e.chosen_beam = e.best_beam = best.index;
                    e.delay_ms = 0.0;
                    episode_events.push_back(e);
                }
                break;
            case Strategy::sweep:
                for (std::size_t m = 0; m < num_aps; ++m) {
                    interferers.clear();
                    for (std::size_t o = 0; o < num_aps; ++o)
                        if (o != m)
                            interferers.push_back(link_ptrs[o]);
                    Rng rng = make_substream(config.seed, {kEvent, uep, m, k});
                    const auto out = run_sweep_ia(*link_ptrs[m], budget, codebook, sweep_cfg, interferers, rng);
                    auto e = make_event(ep, static_cast<int>(m), static_cast<int>(k), Strategy::sweep);
                    e.chosen_beam = out.chosen_beam;
                    e.best_beam = out.true_best_beam;
                    e.misdetected = out.misdetected;
                    e.delay_ms = out.delay_ms;
                    episode_events.push_back(e);
                }
                break;
            case Strategy::dcb: {
                for (std::size_t m = 0; m < num_aps; ++m)
                    event_rngs[m] = make_substream(config.seed, {kEvent, uep, m, k});
                const auto assoc = run_uc_association(agent_of_ap, link_ptrs, codebook, budget, dcb_params,
                                                      config.association_size, event_rngs);
                if (assoc.total_outage)
                    ++res.total_outages;
                else if (assoc.serving.degenerate)
                    ++res.degenerate_associations;
                for (std::size_t m = 0; m < num_aps; ++m) {
                    const auto& out = assoc.outcomes[m];
                    auto e = make_event(ep, static_cast<int>(m), static_cast<int>(k), Strategy::dcb);
                    e.chosen_beam = out.chosen_beam.value_or(-1);
                    e.best_beam = out.true_best_beam;
                    e.detected = out.detected;
                    e.misdetected = out.misdetected;
                    e.delay_ms = out.delay_ms.value_or(IaEvent::none);
                    e.reward = out.reward.value_or(IaEvent::none);
                    e.loss = out.loss.value_or(IaEvent::none);
                    e.epsilon = agent_of_ap[m]->epsilon;
                    episode_events.push_back(e);
                }
                break;
            }
            }
        }

        // log order is (episode, ap, user)
        std::stable_sort(episode_events.begin(), episode_events.end(), [](const IaEvent& a, const IaEvent& b) {
            return a.ap != b.ap ? a.ap < b.ap : a.user < b.user;
        });
        for (const auto& e : episode_events) {
            metrics.add(e);
            if (options.on_event)
                options.on_event(e);
            if (options.keep_events)
                res.events.push_back(e);
            ++res.total_events;
        }
    }
    res.metrics = metrics.finish();
    return res;
}

// --- CSV -----------------------------------------------------------------------

namespace {

void put_optional(std::ostream& out, double v)
{
    out << ',';
    if (!std::isnan(v))
        fmt::print(out, "{}", v);
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_optional(const std::string& s, long long lineno)
{
    if (s.empty())
        return IaEvent::none;
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != s.size())
        throw std::runtime_error(fmt::format("event log line {}: bad number '{}'", lineno, s));
    return v;
}

long long parse_int(const std::string& s, long long lineno)
{
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (s.empty() || pos != s.size())
        throw std::runtime_error(fmt::format("event log line {}: bad integer '{}'", lineno, s));
    return v;
}

bool parse_bool(const std::string& s, long long lineno)
{
    if (s == "0")
        return false;
    if (s == "1")
        return true;
    throw std::runtime_error(fmt::format("event log line {}: bad flag '{}'", lineno, s));
}

} // namespace

void write_event_row(std::ostream& out, const IaEvent& e)
{
    fmt::print(out, "{},{},{},{},", e.episode, e.ap, e.user, to_string(e.strategy));
    if (e.chosen_beam >= 0)
        fmt::print(out, "{}", e.chosen_beam);
    fmt::print(out, ",{},{},{}", e.best_beam, e.detected ? 1 : 0, e.misdetected ? 1 : 0);
    put_optional(out, e.delay_ms);
    put_optional(out, e.reward);
    put_optional(out, e.epsilon);
    put_optional(out, e.loss);
    out << '\n';
}

void write_metrics_csv(std::ostream& out, const MetricsSeries& series)
{
    out << kMetricsCsvHeader << '\n';
    for (const auto& w : series.windows) {
        fmt::print(out, "{},{}", w.window_start, w.window_end);
        put_optional(out, w.misdetection_prob);
        put_optional(out, w.mean_delay_ms);
        put_optional(out, w.mean_epsilon);
        put_optional(out, w.mean_loss);
        out << '\n';
    }
}

std::vector<IaEvent> read_event_log(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("event log is empty");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != kEventCsvHeader)
        throw std::runtime_error("event log has an unexpected header");
    std::vector<IaEvent> events;
    long long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r")
            continue;
        const auto f = split_csv(line);
        if (f.size() != 12)
            throw std::runtime_error(fmt::format("event log line {}: expected 12 fields, found {}", lineno, f.size()));
        IaEvent e;
        e.episode = parse_int(f[0], lineno);
        e.ap = static_cast<int>(parse_int(f[1], lineno));
        e.user = static_cast<int>(parse_int(f[2], lineno));
        try {
            e.strategy = strategy_from_string(f[3]);
        } catch (const std::invalid_argument& ex) {
            throw std::runtime_error(fmt::format("event log line {}: {}", lineno, ex.what()));
        }
        e.chosen_beam = f[4].empty() ? -1 : static_cast<int>(parse_int(f[4], lineno));
        e.best_beam = static_cast<int>(parse_int(f[5], lineno));
        e.detected = parse_bool(f[6], lineno);
        e.misdetected = parse_bool(f[7], lineno);
        e.delay_ms = parse_optional(f[8], lineno);
        e.reward = parse_optional(f[9], lineno);
        e.epsilon = parse_optional(f[10], lineno);
        e.loss = parse_optional(f[11], lineno);
        events.push_back(e);
    }
    if (events.empty())
        throw std::runtime_error("event log contains no events");
    return events;
}

} // namespace dcbia
