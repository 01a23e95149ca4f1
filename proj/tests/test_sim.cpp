#include <doctest.h>

#include <sstream>

#include "dcbia/sim.hpp"

using namespace dcbia;

namespace {

SimConfig quick(Strategy s, long long episodes)
{
    SimConfig c;
    c.strategy = s;
    c.episodes = episodes;
    c.window = 100;
    return c;
}

std::string event_csv(const ExperimentResult& r)
{
    std::ostringstream out;
    out << kEventCsvHeader << '\n';
    for (const auto& e : r.events)
        write_event_row(out, e);
    return out.str();
}

} // namespace

TEST_CASE("AP count follows density and area")
{
    ScenarioConfig c;
    c.ap_density_per_km2 = 200;
    CHECK(c.ap_count() == 8);
    c.ap_density_per_km2 = 40;
    CHECK(c.ap_count() == 2);
    c.ap_density_per_km2 = 10;
    CHECK(c.ap_count() == 0);
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("scenario generation")
{
    ScenarioConfig c;
    Rng a(1), b(1);
    const auto s1 = generate_scenario(c, a);
    const auto s2 = generate_scenario(c, b);
    CHECK(s1.aps == s2.aps);
    CHECK(s1.users == s2.users);
    CHECK(s1.aps.size() == 8);
    CHECK(s1.users.size() == 30);
    for (const auto& ap : s1.aps) {
        CHECK(ap.z == 10.0);
        CHECK(ap.x > 0.0);
        CHECK(ap.x < 200.0);
        CHECK(ap.y > 0.0);
        CHECK(ap.y < 200.0);
    }
    for (const auto& u : s1.users) {
        CHECK(u.z == 1.5);
        CHECK(u.x >= 0.0);
        CHECK(u.x <= 200.0);
    }
    // grid placement: distinct positions
    for (std::size_t i = 0; i < s1.aps.size(); ++i)
        for (std::size_t j = i + 1; j < s1.aps.size(); ++j)
            CHECK_FALSE(s1.aps[i] == s1.aps[j]);

    c.ap_density_per_km2 = 25; // one AP: the centre of the area
    Rng r(2);
    const auto single = generate_scenario(c, r);
    REQUIRE(single.aps.size() == 1);
    CHECK(single.aps[0] == Point3{100, 100, 10});

    c.placement = ApPlacement::poisson;
    c.ap_density_per_km2 = 200;
    Rng p(3);
    CHECK(generate_scenario(c, p).aps.size() == 8);
}

TEST_CASE("strategy and placement names")
{
    CHECK(strategy_from_string("dcb") == Strategy::dcb);
    CHECK(strategy_from_string("sweep") == Strategy::sweep);
    CHECK(strategy_from_string("oracle") == Strategy::oracle);
    CHECK_THROWS_AS(strategy_from_string("random"), std::invalid_argument);
    CHECK(placement_from_string("poisson") == ApPlacement::poisson);
    CHECK_THROWS_AS(placement_from_string("hex"), std::invalid_argument);
}

TEST_CASE("metrics windows")
{
    MetricsAccumulator acc(3, true);
    auto ev = [](bool detected, bool mis, double delay) {
        IaEvent e;
        e.detected = detected;
        e.misdetected = mis;
        e.delay_ms = delay;
        return e;
    };
    acc.add(ev(true, false, 1.0));
    acc.add(ev(true, true, 3.0));
    acc.add(ev(false, true, IaEvent::none));
    acc.add(ev(true, false, 2.0));
    const auto s = acc.finish();
    REQUIRE(s.windows.size() == 2);
    CHECK(s.windows[0].window_start == 0);
    CHECK(s.windows[0].window_end == 3);
    CHECK(s.windows[0].misdetection_prob == doctest::Approx(2.0 / 3.0));
    CHECK(s.windows[0].mean_delay_ms == 2.0);
    CHECK(std::isnan(s.windows[0].mean_epsilon));
    CHECK(s.windows[1].window_start == 3);
    CHECK(s.windows[1].window_end == 4);
    CHECK(s.windows[1].misdetection_prob == 0.0);

    MetricsAccumulator excl(3, false);
    excl.add(ev(true, false, 1.0));
    excl.add(ev(true, true, 3.0));
    excl.add(ev(false, true, IaEvent::none));
    CHECK(excl.finish().windows[0].misdetection_prob == 0.5);

    MetricsAccumulator constant(1000, true);
    for (int i = 0; i < 1000; ++i)
        constant.add(ev(true, false, 0.17));
    CHECK(constant.finish().windows[0].mean_delay_ms == 0.17);
}

TEST_CASE("oracle runs never misdetect")
{
    const auto r = run_experiment(quick(Strategy::oracle, 20));
    CHECK(r.total_events == 20 * 30 * 8);
    for (const auto& w : r.metrics.windows)
        CHECK(w.misdetection_prob == 0.0);
    for (const auto& e : r.events) {
        CHECK(e.delay_ms == 0.0);
        CHECK(e.chosen_beam == e.best_beam);
    }
}

TEST_CASE("interference-free sweep: zero misdetection, 0.17 ms")
{
    const auto r = run_experiment(quick(Strategy::sweep, 20));
    for (const auto& w : r.metrics.windows) {
        CHECK(w.misdetection_prob == 0.0);
        CHECK(w.mean_delay_ms == 0.17);
    }
    for (const auto& e : r.events)
        CHECK(e.delay_ms == 0.17);
}

TEST_CASE("event log order and determinism")
{
    auto cfg = quick(Strategy::dcb, 5);
    cfg.agent.warmup = 100;
    const auto r1 = run_experiment(cfg);
    const auto r2 = run_experiment(cfg);
    CHECK(event_csv(r1) == event_csv(r2));
    for (std::size_t i = 1; i < r1.events.size(); ++i) {
        const auto& a = r1.events[i - 1];
        const auto& b = r1.events[i];
        const bool ordered = a.episode < b.episode || (a.episode == b.episode && (a.ap < b.ap || (a.ap == b.ap && a.user < b.user)));
        CHECK(ordered);
    }
    for (const auto& e : r1.events) {
        if (e.detected)
            CHECK(e.delay_ms == 0.01);
        else
            CHECK(std::isnan(e.delay_ms));
    }

    cfg.seed = 2;
    CHECK(event_csv(run_experiment(cfg)) != event_csv(r1));
}

TEST_CASE("frozen users keep their channels")
{
    auto cfg = quick(Strategy::oracle, 4);
    cfg.scenario.frozen_users = true;
    const auto r = run_experiment(cfg);
    const std::size_t per_episode = 30 * 8;
    for (std::size_t i = 0; i < per_episode; ++i)
        for (std::size_t ep = 1; ep < 4; ++ep)
            CHECK(r.events[ep * per_episode + i].best_beam == r.events[i].best_beam);

    cfg.scenario.frozen_users = false;
    const auto moving = run_experiment(cfg);
    int changed = 0;
    for (std::size_t i = 0; i < per_episode; ++i)
        changed += moving.events[per_episode + i].best_beam != moving.events[i].best_beam;
    CHECK(changed > 0);
}

TEST_CASE("agents persist and leave warmup")
{
    auto cfg = quick(Strategy::dcb, 30);
    cfg.agent.warmup = 50;
    const auto r = run_experiment(cfg);
    REQUIRE(r.agents.size() == 8);
    for (const auto& a : r.agents) {
        CHECK(a->warmup_remaining == 0);
        CHECK(a->net.all_finite());
    }
    CHECK(r.first_post_warmup_event > 0);

    cfg.shared_agent = true;
    CHECK(run_experiment(cfg).agents.size() == 1);
}

TEST_CASE("dcb with a single AP at the centre")
{
    auto cfg = quick(Strategy::dcb, 10);
    cfg.scenario.ap_density_per_km2 = 25;
    const auto r = run_experiment(cfg);
    CHECK(r.scenario.aps.size() == 1);
    CHECK(r.total_events == 300);
    long long undetected = 0;
    for (const auto& e : r.events)
        undetected += !e.detected;
    CHECK(undetected == r.total_outages);
}

TEST_CASE("sweep interference needs a second AP")
{
    auto cfg = quick(Strategy::sweep, 1);
    cfg.scenario.ap_density_per_km2 = 25;
    cfg.q_i = 0.1;
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
}

TEST_CASE("event log CSV round trip")
{
    auto cfg = quick(Strategy::dcb, 2);
    cfg.agent.warmup = 10;
    cfg.agent.batch_size = 4;
    const auto r = run_experiment(cfg);
    std::istringstream in(event_csv(r));
    const auto back = read_event_log(in);
    REQUIRE(back.size() == r.events.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        const auto& a = back[i];
        const auto& b = r.events[i];
        CHECK(a.episode == b.episode);
        CHECK(a.ap == b.ap);
        CHECK(a.user == b.user);
        CHECK(a.strategy == b.strategy);
        CHECK(a.chosen_beam == b.chosen_beam);
        CHECK(a.detected == b.detected);
        CHECK(a.misdetected == b.misdetected);
        CHECK((a.reward == b.reward || (std::isnan(a.reward) && std::isnan(b.reward))));
        CHECK((a.loss == b.loss || (std::isnan(a.loss) && std::isnan(b.loss))));
    }

    std::istringstream empty(std::string(kEventCsvHeader) + "\n");
    CHECK_THROWS_AS(read_event_log(empty), std::runtime_error);
    std::istringstream wrong_header("a,b,c\n1,2,3\n");
    CHECK_THROWS_AS(read_event_log(wrong_header), std::runtime_error);
    std::istringstream short_row(std::string(kEventCsvHeader) + "\n0,0,0,dcb\n");
    CHECK_THROWS_AS(read_event_log(short_row), std::runtime_error);
}

TEST_CASE("metrics CSV")
{
    MetricsSeries s;
    s.window_size = 2;
    s.windows.push_back({0, 2, 0.5, 0.01, IaEvent::none, IaEvent::none});
    std::ostringstream out;
    write_metrics_csv(out, s);
    CHECK(out.str() == std::string(kMetricsCsvHeader) + "\n0,2,0.5,0.01,,\n");
}
