#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dcbia/commands.hpp"

using namespace dcbia;
namespace fs = std::filesystem;

namespace {

const fs::path kScratch = DCBIA_TEST_SCRATCH;

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_file(const std::string& name, const std::string& text)
{
    fs::create_directories(kScratch);
    const auto p = kScratch / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
}

std::string error_of(const std::string& yaml)
{
    try {
        parse_config_text(yaml);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

struct Exec {
    int code;
    std::string out;
    std::string err;
};

Exec run_cli(const std::string& args)
{
    fs::create_directories(kScratch);
    const auto out = kScratch / "stdout.txt";
    const auto err = kScratch / "stderr.txt";
    const std::string cmd = std::string("cd '") + kScratch.string() + "' && '" + DCBIA_CLI_PATH + "' " + args +
                            " > '" + out.string() + "' 2> '" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    return {WEXITSTATUS(status), slurp(out), slurp(err)};
}

} // namespace

TEST_CASE("empty document gives the defaults")
{
    const auto cfg = parse_config_text("");
    CHECK(cfg == ExperimentConfig{});
    CHECK_NOTHROW(validate_config(cfg));
    CHECK(cfg.sim.scenario.ap_count() == 8);
    CHECK(cfg.sim.channel.noise_power_w == doctest::Approx(1.1912e-13).epsilon(1e-4));

    const auto p = write_file("empty.yaml", "");
    CHECK(parse_config(p.string()) == ExperimentConfig{});
}

TEST_CASE("dBm fields become watts")
{
    const auto cfg = parse_config_text("link:\n  ap_tx_power_dbm: 43\n  user_tx_power_dbm: 20\n");
    CHECK(cfg.sim.link.ap_tx_power_w == doctest::Approx(19.952623149688797).epsilon(1e-15));
    CHECK(cfg.sim.link.user_tx_power_w == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(dbm_to_watts(30.0) == 1.0);
    CHECK(watts_to_dbm(1.0) == 30.0);
    CHECK(thermal_noise_dbm(15e6, 3.0) == doctest::Approx(-99.2391).epsilon(1e-6));
}

TEST_CASE("noise override and angular spread")
{
    const auto cfg = parse_config_text("channel:\n  noise_power_dbm: -90\n  angular_spread_deg: 5\n");
    CHECK(cfg.sim.channel.noise_power_w == doctest::Approx(1e-12).epsilon(1e-12));
    CHECK(cfg.sim.channel.angular_spread_rad == doctest::Approx(5.0 * std::numbers::pi / 180.0));
}

TEST_CASE("diagnostics name the offending key")
{
    SUBCASE("cross-field: codebook vs agent output")
    {
        const auto msg = error_of("codebook:\n  size: 8\nagent:\n  output_size: 16\n");
        CHECK(msg.find("codebook.size") != std::string::npos);
        CHECK(msg.find("cross-field") != std::string::npos);
        CHECK(msg.find("agent.output_size") != std::string::npos);
    }
    SUBCASE("cross-field: input size vs array")
    {
        const auto msg = error_of("agent:\n  input_size: 30\n");
        CHECK(msg.find("agent.input_size") != std::string::npos);
    }
    SUBCASE("cross-field: interference with dcb")
    {
        const auto msg = error_of("sweep:\n  qi: 0.1\n");
        CHECK(msg.find("sweep.qi") != std::string::npos);
    }
    SUBCASE("unknown key")
    {
        const auto msg = error_of("link:\n  ap_power: 43\n");
        CHECK(msg.find("link.ap_power") != std::string::npos);
        CHECK(msg.find("unknown key") != std::string::npos);
    }
    SUBCASE("unknown section")
    {
        CHECK(error_of("radio:\n  x: 1\n").find("unknown section") != std::string::npos);
    }
    SUBCASE("bad type")
    {
        const auto msg = error_of("experiment:\n  episodes: many\n");
        CHECK(msg.find("experiment.episodes") != std::string::npos);
        CHECK(msg.find("integer") != std::string::npos);
    }
    SUBCASE("bad enum")
    {
        CHECK(error_of("experiment:\n  strategy: greedy\n").find("experiment.strategy") != std::string::npos);
    }
    SUBCASE("out of range")
    {
        CHECK(error_of("experiment:\n  association_size: 0\n").find("experiment.association_size") !=
              std::string::npos);
        CHECK(error_of("scenario:\n  ap_density_per_km2: 5\n").find("scenario.ap_density_per_km2") !=
              std::string::npos);
    }
    SUBCASE("malformed YAML")
    {
        const auto msg = error_of("link:\n  ap_tx_power_dbm: [43\n");
        CHECK(msg.find("malformed YAML") != std::string::npos);
    }
    SUBCASE("missing file")
    {
        try {
            parse_config((kScratch / "does-not-exist.yaml").string());
            FAIL("expected an error");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("cannot open") != std::string::npos);
        }
    }
}

TEST_CASE("emit and parse round trip")
{
    ExperimentConfig cfg;
    CHECK(parse_config_text(emit_config(cfg)) == cfg);

    cfg.sim.strategy = Strategy::sweep;
    cfg.sim.q_i = 0.001;
    cfg.sim.seed = 123456789012345ULL;
    cfg.sim.episodes = 777;
    cfg.sim.count_undetected = false;
    cfg.sim.scenario.ap_density_per_km2 = 123.456;
    cfg.sim.scenario.placement = ApPlacement::poisson;
    cfg.sim.agent.layer_sizes = {32, 64, 16};
    cfg.sim.agent.context_norm = ContextNorm::unit;
    cfg.sim.agent.reward_scale = 1.1912e-13;
    cfg.noise_power_dbm = -97.5;
    cfg.user_tx_power_dbm = 0.1 + 0.2; // not exactly representable in short decimal
    cfg.out_dir = "runs/with space: and colon";
    cfg.sync_derived();
    const auto text = emit_config(cfg);
    CHECK(parse_config_text(text) == cfg);
    CHECK(text.find("# ") != std::string::npos); // commented
}

TEST_CASE("flags override the config file and the environment supplies the default path")
{
    const auto p = write_file("base.yaml", "experiment:\n  episodes: 5\n  seed: 9\n");
    RunFlags flags;
    flags.config = p.string();
    flags.seed = 4;
    auto cfg = resolve_config(flags);
    CHECK(cfg.sim.episodes == 5);
    CHECK(cfg.sim.seed == 4);

    ::setenv(kConfigEnvVar, p.string().c_str(), 1);
    cfg = resolve_config(RunFlags{});
    CHECK(cfg.sim.seed == 9);
    ::unsetenv(kConfigEnvVar);

    RunFlags sweep;
    sweep.strategy = "sweep";
    sweep.qi = 0.01;
    sweep.density = 100;
    cfg = resolve_config(sweep);
    CHECK(cfg.sim.strategy == Strategy::sweep);
    CHECK(cfg.sim.q_i == 0.01);
    CHECK(cfg.sim.scenario.ap_count() == 4);

    RunFlags bad;
    bad.qi = 0.1; // default strategy is dcb
    CHECK_THROWS_AS(resolve_config(bad), ConfigError);
}

TEST_CASE("run: interference-free sweep baseline")
{
    fs::remove_all(kScratch / "sweep0");
    const auto r = run_cli("run --strategy sweep --qi 0 --episodes 1000 --out sweep0");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("final_window_misdetection=0 ") != std::string::npos);
    CHECK(r.out.find("final_window_mean_delay_ms=0.17 ") != std::string::npos);
    CHECK(fs::exists(kScratch / "sweep0" / "events.csv"));
    CHECK(fs::exists(kScratch / "sweep0" / "metrics.csv"));
    CHECK(fs::exists(kScratch / "sweep0" / "run.yaml"));
    CHECK_FALSE(fs::exists(kScratch / "sweep0" / "agents"));
}

TEST_CASE("run: oracle")
{
    const auto r = run_cli("run --strategy oracle --episodes 50 --out oracle");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("final_window_misdetection=0 ") != std::string::npos);
}

TEST_CASE("run: identical flags give identical bytes")
{
    const auto cfg = write_file("small_dcb.yaml", "experiment:\n  episodes: 40\nagent:\n  warmup: 500\n");
    const std::string base = "run --config '" + cfg.string() + "' --seed 11 --out ";
    REQUIRE(run_cli(base + "det_a").code == 0);
    REQUIRE(run_cli(base + "det_b").code == 0);
    CHECK(slurp(kScratch / "det_a" / "events.csv") == slurp(kScratch / "det_b" / "events.csv"));
    CHECK(slurp(kScratch / "det_a" / "metrics.csv") == slurp(kScratch / "det_b" / "metrics.csv"));
    CHECK(slurp(kScratch / "det_a" / "agents" / "agent_0.ckpt") ==
          slurp(kScratch / "det_b" / "agents" / "agent_0.ckpt"));
    CHECK(fs::exists(kScratch / "det_a" / "agents" / "agent_7.ckpt"));

    const auto inspect = run_cli("checkpoint inspect det_a/agents/agent_0.ckpt");
    CHECK(inspect.code == 0);
    CHECK(inspect.out.find("layers=32-50-50-50-16-16") != std::string::npos);
    CHECK(run_cli("checkpoint strip det_a/agents/agent_0.ckpt stripped.ckpt").code == 0);
    CHECK(run_cli("checkpoint inspect stripped.ckpt").out.find("buffer=0/") != std::string::npos);
}

TEST_CASE("run: errors exit nonzero with a message")
{
    auto r = run_cli("run --strategy dcb --qi 0.1 --episodes 1 --out bad");
    CHECK(r.code != 0);
    CHECK(r.err.find("sweep.qi") != std::string::npos);
    r = run_cli("run --config missing.yaml");
    CHECK(r.code != 0);
    CHECK(r.err.find("missing.yaml") != std::string::npos);
    r = run_cli("run --strategy bogus");
    CHECK(r.code != 0);
}

TEST_CASE("summarize")
{
    SUBCASE("one run gives one curve file")
    {
        fs::remove_all(kScratch / "sum_one");
        REQUIRE(run_cli("run --strategy oracle --episodes 10 --out one_oracle").code == 0);
        REQUIRE(run_cli("summarize one_oracle --out sum_one").code == 0);
        std::size_t curves = 0;
        for (const auto& entry : fs::directory_iterator(kScratch / "sum_one"))
            curves += entry.path().filename().string().rfind("curve_", 0) == 0;
        CHECK(curves == 1);
        CHECK(fs::exists(kScratch / "sum_one" / "curve_oracle_d200.csv"));
    }
    SUBCASE("interference levels plus dcb give four rows per density")
    {
        fs::remove_all(kScratch / "sum_table");
        std::string runs;
        for (double d : {100.0, 200.0}) {
            for (const char* q : {"0.001", "0.01", "0.1"}) {
                const auto dir = "tbl_sweep_" + std::string(q) + "_" + std::to_string(static_cast<int>(d));
                REQUIRE(run_cli("run --strategy sweep --episodes 5 --density " + std::to_string(d) + " --qi " + q +
                                " --out " + dir)
                            .code == 0);
                runs += " " + dir;
            }
            const auto dir = "tbl_dcb_" + std::to_string(static_cast<int>(d));
            REQUIRE(run_cli("run --strategy dcb --episodes 5 --density " + std::to_string(d) + " --out " + dir).code ==
                    0);
            runs += " " + dir;
        }
        REQUIRE(run_cli("summarize" + runs + " --out sum_table --tail 100").code == 0);
        std::istringstream table(slurp(kScratch / "sum_table" / "density_table.csv"));
        std::string line;
        std::getline(table, line);
        CHECK(line.rfind("ap_density_per_km2,series", 0) == 0);
        int d100 = 0, d200 = 0;
        while (std::getline(table, line)) {
            d100 += line.rfind("100,", 0) == 0;
            d200 += line.rfind("200,", 0) == 0;
        }
        CHECK(d100 == 4);
        CHECK(d200 == 4);
    }
    SUBCASE("an empty log is an error and writes nothing")
    {
        fs::remove_all(kScratch / "sum_empty");
        fs::create_directories(kScratch / "empty_run");
        write_file("empty_run/events.csv", std::string(kEventCsvHeader) + "\n");
        write_file("empty_run/run.yaml", "");
        const auto r = run_cli("summarize empty_run --out sum_empty");
        CHECK(r.code != 0);
        CHECK(r.err.find("no events") != std::string::npos);
        CHECK_FALSE(fs::exists(kScratch / "sum_empty"));
    }
    SUBCASE("a missing log is an error")
    {
        CHECK(run_cli("summarize nowhere --out sum_missing").code != 0);
    }
}
