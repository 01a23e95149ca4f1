#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dcbia/channel.hpp"

using namespace dcbia;
using std::numbers::pi;

TEST_CASE("broadside steering vector is all ones")
{
    const auto a = urpa_response(0.0, 0.0, ArrayGeometry{});
    REQUIRE(a.size() == 16);
    for (Eigen::Index n = 0; n < a.size(); ++n) {
        CHECK(a[n].real() == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(std::abs(a[n].imag()) < 1e-15);
    }
    CHECK(a.squaredNorm() == doctest::Approx(16.0).epsilon(1e-15));
}

TEST_CASE("steering vector has norm N for any direction")
{
    Rng rng(7);
    for (int t = 0; t < 200; ++t) {
        const double az = uniform_real(rng, -pi, pi);
        const double el = uniform_real(rng, -pi / 2, pi / 2);
        CHECK(std::abs(urpa_response(az, el, ArrayGeometry{}).squaredNorm() - 16.0) < 1e-12);
    }
}

TEST_CASE("two-element endfire steering vector is [1, -1]")
{
    const auto a = urpa_response(pi / 2, 0.0, ArrayGeometry{2, 1, 0.5});
    REQUIRE(a.size() == 2);
    CHECK(std::abs(a[0] - std::complex<double>(1.0, 0.0)) < 1e-12);
    CHECK(std::abs(a[1] - std::complex<double>(-1.0, 0.0)) < 1e-12);
}

TEST_CASE("steering vector is row-major over (w, h)")
{
    const ArrayGeometry geom{3, 2, 0.5};
    const double az = 0.3, el = -0.2;
    const auto a = urpa_response(az, el, geom);
    for (int w = 0; w < 3; ++w)
        for (int h = 0; h < 2; ++h) {
            const double phase = 2 * pi * 0.5 * (w * std::sin(az) * std::cos(el) + h * std::sin(el));
            CHECK(std::abs(a[w * 2 + h] - std::polar(1.0, phase)) < 1e-12);
        }
}

TEST_CASE("link state: no decay and no outage means always LOS")
{
    ChannelParams p;
    p.outage_enabled = false;
    p.los_decay_m = 0.0; // zero disables the LOS decay
    Rng rng(1);
    for (int i = 0; i < 1000; ++i)
        CHECK(sample_link_state(500.0, p, rng) == LinkState::los);
}

TEST_CASE("link state: LOS probability vanishes with distance")
{
    ChannelParams p;
    p.outage_enabled = false;
    Rng rng(2);
    int los = 0;
    for (int i = 0; i < 10000; ++i)
        los += sample_link_state(1e5, p, rng) == LinkState::los;
    CHECK(los == 0);
}

TEST_CASE("link state: LOS fraction at the decay distance is 1/e")
{
    ChannelParams p;
    p.outage_enabled = false;
    Rng rng(3);
    const int n = 100000;
    int los = 0;
    for (int i = 0; i < n; ++i)
        los += sample_link_state(67.1, p, rng) == LinkState::los;
    CHECK(std::abs(static_cast<double>(los) / n - std::exp(-1.0)) < 0.01);
}

TEST_CASE("link state: outage probability follows the offset exponential")
{
    ChannelParams p;
    Rng rng(4);
    const double d = 200.0;
    const double expected = 1.0 - std::exp(-d / 30.0 + 5.2);
    const int n = 100000;
    int out = 0;
    for (int i = 0; i < n; ++i)
        out += sample_link_state(d, p, rng) == LinkState::outage;
    CHECK(std::abs(static_cast<double>(out) / n - expected) < 0.01);

    int near_out = 0;
    for (int i = 0; i < 1000; ++i)
        near_out += sample_link_state(50.0, p, rng) == LinkState::outage;
    CHECK(near_out == 0); // exp(-50/30 + 5.2) > 1
}

TEST_CASE("path loss without shadowing")
{
    ChannelParams p;
    p.los.shadow_sigma_db = 0.0;
    Rng rng(5);
    CHECK(path_loss_db(1.0, LinkState::los, p, rng) == 61.4);
    CHECK(path_loss_db(100.0, LinkState::los, p, rng) == doctest::Approx(101.4).epsilon(1e-14));
    CHECK_THROWS_AS(path_loss_db(10.0, LinkState::outage, p, rng), std::invalid_argument);
}

TEST_CASE("path loss shadowing has the configured standard deviation")
{
    ChannelParams p;
    Rng rng(6);
    const int n = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = path_loss_db(50.0, LinkState::los, p, rng);
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum2 / n - mean * mean);
    CHECK(std::abs(sd - 5.8) / 5.8 < 0.02);
    CHECK(mean == doctest::Approx(61.4 + 20.0 * std::log10(50.0)).epsilon(1e-3));
}

TEST_CASE("outage link has a zero channel")
{
    ChannelParams p;
    p.outage_offset = -10.0; // outage probability 1 at any distance
    Rng rng(8);
    const auto ch = sample_channel({0, 0, 10}, {50, 50, 1.5}, ArrayGeometry{}, p, rng);
    CHECK(ch.state == LinkState::outage);
    CHECK(ch.g.squaredNorm() == 0.0);
    CHECK(ch.paths.empty());
}

TEST_CASE("single unit path reduces to the steering vector")
{
    PathParams path;
    path.path_gain = 1.0;
    path.fading = 1.0;
    path.azimuth = 0.4;
    path.elevation = -0.1;
    const auto g = reconstruct_channel({path}, 1, ArrayGeometry{});
    const auto a = urpa_response(0.4, -0.1, ArrayGeometry{});
    CHECK((g - a).norm() < 1e-14);
    CHECK(g.squaredNorm() == doctest::Approx(16.0).epsilon(1e-14));
}

TEST_CASE("mean channel energy matches the path powers")
{
    // Fixed path amplitudes; fading and angles redrawn.
    const ArrayGeometry geom;
    const int L = 10;
    const std::vector<double> amps = {1.0, 0.5, 0.25};
    double expected = 0.0;
    for (double a : amps)
        expected += L * a * a;
    expected *= geom.size() / static_cast<double>(L);

    Rng rng(9);
    const int n = 100000;
    double total = 0.0;
    for (int t = 0; t < n; ++t) {
        std::vector<PathParams> paths;
        for (std::size_t j = 0; j < amps.size(); ++j)
            for (int l = 0; l < L; ++l) {
                PathParams p;
                p.path_gain = amps[j];
                p.fading = complex_gaussian(1, 1.0, rng)[0];
                p.azimuth = uniform_real(rng, -pi, pi);
                p.elevation = uniform_real(rng, -pi / 2, pi / 2);
                paths.push_back(p);
            }
        total += reconstruct_channel(paths, L, geom).squaredNorm();
    }
    CHECK(std::abs(total / n / expected - 1.0) < 0.02);
}

TEST_CASE("sampled channel energy matches the link budget")
{
    ChannelParams p;
    p.outage_enabled = false;
    p.los_decay_m = 0.0;
    p.los.shadow_sigma_db = 0.0;
    const Point3 ap{0, 0, 10}, user{30, 40, 10};
    const double link_power = std::pow(10.0, (5.0 - (61.4 + 20.0 * std::log10(50.0))) / 10.0);
    Rng rng(10);
    const int n = 100000;
    double total = 0.0;
    for (int t = 0; t < n; ++t) {
        const auto ch = sample_channel(ap, user, ArrayGeometry{}, p, rng);
        REQUIRE(ch.state == LinkState::los);
        total += ch.g.squaredNorm();
    }
    CHECK(std::abs(total / n / (16.0 * link_power) - 1.0) < 0.02);
}

TEST_CASE("sampled channel structure")
{
    ChannelParams p;
    p.outage_enabled = false;
    Rng rng(11);
    for (int t = 0; t < 500; ++t) {
        const auto ch = sample_channel({0, 0, 10}, {20, 5, 1.5}, ArrayGeometry{}, p, rng);
        CHECK(ch.num_clusters >= 1);
        CHECK(ch.paths.size() == static_cast<std::size_t>(ch.num_clusters * 10));
        CHECK((ch.g - reconstruct_channel(ch.paths, ch.paths_per_cluster, ArrayGeometry{})).norm() <=
              1e-12 * ch.g.norm());
        for (const auto& path : ch.paths) {
            CHECK(path.azimuth >= -pi);
            CHECK(path.azimuth < pi);
            CHECK(std::abs(path.elevation) <= pi / 2);
        }
    }
}

TEST_CASE("noiseless-limit estimate recovers the channel")
{
    ChannelParams p;
    p.outage_enabled = false;
    Rng rng(12);
    const auto ch = sample_channel({0, 0, 10}, {20, 5, 1.5}, ArrayGeometry{}, p, rng);
    const double pk = 0.2;
    const auto est = estimate_channel(ch, pk, 1e-40, rng);
    CHECK((est.g_tilde / std::sqrt(pk) - ch.g).norm() < 1e-9 * ch.g.norm());
}

TEST_CASE("estimate of a zero channel is pure noise with variance 2 sigma^2 per entry")
{
    ChannelRealization ch;
    ch.g = cvec::Zero(16);
    Rng rng(13);
    const double sigma2 = 0.5;
    const int n = 100000;
    double total = 0.0;
    for (int t = 0; t < n; ++t)
        total += estimate_channel(ch, 3.0, sigma2, rng).g_tilde.squaredNorm();
    CHECK(std::abs(total / n / (16 * 2 * sigma2) - 1.0) < 0.02);
}

TEST_CASE("estimates are reproducible from the seed")
{
    ChannelParams p;
    Rng a(14), b(14);
    const auto ca = sample_channel({0, 0, 10}, {20, 5, 1.5}, ArrayGeometry{}, p, a);
    const auto cb = sample_channel({0, 0, 10}, {20, 5, 1.5}, ArrayGeometry{}, p, b);
    const auto ea = estimate_channel(ca, 0.2, 1e-13, a);
    const auto eb = estimate_channel(cb, 0.2, 1e-13, b);
    CHECK(ca.g == cb.g);
    CHECK(ea.g_tilde == eb.g_tilde);
}

TEST_CASE("substreams depend only on their keys")
{
    CHECK(substream_seed(1, {2, 3}) == substream_seed(1, {2, 3}));
    CHECK(substream_seed(1, {2, 3}) != substream_seed(1, {3, 2}));
    CHECK(substream_seed(1, {2, 3}) != substream_seed(2, {2, 3}));
    CHECK(substream_seed(1, {0}) != substream_seed(1, {0, 0}));
}

TEST_CASE("invalid channel parameters are rejected")
{
    ChannelParams p;
    p.noise_power_w = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    ArrayGeometry g{0, 4, 0.5};
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    Rng rng(1);
    CHECK_THROWS_AS(sample_channel({0, 0, 0}, {0, 0, 0}, ArrayGeometry{}, ChannelParams{}, rng), std::invalid_argument);
}
