#include "dcbia/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dcbia {

namespace {

constexpr double pi = std::numbers::pi;

double wrap_azimuth(double a)
{
    a = std::fmod(a + pi, 2.0 * pi);
    if (a < 0.0)
        a += 2.0 * pi;
    a -= pi;
    // fmod can round onto +pi
    return a >= pi ? -pi : a;
}

} // namespace

void ArrayGeometry::validate() const
{
    if (width < 1 || height < 1)
        throw std::invalid_argument("array geometry: width and height must be >= 1");
    if (!(element_spacing > 0.0))
        throw std::invalid_argument("array geometry: element spacing must be > 0");
}

double distance(const Point3& a, const Point3& b)
{
    return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

const char* to_string(LinkState s)
{
    switch (s) {
    case LinkState::los: return "los";
    case LinkState::nlos: return "nlos";
    case LinkState::outage: return "outage";
    }
    return "?";
}

void ChannelParams::validate() const
{
    if (los.shadow_sigma_db < 0.0 || nlos.shadow_sigma_db < 0.0 || cluster_power_sigma_db < 0.0)
        throw std::invalid_argument("channel: shadowing sigma must be >= 0");
    if (!(noise_power_w > 0.0))
        throw std::invalid_argument("channel: noise power must be > 0");
    if (paths_per_cluster < 1)
        throw std::invalid_argument("channel: paths_per_cluster must be >= 1");
    if (mean_clusters < 0.0)
        throw std::invalid_argument("channel: mean_clusters must be >= 0");
    if (los_decay_m < 0.0 || outage_decay_m <= 0.0)
        throw std::invalid_argument("channel: decay lengths must be positive");
    if (angular_spread_rad < 0.0)
        throw std::invalid_argument("channel: angular spread must be >= 0");
}

cvec urpa_response(double azimuth, double elevation, const ArrayGeometry& geom)
{
    const double su = std::sin(azimuth) * std::cos(elevation);
    const double sv = std::sin(elevation);
    const double k = 2.0 * pi * geom.element_spacing;
    cvec a(geom.size());
    for (int w = 0; w < geom.width; ++w)
        for (int h = 0; h < geom.height; ++h)
            a[w * geom.height + h] = std::polar(1.0, k * (w * su + h * sv));
    return a;
}

LinkState sample_link_state(double distance_m, const ChannelParams& params, Rng& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (params.outage_enabled) {
        const double p_out = std::clamp(
            1.0 - std::exp(-distance_m / params.outage_decay_m + params.outage_offset), 0.0, 1.0);
        if (u(rng) < p_out)
            return LinkState::outage;
    }
    const double p_los = params.los_decay_m > 0.0 ? std::exp(-distance_m / params.los_decay_m) : 1.0;
    return u(rng) < p_los ? LinkState::los : LinkState::nlos;
}

double path_loss_db(double distance_m, LinkState state, const ChannelParams& params, Rng& rng)
{
    if (state == LinkState::outage)
        throw std::invalid_argument("path_loss_db: outage link has no finite path loss");
    const PathLossModel& m = state == LinkState::los ? params.los : params.nlos;
    double shadow = 0.0;
    if (m.shadow_sigma_db > 0.0)
        shadow = std::normal_distribution<double>(0.0, m.shadow_sigma_db)(rng);
    return m.alpha_db + 10.0 * m.beta * std::log10(distance_m) + shadow;
}

cvec reconstruct_channel(const std::vector<PathParams>& paths, int paths_per_cluster,
                         const ArrayGeometry& geom)
{
    cvec g = cvec::Zero(geom.size());
    for (const auto& p : paths)
        g += (p.path_gain * p.fading) * urpa_response(p.azimuth, p.elevation, geom);
    return g / std::sqrt(static_cast<double>(paths_per_cluster));
}

cvec complex_gaussian(Eigen::Index n, double variance, Rng& rng)
{
    std::normal_distribution<double> nd(0.0, std::sqrt(variance / 2.0));
    cvec v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double re = nd(rng);
        const double im = nd(rng);
        v[i] = {re, im};
    }
    return v;
}

ChannelRealization sample_channel(const Point3& ap, const Point3& user, const ArrayGeometry& geom,
                                  const ChannelParams& params, Rng& rng)
{
    const double d = distance(ap, user);
    if (!(d > 0.0))
        throw std::invalid_argument("sample_channel: AP and user positions coincide");

    ChannelRealization ch;
    ch.paths_per_cluster = params.paths_per_cluster;
    ch.state = sample_link_state(d, params, rng);
    if (ch.state == LinkState::outage) {
        ch.g = cvec::Zero(geom.size());
        return ch;
    }

    const double pl_db = path_loss_db(d, ch.state, params, rng);
    const double link_power = std::pow(10.0, (params.antenna_gain_db - pl_db) / 10.0);

    const int clusters = std::max(1, std::poisson_distribution<int>(params.mean_clusters)(rng));
    ch.num_clusters = clusters;

    // Random cluster power fractions, normalized so the clusters share the link power.
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> zeta(0.0, params.cluster_power_sigma_db > 0.0 ? params.cluster_power_sigma_db : 1.0);
    std::vector<double> fraction(clusters);
    double total = 0.0;
    for (auto& f : fraction) {
        const double uu = std::max(u01(rng), 1e-12);
        const double z = params.cluster_power_sigma_db > 0.0 ? zeta(rng) : 0.0;
        f = std::pow(uu, params.cluster_power_exponent - 1.0) * std::pow(10.0, -0.1 * z);
        total += f;
    }

    std::normal_distribution<double> spread(0.0, params.angular_spread_rad > 0.0 ? params.angular_spread_rad : 1.0);
    std::normal_distribution<double> fade(0.0, std::sqrt(0.5));
    const int L = params.paths_per_cluster;
    ch.paths.reserve(static_cast<std::size_t>(clusters * L));
    for (int j = 0; j < clusters; ++j) {
        const double amp = std::sqrt(link_power * fraction[j] / total);
        // AP faces the coverage area; cluster centres cover the front hemisphere.
        const double az0 = uniform_real(rng, -pi / 2.0, pi / 2.0);
        const double el0 = uniform_real(rng, -pi / 2.0, pi / 2.0);
        for (int l = 0; l < L; ++l) {
            PathParams p;
            p.cluster = j;
            p.path = l;
            p.path_gain = amp;
            const double re = fade(rng);
            const double im = fade(rng);
            p.fading = {re, im};
            const double daz = params.angular_spread_rad > 0.0 ? spread(rng) : 0.0;
            const double del = params.angular_spread_rad > 0.0 ? spread(rng) : 0.0;
            p.azimuth = wrap_azimuth(az0 + daz);
            p.elevation = std::clamp(el0 + del, -pi / 2.0, pi / 2.0);
            ch.paths.push_back(p);
        }
    }
    ch.g = reconstruct_channel(ch.paths, L, geom);
    return ch;
}

ChannelEstimate estimate_channel(const ChannelRealization& channel, double user_tx_power_w,
                                 double noise_power_w, Rng& rng, int source_user, int source_ap)
{
    if (!(user_tx_power_w > 0.0) || !(noise_power_w > 0.0))
        throw std::invalid_argument("estimate_channel: powers must be > 0");
    ChannelEstimate est;
    est.source_user = source_user;
    est.source_ap = source_ap;
    // per-dimension variance noise_power_w, i.e. 2 * noise_power_w per complex entry
    est.g_tilde = std::sqrt(user_tx_power_w) * channel.g +
                  complex_gaussian(channel.g.size(), 2.0 * noise_power_w, rng);
    return est;
}

} // namespace dcbia
