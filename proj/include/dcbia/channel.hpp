#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "dcbia/rng.hpp"

namespace dcbia {

using cvec = Eigen::VectorXcd;

/// Uniform rectangular planar array of width x height elements.
struct ArrayGeometry {
    int width = 4;
    int height = 4;
    double element_spacing = 0.5; ///< in wavelengths

    int size() const { return width * height; }
    void validate() const;
    bool operator==(const ArrayGeometry&) const = default;
};

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    bool operator==(const Point3&) const = default;
};

double distance(const Point3& a, const Point3& b);

enum class LinkState { los, nlos, outage };

const char* to_string(LinkState s);

/// One propagation path of the clustered model.
struct PathParams {
    int cluster = 0;
    int path = 0;
    std::complex<double> path_gain;   ///< linear amplitude, includes the element gain
    std::complex<double> fading;
    double azimuth = 0.0;             ///< [-pi, pi)
    double elevation = 0.0;           ///< [-pi/2, pi/2]
};

struct ChannelRealization {
    cvec g;
    std::vector<PathParams> paths;
    int num_clusters = 0;
    int paths_per_cluster = 0;
    LinkState state = LinkState::outage;
};

struct PathLossModel {
    double alpha_db = 0.0;
    double beta = 0.0;
    double shadow_sigma_db = 0.0;
    bool operator==(const PathLossModel&) const = default;
};

/// Stochastic channel parameters. Powers are linear watts.
struct ChannelParams {
    double carrier_frequency_hz = 28e9;
    double mean_clusters = 1.8;          ///< J = max(1, Poisson(mean_clusters))
    int paths_per_cluster = 10;
    PathLossModel los{61.4, 2.0, 5.8};
    PathLossModel nlos{72.0, 2.92, 8.7};
    double los_decay_m = 67.1;           ///< P(LOS) = exp(-d / los_decay_m)
    bool outage_enabled = true;
    double outage_decay_m = 30.0;        ///< P(outage) = max(0, 1 - exp(-d / decay + offset))
    double outage_offset = 5.2;
    double angular_spread_rad = 10.0 * std::numbers::pi / 180.0;
    double cluster_power_exponent = 2.8; ///< cluster power fraction U^(r-1) * 10^(-0.1 Z)
    double cluster_power_sigma_db = 4.0;
    double antenna_gain_db = 5.0;
    double noise_power_w = 1.1912e-13;   ///< -174 dBm/Hz + 10 log10(15 MHz) + 3 dB

    void validate() const;
    bool operator==(const ChannelParams&) const = default;
};

struct ChannelEstimate {
    cvec g_tilde;
    int source_user = -1;
    int source_ap = -1;
};

/// Steering vector of the planar array, row-major over (w, h).
cvec urpa_response(double azimuth, double elevation, const ArrayGeometry& geom);

LinkState sample_link_state(double distance_m, const ChannelParams& params, Rng& rng);

/// Path loss in dB including a lognormal shadowing draw. Throws for outage.
double path_loss_db(double distance_m, LinkState state, const ChannelParams& params, Rng& rng);

/// Sums the stored paths into the channel vector (the 1/sqrt(L) clustered sum).
cvec reconstruct_channel(const std::vector<PathParams>& paths, int paths_per_cluster,
                         const ArrayGeometry& geom);

ChannelRealization sample_channel(const Point3& ap, const Point3& user, const ArrayGeometry& geom,
                                  const ChannelParams& params, Rng& rng);

/// Pilot-matched estimate sqrt(p_k) g + w, w with variance noise_power_w on each of the
/// real and imaginary parts.
ChannelEstimate estimate_channel(const ChannelRealization& channel, double user_tx_power_w,
                                 double noise_power_w, Rng& rng, int source_user = -1,
                                 int source_ap = -1);

/// i.i.d. circularly-symmetric complex Gaussian vector, total variance per entry `variance`.
cvec complex_gaussian(Eigen::Index n, double variance, Rng& rng);

} // namespace dcbia
