#pragma once

#include <span>
#include <vector>

#include "dcbia/beamforming.hpp"
#include "dcbia/channel.hpp"
#include "dcbia/rng.hpp"

namespace dcbia {

struct SweepConfig {
    double q_i = 0.0;      ///< per-beam probability that a measurement is interfered
    double t_msg_ms = 0.01;
    void validate() const;
};

struct SweepOutcome {
    int chosen_beam = 0;
    int true_best_beam = 0;
    bool misdetected = false;
    double delay_ms = 0.0;
    double chosen_gain = 0.0;
    double best_gain = 0.0;
    std::vector<double> measured_sinrs;
};

/// Every beam once plus the user's report.
double sweep_delay(int codebook_size, double t_msg_ms);

/// Interference power hitting one beam measurement: with probability q_i a co-scenario
/// link is picked uniformly and a uniform codebook beam is applied to it.
double draw_beam_interference(const Codebook& codebook, double tx_power_w, double q_i,
                              std::span<const ChannelRealization* const> interferers, Rng& rng);

/// Exhaustive sweep with per-beam interference; the user reports the best measured SINR.
SweepOutcome run_sweep_ia(const ChannelRealization& channel, const LinkBudget& budget,
                          const Codebook& codebook, const SweepConfig& cfg,
                          std::span<const ChannelRealization* const> interferers, Rng& rng);

} // namespace dcbia
