#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dcbia/beamforming.hpp"
#include "dcbia/channel.hpp"
#include "dcbia/dcb.hpp"
#include "dcbia/rng.hpp"

namespace dcbia {

struct DcbIaParams {
    double user_tx_power_w = 0.19952623149688797; // 23 dBm
    double detection_threshold = 1.0;             ///< linear uplink SNR, 0 dB
    double t_msg_ms = 0.01;
};

struct DcbIaOutcome {
    bool detected = false;
    std::optional<int> chosen_beam;
    int true_best_beam = 0;
    bool misdetected = true;
    std::optional<double> delay_ms;
    std::optional<double> reward;
    std::optional<double> loss;
    double chosen_gain = 0.0;
    double best_gain = 0.0;
};

/// Uplink SNR of the user's single reference signal, p_k ||g||^2 / sigma^2.
double uplink_snr(const ChannelRealization& channel, double user_tx_power_w, double noise_power_w);

/// One single-reference-signal IA attempt at the AP that owns `agent`. An undetected
/// reference leaves the agent untouched and counts as a misdetection.
DcbIaOutcome run_dcb_ia(DcbAgent& agent, const ChannelRealization& channel, const Codebook& codebook,
                        const LinkBudget& budget, const DcbIaParams& params, Rng& rng);

struct UcAssociation {
    ServingSet serving;
    std::vector<DcbIaOutcome> outcomes; ///< one per AP, indexed like `agents`
    bool total_outage = false;          ///< no AP detected the reference
};

/// Runs run_dcb_ia at every AP for one user and associates the user with the best M
/// detecting APs by the downlink power of their predicted beams. `agents[m]`,
/// `channels[m]` and `rngs[m]` belong to AP m. Agents may alias (shared-agent mode).
UcAssociation run_uc_association(std::span<DcbAgent* const> agents,
                                 std::span<const ChannelRealization* const> channels,
                                 const Codebook& codebook, const LinkBudget& budget,
                                 const DcbIaParams& params, int m, std::span<Rng> rngs);

} // namespace dcbia
