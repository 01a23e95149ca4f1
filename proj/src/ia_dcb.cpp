#include "dcbia/ia_dcb.hpp"

#include <stdexcept>

#include "dcbia/metrics.hpp"

namespace dcbia {

double uplink_snr(const ChannelRealization& channel, double user_tx_power_w, double noise_power_w)
{
    return user_tx_power_w * channel.g.squaredNorm() / noise_power_w;
}

DcbIaOutcome run_dcb_ia(DcbAgent& agent, const ChannelRealization& channel, const Codebook& codebook,
                        const LinkBudget& budget, const DcbIaParams& params, Rng& rng)
{
    if (static_cast<std::size_t>(agent.net.output_size()) != codebook.size())
        throw std::invalid_argument("run_dcb_ia: agent action space does not match codebook size");

    DcbIaOutcome out;
    const BeamChoice best = best_beam_oracle(channel.g, codebook);
    out.true_best_beam = best.index;
    out.best_gain = best.gain;

    if (uplink_snr(channel, params.user_tx_power_w, budget.noise_power_w) < params.detection_threshold) {
        out.detected = false;
        out.misdetected = true;
        return out;
    }

    out.detected = true;
    const ChannelEstimate est = estimate_channel(channel, params.user_tx_power_w, budget.noise_power_w, rng);
    const Context ctx = build_context(est, agent.config().context_norm);
    const int action = select_action(agent, ctx, rng);
    const Beam& beam = codebook[static_cast<std::size_t>(action)];

    // Downlink SNR report; the reward normalizes it with the uplink estimate.
    const double reward = agent.config().reward_scale * compute_reward(est, beam, budget.noise_power_w);
    out.chosen_beam = action;
    out.chosen_gain = beam_gain(channel.g, beam);
    out.misdetected = is_misdetection(out.chosen_gain, out.best_gain);
    out.reward = reward;
    out.delay_ms = params.t_msg_ms;
    out.loss = record_and_train(agent, Experience{ctx.x, action, reward}, rng);
    return out;
}

UcAssociation run_uc_association(std::span<DcbAgent* const> agents,
                                 std::span<const ChannelRealization* const> channels,
                                 const Codebook& codebook, const LinkBudget& budget,
                                 const DcbIaParams& params, int m, std::span<Rng> rngs)
{
    if (m < 1)
        throw std::invalid_argument("run_uc_association: association size M must be >= 1");
    if (agents.size() != channels.size() || rngs.size() != channels.size())
        throw std::invalid_argument("run_uc_association: one agent, channel and rng per AP required");

    UcAssociation res;
    res.outcomes.reserve(channels.size());
    std::vector<ApCandidate> candidates;
    for (std::size_t ap = 0; ap < channels.size(); ++ap) {
        auto outcome = run_dcb_ia(*agents[ap], *channels[ap], codebook, budget, params, rngs[ap]);
        if (outcome.detected)
            candidates.push_back({static_cast<int>(ap), *outcome.chosen_beam, budget.tx_power_w * outcome.chosen_gain});
        res.outcomes.push_back(std::move(outcome));
    }
    res.total_outage = candidates.empty();
    if (!res.total_outage)
        res.serving = select_serving_aps(std::move(candidates), m);
    return res;
}

} // namespace dcbia
