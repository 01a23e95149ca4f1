#include "dcbia/ia_sweep.hpp"

#include <stdexcept>

#include "dcbia/metrics.hpp"

namespace dcbia {

void SweepConfig::validate() const
{
    if (!(q_i >= 0.0 && q_i <= 1.0))
        throw std::invalid_argument("sweep: q_i must be in [0, 1]");
    if (!(t_msg_ms > 0.0))
        throw std::invalid_argument("sweep: t_msg_ms must be > 0");
}

double sweep_delay(int codebook_size, double t_msg_ms)
{
    if (codebook_size < 1)
        throw std::invalid_argument("sweep_delay: codebook size must be >= 1");
    return (codebook_size + 1) * t_msg_ms;
}

double draw_beam_interference(const Codebook& codebook, double tx_power_w, double q_i,
                              std::span<const ChannelRealization* const> interferers, Rng& rng)
{
    if (q_i <= 0.0 || uniform_real(rng, 0.0, 1.0) >= q_i)
        return 0.0;
    const auto* other = interferers[uniform_index(rng, interferers.size())];
    const auto& beam = codebook[uniform_index(rng, codebook.size())];
    return tx_power_w * beam_gain(other->g, beam);
}

SweepOutcome run_sweep_ia(const ChannelRealization& channel, const LinkBudget& budget,
                          const Codebook& codebook, const SweepConfig& cfg,
                          std::span<const ChannelRealization* const> interferers, Rng& rng)
{
    if (codebook.beams.empty())
        throw std::invalid_argument("run_sweep_ia: empty codebook");
    if (cfg.q_i > 0.0 && interferers.empty())
        throw std::invalid_argument("run_sweep_ia: q_i > 0 requires at least one interfering link");

    SweepOutcome out;
    out.measured_sinrs.resize(codebook.size());
    for (std::size_t b = 0; b < codebook.size(); ++b) {
        const double interference = draw_beam_interference(codebook, budget.tx_power_w, cfg.q_i, interferers, rng);
        out.measured_sinrs[b] =
            budget.tx_power_w * beam_gain(channel.g, codebook[b]) / (interference + budget.noise_power_w);
    }
    // error-free report of the best measured beam, lowest index on ties
    std::size_t chosen = 0;
    for (std::size_t b = 1; b < codebook.size(); ++b)
        if (out.measured_sinrs[b] > out.measured_sinrs[chosen])
            chosen = b;

    const BeamChoice best = best_beam_oracle(channel.g, codebook);
    out.chosen_beam = static_cast<int>(chosen);
    out.true_best_beam = best.index;
    out.best_gain = best.gain;
    out.chosen_gain = beam_gain(channel.g, codebook[chosen]);
    out.misdetected = is_misdetection(out.chosen_gain, out.best_gain);
    out.delay_ms = sweep_delay(static_cast<int>(codebook.size()), cfg.t_msg_ms);
    return out;
}

} // namespace dcbia
