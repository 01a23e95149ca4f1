#include "dcbia/beamforming.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace dcbia {

void LinkBudget::validate() const
{
    if (!(tx_power_w > 0.0) || !(noise_power_w > 0.0))
        throw std::invalid_argument("link budget: powers must be > 0");
}

Beam make_beam(int index, std::vector<double> phases)
{
    Beam b;
    b.index = index;
    const double scale = 1.0 / std::sqrt(static_cast<double>(phases.size()));
    b.weights.resize(static_cast<Eigen::Index>(phases.size()));
    for (std::size_t n = 0; n < phases.size(); ++n)
        b.weights[static_cast<Eigen::Index>(n)] = std::polar(scale, phases[n]);
    b.phases = std::move(phases);
    return b;
}

Codebook build_codebook(const ArrayGeometry& geom)
{
    geom.validate();
    Codebook cb;
    cb.geometry = geom;
    const int W = geom.width;
    const int H = geom.height;
    cb.beams.reserve(static_cast<std::size_t>(W * H));
    for (int u = 0; u < W; ++u) {
        for (int v = 0; v < H; ++v) {
            std::vector<double> phases(static_cast<std::size_t>(W * H));
            for (int w = 0; w < W; ++w)
                for (int h = 0; h < H; ++h)
                    phases[static_cast<std::size_t>(w * H + h)] =
                        -2.0 * std::numbers::pi *
                        (static_cast<double>(u * w) / W + static_cast<double>(v * h) / H);
            cb.beams.push_back(make_beam(u * H + v, std::move(phases)));
        }
    }
    return cb;
}

Codebook load_codebook(const std::string& path, const ArrayGeometry& geom)
{
    geom.validate();
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("codebook: cannot open '" + path + "'");
    Codebook cb;
    cb.geometry = geom;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream ss(line);
        std::vector<double> phases;
        double v;
        while (ss >> v)
            phases.push_back(v);
        if (!ss.eof())
            throw std::runtime_error("codebook: non-numeric value on line " + std::to_string(lineno));
        if (phases.empty())
            continue;
        if (static_cast<int>(phases.size()) != geom.size())
            throw std::runtime_error("codebook: line " + std::to_string(lineno) + " has " +
                                     std::to_string(phases.size()) + " phases, expected " +
                                     std::to_string(geom.size()));
        cb.beams.push_back(make_beam(static_cast<int>(cb.beams.size()), std::move(phases)));
    }
    if (cb.beams.empty())
        throw std::runtime_error("codebook: '" + path + "' contains no beams");
    return cb;
}

double beam_gain(const cvec& g, const Beam& f)
{
    assert(g.size() == f.weights.size());
    return std::norm(g.dot(f.weights)); // dot() conjugates the left operand
}

double snr(const LinkBudget& budget, const cvec& g, const Beam& f)
{
    return budget.tx_power_w * beam_gain(g, f) / budget.noise_power_w;
}

BeamChoice best_beam_oracle(const cvec& g, const Codebook& codebook)
{
    if (codebook.beams.empty())
        throw std::invalid_argument("best_beam_oracle: empty codebook");
    BeamChoice best{0, beam_gain(g, codebook.beams[0])};
    for (std::size_t b = 1; b < codebook.size(); ++b) {
        const double gain = beam_gain(g, codebook.beams[b]);
        if (gain > best.gain)
            best = {static_cast<int>(b), gain};
    }
    return best;
}

double total_sinr(const std::vector<ServingLink>& links, double interference_w, double noise_power_w)
{
    if (links.empty())
        throw std::invalid_argument("total_sinr: no serving links");
    double signal = 0.0;
    for (const auto& l : links)
        signal += l.tx_power_w * beam_gain(*l.g, *l.f);
    return signal / (interference_w + noise_power_w);
}

ServingSet select_serving_aps(std::vector<ApCandidate> candidates, int m)
{
    if (m < 1)
        throw std::invalid_argument("select_serving_aps: M must be >= 1");
    std::sort(candidates.begin(), candidates.end(), [](const ApCandidate& a, const ApCandidate& b) {
        if (a.received_power != b.received_power)
            return a.received_power > b.received_power;
        return a.ap < b.ap;
    });
    ServingSet out;
    out.degenerate = static_cast<int>(candidates.size()) < m;
    const auto take = std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(m));
    out.selected.assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take));
    return out;
}

} // namespace dcbia
