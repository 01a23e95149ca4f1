#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dcbia/channel.hpp"

namespace dcbia {

/// A codebook entry: unit-norm weights built from per-element phase shifts.
struct Beam {
    int index = 0;
    cvec weights;
    std::vector<double> phases;
};

struct Codebook {
    std::vector<Beam> beams;
    ArrayGeometry geometry;

    std::size_t size() const { return beams.size(); }
    const Beam& operator[](std::size_t i) const { return beams[i]; }
};

/// Transmit power and receiver noise, both in watts.
struct LinkBudget {
    double tx_power_w = 0.0;
    double noise_power_w = 0.0;
    void validate() const;
};

Beam make_beam(int index, std::vector<double> phases);

/// 2D-DFT codebook: beam (u, v) applies phase -2 pi (u w / W + v h / H) to element (w, h).
/// Beams are ordered u-major, elements row-major.
Codebook build_codebook(const ArrayGeometry& geom);

/// Reads one beam per line, N whitespace-separated phases in radians. '#' starts a comment.
Codebook load_codebook(const std::string& path, const ArrayGeometry& geom);

/// |g^H f|^2
double beam_gain(const cvec& g, const Beam& f);

double snr(const LinkBudget& budget, const cvec& g, const Beam& f);

struct BeamChoice {
    int index = 0;
    double gain = 0.0;
};

/// Exhaustive search over the codebook; lowest index wins ties.
BeamChoice best_beam_oracle(const cvec& g, const Codebook& codebook);

struct ServingLink {
    const cvec* g = nullptr;
    const Beam* f = nullptr;
    double tx_power_w = 0.0;
};

/// Sum of per-AP received powers over interference plus noise.
double total_sinr(const std::vector<ServingLink>& links, double interference_w, double noise_power_w);

struct ApCandidate {
    int ap = 0;
    int beam = 0;
    double received_power = 0.0;
};

struct ServingSet {
    std::vector<ApCandidate> selected;
    bool degenerate = false; ///< fewer than M candidates were available
};

/// Picks the M candidates with the largest received power, ties to the lower AP id.
ServingSet select_serving_aps(std::vector<ApCandidate> candidates, int m);

} // namespace dcbia
