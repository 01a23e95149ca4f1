#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace dcbia {

/// Random engine used throughout the simulator.
using Rng = std::mt19937_64;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

/// Derives an independent substream seed from a master seed and a tuple of
/// counters (episode, link, purpose, ...). The mapping is a pure function so
/// the same tuple always yields the same stream, whatever the call order.
inline std::uint64_t substream_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys)
{
    std::uint64_t h = detail::splitmix64(master);
    for (auto k : keys)
        h = detail::splitmix64(h ^ detail::splitmix64(k + 0x632be59bd9b4e019ULL));
    return h;
}

inline Rng make_substream(std::uint64_t master, std::initializer_list<std::uint64_t> keys)
{
    return Rng(substream_seed(master, keys));
}

/// Uniform integer in [0, n).
inline std::size_t uniform_index(Rng& rng, std::size_t n)
{
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

} // namespace dcbia
