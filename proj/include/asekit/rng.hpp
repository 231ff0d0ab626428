// Copyright 2026 the asekit developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace asekit {

/// Counter-based pseudorandom generator built on the splitmix64 output
/// function.
///
/// The i-th variate of a stream is a pure function of (seed, stream, i):
/// a stream key is derived by mixing the seed and the stream id, and the
/// raw 64-bit word at index i is mix64(key + (i + 1) * golden gamma).
/// Because there is no hidden state, any index range can be generated
/// independently, in any order and in any partitioning, with bit-identical
/// results on every platform.  This is what makes chunked sampling
/// reproducible regardless of chunk size.
///
/// Do not interleave uniform_open01() and normal() on the same stream:
/// normal(i) consumes the uniform indices 2i and 2i + 1.
class CounterRng
{
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix64(mix64(seed + kGolden)
                     ^ mix64(stream * kStreamSalt + kStreamSalt)))
    {
    }

    /// Raw 64-bit word at index i.
    std::uint64_t word_at(std::uint64_t i) const
    {
        return mix64(key_ + (i + 1) * kGolden);
    }

    /// Uniform variate in the open interval (0,1).
    ///
    /// The top 53 bits of the raw word select a bin on a 2^53 grid and the
    /// bin midpoint is returned, so exact 0 and 1 can never occur.
    double uniform_open01(std::uint64_t i) const
    {
        return (static_cast<double>(word_at(i) >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal variate at index i.
    ///
    /// Box-Muller transform over counter-derived uniforms: unlike
    /// std::normal_distribution, the result is bit-reproducible across
    /// standard library implementations.
    double normal(std::uint64_t i) const
    {
        double u1 = uniform_open01(2 * i);
        double u2 = uniform_open01(2 * i + 1);
        return std::sqrt(-2.0 * std::log(u1))
               * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// splitmix64 finalizer: invertible 64-bit mix with good avalanche.
    static constexpr std::uint64_t mix64(std::uint64_t z)
    {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

  private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
    static constexpr std::uint64_t kStreamSalt = 0xD1B54A32D192ED03ULL;

    std::uint64_t key_;
};

/// Stream ids used by the simulation pipeline.  Keeping them distinct
/// guarantees that photon sampling and electronic noise generated from the
/// same master seed are statistically independent.
enum class RngStream : std::uint64_t
{
    photon_sampling = 0,
    electronic_noise = 1,
    extractor_seed = 2,
};

inline CounterRng make_stream(std::uint64_t seed, RngStream stream)
{
    return CounterRng(seed, static_cast<std::uint64_t>(stream));
}

}  // namespace asekit
