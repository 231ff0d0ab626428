// Copyright 2026 the asekit developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "photon_statistics.hpp"
#include "rng.hpp"

namespace asekit {

//---------------------------------------------------------------------------//
// Types
//---------------------------------------------------------------------------//

/// How many variates to draw and from which deterministic stream.
struct SampleRequest
{
    std::uint64_t count = 0;
    std::uint64_t master_seed = 0;
    /// Work-partitioning hint only: the sampled values are a pure function
    /// of (distribution, count, master_seed) and never depend on it.
    std::uint64_t chunk_size = 1u << 16;
};

/// A sequence of sampled photon counts.
struct PhotonCountTrace
{
    std::vector<std::int64_t> counts;
    std::optional<ModalModel> source_model;
};

//---------------------------------------------------------------------------//
// Exact discrete inversion
//---------------------------------------------------------------------------//

/// Smallest count whose cumulative probability reaches u: the exact
/// generalized inverse of the distribution's CDF.  u above the stored
/// cumulative maximum (possible only through rounding) maps to the last
/// support point.
inline std::int64_t quantile(PhotonDistribution const& d, double u)
{
    if (d.cumulative.empty())
        throw std::invalid_argument("quantile: empty distribution");
    if (!(u > 0.0 && u < 1.0))
        throw std::domain_error("quantile: u must lie in (0, 1)");

    auto it = std::lower_bound(d.cumulative.begin(), d.cumulative.end(), u);
    if (it == d.cumulative.end())
        --it;
    return d.support_min + (it - d.cumulative.begin());
}

namespace detail {

/// Equal-probability guide table over the cumulative (Chen-Asau method):
/// cell g holds the first index whose cumulative reaches g / size, so a
/// lookup narrows the inversion to a short local search.  Results are
/// identical to a full lower_bound; this is purely an accelerator.
class GuideTable
{
  public:
    explicit GuideTable(std::vector<double> const& cumulative)
        : cum_(cumulative)
    {
        // A power-of-two cell count makes u * cells and g / cells exact in
        // floating point, so the bracket below provably contains the
        // full-range lower_bound result.
        std::size_t cells = std::bit_ceil(
            std::clamp<std::size_t>(cumulative.size(), 1024, 1u << 18));
        guide_.resize(cells + 1);
        std::size_t j = 0;
        for (std::size_t g = 0; g < cells; ++g)
        {
            double threshold
                = static_cast<double>(g) / static_cast<double>(cells);
            while (j < cum_.size() && cum_[j] < threshold)
                ++j;
            guide_[g] = std::min(j, cum_.size() - 1);
        }
        guide_[cells] = cum_.size() - 1;
    }

    std::size_t invert(double u) const
    {
        std::size_t cells = guide_.size() - 1;
        auto g = static_cast<std::size_t>(u * static_cast<double>(cells));
        if (g >= cells)
            g = cells - 1;
        auto first = cum_.begin() + static_cast<std::ptrdiff_t>(guide_[g]);
        auto last = cum_.begin() + static_cast<std::ptrdiff_t>(guide_[g + 1])
                    + 1;
        auto it = std::lower_bound(first, last, u);
        if (it == cum_.end())
            --it;
        return static_cast<std::size_t>(it - cum_.begin());
    }

  private:
    std::vector<double> const& cum_;
    std::vector<std::size_t> guide_;
};

}  // namespace detail

/// Draw request.count photon counts by exact inverse-transform sampling.
///
/// Uniform variates come from a counter-based stream indexed by position, so
/// the output is bit-identical for any chunk_size and any platform.  The
/// distribution must be normalized (cumulative reaching 1 within 1e-9).
inline PhotonCountTrace inverse_transform_sample(PhotonDistribution const& d,
                                                 SampleRequest const& request)
{
    if (request.count == 0)
        throw std::invalid_argument(
            "inverse_transform_sample: count must be >= 1");
    if (request.chunk_size == 0)
        throw std::invalid_argument(
            "inverse_transform_sample: chunk_size must be >= 1");
    if (d.cumulative.empty())
        throw std::invalid_argument(
            "inverse_transform_sample: empty distribution");
    if (std::abs(d.cumulative.back() - 1.0) > 1e-9)
        throw std::domain_error(
            "inverse_transform_sample: distribution is not normalized");

    CounterRng rng = make_stream(request.master_seed,
                                 RngStream::photon_sampling);
    detail::GuideTable guide(d.cumulative);

    PhotonCountTrace trace;
    trace.counts.resize(request.count);
    trace.source_model = d.source_model;

    // Chunked loop: the partitioning has no effect on the output because
    // each variate depends only on its absolute index.
    for (std::uint64_t start = 0; start < request.count;
         start += request.chunk_size)
    {
        std::uint64_t end
            = std::min(request.count, start + request.chunk_size);
        for (std::uint64_t i = start; i < end; ++i)
        {
            double u = rng.uniform_open01(i);
            trace.counts[i]
                = d.support_min
                  + static_cast<std::int64_t>(guide.invert(u));
        }
    }
    return trace;
}

//---------------------------------------------------------------------------//
// Empirical summaries
//---------------------------------------------------------------------------//

/// Relative frequency of each distinct value in a sequence.
template<class T>
std::map<T, double> empirical_pmf(std::vector<T> const& values)
{
    if (values.empty())
        throw std::invalid_argument("empirical_pmf: empty input");
    std::unordered_map<T, std::uint64_t> counts;
    counts.reserve(1024);
    for (T const& v : values)
        ++counts[v];
    std::map<T, double> freq;
    double n = static_cast<double>(values.size());
    for (auto const& [value, count] : counts)
        freq[value] = static_cast<double>(count) / n;
    return freq;
}

/// Relative frequency of fixed-width bins floor((value - origin) / width).
template<class T>
std::map<std::int64_t, double>
binned_pmf(std::vector<T> const& values, double width, double origin = 0.0)
{
    if (values.empty())
        throw std::invalid_argument("binned_pmf: empty input");
    if (!(std::isfinite(width) && width > 0.0))
        throw std::domain_error("binned_pmf: width must be positive");
    std::unordered_map<std::int64_t, std::uint64_t> counts;
    counts.reserve(1024);
    for (T const& v : values)
    {
        auto bin = static_cast<std::int64_t>(
            std::floor((static_cast<double>(v) - origin) / width));
        ++counts[bin];
    }
    std::map<std::int64_t, double> freq;
    double n = static_cast<double>(values.size());
    for (auto const& [bin, count] : counts)
        freq[bin] = static_cast<double>(count) / n;
    return freq;
}

}  // namespace asekit
