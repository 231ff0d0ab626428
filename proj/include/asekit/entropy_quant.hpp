// Copyright 2026 the asekit developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "detection_chain.hpp"
#include "io.hpp"
#include "photon_statistics.hpp"
#include "stats.hpp"

namespace asekit {

//---------------------------------------------------------------------------//
// Types
//---------------------------------------------------------------------------//

/// Smallest discernible voltage step of the modeled digitizer.
inline constexpr double kDefaultDeltaV0V = 2.968e-8;

/// Result of inferring an effective resolution from acquired data.
struct ResolutionEstimate
{
    std::int64_t resolution_m = 1;  //!< discernible step in units of delta_v0
    double delta_v0_v = kDefaultDeltaV0V;
    double mean_unique_gap_v = 0.0;  //!< mean spacing of distinct voltages
};

/// Photon-level distribution coarsened to resolution cells.
struct MergedDistribution
{
    std::int64_t first_level = 0;  //!< level index of probabilities[0]
    std::int64_t merge_m = 1;  //!< counts per level
    std::int64_t anchor_offset = 0;  //!< shift of the level boundaries
    std::vector<double> probabilities;
};

/// Certified and empirical entropy figures for one acquisition.
struct EntropyReport
{
    double h_theoretical_bits = 0.0;  //!< min-entropy at full resolution
    double h_merged_bits = 0.0;  //!< min-entropy at detector resolution
    double h_empirical_bits = 0.0;  //!< observed min-entropy of the trace
    ResolutionEstimate resolution;
    double deviation = 0.0;  //!< (merged - empirical) / empirical
    double sample_rate_hz = kDefaultSampleRateHz;
    double rate_bits_per_s = 0.0;  //!< merged bits times sample rate
};

//---------------------------------------------------------------------------//
// Min-entropy
//---------------------------------------------------------------------------//

/// Min-entropy -log2(max p) of a normalized probability vector.
inline double min_entropy(std::span<double const> probabilities)
{
    if (probabilities.empty())
        throw std::invalid_argument("min_entropy: empty distribution");
    NeumaierSum total;
    double max_p = 0.0;
    for (double p : probabilities)
    {
        if (!(p >= 0.0))
            throw std::domain_error(
                "min_entropy: probabilities must be non-negative");
        total.add(p);
        max_p = std::max(max_p, p);
    }
    if (std::abs(total.value() - 1.0) > 1e-9)
        throw std::domain_error("min_entropy: probabilities must sum to 1");
    return -std::log2(max_p);
}

inline double min_entropy(PhotonDistribution const& d)
{
    return min_entropy(std::span<double const>(d.probabilities));
}

inline double min_entropy(MergedDistribution const& d)
{
    return min_entropy(std::span<double const>(d.probabilities));
}

template<class Key>
double min_entropy(std::map<Key, double> const& pmf)
{
    std::vector<double> p;
    p.reserve(pmf.size());
    for (auto const& [k, v] : pmf)
        p.push_back(v);
    return min_entropy(std::span<double const>(p));
}

//---------------------------------------------------------------------------//
// Level merging
//---------------------------------------------------------------------------//

/// Coarsen a photon-number distribution to cells of m consecutive counts.
///
/// Level i covers counts [i*m + anchor_offset, (i+1)*m - 1 + anchor_offset]:
/// with the default offset the cell boundaries are anchored at count 0,
/// mirroring a digitizer whose code 0 sits at zero voltage.  m = 1 returns
/// the input probabilities unchanged.
inline MergedDistribution merge_distribution(PhotonDistribution const& d,
                                             std::int64_t m,
                                             std::int64_t anchor_offset = 0)
{
    if (m < 1)
        throw std::invalid_argument("merge_distribution: m must be >= 1");
    if (d.probabilities.empty())
        throw std::invalid_argument("merge_distribution: empty distribution");

    auto level_of = [&](std::int64_t n) {
        std::int64_t shifted = n - anchor_offset;
        // Floor division for possibly negative shifted values.
        std::int64_t q = shifted / m;
        if (shifted % m != 0 && shifted < 0)
            --q;
        return q;
    };

    MergedDistribution merged;
    merged.merge_m = m;
    merged.anchor_offset = anchor_offset;
    merged.first_level = level_of(d.support_min);
    std::int64_t last_level = level_of(d.support_max());
    merged.probabilities.assign(
        static_cast<std::size_t>(last_level - merged.first_level + 1), 0.0);

    for (std::size_t i = 0; i < d.probabilities.size(); ++i)
    {
        std::int64_t n = d.support_min + static_cast<std::int64_t>(i);
        auto idx = static_cast<std::size_t>(level_of(n) - merged.first_level);
        merged.probabilities[idx] += d.probabilities[i];
    }
    return merged;
}

//---------------------------------------------------------------------------//
// Resolution estimation
//---------------------------------------------------------------------------//

/// Infer the effective digitizer resolution from the spacing of distinct
/// voltages in a trace.
///
/// The mean gap over all consecutive distinct sorted values is divided by
/// delta_v0 and rounded up to an integer number of base steps.  A relative
/// guard of 1e-9 is subtracted before the ceiling so that a gap which is
/// mathematically an exact multiple of delta_v0 but lands one rounding
/// error above it does not inflate m by one.  An optional trimmed mode
/// drops the given fraction of the smallest and largest gaps first.
inline ResolutionEstimate estimate_resolution(VoltageTrace const& trace,
                                              double delta_v0
                                              = kDefaultDeltaV0V,
                                              double trim_fraction = 0.0)
{
    if (!(std::isfinite(delta_v0) && delta_v0 > 0.0))
        throw std::domain_error(
            "estimate_resolution: delta_v0 must be positive");
    if (!(trim_fraction >= 0.0 && trim_fraction < 0.5))
        throw std::domain_error(
            "estimate_resolution: trim_fraction must be in [0, 0.5)");

    std::vector<double> unique = trace.samples;
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    if (unique.size() < 2)
        throw std::domain_error(
            "estimate_resolution: need at least two distinct voltages");

    double mean_gap = 0.0;
    if (trim_fraction == 0.0)
    {
        // The gaps telescope: their mean is (max - min) / (count - 1).
        mean_gap = (unique.back() - unique.front())
                   / static_cast<double>(unique.size() - 1);
    }
    else
    {
        std::vector<double> gaps(unique.size() - 1);
        for (std::size_t i = 0; i + 1 < unique.size(); ++i)
            gaps[i] = unique[i + 1] - unique[i];
        std::sort(gaps.begin(), gaps.end());
        auto drop = static_cast<std::size_t>(
            trim_fraction * static_cast<double>(gaps.size()));
        if (gaps.size() <= 2 * drop)
            throw std::domain_error(
                "estimate_resolution: trim fraction leaves no gaps");
        NeumaierSum s;
        for (std::size_t i = drop; i < gaps.size() - drop; ++i)
            s.add(gaps[i]);
        mean_gap = s.value()
                   / static_cast<double>(gaps.size() - 2 * drop);
    }

    double ratio = mean_gap / delta_v0;
    auto m = static_cast<std::int64_t>(std::ceil(ratio * (1.0 - 1e-9)));

    ResolutionEstimate est;
    est.resolution_m = std::max<std::int64_t>(1, m);
    est.delta_v0_v = delta_v0;
    est.mean_unique_gap_v = mean_gap;
    return est;
}

//---------------------------------------------------------------------------//
// Empirical entropy and trace shaping
//---------------------------------------------------------------------------//

/// Observed min-entropy -log2(max frequency) over the distinct values of a
/// trace.
inline double empirical_min_entropy(VoltageTrace const& trace)
{
    if (trace.samples.empty())
        throw std::invalid_argument("empirical_min_entropy: empty trace");
    std::unordered_map<double, std::uint64_t> counts;
    counts.reserve(1u << 14);
    for (double v : trace.samples)
        ++counts[v];
    std::uint64_t max_count = 0;
    for (auto const& [value, count] : counts)
        max_count = std::max(max_count, count);
    return -std::log2(static_cast<double>(max_count)
                      / static_cast<double>(trace.samples.size()));
}

/// Emulate a coarser digitizer: snap each voltage down to a multiple of the
/// given cell width.
inline VoltageTrace quantize_trace(VoltageTrace const& trace,
                                   double cell_width_v)
{
    if (!(std::isfinite(cell_width_v) && cell_width_v > 0.0))
        throw std::domain_error(
            "quantize_trace: cell width must be positive");
    VoltageTrace out;
    out.sample_rate_hz = trace.sample_rate_hz;
    out.label = trace.label;
    out.samples.resize(trace.samples.size());
    for (std::size_t i = 0; i < trace.samples.size(); ++i)
        out.samples[i] = std::floor(trace.samples[i] / cell_width_v)
                         * cell_width_v;
    return out;
}

//---------------------------------------------------------------------------//
// Gaussian reference fit
//---------------------------------------------------------------------------//

struct GaussianFit
{
    double mean_v = 0.0;
    double std_dev_v = 0.0;
    /// Total variation between the binned trace and the fitted Gaussian.
    double fit_distance = 0.0;
};

/// Moment-matched Gaussian comparison: how close is the voltage histogram
/// to a normal distribution with the trace's sample mean and standard
/// deviation?
///
/// The distance is the total variation over equal-width bins chosen by
/// Scott's rule (clamped to [16, 1024] bins), plus the Gaussian mass
/// outside the data range, where the empirical histogram is zero.
inline GaussianFit gaussian_fit(VoltageTrace const& trace)
{
    constexpr std::size_t min_samples = 1000;
    if (trace.samples.size() < min_samples)
        throw std::invalid_argument(
            "gaussian_fit: need at least 1000 samples");

    Moments mom;
    for (double v : trace.samples)
        mom.add(v);
    double mean = mom.mean();
    double sd = mom.std_dev();
    if (!(sd > 0.0))
        throw std::domain_error(
            "gaussian_fit: trace is degenerate (zero variance)");

    double lo = *std::min_element(trace.samples.begin(), trace.samples.end());
    double hi = *std::max_element(trace.samples.begin(), trace.samples.end());
    double n = static_cast<double>(trace.samples.size());
    double scott = 3.49 * sd / std::cbrt(n);
    auto bins = static_cast<std::size_t>(std::ceil((hi - lo) / scott));
    bins = std::clamp<std::size_t>(bins, 16, 1024);
    double width = (hi - lo) / static_cast<double>(bins);

    std::vector<double> observed(bins, 0.0);
    for (double v : trace.samples)
    {
        auto b = static_cast<std::size_t>((v - lo) / width);
        if (b >= bins)
            b = bins - 1;  // right edge belongs to the last bin
        observed[b] += 1.0 / n;
    }

    auto z = [&](double x) { return (x - mean) / sd; };
    NeumaierSum l1;
    double prev_cdf = normal_cdf(z(lo));
    for (std::size_t b = 0; b < bins; ++b)
    {
        double edge = lo + width * static_cast<double>(b + 1);
        double cdf = (b + 1 == bins) ? normal_cdf(z(hi)) : normal_cdf(z(edge));
        l1.add(std::abs(observed[b] - (cdf - prev_cdf)));
        prev_cdf = cdf;
    }
    // Mass the Gaussian places outside [lo, hi], where the data has none.
    l1.add(normal_cdf(z(lo)));
    l1.add(1.0 - normal_cdf(z(hi)));

    GaussianFit fit;
    fit.mean_v = mean;
    fit.std_dev_v = sd;
    fit.fit_distance = 0.5 * l1.value();
    return fit;
}

//---------------------------------------------------------------------------//
// Report assembly
//---------------------------------------------------------------------------//

/// Assemble the entropy report from a theoretical distribution, an acquired
/// trace, and an already-determined resolution.
inline EntropyReport assemble_report(PhotonDistribution const& d,
                                     VoltageTrace const& trace,
                                     ResolutionEstimate const& resolution)
{
    EntropyReport report;
    report.h_theoretical_bits = min_entropy(d);
    report.resolution = resolution;
    MergedDistribution merged
        = merge_distribution(d, resolution.resolution_m);
    report.h_merged_bits = min_entropy(merged);
    report.h_empirical_bits = empirical_min_entropy(trace);
    if (report.h_empirical_bits == 0.0)
        throw std::domain_error(
            "assemble_report: empirical min-entropy is zero (constant "
            "trace)");
    report.deviation = (report.h_merged_bits - report.h_empirical_bits)
                       / report.h_empirical_bits;
    report.sample_rate_hz = trace.sample_rate_hz;
    report.rate_bits_per_s = report.h_merged_bits * trace.sample_rate_hz;
    return report;
}

/// Full certification chain: estimate the resolution from the trace, merge
/// the theoretical distribution at that resolution, and compare against the
/// observed entropy.
inline EntropyReport build_report(PhotonDistribution const& d,
                                  VoltageTrace const& trace,
                                  double delta_v0 = kDefaultDeltaV0V)
{
    return assemble_report(d, trace, estimate_resolution(trace, delta_v0));
}

//---------------------------------------------------------------------------//
// Report serialization
//---------------------------------------------------------------------------//

inline std::string format_report(EntropyReport const& report,
                                 std::vector<std::string> const& comments
                                 = {})
{
    std::string out;
    for (auto const& c : comments)
    {
        out += "# ";
        out += c;
        out += '\n';
    }
    auto kv = [&out](char const* key, std::string const& value) {
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    };
    kv("h_theoretical_bits", format_double(report.h_theoretical_bits));
    kv("h_merged_bits", format_double(report.h_merged_bits));
    kv("h_empirical_bits", format_double(report.h_empirical_bits));
    kv("resolution_m", std::to_string(report.resolution.resolution_m));
    kv("delta_v0_v", format_double(report.resolution.delta_v0_v));
    kv("deviation", format_double(report.deviation));
    kv("rate_bits_per_s", format_double(report.rate_bits_per_s));
    return out;
}

inline EntropyReport parse_report(std::string const& text)
{
    KeyValueDocument doc = parse_key_values(text);
    EntropyReport r;
    r.h_theoretical_bits = doc.number("h_theoretical_bits");
    r.h_merged_bits = doc.number("h_merged_bits");
    r.h_empirical_bits = doc.number("h_empirical_bits");
    r.resolution.resolution_m = doc.integer("resolution_m");
    r.resolution.delta_v0_v = doc.number("delta_v0_v");
    r.deviation = doc.number("deviation");
    r.rate_bits_per_s = doc.number("rate_bits_per_s");
    if (r.h_merged_bits != 0.0)
        r.sample_rate_hz = r.rate_bits_per_s / r.h_merged_bits;
    return r;
}

}  // namespace asekit
