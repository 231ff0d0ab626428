// Copyright 2026 the asekit developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "detection_chain.hpp"
#include "entropy_quant.hpp"
#include "io.hpp"
#include "photon_statistics.hpp"
#include "sampling.hpp"
#include "stats.hpp"
#include "version.hpp"

namespace asekit {

//---------------------------------------------------------------------------//
// Configuration
//---------------------------------------------------------------------------//

/// Declarative description of one simulated acquisition and certification
/// run, loadable from a `key = value` file.
struct ExperimentConfig
{
    OpticalSetup setup;

    // Electronic noise: synthetic Gaussian parameters or a measured trace.
    std::string noise_kind = "synthetic";  //!< "synthetic" or "measured"
    double noise_mean_v = 0.0;
    double noise_sigma_v = 0.0;
    std::uint64_t noise_seed = 0;
    std::string noise_trace_file;

    // Detector response: a calibration file or an inline slope.
    std::string calibration_file;
    double calibration_volts_per_photon = 0.0;

    std::uint64_t sample_count = 10000000;
    std::uint64_t master_seed = 1;
    double tail_tolerance = 1e-12;
    double sample_rate_hz = kDefaultSampleRateHz;
    double delta_v0_v = kDefaultDeltaV0V;
    /// Emulated digitizer resolution in delta_v0 steps; 0 disables
    /// quantization and the resolution is estimated from the trace instead.
    std::int64_t dso_resolution_m = 0;
    /// Optional extra plotting histogram with this fixed bin width [V];
    /// 0 disables it.
    double hist_bin_width_v = 0.0;
    std::string out_dir = "out";

    void validate() const
    {
        setup.validate();
        auto require = [](bool ok, char const* what) {
            if (!ok)
                throw std::domain_error(std::string("ExperimentConfig: ")
                                        + what);
        };
        require(noise_kind == "synthetic" || noise_kind == "measured",
                "noise_kind must be 'synthetic' or 'measured'");
        if (noise_kind == "synthetic")
        {
            require(std::isfinite(noise_mean_v)
                        && std::isfinite(noise_sigma_v)
                        && noise_sigma_v >= 0.0,
                    "synthetic noise needs finite noise_mean_v and "
                    "non-negative noise_sigma_v");
        }
        else
        {
            require(!noise_trace_file.empty(),
                    "measured noise needs noise_trace_file");
        }
        require(!calibration_file.empty()
                    || (std::isfinite(calibration_volts_per_photon)
                        && calibration_volts_per_photon > 0.0),
                "need calibration_file or positive "
                "calibration_volts_per_photon");
        require(sample_count >= 1, "sample_count must be >= 1");
        require(tail_tolerance > 0.0 && tail_tolerance <= 1e-6,
                "tail_tolerance must be in (0, 1e-6]");
        require(std::isfinite(sample_rate_hz) && sample_rate_hz > 0.0,
                "sample_rate_hz must be positive");
        require(std::isfinite(delta_v0_v) && delta_v0_v > 0.0,
                "delta_v0_v must be positive");
        require(dso_resolution_m >= 0, "dso_resolution_m must be >= 0");
        require(std::isfinite(hist_bin_width_v) && hist_bin_width_v >= 0.0,
                "hist_bin_width_v must be non-negative");
        require(!out_dir.empty(), "out_dir must not be empty");
    }

    /// Canonical one-line-per-key rendering: the hashed identity of the
    /// run.  Keys appear in fixed order with 17-significant-digit numbers,
    /// so equal configurations hash equal regardless of input formatting.
    /// The output directory is deliberately excluded: it does not affect
    /// any computed result, and runs of the same experiment into different
    /// directories must be recognizable as the same experiment.
    std::string canonical_string() const
    {
        std::ostringstream out;
        out << "optical_bandwidth_hz = "
            << format_double(setup.optical_bandwidth_hz) << '\n'
            << "electrical_bandwidth_hz = "
            << format_double(setup.electrical_bandwidth_hz) << '\n'
            << "polarization_degeneracy = " << setup.polarization_degeneracy
            << '\n'
            << "optical_power_w = " << format_double(setup.optical_power_w)
            << '\n'
            << "center_wavelength_m = "
            << format_double(setup.center_wavelength_m) << '\n'
            << "noise_kind = " << noise_kind << '\n'
            << "noise_mean_v = " << format_double(noise_mean_v) << '\n'
            << "noise_sigma_v = " << format_double(noise_sigma_v) << '\n'
            << "noise_seed = " << noise_seed << '\n'
            << "noise_trace_file = " << noise_trace_file << '\n'
            << "calibration_file = " << calibration_file << '\n'
            << "calibration_volts_per_photon = "
            << format_double(calibration_volts_per_photon) << '\n'
            << "sample_count = " << sample_count << '\n'
            << "master_seed = " << master_seed << '\n'
            << "tail_tolerance = " << format_double(tail_tolerance) << '\n'
            << "sample_rate_hz = " << format_double(sample_rate_hz) << '\n'
            << "delta_v0_v = " << format_double(delta_v0_v) << '\n'
            << "dso_resolution_m = " << dso_resolution_m << '\n'
            << "hist_bin_width_v = " << format_double(hist_bin_width_v)
            << '\n';
        return out.str();
    }

    std::uint64_t config_hash() const
    {
        return fnv1a64(this->canonical_string());
    }

    static ExperimentConfig from_document(KeyValueDocument const& doc)
    {
        ExperimentConfig c;
        c.setup.optical_bandwidth_hz = doc.number("optical_bandwidth_hz");
        c.setup.electrical_bandwidth_hz
            = doc.number("electrical_bandwidth_hz");
        if (doc.contains("polarization_degeneracy"))
            c.setup.polarization_degeneracy = static_cast<int>(
                doc.integer("polarization_degeneracy"));
        c.setup.optical_power_w = doc.number("optical_power_w");
        if (doc.contains("center_wavelength_m"))
            c.setup.center_wavelength_m = doc.number("center_wavelength_m");

        if (doc.contains("noise_kind"))
            c.noise_kind = doc.at("noise_kind");
        if (doc.contains("noise_mean_v"))
            c.noise_mean_v = doc.number("noise_mean_v");
        if (doc.contains("noise_sigma_v"))
            c.noise_sigma_v = doc.number("noise_sigma_v");
        if (doc.contains("noise_seed"))
            c.noise_seed
                = static_cast<std::uint64_t>(doc.integer("noise_seed"));
        if (doc.contains("noise_trace_file"))
            c.noise_trace_file = doc.at("noise_trace_file");

        if (doc.contains("calibration_file"))
            c.calibration_file = doc.at("calibration_file");
        if (doc.contains("calibration_volts_per_photon"))
            c.calibration_volts_per_photon
                = doc.number("calibration_volts_per_photon");

        if (doc.contains("sample_count"))
            c.sample_count
                = static_cast<std::uint64_t>(doc.integer("sample_count"));
        if (doc.contains("master_seed"))
            c.master_seed
                = static_cast<std::uint64_t>(doc.integer("master_seed"));
        if (doc.contains("tail_tolerance"))
            c.tail_tolerance = doc.number("tail_tolerance");
        if (doc.contains("sample_rate_hz"))
            c.sample_rate_hz = doc.number("sample_rate_hz");
        if (doc.contains("delta_v0_v"))
            c.delta_v0_v = doc.number("delta_v0_v");
        if (doc.contains("dso_resolution_m"))
            c.dso_resolution_m = doc.integer("dso_resolution_m");
        if (doc.contains("hist_bin_width_v"))
            c.hist_bin_width_v = doc.number("hist_bin_width_v");
        if (doc.contains("out_dir"))
            c.out_dir = doc.at("out_dir");
        return c;
    }

    static ExperimentConfig load(std::filesystem::path const& path)
    {
        return from_document(load_key_values(path));
    }

    static ExperimentConfig parse(std::string const& text)
    {
        return from_document(parse_key_values(text));
    }
};

//---------------------------------------------------------------------------//
// Run artifacts
//---------------------------------------------------------------------------//

struct ExperimentResult
{
    ModalModel model;
    double volts_per_photon = 0.0;
    VoltageTrace trace;
    EntropyReport report;
    std::filesystem::path out_dir;
};

namespace detail {

inline std::vector<std::string>
provenance_comments(ExperimentConfig const& config)
{
    return {
        std::string("asekit v") + std::string(kVersion),
        "config=" + hex64(config.config_hash()) + " seed="
            + std::to_string(config.master_seed),
    };
}

}  // namespace detail

/// Execute a full configured run and write its artifacts.
///
/// Inputs are validated before anything touches the filesystem.  The
/// written set is: the final voltage trace, the theoretical photon pmf, the
/// empirical voltage histogram, the merged (resolution-cell) distribution,
/// and the entropy report.  Every file carries the tool version, config
/// hash, and master seed in comment lines; wall-clock metadata goes to a
/// separate run_meta.txt so the scientific outputs stay byte-identical for
/// equal (config, seed) pairs.
inline ExperimentResult run_experiment(ExperimentConfig const& config)
{
    namespace fs = std::filesystem;
    auto t0 = std::chrono::steady_clock::now();
    config.validate();

    // Resolve the detector calibration.
    DetectionCalibration calibration;
    if (!config.calibration_file.empty())
        calibration = calibrate_mapping(
            read_calibration_csv(fs::path(config.calibration_file)));
    else
        calibration = make_calibration(config.calibration_volts_per_photon);

    // Resolve the electronic noise source.
    ElectronicNoiseSource noise;
    if (config.noise_kind == "measured")
        noise = ElectronicNoiseSource::from_trace(
            read_trace_csv(fs::path(config.noise_trace_file)),
            config.noise_seed);
    else
        noise = ElectronicNoiseSource::synthetic(
            config.noise_mean_v, config.noise_sigma_v, config.noise_seed);

    ExperimentResult result;
    result.out_dir = fs::path(config.out_dir);
    result.volts_per_photon = calibration.volts_per_photon;
    result.model = modal_model(config.setup);

    PhotonDistribution dist
        = build_distribution(result.model, config.tail_tolerance);

    SampleRequest request;
    request.count = config.sample_count;
    request.master_seed = config.master_seed;
    PhotonCountTrace counts = inverse_transform_sample(dist, request);

    VoltageTrace volts
        = photons_to_voltage(counts, calibration, config.sample_rate_hz);
    volts.label = "simulated";
    result.trace = add_electronic_noise(volts, noise, config.master_seed);

    // Determine the resolution: emulate a coarse digitizer when configured,
    // otherwise estimate from the acquired voltage spacing.
    ResolutionEstimate resolution;
    if (config.dso_resolution_m > 0)
    {
        double cell = static_cast<double>(config.dso_resolution_m)
                      * config.delta_v0_v;
        result.trace = quantize_trace(result.trace, cell);
        resolution.resolution_m = config.dso_resolution_m;
        resolution.delta_v0_v = config.delta_v0_v;
        resolution.mean_unique_gap_v = cell;
    }
    else
    {
        resolution = estimate_resolution(result.trace, config.delta_v0_v);
    }

    result.report = assemble_report(dist, result.trace, resolution);

    // Write artifacts (atomically, with provenance headers).
    auto comments = detail::provenance_comments(config);
    fs::path dir = result.out_dir;
    write_trace_csv(dir / "trace.csv", result.trace, comments);

    atomic_write(dir / "theoretical_pmf.csv", [&](std::ostream& out) {
        for (auto const& c : comments)
            out << "# " << c << '\n';
        out << "value,frequency\n";
        for (std::size_t i = 0; i < dist.probabilities.size(); ++i)
        {
            out << dist.support_min + static_cast<std::int64_t>(i) << ','
                << format_double(dist.probabilities[i]) << '\n';
        }
    });

    atomic_write(dir / "empirical_hist.csv", [&](std::ostream& out) {
        for (auto const& c : comments)
            out << "# " << c << '\n';
        out << "value,frequency\n";
        for (auto const& [value, freq] : empirical_pmf(result.trace.samples))
            out << format_double(value) << ',' << format_double(freq)
                << '\n';
    });

    if (config.hist_bin_width_v > 0.0)
    {
        // Downsampled plotting copy at a fixed bin width.
        atomic_write(dir / "empirical_hist_binned.csv",
                     [&](std::ostream& out) {
                         for (auto const& c : comments)
                             out << "# " << c << '\n';
                         out << "value,frequency\n";
                         for (auto const& [bin, freq] :
                              binned_pmf(result.trace.samples,
                                         config.hist_bin_width_v))
                             out << format_double(
                                 static_cast<double>(bin)
                                 * config.hist_bin_width_v)
                                 << ',' << format_double(freq) << '\n';
                     });
    }

    atomic_write(dir / "merged_distribution.csv", [&](std::ostream& out) {
        MergedDistribution merged
            = merge_distribution(dist, resolution.resolution_m);
        double cell = static_cast<double>(resolution.resolution_m)
                      * resolution.delta_v0_v;
        for (auto const& c : comments)
            out << "# " << c << '\n';
        out << "level,voltage_v,probability\n";
        for (std::size_t i = 0; i < merged.probabilities.size(); ++i)
        {
            std::int64_t level
                = merged.first_level + static_cast<std::int64_t>(i);
            out << level << ','
                << format_double(static_cast<double>(level) * cell) << ','
                << format_double(merged.probabilities[i]) << '\n';
        }
    });

    atomic_write_text(dir / "report.txt",
                      format_report(result.report, comments));

    auto t1 = std::chrono::steady_clock::now();
    atomic_write(dir / "run_meta.txt", [&](std::ostream& out) {
        auto wall = std::chrono::system_clock::now();
        auto secs = std::chrono::duration_cast<std::chrono::milliseconds>(
                        t1 - t0)
                        .count();
        out << "finished_unix_ms = "
            << std::chrono::duration_cast<std::chrono::milliseconds>(
                   wall.time_since_epoch())
                   .count()
            << '\n'
            << "elapsed_ms = " << secs << '\n'
            << "tool_version = " << kVersion << '\n';
    });

    return result;
}

//---------------------------------------------------------------------------//
// Mode-number surface
//---------------------------------------------------------------------------//

struct SurfacePoint
{
    double bandwidth_ratio = 0.0;
    int polarization_degeneracy = 1;
    double mode_number = 0.0;
};

/// Tabulate the mode-number law on a logarithmic bandwidth-ratio grid for
/// each requested polarization degeneracy.
inline std::vector<SurfacePoint>
emit_mode_number_surface(double ratio_min,
                         double ratio_max,
                         std::size_t points,
                         std::span<int const> degeneracies)
{
    if (!(std::isfinite(ratio_min) && std::isfinite(ratio_max)
          && ratio_min > 0.0 && ratio_max > ratio_min))
        throw std::domain_error(
            "emit_mode_number_surface: require 0 < ratio_min < ratio_max");
    if (points < 2)
        throw std::domain_error(
            "emit_mode_number_surface: need at least two grid points");
    if (degeneracies.empty())
        throw std::domain_error(
            "emit_mode_number_surface: no polarization degeneracies");
    for (int s : degeneracies)
        if (s != 1 && s != 2)
            throw std::domain_error("emit_mode_number_surface: "
                                    "polarization degeneracy must be 1 or "
                                    "2");

    double log_min = std::log(ratio_min);
    double log_max = std::log(ratio_max);
    std::vector<SurfacePoint> surface;
    surface.reserve(points * degeneracies.size());
    for (int s : degeneracies)
    {
        for (std::size_t i = 0; i < points; ++i)
        {
            double t = static_cast<double>(i)
                       / static_cast<double>(points - 1);
            double r = std::exp(log_min + t * (log_max - log_min));
            SurfacePoint p;
            p.bandwidth_ratio = r;
            p.polarization_degeneracy = s;
            p.mode_number = mode_number_from_ratio(r, s);
            surface.push_back(p);
        }
    }
    return surface;
}

inline void write_surface_csv(std::ostream& out,
                              std::span<SurfacePoint const> surface,
                              std::vector<std::string> const& comments = {})
{
    for (auto const& c : comments)
        out << "# " << c << '\n';
    out << "ratio,polarization_degeneracy,mode_number\n";
    for (auto const& p : surface)
    {
        out << format_double(p.bandwidth_ratio) << ','
            << p.polarization_degeneracy << ','
            << format_double(p.mode_number) << '\n';
    }
}

//---------------------------------------------------------------------------//
// Trace comparison
//---------------------------------------------------------------------------//

struct DistanceReport
{
    double total_variation = 0.0;
    double chi_square = 0.0;
    double degrees_of_freedom = 0.0;
    double p_value = 1.0;
};

/// Histogram distance between two traces.
///
/// With bin_width = 0 each distinct voltage is its own cell; a positive
/// width pools voltages into cells floor(v / width).  The total variation
/// is symmetric; the chi-square treats trace a as the reference model for
/// the counts observed in trace b.
inline DistanceReport compare_traces(VoltageTrace const& a,
                                     VoltageTrace const& b,
                                     double bin_width = 0.0)
{
    if (a.samples.empty() || b.samples.empty())
        throw std::invalid_argument("compare_traces: empty trace");
    if (!(std::isfinite(bin_width) && bin_width >= 0.0))
        throw std::domain_error(
            "compare_traces: bin_width must be non-negative");

    DistanceReport report;
    std::vector<double> ref_probs;
    std::vector<std::uint64_t> obs_counts;
    if (bin_width == 0.0)
    {
        auto pa = empirical_pmf(a.samples);
        auto pb = empirical_pmf(b.samples);
        report.total_variation = total_variation(pa, pb);
        for (auto const& [key, pav] : pa)
        {
            ref_probs.push_back(pav);
            auto it = pb.find(key);
            obs_counts.push_back(
                it == pb.end()
                    ? 0
                    : static_cast<std::uint64_t>(std::llround(
                          it->second
                          * static_cast<double>(b.samples.size()))));
        }
    }
    else
    {
        auto pa = binned_pmf(a.samples, bin_width);
        auto pb = binned_pmf(b.samples, bin_width);
        report.total_variation = total_variation(pa, pb);
        for (auto const& [key, pav] : pa)
        {
            ref_probs.push_back(pav);
            auto it = pb.find(key);
            obs_counts.push_back(
                it == pb.end()
                    ? 0
                    : static_cast<std::uint64_t>(std::llround(
                          it->second
                          * static_cast<double>(b.samples.size()))));
        }
    }

    // Degenerate layouts the chi-square machinery cannot grade: no overlap
    // at all is maximal incompatibility, and a single shared cell leaves no
    // degrees of freedom (pass iff all observed mass lies in it).
    std::uint64_t observed_total = 0;
    for (auto c : obs_counts)
        observed_total += c;
    if (observed_total == 0)
    {
        report.chi_square = std::numeric_limits<double>::infinity();
        report.degrees_of_freedom = 0.0;
        report.p_value = 0.0;
        return report;
    }
    if (ref_probs.size() < 2)
    {
        bool covered = observed_total == b.samples.size();
        report.chi_square
            = covered ? 0.0 : std::numeric_limits<double>::infinity();
        report.degrees_of_freedom = 0.0;
        report.p_value = covered ? 1.0 : 0.0;
        return report;
    }

    try
    {
        GofResult gof = chi_square_gof(obs_counts, ref_probs);
        report.chi_square = gof.statistic;
        report.degrees_of_freedom = gof.degrees_of_freedom;
        report.p_value = gof.p_value;
    }
    catch (std::domain_error const&)
    {
        // Not enough expected mass to form two merged comparison cells
        // (tiny sample, or a reference dominated by a single level).
        // Grade the unmerged Pearson statistic instead so that exact
        // agreement still reports zero distance; the asymptotic p-value
        // is approximate in this regime.
        double total = static_cast<double>(observed_total);
        double prob_sum = 0.0;
        for (double p : ref_probs)
            prob_sum += p;
        double stat = 0.0;
        for (std::size_t i = 0; i < ref_probs.size(); ++i)
        {
            double expected = ref_probs[i] / prob_sum * total;
            double diff = static_cast<double>(obs_counts[i]) - expected;
            stat += diff * diff / expected;
        }
        report.chi_square = stat;
        report.degrees_of_freedom
            = static_cast<double>(ref_probs.size() - 1);
        report.p_value = chi_square_pvalue(stat,
                                           report.degrees_of_freedom);
    }
    return report;
}

}  // namespace asekit
