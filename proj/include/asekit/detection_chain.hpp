// Copyright 2026 the asekit developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "io.hpp"
#include "photon_statistics.hpp"
#include "rng.hpp"
#include "sampling.hpp"

namespace asekit {

//---------------------------------------------------------------------------//
// Types
//---------------------------------------------------------------------------//

/// Default digitizer rate of the modeled acquisition (10 GSa/s).
inline constexpr double kDefaultSampleRateHz = 1e10;

/// One point of a detector response measurement.
struct CalibrationPoint
{
    double photon_count = 0.0;
    double mean_voltage_v = 0.0;
};

/// Linear photon-count-to-voltage mapping through the origin.
struct DetectionCalibration
{
    double volts_per_photon = 0.0;
    /// Largest |v - c*n| / v over the fit points (0 for an inline slope).
    double max_relative_residual = 0.0;
    std::vector<CalibrationPoint> points;
};

/// A sequence of detector voltage samples at a fixed digitizer rate.
struct VoltageTrace
{
    std::vector<double> samples;
    double sample_rate_hz = kDefaultSampleRateHz;
    std::string label;
};

/// Electronic noise added by the detection and acquisition electronics,
/// either synthesized as Gaussian samples or replayed from a measured
/// dark trace.
struct ElectronicNoiseSource
{
    enum class Kind
    {
        synthetic_gaussian,
        measured_trace,
    };

    Kind kind = Kind::synthetic_gaussian;
    double mean_v = 0.0;
    double std_dev_v = 0.0;
    /// Extra entropy decorrelating this source from the photon stream.
    std::uint64_t seed = 0;
    VoltageTrace measured;

    static ElectronicNoiseSource
    synthetic(double mean_v, double std_dev_v, std::uint64_t seed = 0)
    {
        ElectronicNoiseSource s;
        s.kind = Kind::synthetic_gaussian;
        s.mean_v = mean_v;
        s.std_dev_v = std_dev_v;
        s.seed = seed;
        return s;
    }

    static ElectronicNoiseSource from_trace(VoltageTrace trace,
                                            std::uint64_t seed = 0)
    {
        ElectronicNoiseSource s;
        s.kind = Kind::measured_trace;
        s.measured = std::move(trace);
        s.seed = seed;
        return s;
    }

    void validate() const
    {
        if (kind == Kind::synthetic_gaussian)
        {
            if (!(std::isfinite(mean_v) && std::isfinite(std_dev_v)
                  && std_dev_v >= 0.0))
                throw std::domain_error("ElectronicNoiseSource: synthetic "
                                        "noise needs finite mean and "
                                        "non-negative std dev");
        }
        else if (measured.samples.empty())
        {
            throw std::domain_error("ElectronicNoiseSource: measured noise "
                                    "trace is empty");
        }
    }
};

//---------------------------------------------------------------------------//
// Calibration
//---------------------------------------------------------------------------//

/// Fit the through-origin least-squares slope c minimizing
/// sum (v_i - c n_i)^2, i.e. c = sum(n v) / sum(n^2).
inline DetectionCalibration
calibrate_mapping(std::span<CalibrationPoint const> points)
{
    if (points.empty())
        throw std::invalid_argument("calibrate_mapping: no points");
    double sum_nv = 0.0;
    double sum_nn = 0.0;
    for (auto const& p : points)
    {
        if (!(std::isfinite(p.photon_count) && p.photon_count > 0.0))
            throw std::domain_error(
                "calibrate_mapping: photon counts must be positive");
        if (!(std::isfinite(p.mean_voltage_v) && p.mean_voltage_v > 0.0))
            throw std::domain_error(
                "calibrate_mapping: voltages must be positive");
        sum_nv += p.photon_count * p.mean_voltage_v;
        sum_nn += p.photon_count * p.photon_count;
    }

    DetectionCalibration cal;
    cal.volts_per_photon = sum_nv / sum_nn;
    cal.points.assign(points.begin(), points.end());
    for (auto const& p : points)
    {
        double fitted = cal.volts_per_photon * p.photon_count;
        double rel = std::abs(p.mean_voltage_v - fitted) / p.mean_voltage_v;
        cal.max_relative_residual = std::max(cal.max_relative_residual, rel);
    }
    return cal;
}

inline DetectionCalibration make_calibration(double volts_per_photon)
{
    if (!(std::isfinite(volts_per_photon) && volts_per_photon > 0.0))
        throw std::domain_error(
            "make_calibration: volts_per_photon must be positive");
    DetectionCalibration cal;
    cal.volts_per_photon = volts_per_photon;
    return cal;
}

//---------------------------------------------------------------------------//
// Signal chain
//---------------------------------------------------------------------------//

/// Map photon counts to ideal (noise-free) detector voltages v = c * n.
inline VoltageTrace
photons_to_voltage(PhotonCountTrace const& trace,
                   DetectionCalibration const& calibration,
                   double sample_rate_hz = kDefaultSampleRateHz)
{
    if (!(std::isfinite(calibration.volts_per_photon)
          && calibration.volts_per_photon > 0.0))
        throw std::domain_error(
            "photons_to_voltage: volts_per_photon must be positive");
    if (!(std::isfinite(sample_rate_hz) && sample_rate_hz > 0.0))
        throw std::domain_error(
            "photons_to_voltage: sample_rate_hz must be positive");

    VoltageTrace out;
    out.sample_rate_hz = sample_rate_hz;
    out.samples.resize(trace.counts.size());
    for (std::size_t i = 0; i < trace.counts.size(); ++i)
    {
        out.samples[i] = calibration.volts_per_photon
                         * static_cast<double>(trace.counts[i]);
    }
    return out;
}

/// Add electronic noise sample-by-sample.
///
/// Synthetic noise draws counter-based Gaussians keyed by (seed, noise
/// seed), so a zero-sigma zero-mean source returns the input unchanged.
/// A measured trace at least as long as the signal is applied by aligned
/// index; a shorter one is resampled with replacement (seeded, so
/// reproducible).
inline VoltageTrace add_electronic_noise(VoltageTrace const& trace,
                                         ElectronicNoiseSource const& noise,
                                         std::uint64_t seed)
{
    noise.validate();

    VoltageTrace out;
    out.sample_rate_hz = trace.sample_rate_hz;
    out.label = trace.label;
    out.samples.resize(trace.samples.size());

    CounterRng rng(seed ^ CounterRng::mix64(noise.seed),
                   static_cast<std::uint64_t>(RngStream::electronic_noise));

    if (noise.kind == ElectronicNoiseSource::Kind::synthetic_gaussian)
    {
        if (noise.std_dev_v == 0.0)
        {
            for (std::size_t i = 0; i < trace.samples.size(); ++i)
                out.samples[i] = trace.samples[i] + noise.mean_v;
        }
        else
        {
            for (std::size_t i = 0; i < trace.samples.size(); ++i)
            {
                out.samples[i] = trace.samples[i] + noise.mean_v
                                 + noise.std_dev_v * rng.normal(i);
            }
        }
    }
    else
    {
        auto const& src = noise.measured.samples;
        if (src.size() >= trace.samples.size())
        {
            for (std::size_t i = 0; i < trace.samples.size(); ++i)
                out.samples[i] = trace.samples[i] + src[i];
        }
        else
        {
            // Resample with replacement to cover the longer signal.
            double n = static_cast<double>(src.size());
            for (std::size_t i = 0; i < trace.samples.size(); ++i)
            {
                auto idx = static_cast<std::size_t>(rng.uniform_open01(i)
                                                    * n);
                if (idx >= src.size())
                    idx = src.size() - 1;
                out.samples[i] = trace.samples[i] + src[idx];
            }
        }
    }
    return out;
}

/// Minimum measured-noise length accepted by the end-to-end simulation.
inline constexpr std::size_t kMinMeasuredNoiseSamples = 10000;

/// Full simulation pipeline: optical setup -> modal model -> photon pmf ->
/// sampled counts -> voltages -> electronic noise.
inline VoltageTrace
simulate_ase_experiment(OpticalSetup const& setup,
                        DetectionCalibration const& calibration,
                        ElectronicNoiseSource const& noise,
                        std::uint64_t count,
                        std::uint64_t master_seed,
                        double tail_tolerance = 1e-12,
                        double sample_rate_hz = kDefaultSampleRateHz)
{
    setup.validate();
    noise.validate();
    if (noise.kind == ElectronicNoiseSource::Kind::measured_trace
        && noise.measured.samples.size() < kMinMeasuredNoiseSamples)
    {
        throw std::domain_error(
            "simulate_ase_experiment: measured noise trace must have at "
            "least "
            + std::to_string(kMinMeasuredNoiseSamples) + " samples");
    }

    ModalModel model = modal_model(setup);
    PhotonDistribution dist = build_distribution(model, tail_tolerance);

    SampleRequest request;
    request.count = count;
    request.master_seed = master_seed;
    PhotonCountTrace counts = inverse_transform_sample(dist, request);

    VoltageTrace volts
        = photons_to_voltage(counts, calibration, sample_rate_hz);
    volts.label = "simulated";
    return add_electronic_noise(volts, noise, master_seed);
}

//---------------------------------------------------------------------------//
// Trace and calibration CSV
//---------------------------------------------------------------------------//

/// Write a voltage trace: optional provenance comments, then a header
/// comment carrying the sample rate and label, then one voltage per line at
/// 17 significant digits (lossless round-trip).
inline void write_trace_csv(std::ostream& out,
                            VoltageTrace const& trace,
                            std::vector<std::string> const& comments = {})
{
    for (auto const& c : comments)
        out << "# " << c << '\n';
    out << "# sample_rate_hz=" << format_double(trace.sample_rate_hz)
        << " label=" << trace.label << '\n';
    for (double v : trace.samples)
        out << format_double(v) << '\n';
}

inline void write_trace_csv(std::filesystem::path const& path,
                            VoltageTrace const& trace,
                            std::vector<std::string> const& comments = {})
{
    atomic_write(path,
                 [&](std::ostream& out) { write_trace_csv(out, trace, comments); });
}

inline VoltageTrace read_trace_csv(std::istream& in, char const* what = "trace")
{
    VoltageTrace trace;
    bool have_rate = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        std::string_view sv = trim(line);
        if (sv.empty())
            continue;
        if (sv.front() == '#')
        {
            std::string_view body = trim(sv.substr(1));
            constexpr std::string_view rate_key = "sample_rate_hz=";
            if (body.substr(0, rate_key.size()) == rate_key)
            {
                std::string_view rest = body.substr(rate_key.size());
                auto label_pos = rest.find(" label=");
                if (label_pos == std::string_view::npos)
                    throw std::runtime_error(
                        std::string(what)
                        + ": malformed trace header (missing label)");
                trace.sample_rate_hz = parse_double(
                    trim(rest.substr(0, label_pos)), "sample_rate_hz");
                trace.label = std::string(
                    trim(rest.substr(label_pos + 7)));
                have_rate = true;
            }
            continue;
        }
        trace.samples.push_back(parse_double(sv, what));
    }
    if (!have_rate)
        throw std::runtime_error(std::string(what)
                                 + ": missing '# sample_rate_hz=... "
                                   "label=...' header");
    if (trace.samples.empty())
        throw std::runtime_error(std::string(what) + ": no samples");
    return trace;
}

inline VoltageTrace read_trace_csv(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open trace file " + path.string());
    return read_trace_csv(in, path.string().c_str());
}

/// Write calibration points: header `photon_count,mean_voltage_v`, one
/// point per line.
inline void
write_calibration_csv(std::ostream& out,
                      std::span<CalibrationPoint const> points,
                      std::vector<std::string> const& comments = {})
{
    for (auto const& c : comments)
        out << "# " << c << '\n';
    out << "photon_count,mean_voltage_v\n";
    for (auto const& p : points)
    {
        out << format_double(p.photon_count) << ','
            << format_double(p.mean_voltage_v) << '\n';
    }
}

inline void
write_calibration_csv(std::filesystem::path const& path,
                      std::span<CalibrationPoint const> points,
                      std::vector<std::string> const& comments = {})
{
    atomic_write(path, [&](std::ostream& out) {
        write_calibration_csv(out, points, comments);
    });
}

inline std::vector<CalibrationPoint> read_calibration_csv(std::istream& in)
{
    std::vector<CalibrationPoint> points;
    std::string line;
    bool have_header = false;
    std::size_t line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#')
            continue;
        if (!have_header)
        {
            if (sv != "photon_count,mean_voltage_v")
                throw std::runtime_error(
                    "calibration file: expected header "
                    "'photon_count,mean_voltage_v', got '"
                    + std::string(sv) + "'");
            have_header = true;
            continue;
        }
        auto comma = sv.find(',');
        if (comma == std::string_view::npos)
            throw std::runtime_error("calibration file line "
                                     + std::to_string(line_no)
                                     + ": expected two comma-separated "
                                       "columns");
        CalibrationPoint p;
        p.photon_count = parse_double(trim(sv.substr(0, comma)),
                                      "photon_count");
        p.mean_voltage_v = parse_double(trim(sv.substr(comma + 1)),
                                        "mean_voltage_v");
        points.push_back(p);
    }
    if (!have_header)
        throw std::runtime_error("calibration file: missing header");
    if (points.empty())
        throw std::runtime_error("calibration file: no points");
    return points;
}

inline std::vector<CalibrationPoint>
read_calibration_csv(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open calibration file "
                                 + path.string());
    return read_calibration_csv(in);
}

}  // namespace asekit
