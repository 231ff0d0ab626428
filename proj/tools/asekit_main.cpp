// Copyright 2026 the asekit developers
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end for the asekit toolkit.  Every subcommand wraps
//! one library operation; results print as `key = value` lines (or a CSV
//! row with --format csv) and file outputs carry provenance comments.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "asekit/asekit.hpp"

namespace {

using asekit::format_double;
using Rows = std::vector<std::pair<std::string, std::string>>;

//---------------------------------------------------------------------------//
// Output plumbing
//---------------------------------------------------------------------------//

struct OutputOptions
{
    std::string format = "structured";
    std::string out_path;
};

void add_output_options(CLI::App* cmd, OutputOptions* opts)
{
    cmd->add_option("--format", opts->format,
                    "Result format: structured (key = value) or csv")
        ->check(CLI::IsMember({"structured", "csv"}));
    cmd->add_option("--out", opts->out_path,
                    "Write to this file (atomically) instead of stdout");
}

std::string render_rows(Rows const& rows,
                        std::vector<std::string> const& comments,
                        std::string const& format)
{
    std::string text;
    for (auto const& c : comments)
        text += "# " + c + "\n";
    if (format == "csv")
    {
        std::string header;
        std::string values;
        for (std::size_t i = 0; i < rows.size(); ++i)
        {
            header += rows[i].first;
            values += rows[i].second;
            if (i + 1 < rows.size())
            {
                header += ',';
                values += ',';
            }
        }
        text += header + "\n" + values + "\n";
    }
    else
    {
        for (auto const& [key, value] : rows)
            text += key + " = " + value + "\n";
    }
    return text;
}

void emit(OutputOptions const& opts,
          Rows const& rows,
          std::vector<std::string> const& comments)
{
    std::string text = render_rows(rows, comments, opts.format);
    if (!opts.out_path.empty())
        asekit::atomic_write_text(opts.out_path, text);
    else
        std::cout << text;
}

/// Emit pre-rendered text (CSV tables, report blocks) to a file or stdout.
void emit_text(std::string const& out_path, std::string const& text)
{
    if (!out_path.empty())
        asekit::atomic_write_text(out_path, text);
    else
        std::cout << text;
}

std::string version_comment()
{
    return std::string("asekit v") + std::string(asekit::kVersion);
}

/// Echo the numeric inputs of an invocation into a provenance comment.
std::string input_echo(Rows const& inputs)
{
    std::string line = "inputs:";
    for (auto const& [key, value] : inputs)
        line += " " + key + "=" + value;
    return line;
}

//---------------------------------------------------------------------------//
// Shared option groups
//---------------------------------------------------------------------------//

/// Parse a "nbar=17383,M=2.9627" model description.
asekit::ModalModel parse_pmf_spec(std::string const& text)
{
    double nbar = -1.0;
    double modes = -1.0;
    std::string item;
    std::istringstream parts(text);
    while (std::getline(parts, item, ','))
    {
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("--pmf-from: expected key=value pairs, "
                                     "got '"
                                     + item + "'");
        std::string key{asekit::trim(item.substr(0, eq))};
        std::string value{asekit::trim(item.substr(eq + 1))};
        if (key == "nbar")
            nbar = asekit::parse_double(value, "nbar");
        else if (key == "M" || key == "modes")
            modes = asekit::parse_double(value, "M");
        else
            throw std::runtime_error("--pmf-from: unknown key '" + key
                                     + "' (expected nbar, M)");
    }
    if (!(nbar >= 0.0) || !(modes > 0.0))
        throw std::runtime_error(
            "--pmf-from: need nbar >= 0 and M > 0, e.g. "
            "\"nbar=17383,M=2.9627\"");
    asekit::ModalModel model;
    model.mode_number = modes;
    model.mean_photons_per_mode = nbar;
    model.mean_photons_total = modes * nbar;
    return model;
}

/// Distribution source: an inline "nbar=...,M=..." spec, an explicit
/// (nbar, modes) flag pair, or a config file whose optical setup determines
/// them.
struct DistributionOptions
{
    std::string pmf_spec;
    double nbar = -1.0;
    double modes = -1.0;
    double tail_tolerance = 1e-12;
    std::string config_path;

    void add_to(CLI::App* cmd)
    {
        auto* spec_opt = cmd->add_option(
            "--pmf-from", pmf_spec,
            "Model as \"nbar=<value>,M=<value>\"");
        auto* nbar_opt = cmd->add_option(
            "--nbar", nbar, "Mean photons per mode of the thermal model");
        auto* modes_opt = cmd->add_option(
            "--modes", modes, "Effective mode count (real, > 0)");
        auto* config_opt = cmd->add_option(
            "--config", config_path,
            "Derive the model from this experiment config");
        cmd->add_option("--tail-tol", tail_tolerance,
                        "Excluded tail mass bound for the tabulated pmf");
        nbar_opt->needs(modes_opt);
        modes_opt->needs(nbar_opt);
        config_opt->excludes(nbar_opt)->excludes(spec_opt);
        nbar_opt->excludes(config_opt)->excludes(spec_opt);
    }

    asekit::ModalModel resolve(Rows* echo) const
    {
        asekit::ModalModel model;
        if (!pmf_spec.empty())
        {
            model = parse_pmf_spec(pmf_spec);
        }
        else if (!config_path.empty())
        {
            auto config = asekit::ExperimentConfig::load(config_path);
            model = asekit::modal_model(config.setup);
        }
        else if (nbar >= 0.0 && modes > 0.0)
        {
            model.mode_number = modes;
            model.mean_photons_per_mode = nbar;
            model.mean_photons_total = modes * nbar;
        }
        else
        {
            throw CLI::ValidationError(
                "distribution source",
                "pass --pmf-from, --nbar with --modes, or --config");
        }
        if (echo)
        {
            echo->emplace_back("nbar",
                               format_double(model.mean_photons_per_mode));
            echo->emplace_back("modes", format_double(model.mode_number));
            echo->emplace_back("tail_tol", format_double(tail_tolerance));
        }
        return model;
    }
};

//---------------------------------------------------------------------------//
// Subcommands
//---------------------------------------------------------------------------//

void add_model_command(CLI::App& app)
{
    struct State
    {
        double bopt = 0.0;
        double bele = 0.0;
        double power = 0.0;
        double wavelength = 1550e-9;
        int pol = 1;
        std::string config_path;
        OutputOptions out;
    };
    auto state = std::make_shared<State>();
    auto* cmd = app.add_subcommand(
        "model", "Mode count and photon budget of an optical setup");
    auto* bopt = cmd->add_option("--bopt", state->bopt,
                                 "Optical filter FWHM bandwidth [Hz]");
    auto* bele = cmd->add_option("--bele", state->bele,
                                 "Electrical detection bandwidth [Hz]");
    auto* power = cmd->add_option("--power", state->power,
                                  "Mean optical power at the detector [W]");
    cmd->add_option("--lambda", state->wavelength,
                    "Center wavelength [m]");
    cmd->add_option("--pol", state->pol,
                    "Polarization degeneracy (1 or 2)");
    auto* config = cmd->add_option("--config", state->config_path,
                                   "Read the setup from this config file");
    config->excludes(bopt)->excludes(bele)->excludes(power);
    cmd->callback([state] {
        asekit::OpticalSetup setup;
        if (!state->config_path.empty())
        {
            setup = asekit::ExperimentConfig::load(state->config_path).setup;
        }
        else
        {
            setup.optical_bandwidth_hz = state->bopt;
            setup.electrical_bandwidth_hz = state->bele;
            setup.optical_power_w = state->power;
            setup.center_wavelength_m = state->wavelength;
            setup.polarization_degeneracy = state->pol;
        }
        asekit::ModalModel model = asekit::modal_model(setup);
        Rows inputs{
            {"optical_bandwidth_hz", format_double(setup.optical_bandwidth_hz)},
            {"electrical_bandwidth_hz",
             format_double(setup.electrical_bandwidth_hz)},
            {"polarization_degeneracy",
             std::to_string(setup.polarization_degeneracy)},
            {"optical_power_w", format_double(setup.optical_power_w)},
            {"center_wavelength_m", format_double(setup.center_wavelength_m)},
        };
        Rows rows{
            {"bandwidth_ratio",
             format_double(setup.optical_bandwidth_hz
                           / setup.electrical_bandwidth_hz)},
            {"mode_number", format_double(model.mode_number)},
            {"mean_photons_per_mode",
             format_double(model.mean_photons_per_mode)},
            {"mean_photons_total", format_double(model.mean_photons_total)},
        };
        emit(state->out, rows, {version_comment(), input_echo(inputs)});
    });
    add_output_options(cmd, &state->out);
}

void add_surface_command(CLI::App& app)
{
    struct State
    {
        double ratio_min = 0.01;
        double ratio_max = 100.0;
        std::size_t points = 200;
        std::vector<int> pols{1, 2};
        OutputOptions out;
    };
    auto state = std::make_shared<State>();
    auto* cmd = app.add_subcommand(
        "surface",
        "Tabulate the mode-number law over a bandwidth-ratio grid");
    cmd->add_option("--rmin", state->ratio_min,
                    "Smallest bandwidth ratio (> 0)");
    cmd->add_option("--rmax", state->ratio_max,
                    "Largest bandwidth ratio");
    cmd->add_option("--points", state->points,
                    "Grid points per polarization (log-spaced)");
    cmd->add_option("--pol", state->pols,
                    "Polarization degeneracies to tabulate");
    add_output_options(cmd, &state->out);
    cmd->callback([state] {
        auto surface = asekit::emit_mode_number_surface(
            state->ratio_min, state->ratio_max, state->points, state->pols);
        Rows inputs{
            {"ratio_min", format_double(state->ratio_min)},
            {"ratio_max", format_double(state->ratio_max)},
            {"points", std::to_string(state->points)},
        };
        std::ostringstream text;
        asekit::write_surface_csv(text, surface,
                                  {version_comment(), input_echo(inputs)});
        emit_text(state->out.out_path, text.str());
    });
}

void add_sample_command(CLI::App& app)
{
    struct State
    {
        DistributionOptions dist;
        std::uint64_t count = 0;
        std::uint64_t seed = 0;
        std::uint64_t chunk = 1u << 16;
        OutputOptions out;
    };
    auto state = std::make_shared<State>();
    auto* cmd = app.add_subcommand(
        "sample", "Draw photon counts from the thermal model");
    state->dist.add_to(cmd);
    cmd->add_option("--count", state->count, "Number of samples")
        ->required();
    cmd->add_option("--seed", state->seed, "Master seed for the draw");
    cmd->add_option("--chunk", state->chunk,
                    "Work chunk size (does not affect the values)");
    add_output_options(cmd, &state->out);
    cmd->callback([state] {
        Rows inputs;
        asekit::ModalModel model = state->dist.resolve(&inputs);
        inputs.emplace_back("count", std::to_string(state->count));
        inputs.emplace_back("seed", std::to_string(state->seed));

        asekit::PhotonDistribution dist
            = asekit::build_distribution(model, state->dist.tail_tolerance);
        asekit::SampleRequest request;
        request.count = state->count;
        request.master_seed = state->seed;
        request.chunk_size = state->chunk;
        asekit::PhotonCountTrace trace
            = asekit::inverse_transform_sample(dist, request);

        std::ostringstream text;
        text << "# " << version_comment() << "\n# " << input_echo(inputs)
             << '\n';
        for (auto n : trace.counts)
            text << n << '\n';
        emit_text(state->out.out_path, text.str());
    });
}

void add_simulate_command(CLI::App& app)
{
    struct State
    {
        std::string config_path;
        std::optional<std::uint64_t> seed;
        std::optional<std::uint64_t> count;
        OutputOptions out;
    };
    auto state = std::make_shared<State>();
    auto* cmd = app.add_subcommand(
        "simulate",
        "Simulate the full detection chain and write the voltage trace");
    cmd->add_option("--config", state->config_path, "Experiment config file")
        ->required();
    cmd->add_option("--seed", state->seed, "Override the config master seed");
    cmd->add_option("--count", state->count,
                    "Override the config sample count");
    add_output_options(cmd, &state->out);
    cmd->callback([state] {
        auto config = asekit::ExperimentConfig::load(state->config_path);
        if (state->seed)
            config.master_seed = *state->seed;
        if (state->count)
            config.sample_count = *state->count;
        config.validate();

        asekit::DetectionCalibration calibration
            = config.calibration_file.empty()
                  ? asekit::make_calibration(
                        config.calibration_volts_per_photon)
                  : asekit::calibrate_mapping(asekit::read_calibration_csv(
                        std::filesystem::path(config.calibration_file)));
        asekit::ElectronicNoiseSource noise
            = config.noise_kind == "measured"
                  ? asekit::ElectronicNoiseSource::from_trace(
                        asekit::read_trace_csv(std::filesystem::path(
                            config.noise_trace_file)),
                        config.noise_seed)
                  : asekit::ElectronicNoiseSource::synthetic(
                        config.noise_mean_v, config.noise_sigma_v,
                        config.noise_seed);

        asekit::VoltageTrace trace = asekit::simulate_ase_experiment(
            config.setup, calibration, noise, config.sample_count,
            config.master_seed, config.tail_tolerance,
            config.sample_rate_hz);

        std::vector<std::string> comments{
            version_comment(),
            "config=" + asekit::hex64(config.config_hash())
                + " seed=" + std::to_string(config.master_seed),
        };
        std::ostringstream text;
        asekit::write_trace_csv(text, trace, comments);
        emit_text(state->out.out_path, text.str());
    });
}

void add_calibrate_command(CLI::App& app)
{
    struct State
    {
        std::string points_path;
        OutputOptions out;
    };
    auto state = std::make_shared<State>();
    auto* cmd = app.add_subcommand(
        "calibrate",
        "Fit the through-origin photon-to-voltage slope");
    cmd->add_option("--points", state->points_path,
                    "Calibration CSV (photon_count,mean_voltage_v)")
        ->required();
    add_output_options(cmd, &state->out);
    cmd->callback([state] {
        auto points = asekit::read_calibration_csv(
            std::filesystem::path(state->points_path));
        auto cal = asekit::calibrate_mapping(points);
        Rows rows{
            {"volts_per_photon", format_double(cal.volts_per_photon)},
            {"max_relative_residual",
             format_double(cal.max_relative_residual)},
            {"points", std::to_string(cal.points.size())},
        };
        emit(state->out, rows, {version_comment()});
    });
}

void add_resolution_command(CLI::App& app)
{
    struct State
    {
        std::string trace_path;
        double delta_v0 = asekit::kDefaultDeltaV0V;
        double trim = 0.0;
        OutputOptions out;
    };
    auto state = std::make_shared<State>();
    auto* cmd = app.add_subcommand(
        "resolution",
        "Estimate the effective digitizer resolution of a trace");
    cmd->add_option("--trace", state->trace_path, "Voltage trace CSV")
        ->required();
    cmd->add_option("--delta-v0", state->delta_v0,
                    "Base voltage step [V]");
    cmd->add_option("--trim", state->trim,
                    "Fraction of extreme gaps to drop (trimmed mean)");
    add_output_options(cmd, &state->out);
    cmd->callback([state] {
        auto trace = asekit::read_trace_csv(
            std::filesystem::path(state->trace_path));
        auto est = asekit::estimate_resolution(trace, state->delta_v0,
                                               state->trim);
        Rows inputs{{"delta_v0", format_double(state->delta_v0)},
                    {"trim", format_double(state->trim)}};
        Rows rows{
            {"resolution_m", std::to_string(est.resolution_m)},
            {"delta_v0_v", format_double(est.delta_v0_v)},
            {"mean_unique_gap_v", format_double(est.mean_unique_gap_v)},
        };
        emit(state->out, rows, {version_comment(), input_echo(inputs)});
    });
}

void add_entropy_command(CLI::App& app)
{
    struct State
    {
        DistributionOptions dist;
        std::string trace_path;
        std::int64_t merge_m = 1;
        OutputOptions out;
    };
    auto state = std::make_shared<State>();
    auto* cmd = app.add_subcommand(
        "entropy",
        "Min-entropy of the thermal model or of an acquired trace");
    state->dist.add_to(cmd);
    cmd->add_option("--trace", state->trace_path,
                    "Compute the observed min-entropy of this trace "
                    "instead");
    cmd->add_option("--merge", state->merge_m,
                    "Coarsen the model to cells of this many counts first");
    add_output_options(cmd, &state->out);
    cmd->callback([state] {
        if (!state->trace_path.empty())
        {
            auto trace = asekit::read_trace_csv(
                std::filesystem::path(state->trace_path));
            Rows rows{{"h_empirical_bits",
                       format_double(asekit::empirical_min_entropy(trace))},
                      {"samples", std::to_string(trace.samples.size())}};
            emit(state->out, rows, {version_comment()});
            return;
        }
        Rows inputs;
        asekit::ModalModel model = state->dist.resolve(&inputs);
        inputs.emplace_back("merge_m", std::to_string(state->merge_m));
        asekit::PhotonDistribution dist
            = asekit::build_distribution(model, state->dist.tail_tolerance);
        double h;
        if (state->merge_m > 1)
            h = asekit::min_entropy(
                asekit::merge_distribution(dist, state->merge_m));
        else
            h = asekit::min_entropy(dist);
        Rows rows{
            {"min_entropy_bits", format_double(h)},
            {"support_size", std::to_string(dist.probabilities.size())},
        };
        emit(state->out, rows, {version_comment(), input_echo(inputs)});
    });
}

void add_merge_command(CLI::App& app)
{
    struct State
    {
        DistributionOptions dist;
        std::int64_t m = 1;
        std::int64_t anchor_offset = 0;
        OutputOptions out;
    };
    auto state = std::make_shared<State>();
    auto* cmd = app.add_subcommand(
        "merge",
        "Coarsen the model pmf to resolution cells and write it as CSV");
    state->dist.add_to(cmd);
    cmd->add_option("--m", state->m, "Counts per cell (>= 1)")->required();
    cmd->add_option("--anchor-offset", state->anchor_offset,
                    "Shift of the cell boundaries in counts");
    add_output_options(cmd, &state->out);
    cmd->callback([state] {
        Rows inputs;
        asekit::ModalModel model = state->dist.resolve(&inputs);
        inputs.emplace_back("m", std::to_string(state->m));
        inputs.emplace_back("anchor_offset",
                            std::to_string(state->anchor_offset));
        asekit::PhotonDistribution dist
            = asekit::build_distribution(model, state->dist.tail_tolerance);
        asekit::MergedDistribution merged = asekit::merge_distribution(
            dist, state->m, state->anchor_offset);

        std::ostringstream text;
        text << "# " << version_comment() << "\n# " << input_echo(inputs)
             << "\n# min_entropy_bits="
             << format_double(asekit::min_entropy(merged)) << '\n';
        text << "level,probability\n";
        for (std::size_t i = 0; i < merged.probabilities.size(); ++i)
        {
            text << merged.first_level + static_cast<std::int64_t>(i) << ','
                 << format_double(merged.probabilities[i]) << '\n';
        }
        emit_text(state->out.out_path, text.str());
    });
}

void add_report_command(CLI::App& app)
{
    struct State
    {
        DistributionOptions dist;
        std::string trace_path;
        double delta_v0 = asekit::kDefaultDeltaV0V;
        OutputOptions out;
    };
    auto state = std::make_shared<State>();
    auto* cmd = app.add_subcommand(
        "report",
        "Certify a trace: resolution, merged model entropy, observed "
        "entropy");
    state->dist.add_to(cmd);
    cmd->add_option("--trace", state->trace_path, "Voltage trace CSV")
        ->required();
    cmd->add_option("--delta-v0", state->delta_v0, "Base voltage step [V]");
    add_output_options(cmd, &state->out);
    cmd->callback([state] {
        Rows inputs;
        asekit::ModalModel model = state->dist.resolve(&inputs);
        inputs.emplace_back("delta_v0", format_double(state->delta_v0));
        asekit::PhotonDistribution dist
            = asekit::build_distribution(model, state->dist.tail_tolerance);
        auto trace = asekit::read_trace_csv(
            std::filesystem::path(state->trace_path));
        asekit::EntropyReport report
            = asekit::build_report(dist, trace, state->delta_v0);
        emit_text(state->out.out_path,
                  asekit::format_report(
                      report, {version_comment(), input_echo(inputs)}));
    });
}

void add_run_command(CLI::App& app)
{
    struct State
    {
        std::string config_path;
        std::optional<std::uint64_t> seed;
        std::string out_dir;
    };
    auto state = std::make_shared<State>();
    auto* cmd = app.add_subcommand(
        "run",
        "Execute a configured experiment and write all artifacts");
    cmd->add_option("--config", state->config_path, "Experiment config file")
        ->required();
    cmd->add_option("--seed", state->seed, "Override the config master seed");
    cmd->add_option("--out", state->out_dir,
                    "Override the config output directory");
    cmd->callback([state] {
        auto config = asekit::ExperimentConfig::load(state->config_path);
        if (state->seed)
            config.master_seed = *state->seed;
        if (!state->out_dir.empty())
            config.out_dir = state->out_dir;
        asekit::ExperimentResult result = asekit::run_experiment(config);
        std::cout << asekit::format_report(
            result.report,
            {version_comment(),
             "config=" + asekit::hex64(config.config_hash())
                 + " seed=" + std::to_string(config.master_seed),
             "out_dir=" + result.out_dir.string()});
    });
}

void add_extract_command(CLI::App& app)
{
    struct State
    {
        std::string trace_path;
        std::string report_path;
        int bits_per_sample = 0;
        std::size_t n = 4096;
        std::size_t k = 0;
        std::uint64_t seed = 0;
        std::string out_path;
        OutputOptions out;
    };
    auto state = std::make_shared<State>();
    auto* cmd = app.add_subcommand(
        "extract",
        "Derive raw bits from a trace and Toeplitz-hash them");
    cmd->add_option("--trace", state->trace_path, "Voltage trace CSV")
        ->required();
    cmd->add_option("--bits-per-sample", state->bits_per_sample,
                    "Raw bits encoded per sample (rank width)")
        ->required();
    cmd->add_option("--n", state->n, "Extractor input block size [bits]");
    auto* k_opt
        = cmd->add_option("--k", state->k,
                          "Extractor output block size [bits]");
    auto* report_opt = cmd->add_option(
        "--report", state->report_path,
        "Size the output block from this entropy report");
    k_opt->excludes(report_opt);
    cmd->add_option("--seed", state->seed, "Extractor matrix seed");
    cmd->add_option("--bits-out", state->out_path,
                    "Bitstream output file")
        ->required();
    add_output_options(cmd, &state->out);
    cmd->callback([state] {
        auto trace = asekit::read_trace_csv(
            std::filesystem::path(state->trace_path));
        asekit::BitVec raw
            = asekit::raw_bits_from_trace(trace, state->bits_per_sample);

        asekit::ToeplitzSpec spec;
        if (!state->report_path.empty())
        {
            std::ifstream in(state->report_path);
            if (!in)
                throw std::runtime_error("cannot open report "
                                         + state->report_path);
            std::string text((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
            asekit::EntropyReport report = asekit::parse_report(text);
            spec = asekit::make_toeplitz_spec_from_report(
                report, state->bits_per_sample, state->n, state->seed);
        }
        else
        {
            if (state->k == 0)
                throw CLI::ValidationError("extract",
                                           "pass --k or --report");
            spec = asekit::make_toeplitz_spec(state->n, state->k,
                                              state->seed);
        }

        asekit::ExtractResult extracted = asekit::toeplitz_extract(raw, spec);
        asekit::write_bitstream(std::filesystem::path(state->out_path),
                                extracted.bits, &spec);

        Rows rows{
            {"raw_bits", std::to_string(raw.size())},
            {"n", std::to_string(spec.input_block_bits)},
            {"k", std::to_string(spec.output_block_bits)},
            {"blocks", std::to_string(extracted.blocks)},
            {"output_bits", std::to_string(extracted.bits.size())},
            {"dropped_input_bits",
             std::to_string(extracted.dropped_input_bits)},
        };
        emit(state->out, rows, {version_comment()});
    });
}

void add_compare_command(CLI::App& app)
{
    struct State
    {
        std::string trace_a;
        std::string trace_b;
        double bin_width = 0.0;
        OutputOptions out;
    };
    auto state = std::make_shared<State>();
    auto* cmd = app.add_subcommand(
        "compare", "Histogram distance between two voltage traces");
    cmd->add_option("--trace-a", state->trace_a, "Reference trace CSV")
        ->required();
    cmd->add_option("--trace-b", state->trace_b, "Comparison trace CSV")
        ->required();
    cmd->add_option("--bin-width", state->bin_width,
                    "Histogram cell width [V]; 0 = per distinct value");
    add_output_options(cmd, &state->out);
    cmd->callback([state] {
        auto a = asekit::read_trace_csv(
            std::filesystem::path(state->trace_a));
        auto b = asekit::read_trace_csv(
            std::filesystem::path(state->trace_b));
        asekit::DistanceReport report
            = asekit::compare_traces(a, b, state->bin_width);
        Rows inputs{{"bin_width", format_double(state->bin_width)}};
        Rows rows{
            {"total_variation", format_double(report.total_variation)},
            {"chi_square", format_double(report.chi_square)},
            {"degrees_of_freedom",
             format_double(report.degrees_of_freedom)},
            {"p_value", format_double(report.p_value)},
        };
        emit(state->out, rows, {version_comment(), input_echo(inputs)});
    });
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{
        "asekit: simulation and entropy certification for randomness "
        "from direct detection of amplified spontaneous emission"};
    app.set_version_flag("--version",
                         std::string("asekit v")
                             + std::string(asekit::kVersion));
    app.require_subcommand(1);

    add_model_command(app);
    add_surface_command(app);
    add_sample_command(app);
    add_simulate_command(app);
    add_calibrate_command(app);
    add_resolution_command(app);
    add_entropy_command(app);
    add_merge_command(app);
    add_report_command(app);
    add_run_command(app);
    add_extract_command(app);
    add_compare_command(app);

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        return app.exit(e);
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
