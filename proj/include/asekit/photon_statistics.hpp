// Copyright 2026 the asekit developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stats.hpp"

namespace asekit {

//---------------------------------------------------------------------------//
// Physical constants (exact SI values)
//---------------------------------------------------------------------------//

inline constexpr double kPlanckJs = 6.62607015e-34;
inline constexpr double kSpeedOfLightMps = 299792458.0;

//---------------------------------------------------------------------------//
// Types
//---------------------------------------------------------------------------//

/// Parameters of the optical/electrical front end that determine the photon
/// statistics of filtered amplified-spontaneous-emission light at the
/// detector.
struct OpticalSetup
{
    double optical_bandwidth_hz = 0.0;  //!< FWHM of the optical filter
    double electrical_bandwidth_hz = 0.0;  //!< detection bandwidth
    int polarization_degeneracy = 1;  //!< 1 (polarized) or 2 (unpolarized)
    double optical_power_w = 0.0;  //!< mean power at the detector
    double center_wavelength_m = 1550e-9;

    void validate() const
    {
        auto require = [](bool ok, char const* what) {
            if (!ok)
                throw std::domain_error(std::string("OpticalSetup: ") + what);
        };
        require(std::isfinite(optical_bandwidth_hz)
                    && optical_bandwidth_hz > 0.0,
                "optical_bandwidth_hz must be positive");
        require(std::isfinite(electrical_bandwidth_hz)
                    && electrical_bandwidth_hz > 0.0,
                "electrical_bandwidth_hz must be positive");
        require(polarization_degeneracy == 1 || polarization_degeneracy == 2,
                "polarization_degeneracy must be 1 or 2");
        require(std::isfinite(optical_power_w) && optical_power_w >= 0.0,
                "optical_power_w must be non-negative");
        require(std::isfinite(center_wavelength_m)
                    && center_wavelength_m > 0.0,
                "center_wavelength_m must be positive");
    }
};

/// Derived modal description of the detected light within one integration
/// window.
struct ModalModel
{
    double mode_number = 1.0;  //!< effective number of modes M (real > 0)
    double mean_photons_per_mode = 0.0;  //!< nbar
    double mean_photons_total = 0.0;  //!< nbar_M = M * nbar
};

/// Photon-number distribution on a contiguous support window.
///
/// probabilities[i] is the probability of count support_min + i; the window
/// covers all but at most the construction tail tolerance of the mass and
/// the stored values are renormalized to sum to 1.  cumulative[i] is the
/// inclusive prefix sum accumulated with compensated summation.
struct PhotonDistribution
{
    std::int64_t support_min = 0;
    std::vector<double> probabilities;
    std::vector<double> log_probabilities;
    std::vector<double> cumulative;
    std::optional<ModalModel> source_model;

    std::int64_t support_max() const
    {
        return support_min + static_cast<std::int64_t>(probabilities.size())
               - 1;
    }
};

//---------------------------------------------------------------------------//
// Pointwise pmf evaluation
//---------------------------------------------------------------------------//

/// Natural log of the M-fold degenerate thermal (Bose-Einstein) photon
/// number pmf: a negative binomial with real shape M >= arbitrary positive
/// value and mean M * n_bar,
///
///   log P(n) = lgamma(n + M) - lgamma(n + 1) - lgamma(M)
///              - n * log1p(1 / n_bar) - M * log1p(n_bar).
///
/// n_bar == 0 degenerates to a point mass at n = 0.
inline double degenerate_thermal_log_pmf(std::int64_t n,
                                         double n_bar,
                                         double mode_number)
{
    if (n < 0)
        throw std::domain_error(
            "degenerate_thermal_log_pmf: photon count must be >= 0");
    if (!(std::isfinite(n_bar) && n_bar >= 0.0))
        throw std::domain_error(
            "degenerate_thermal_log_pmf: n_bar must be non-negative");
    if (!(std::isfinite(mode_number) && mode_number > 0.0))
        throw std::domain_error(
            "degenerate_thermal_log_pmf: mode_number must be positive");
    if (n_bar == 0.0)
        return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();

    double nd = static_cast<double>(n);
    return std::lgamma(nd + mode_number) - std::lgamma(nd + 1.0)
           - std::lgamma(mode_number) - nd * std::log1p(1.0 / n_bar)
           - mode_number * std::log1p(n_bar);
}

inline double degenerate_thermal_pmf(std::int64_t n,
                                     double n_bar,
                                     double mode_number)
{
    return std::exp(degenerate_thermal_log_pmf(n, n_bar, mode_number));
}

/// Single-mode thermal (geometric Bose-Einstein) pmf: the M = 1 case.
inline double thermal_log_pmf(std::int64_t n, double n_bar)
{
    return degenerate_thermal_log_pmf(n, n_bar, 1.0);
}

inline double thermal_pmf(std::int64_t n, double n_bar)
{
    return std::exp(thermal_log_pmf(n, n_bar));
}

//---------------------------------------------------------------------------//
// Mode counting and photon budget
//---------------------------------------------------------------------------//

/// Effective number of detected modes for a Gaussian-shaped optical filter
/// of FWHM-to-electrical-bandwidth ratio r and polarization degeneracy s:
///
///   M(r, s) = s * pi * r^2
///             / (pi * r * erf(sqrt(pi) * r) - (1 - exp(-pi * r^2))).
///
/// The denominator vanishes quadratically as r -> 0; below r = 1e-6 the
/// limit M -> s is returned directly to avoid 0/0 noise.
inline double mode_number_from_ratio(double bandwidth_ratio,
                                     int polarization_degeneracy)
{
    if (!(std::isfinite(bandwidth_ratio) && bandwidth_ratio > 0.0))
        throw std::domain_error(
            "mode_number_from_ratio: bandwidth ratio must be positive");
    if (polarization_degeneracy != 1 && polarization_degeneracy != 2)
        throw std::domain_error(
            "mode_number_from_ratio: polarization degeneracy must be 1 or 2");

    double s = static_cast<double>(polarization_degeneracy);
    double r = bandwidth_ratio;
    if (r < 1e-6)
        return s;

    double pi = std::numbers::pi;
    double numer = s * pi * r * r;
    double denom = pi * r * std::erf(std::sqrt(pi) * r)
                   - (1.0 - std::exp(-pi * r * r));
    return numer / denom;
}

inline double mode_number(OpticalSetup const& setup)
{
    setup.validate();
    return mode_number_from_ratio(
        setup.optical_bandwidth_hz / setup.electrical_bandwidth_hz,
        setup.polarization_degeneracy);
}

/// Mean photon budget in one integration window T = 1 / electrical
/// bandwidth: total mean count P * T / (h c / lambda), split evenly over the
/// given number of modes.
inline ModalModel mean_photons(OpticalSetup const& setup, double mode_count)
{
    setup.validate();
    if (!(std::isfinite(mode_count) && mode_count > 0.0))
        throw std::domain_error("mean_photons: mode count must be positive");

    double window_s = 1.0 / setup.electrical_bandwidth_hz;
    double photon_energy_j
        = kPlanckJs * kSpeedOfLightMps / setup.center_wavelength_m;
    ModalModel m;
    m.mode_number = mode_count;
    m.mean_photons_total = setup.optical_power_w * window_s / photon_energy_j;
    m.mean_photons_per_mode = m.mean_photons_total / mode_count;
    return m;
}

inline ModalModel modal_model(OpticalSetup const& setup)
{
    return mean_photons(setup, mode_number(setup));
}

//---------------------------------------------------------------------------//
// Distribution construction
//---------------------------------------------------------------------------//

/// Build a PhotonDistribution from explicit probabilities (renormalizing and
/// filling logs and the cumulative).  Intended for hand-built or merged
/// distributions; physical models should go through build_distribution.
inline PhotonDistribution
make_distribution(std::int64_t support_min, std::vector<double> probabilities)
{
    if (probabilities.empty())
        throw std::invalid_argument("make_distribution: empty probabilities");
    NeumaierSum total;
    for (double p : probabilities)
    {
        if (!(std::isfinite(p) && p >= 0.0))
            throw std::domain_error(
                "make_distribution: probabilities must be non-negative");
        total.add(p);
    }
    double norm = total.value();
    if (!(norm > 0.0))
        throw std::domain_error("make_distribution: zero total probability");

    PhotonDistribution d;
    d.support_min = support_min;
    d.probabilities = std::move(probabilities);
    d.log_probabilities.resize(d.probabilities.size());
    d.cumulative.resize(d.probabilities.size());
    NeumaierSum run;
    for (std::size_t i = 0; i < d.probabilities.size(); ++i)
    {
        d.probabilities[i] /= norm;
        d.log_probabilities[i] = std::log(d.probabilities[i]);
        run.add(d.probabilities[i]);
        d.cumulative[i] = run.value();
    }
    return d;
}

namespace detail {

/// Log of the up-ratio P(n+1)/P(n) of the degenerate thermal pmf.
inline double log_up_ratio(double n, double mode_number, double log_q)
{
    return std::log(n + mode_number) - std::log(n + 1.0) + log_q;
}

}  // namespace detail

/// Tabulate the degenerate thermal pmf of \c model over a finite window.
///
/// The support is found by scanning outward from the analytic mode.  The
/// scan in each direction stops once a geometric bound on the remaining
/// tail drops below half of \c tail_tolerance, so the excluded mass is at
/// most \c tail_tolerance in total.  The retained window is renormalized;
/// all evaluation happens in natural-log space via std::lgamma so that
/// supports of millions of counts stay finite and accurate.
inline PhotonDistribution build_distribution(ModalModel const& model,
                                             double tail_tolerance = 1e-12)
{
    if (!(std::isfinite(model.mode_number) && model.mode_number > 0.0))
        throw std::domain_error(
            "build_distribution: mode_number must be positive");
    if (!(std::isfinite(model.mean_photons_per_mode)
          && model.mean_photons_per_mode >= 0.0))
        throw std::domain_error(
            "build_distribution: mean_photons_per_mode must be >= 0");
    if (!(tail_tolerance > 0.0 && tail_tolerance <= 1e-6))
        throw std::domain_error(
            "build_distribution: tail_tolerance must be in (0, 1e-6]");

    double const mode_count = model.mode_number;
    double const n_bar = model.mean_photons_per_mode;

    PhotonDistribution result;
    result.source_model = model;

    if (n_bar == 0.0)
    {
        // Point mass at zero photons.
        result.support_min = 0;
        result.probabilities = {1.0};
        result.log_probabilities = {0.0};
        result.cumulative = {1.0};
        return result;
    }

    // Success probability of the equivalent negative binomial.
    double const log_q = -std::log1p(1.0 / n_bar);
    auto log_pmf = [&](std::int64_t n) {
        return degenerate_thermal_log_pmf(n, n_bar, mode_count);
    };

    // Analytic mode of the pmf: the up-ratio crosses 1 near
    // M*nbar - nbar - 1; refine over a small neighborhood (and 0).
    std::int64_t candidate = static_cast<std::int64_t>(
        std::floor(mode_count * n_bar - n_bar - 1.0));
    std::int64_t peak = 0;
    double peak_log = log_pmf(0);
    for (std::int64_t n = std::max<std::int64_t>(0, candidate - 2);
         n <= std::max<std::int64_t>(0, candidate + 2);
         ++n)
    {
        double lp = log_pmf(n);
        if (lp > peak_log)
        {
            peak_log = lp;
            peak = n;
        }
    }

    double const half_tol = 0.5 * tail_tolerance;
    double const q = n_bar / (1.0 + n_bar);

    // Scan right from the peak.  Above the mode every up-ratio is below
    // rho_bar = max(rho(n), q) < 1 (rho decreases toward q for M > 1 and
    // increases toward q for M < 1), so the mass beyond n is bounded by the
    // geometric sum p(n) * rho_bar / (1 - rho_bar).
    std::int64_t hi = peak;
    {
        double lp = peak_log;
        while (true)
        {
            double log_rho = detail::log_up_ratio(
                static_cast<double>(hi), mode_count, log_q);
            double rho_bar = std::max(std::exp(log_rho), q);
            if (rho_bar < 1.0)
            {
                double tail_bound
                    = std::exp(lp) * rho_bar / (1.0 - rho_bar);
                if (tail_bound < half_tol)
                    break;
            }
            lp += log_rho;
            ++hi;
        }
    }

    // Scan left from the peak.  A positive peak requires M > 1, in which
    // case the down-ratio d(n) = P(n-1)/P(n) < 1 shrinks as n decreases, so
    // the mass below n is bounded by the geometric sum p(n) * d / (1 - d).
    std::int64_t lo = peak;
    {
        double lp = peak_log;
        while (lo > 0)
        {
            double log_d = -detail::log_up_ratio(
                static_cast<double>(lo - 1), mode_count, log_q);
            double d = std::exp(log_d);
            if (d < 1.0)
            {
                double tail_bound = std::exp(lp + log_d) / (1.0 - d);
                if (tail_bound < half_tol)
                    break;
            }
            lp += log_d;
            --lo;
        }
    }

    std::size_t const size = static_cast<std::size_t>(hi - lo + 1);
    result.support_min = lo;
    result.log_probabilities.resize(size);
    result.probabilities.resize(size);
    result.cumulative.resize(size);

    // Exact lgamma evaluation per entry (the incremental logs above are used
    // only for the stopping rule).
    NeumaierSum total;
    for (std::size_t i = 0; i < size; ++i)
    {
        double lp = log_pmf(lo + static_cast<std::int64_t>(i));
        result.log_probabilities[i] = lp;
        result.probabilities[i] = std::exp(lp);
        total.add(result.probabilities[i]);
    }

    // Renormalize over the retained window and rebuild the cumulative with
    // compensated summation so cumulative.back() lands within 1e-9 of 1.
    double const norm = total.value();
    double const log_norm = std::log(norm);
    NeumaierSum run;
    for (std::size_t i = 0; i < size; ++i)
    {
        result.probabilities[i] /= norm;
        result.log_probabilities[i] -= log_norm;
        run.add(result.probabilities[i]);
        result.cumulative[i] = run.value();
    }
    return result;
}

//---------------------------------------------------------------------------//
// Distribution summaries
//---------------------------------------------------------------------------//

inline double distribution_mean(PhotonDistribution const& d)
{
    NeumaierSum s;
    for (std::size_t i = 0; i < d.probabilities.size(); ++i)
        s.add(static_cast<double>(d.support_min
                                  + static_cast<std::int64_t>(i))
              * d.probabilities[i]);
    return s.value();
}

inline double max_probability(PhotonDistribution const& d)
{
    if (d.probabilities.empty())
        throw std::domain_error("max_probability: empty distribution");
    return *std::max_element(d.probabilities.begin(), d.probabilities.end());
}

}  // namespace asekit
