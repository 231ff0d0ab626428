// Copyright 2026 the asekit developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace asekit {

//---------------------------------------------------------------------------//
// Compensated summation
//---------------------------------------------------------------------------//

/// Neumaier variant of Kahan summation: running sum with a carry term that
/// also handles addends larger than the current sum.  Used everywhere a
/// probability mass must be accumulated to near machine precision.
class NeumaierSum
{
  public:
    void add(double x)
    {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            carry_ += (sum_ - t) + x;
        else
            carry_ += (x - t) + sum_;
        sum_ = t;
    }

    double value() const { return sum_ + carry_; }

  private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

inline double neumaier_total(std::span<double const> values)
{
    NeumaierSum s;
    for (double v : values)
        s.add(v);
    return s.value();
}

//---------------------------------------------------------------------------//
// Running moments
//---------------------------------------------------------------------------//

/// Welford online accumulator for mean and variance.
class Moments
{
  public:
    void add(double x)
    {
        ++count_;
        double d = x - mean_;
        mean_ += d / static_cast<double>(count_);
        m2_ += d * (x - mean_);
    }

    std::uint64_t count() const { return count_; }
    double mean() const { return mean_; }

    /// Sample variance (divisor count - 1).
    double variance() const
    {
        if (count_ < 2)
            return 0.0;
        return m2_ / static_cast<double>(count_ - 1);
    }

    double std_dev() const { return std::sqrt(this->variance()); }

  private:
    std::uint64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

//---------------------------------------------------------------------------//
// Incomplete gamma and related tail functions
//---------------------------------------------------------------------------//

/// Regularized lower incomplete gamma P(a,x) by series expansion.
/// Converges quickly for x < a + 1.
inline double gamma_p_series(double a, double x)
{
    constexpr int max_iter = 1000000;
    constexpr double eps = 1e-15;

    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int i = 0; i < max_iter; ++i)
    {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * eps)
        {
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw std::runtime_error("incomplete gamma series failed to converge");
}

/// Regularized upper incomplete gamma Q(a,x) by modified Lentz continued
/// fraction.  Converges quickly for x >= a + 1.
inline double gamma_q_continued_fraction(double a, double x)
{
    constexpr int max_iter = 1000000;
    constexpr double eps = 1e-15;
    constexpr double tiny = 1e-300;

    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= max_iter; ++i)
    {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny)
            d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < eps)
        {
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw std::runtime_error(
        "incomplete gamma continued fraction failed to converge");
}

/// Regularized lower incomplete gamma P(a,x).
inline double regularized_gamma_p(double a, double x)
{
    if (!(a > 0.0) || !(x >= 0.0))
        throw std::domain_error("regularized_gamma_p: require a > 0, x >= 0");
    if (x == 0.0)
        return 0.0;
    if (x < a + 1.0)
        return gamma_p_series(a, x);
    return 1.0 - gamma_q_continued_fraction(a, x);
}

/// Regularized upper incomplete gamma Q(a,x) = 1 - P(a,x).
inline double regularized_gamma_q(double a, double x)
{
    if (!(a > 0.0) || !(x >= 0.0))
        throw std::domain_error("regularized_gamma_q: require a > 0, x >= 0");
    if (x == 0.0)
        return 1.0;
    if (x < a + 1.0)
        return 1.0 - gamma_p_series(a, x);
    return gamma_q_continued_fraction(a, x);
}

/// Upper-tail p-value of a chi-square statistic with the given degrees of
/// freedom.
inline double chi_square_pvalue(double statistic, double degrees_of_freedom)
{
    if (!(degrees_of_freedom > 0.0))
        throw std::domain_error("chi_square_pvalue: degrees of freedom must "
                                "be positive");
    if (!(statistic >= 0.0))
        throw std::domain_error("chi_square_pvalue: statistic must be "
                                "non-negative");
    return regularized_gamma_q(0.5 * degrees_of_freedom, 0.5 * statistic);
}

/// Standard normal CDF.
inline double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

//---------------------------------------------------------------------------//
// Goodness of fit
//---------------------------------------------------------------------------//

struct GofResult
{
    double statistic = 0.0;
    double degrees_of_freedom = 0.0;
    double p_value = 1.0;
    std::size_t merged_cells = 0;  //!< number of cells after merging
};

/// Pearson chi-square goodness-of-fit test of observed counts against
/// expected cell probabilities.
///
/// The expected probabilities are renormalized over the supplied cells, so a
/// slightly truncated model (e.g. a pmf cut at a tail tolerance) is handled
/// conditionally; observations must all fall inside the supplied cells.
/// Adjacent cells are merged left-to-right until every merged cell has an
/// expected count of at least \c min_expected (small-sample validity rule);
/// an undersized trailing remainder is folded into the last accepted cell.
inline GofResult chi_square_gof(std::span<std::uint64_t const> observed,
                                std::span<double const> expected_probability,
                                double min_expected = 5.0)
{
    if (observed.size() != expected_probability.size())
        throw std::invalid_argument(
            "chi_square_gof: observed and expected sizes differ");
    if (observed.empty())
        throw std::invalid_argument("chi_square_gof: empty input");

    std::uint64_t total = 0;
    for (auto c : observed)
        total += c;
    if (total == 0)
        throw std::invalid_argument("chi_square_gof: no observations");

    NeumaierSum psum;
    for (double p : expected_probability)
    {
        if (!(p >= 0.0))
            throw std::domain_error(
                "chi_square_gof: expected probabilities must be >= 0");
        psum.add(p);
    }
    double covered = psum.value();
    if (!(covered > 0.0))
        throw std::domain_error(
            "chi_square_gof: expected probabilities sum to zero");

    std::vector<double> exp_counts(observed.size());
    std::vector<double> obs_counts(observed.size());
    for (std::size_t i = 0; i < observed.size(); ++i)
    {
        exp_counts[i]
            = static_cast<double>(total) * expected_probability[i] / covered;
        obs_counts[i] = static_cast<double>(observed[i]);
    }

    // Merge adjacent cells until each merged cell is large enough.
    std::vector<double> merged_exp;
    std::vector<double> merged_obs;
    double acc_e = 0.0;
    double acc_o = 0.0;
    for (std::size_t i = 0; i < exp_counts.size(); ++i)
    {
        acc_e += exp_counts[i];
        acc_o += obs_counts[i];
        if (acc_e >= min_expected)
        {
            merged_exp.push_back(acc_e);
            merged_obs.push_back(acc_o);
            acc_e = 0.0;
            acc_o = 0.0;
        }
    }
    if (acc_e > 0.0 || acc_o > 0.0)
    {
        // Fold the undersized tail into the last accepted cell.
        if (merged_exp.empty())
        {
            merged_exp.push_back(acc_e);
            merged_obs.push_back(acc_o);
        }
        else
        {
            merged_exp.back() += acc_e;
            merged_obs.back() += acc_o;
        }
    }
    if (merged_exp.size() < 2)
        throw std::domain_error(
            "chi_square_gof: fewer than two cells after merging");

    double stat = 0.0;
    for (std::size_t i = 0; i < merged_exp.size(); ++i)
    {
        double d = merged_obs[i] - merged_exp[i];
        stat += d * d / merged_exp[i];
    }

    GofResult r;
    r.statistic = stat;
    r.degrees_of_freedom = static_cast<double>(merged_exp.size() - 1);
    r.p_value = chi_square_pvalue(stat, r.degrees_of_freedom);
    r.merged_cells = merged_exp.size();
    return r;
}

//---------------------------------------------------------------------------//
// Distribution distances
//---------------------------------------------------------------------------//

/// Total variation distance between two discrete distributions given as
/// key -> probability maps: half the L1 distance over the union of keys.
template<class Key>
double total_variation(std::map<Key, double> const& a,
                       std::map<Key, double> const& b)
{
    NeumaierSum l1;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() || ib != b.end())
    {
        if (ib == b.end() || (ia != a.end() && ia->first < ib->first))
        {
            l1.add(std::abs(ia->second));
            ++ia;
        }
        else if (ia == a.end() || ib->first < ia->first)
        {
            l1.add(std::abs(ib->second));
            ++ib;
        }
        else
        {
            l1.add(std::abs(ia->second - ib->second));
            ++ia;
            ++ib;
        }
    }
    return 0.5 * l1.value();
}

/// Total variation distance between two aligned probability vectors.
inline double total_variation(std::span<double const> a,
                              std::span<double const> b)
{
    if (a.size() != b.size())
        throw std::invalid_argument("total_variation: size mismatch");
    NeumaierSum l1;
    for (std::size_t i = 0; i < a.size(); ++i)
        l1.add(std::abs(a[i] - b[i]));
    return 0.5 * l1.value();
}

}  // namespace asekit
