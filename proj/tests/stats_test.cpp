// Tests for numerical statistics helpers: compensated summation, running
// moments, regularized incomplete gamma functions, chi-square machinery,
// and total-variation distance.

#include <cmath>
#include <map>
#include <vector>

#include <gtest/gtest.h>

#include "asekit/stats.hpp"

namespace {

using asekit::chi_square_gof;
using asekit::chi_square_pvalue;
using asekit::Moments;
using asekit::NeumaierSum;
using asekit::normal_cdf;
using asekit::regularized_gamma_p;
using asekit::regularized_gamma_q;
using asekit::total_variation;

TEST(NeumaierSumTest, RecoversCancelledSmallTerm) {
  NeumaierSum sum;
  sum.add(1e16);
  sum.add(1.0);
  sum.add(-1e16);
  EXPECT_DOUBLE_EQ(sum.value(), 1.0);
}

TEST(NeumaierSumTest, AccumulatesDecimalFractionsAccurately) {
  NeumaierSum sum;
  for (int i = 0; i < 10; ++i) sum.add(0.1);
  EXPECT_NEAR(sum.value(), 1.0, 1e-15);
}

TEST(NeumaierSumTest, BeatsNaiveSummationOnAlternatingSeries) {
  // Alternating large/small magnitudes: naive summation loses the small terms.
  NeumaierSum sum;
  double naive = 0.0;
  for (int i = 0; i < 1000; ++i) {
    sum.add(1e12);
    sum.add(0.25);
    sum.add(-1e12);
    naive += 1e12;
    naive += 0.25;
    naive -= 1e12;
  }
  EXPECT_NEAR(sum.value(), 250.0, 1e-9);
  // Sanity: the compensated result should be at least as close as the naive one.
  EXPECT_LE(std::abs(sum.value() - 250.0), std::abs(naive - 250.0));
}

TEST(MomentsTest, SmallSampleMeanAndVariance) {
  Moments m;
  for (double x : {1.0, 2.0, 3.0, 4.0}) m.add(x);
  EXPECT_EQ(m.count(), 4u);
  EXPECT_DOUBLE_EQ(m.mean(), 2.5);
  EXPECT_NEAR(m.variance(), 5.0 / 3.0, 1e-15);  // sample variance (N-1)
  EXPECT_NEAR(m.std_dev(), std::sqrt(5.0 / 3.0), 1e-15);
}

TEST(MomentsTest, ConstantInputHasZeroVariance) {
  Moments m;
  for (int i = 0; i < 100; ++i) m.add(7.25);
  EXPECT_DOUBLE_EQ(m.mean(), 7.25);
  EXPECT_DOUBLE_EQ(m.variance(), 0.0);
}

TEST(RegularizedGammaTest, BoundaryValues) {
  EXPECT_DOUBLE_EQ(regularized_gamma_p(2.5, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(regularized_gamma_q(2.5, 0.0), 1.0);
}

TEST(RegularizedGammaTest, PAndQAreComplementary) {
  for (double a : {0.5, 1.0, 2.0, 10.0, 127.5}) {
    for (double x : {0.1, 0.9, 1.7, 5.0, 40.0, 200.0}) {
      double p = regularized_gamma_p(a, x);
      double q = regularized_gamma_q(a, x);
      EXPECT_NEAR(p + q, 1.0, 1e-12) << "a=" << a << " x=" << x;
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
    }
  }
}

// Chi-square survival functions have elementary closed forms for small even
// degrees of freedom: S(x; 2) = exp(-x/2), S(x; 4) = (1 + x/2) exp(-x/2),
// S(x; 6) = (1 + x/2 + x^2/8) exp(-x/2); and S(x; 1) = erfc(sqrt(x/2)).
TEST(ChiSquarePValueTest, MatchesClosedFormsForSmallDegreesOfFreedom) {
  for (double x : {0.5, 1.0, 2.0, 5.0, 10.0, 25.0}) {
    EXPECT_NEAR(chi_square_pvalue(x, 2), std::exp(-x / 2.0), 1e-12) << x;
    EXPECT_NEAR(chi_square_pvalue(x, 1), std::erfc(std::sqrt(x / 2.0)), 1e-12)
        << x;
    EXPECT_NEAR(chi_square_pvalue(x, 4), (1.0 + x / 2.0) * std::exp(-x / 2.0),
                1e-12)
        << x;
    EXPECT_NEAR(chi_square_pvalue(x, 6),
                (1.0 + x / 2.0 + x * x / 8.0) * std::exp(-x / 2.0), 1e-12)
        << x;
  }
}

TEST(ChiSquarePValueTest, ZeroStatisticGivesPValueOne) {
  EXPECT_DOUBLE_EQ(chi_square_pvalue(0.0, 5), 1.0);
}

TEST(ChiSquareGofTest, PerfectAgreementGivesZeroStatistic) {
  std::vector<std::uint64_t> observed{250, 250, 250, 250};
  std::vector<double> probs{0.25, 0.25, 0.25, 0.25};
  auto r = chi_square_gof(observed, probs);
  EXPECT_DOUBLE_EQ(r.statistic, 0.0);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0);
  EXPECT_EQ(r.merged_cells, 4u);
  EXPECT_DOUBLE_EQ(r.degrees_of_freedom, 3.0);
}

TEST(ChiSquareGofTest, TwoCellHandComputation) {
  // N = 100, expected [25, 75], observed [30, 70]:
  // stat = 25/25 + 25/75 = 4/3, df = 1, p = erfc(sqrt(2/3)).
  std::vector<std::uint64_t> observed{30, 70};
  std::vector<double> probs{0.25, 0.75};
  auto r = chi_square_gof(observed, probs);
  EXPECT_NEAR(r.statistic, 4.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(r.degrees_of_freedom, 1.0);
  EXPECT_NEAR(r.p_value, std::erfc(std::sqrt((4.0 / 3.0) / 2.0)), 1e-12);
}

TEST(ChiSquareGofTest, MergesCellsBelowExpectedCountFloor) {
  // Ten cells with expected count 2 plus one with expected count 80
  // (N = 100).  Greedy left-to-right merging with a floor of 5 yields
  // cells of expected [6, 6, 6, 82].
  std::vector<std::uint64_t> observed{2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 80};
  std::vector<double> probs(11, 0.02);
  probs[10] = 0.8;
  auto r = chi_square_gof(observed, probs);
  EXPECT_EQ(r.merged_cells, 4u);
  EXPECT_DOUBLE_EQ(r.degrees_of_freedom, 3.0);
  // Observed == expected in every merged cell, so the statistic stays 0.
  EXPECT_DOUBLE_EQ(r.statistic, 0.0);
}

TEST(ChiSquareGofTest, RenormalizesExpectedProbabilities) {
  // Probabilities that do not sum to one are treated as relative weights.
  std::vector<std::uint64_t> observed{50, 50};
  std::vector<double> probs{0.2, 0.2};
  auto r = chi_square_gof(observed, probs);
  EXPECT_DOUBLE_EQ(r.statistic, 0.0);
}

TEST(ChiSquareGofTest, RejectsInvalidInput) {
  std::vector<std::uint64_t> observed{10, 20};
  std::vector<double> short_probs{1.0};
  EXPECT_THROW(chi_square_gof(observed, short_probs), std::invalid_argument);
  std::vector<std::uint64_t> empty_obs;
  std::vector<double> empty_probs;
  EXPECT_THROW(chi_square_gof(empty_obs, empty_probs), std::invalid_argument);
  std::vector<std::uint64_t> zero_obs{0, 0};
  std::vector<double> probs2{0.5, 0.5};
  EXPECT_THROW(chi_square_gof(zero_obs, probs2), std::invalid_argument);
}

TEST(TotalVariationTest, MapOverloadHandlesMismatchedSupports) {
  std::map<int, double> a{{0, 0.5}, {1, 0.5}};
  std::map<int, double> b{{0, 0.25}, {1, 0.25}, {2, 0.5}};
  EXPECT_NEAR(total_variation(a, b), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(total_variation(a, a), 0.0);
}

TEST(TotalVariationTest, DisjointSupportsGiveDistanceOne) {
  std::map<int, double> a{{0, 1.0}};
  std::map<int, double> b{{5, 0.5}, {6, 0.5}};
  EXPECT_NEAR(total_variation(a, b), 1.0, 1e-15);
}

TEST(TotalVariationTest, SpanOverloadMatchesDefinition) {
  std::vector<double> p{0.1, 0.4, 0.5};
  std::vector<double> q{0.3, 0.3, 0.4};
  // 0.5 * (0.2 + 0.1 + 0.1) = 0.2
  EXPECT_NEAR(total_variation(p, q), 0.2, 1e-15);
}

TEST(NormalCdfTest, KnownQuantiles) {
  EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
  EXPECT_NEAR(normal_cdf(1.959963984540054), 0.975, 1e-9);
  EXPECT_NEAR(normal_cdf(-1.959963984540054), 0.025, 1e-9);
  EXPECT_NEAR(normal_cdf(3.0) + normal_cdf(-3.0), 1.0, 1e-15);
}

}  // namespace
