#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "resil/dataset.hpp"

namespace resil {

// Median with the midpoint-of-two rule for even counts. Throws on empty input.
double median(std::vector<double> values);

// Median of the multiset where `value` appears `weight` times (midpoint rule);
// weights are positive integers. Throws when total weight is zero.
double weighted_median(std::vector<std::pair<double, long long>> value_weight);

// Average ranks, 1-based, ties averaged.
std::vector<double> average_ranks(std::span<const double> values);

// Subtract mean, divide by sample (n-1) standard deviation. Throws on fewer
// than two values or zero variance.
std::vector<double> standardize(std::span<const double> column);

double pearson(std::span<const double> x, std::span<const double> y);

// Pearson correlation of average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

// Two-sided p-value for Student's t with df degrees of freedom, via the
// regularized incomplete beta function.
double student_t_two_sided_p(double t, double df);

struct RegressionTable {
  std::vector<std::string> feature_names;
  std::vector<double> coefficients;
  std::vector<double> std_errors;
  std::vector<double> p_values;
  double intercept = 0.0;
  double intercept_se = 0.0;
  double intercept_p = 1.0;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  int n_obs = 0;
};

// OLS with an implicit intercept column: normal equations solved by Cholesky,
// standard errors from sigma^2 (Z'Z)^-1, two-sided Student-t p-values with
// n-k-1 degrees of freedom. When every predictor is standardized the
// intercept equals mean(y).
RegressionTable ols_fit(std::span<const double> y, const std::vector<std::vector<double>>& x_columns,
                        std::vector<std::string> names);

// One sector's aggregated features for the resilience regressions.
struct SectorFeatures {
  int sector = -1;
  long long venue_count = 0;
  std::optional<double> mean_delta_s;  // absent when no venue has a defined delta_s
  double mean_delta_m = 0.0;
  double pre_segregation = 0.0;  // mean venue s_pre
  double pre_mobility = 0.0;     // mean venue m_pre
  double bridge = 0.0;
  double centrality = 0.0;
};

enum class ChangeKind { segregation, mobility };

// The four nested specifications: the dependent change regressed on
// (1) its own pre-shock level, (2) + the other pre-shock level,
// (3) + bridge index, (4) + network centrality. Features are standardized
// over the regression sample before fitting.
std::vector<RegressionTable> nested_regressions(std::span<const SectorFeatures> table,
                                                ChangeKind kind);

struct PairedTestResult {
  double statistic_w = 0.0;
  double p_two_sided = 1.0;
  double effect_r = 0.0;
  int n_effective = 0;
  bool exact = false;
};

// Two-sided Wilcoxon signed-rank test on differences a-b. Zero differences
// are dropped; |d| ranked with average ranks on ties; W = sum of ranks of
// positive differences. p is exact (full distribution over the 2^n sign
// assignments) for n <= exact_max, else a normal approximation without
// continuity correction. effect_r = |Z|/sqrt(n) with Z = (W - mu)/sigma,
// mu = n(n+1)/4, sigma^2 = n(n+1)(2n+1)/24 (no tie correction).
PairedTestResult wilcoxon_signed_rank(std::span<const std::pair<double, double>> pairs,
                                      int exact_max = 25);

struct BridgeResult {
  std::optional<double> value;      // absent when every venue's catchment is empty
  std::vector<int> excluded_venues;  // venues with empty catchments
};

// Evenness of the income-group composition reachable within radius_km of a
// sector's venues: per venue 1 - tau * sum_g |pop_share_g - 1/n| over the
// population of CBGs in the catchment, averaged (unweighted) over venues.
BridgeResult bridge_index(const Dataset& ds, int sector, double radius_km);

}  // namespace resil
