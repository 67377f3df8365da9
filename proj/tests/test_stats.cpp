#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "resil/oracle.hpp"
#include "resil/stats.hpp"
#include "test_support.hpp"

using namespace resil;

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

std::vector<double> random_standardized(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd;
  std::vector<double> col(n);
  for (double& v : col) v = nd(rng);
  return standardize(col);
}

}  // namespace

TEST_CASE("median uses the midpoint rule") {
  CHECK(median({5.0}) == 5.0);
  CHECK(median({1.0, 3.0}) == 2.0);
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
  CHECK_THROWS_AS(median({}), std::invalid_argument);
}

TEST_CASE("weighted median expands weights into a multiset") {
  CHECK(weighted_median({{1.0, 1}, {10.0, 3}}) == 10.0);
  CHECK(weighted_median({{1.0, 2}, {2.0, 2}}) == 1.5);
  CHECK(weighted_median({{7.0, 5}}) == 7.0);
  // Same answer as the literal expansion on random cases.
  std::mt19937_64 rng(11);
  for (int it = 0; it < 200; ++it) {
    std::vector<std::pair<double, long long>> vw;
    std::vector<double> expanded;
    const int k = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < k; ++i) {
      const double v = static_cast<double>(rng() % 100) / 10.0;
      const long long w = 1 + static_cast<long long>(rng() % 4);
      vw.emplace_back(v, w);
      for (long long j = 0; j < w; ++j) expanded.push_back(v);
    }
    CHECK(weighted_median(vw) == doctest::Approx(median(expanded)).epsilon(1e-15));
  }
  CHECK_THROWS_AS(weighted_median({}), std::invalid_argument);
}

TEST_CASE("average ranks split ties") {
  const std::vector<double> r = average_ranks(std::vector<double>{10.0, 20.0, 20.0, 30.0});
  CHECK(r == std::vector<double>{1.0, 2.5, 2.5, 4.0});
  const std::vector<double> all_tied = average_ranks(std::vector<double>{2.0, 2.0, 2.0});
  CHECK(all_tied == std::vector<double>{2.0, 2.0, 2.0});
}

TEST_CASE("standardize centers and scales by the sample sd") {
  const std::vector<double> z = standardize(std::vector<double>{1.0, 2.0, 3.0});
  CHECK(z[0] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(z[1] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(z[2] == doctest::Approx(1.0).epsilon(1e-15));

  // Two-pass scalar recomputation as an independent route.
  const std::vector<double> raw{2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
  const std::vector<double> got = standardize(raw);
  const double mean = std::accumulate(raw.begin(), raw.end(), 0.0) / raw.size();
  double ss = 0.0;
  for (double v : raw) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (raw.size() - 1));
  for (std::size_t i = 0; i < raw.size(); ++i)
    CHECK(got[i] == doctest::Approx((raw[i] - mean) / sd).epsilon(1e-12));

  CHECK_THROWS_AS(standardize(std::vector<double>{3.0, 3.0, 3.0}), std::invalid_argument);
  CHECK_THROWS_AS(standardize(std::vector<double>{3.0}), std::invalid_argument);
}

TEST_CASE("spearman endpoints and tie handling") {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0, 5.0};
  const std::vector<double> up{2.0, 3.0, 5.0, 7.0, 11.0};
  std::vector<double> down(up.rbegin(), up.rend());
  CHECK(spearman(x, up) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(spearman(x, down) == doctest::Approx(-1.0).epsilon(1e-12));

  // Tied data matches an explicit rank-then-pearson evaluation.
  const std::vector<double> a{1.0, 2.0, 2.0, 3.0, 4.0, 4.0};
  const std::vector<double> b{5.0, 5.0, 6.0, 7.0, 7.0, 9.0};
  CHECK(spearman(a, b) ==
        doctest::Approx(pearson(average_ranks(a), average_ranks(b))).epsilon(1e-14));
}

TEST_CASE("spearman is invariant under strictly monotone transforms") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  for (int it = 0; it < 50; ++it) {
    const int n = 5 + static_cast<int>(rng() % 20);
    std::vector<double> x(n), y(n), ex(n), y3(n);
    for (int i = 0; i < n; ++i) {
      x[i] = nd(rng);
      y[i] = nd(rng);
      ex[i] = std::exp(x[i]);
      y3[i] = y[i] * y[i] * y[i];
    }
    const double base = spearman(x, y);
    CHECK(spearman(ex, y) == doctest::Approx(base).epsilon(1e-10));
    CHECK(spearman(x, y3) == doctest::Approx(base).epsilon(1e-10));
  }
}

TEST_CASE("student t two-sided p-values") {
  CHECK(student_t_two_sided_p(0.0, 10.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(student_t_two_sided_p(3.0, 8.0) ==
        doctest::Approx(student_t_two_sided_p(-3.0, 8.0)).epsilon(1e-14));
  // 97.5% quantile of t(10) is 2.2281388519649385.
  CHECK(student_t_two_sided_p(2.2281388519649385, 10.0) == doctest::Approx(0.05).epsilon(1e-9));
  // Large |t| decays toward zero monotonically.
  CHECK(student_t_two_sided_p(8.0, 20.0) < 1e-6);
  CHECK(student_t_two_sided_p(1.0, 5.0) > student_t_two_sided_p(2.0, 5.0));
}

TEST_CASE("ols on a noiseless line recovers slope in sd units") {
  std::vector<double> xraw{1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0};
  std::vector<double> y(xraw.size());
  for (std::size_t i = 0; i < xraw.size(); ++i) y[i] = 3.0 + 2.0 * xraw[i];
  const double mean = std::accumulate(xraw.begin(), xraw.end(), 0.0) / xraw.size();
  double ss = 0.0;
  for (double v : xraw) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (xraw.size() - 1));

  const RegressionTable t = ols_fit(y, {standardize(xraw)}, {"x"});
  CHECK(t.coefficients[0] == doctest::Approx(2.0 * sd).epsilon(1e-9));
  CHECK(t.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.p_values[0] < 1e-6);
  CHECK(t.intercept == doctest::Approx(std::accumulate(y.begin(), y.end(), 0.0) / y.size())
                           .epsilon(1e-12));
}

TEST_CASE("ols error cases") {
  std::mt19937_64 rng(3);
  const std::vector<double> x = random_standardized(rng, 10);
  std::vector<double> y(10, 0.0);
  for (int i = 0; i < 10; ++i) y[i] = 1.0 + x[i];

  CHECK_THROWS_AS(ols_fit(y, {x, x}, {"a", "b"}), std::invalid_argument);  // rank deficient
  CHECK_THROWS_AS(ols_fit(std::vector<double>{1.0, 2.0},
                          {std::vector<double>{0.5, -0.5}}, {"a"}),
                  std::invalid_argument);  // too few observations
  CHECK_THROWS_AS(ols_fit(std::vector<double>(10, 4.0), {x}, {"a"}),
                  std::invalid_argument);  // constant dependent
}

TEST_CASE("ols identities hold against an independent solver on random instances") {
  std::mt19937_64 rng(20260814);
  std::normal_distribution<double> nd;
  int instances = 0;
  for (int it = 0; it < 220; ++it) {
    const int n = 25 + static_cast<int>(rng() % 40);
    const int k = 1 + static_cast<int>(rng() % 3);
    std::vector<std::vector<double>> cols;
    for (int j = 0; j < k; ++j) cols.push_back(random_standardized(rng, n));
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
      y[i] = 0.3 * nd(rng);
      for (int j = 0; j < k; ++j) y[i] += (j + 1) * 0.5 * cols[j][i];
    }

    const RegressionTable t = ols_fit(y, cols, std::vector<std::string>(k, "f"));
    const std::vector<double> beta = oracle::ols_coefficients_gauss_jordan(y, cols);

    CHECK(t.intercept == doctest::Approx(beta[0]).epsilon(1e-9));
    for (int j = 0; j < k; ++j)
      CHECK(t.coefficients[j] == doctest::Approx(beta[j + 1]).epsilon(1e-9));

    // Standardized predictors: the intercept is exactly the mean response.
    const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / n;
    CHECK(t.intercept == doctest::Approx(ybar).epsilon(1e-9));

    // Residuals orthogonal to every predictor column.
    std::vector<double> resid(n);
    for (int i = 0; i < n; ++i) {
      double fit = t.intercept;
      for (int j = 0; j < k; ++j) fit += t.coefficients[j] * cols[j][i];
      resid[i] = y[i] - fit;
    }
    for (int j = 0; j < k; ++j) CHECK(std::abs(dot(resid, cols[j])) / n < 1e-8);

    CHECK(t.r2 >= -1e-12);
    CHECK(t.r2 <= 1.0 + 1e-12);
    ++instances;
  }
  CHECK(instances >= 200);
}

namespace {

std::vector<SectorFeatures> random_sector_table(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd;
  std::vector<SectorFeatures> table(n);
  for (int i = 0; i < n; ++i) {
    table[i].sector = i;
    table[i].venue_count = 5;
    table[i].pre_segregation = 0.3 + 0.1 * nd(rng);
    table[i].pre_mobility = 50.0 + 10.0 * nd(rng);
    table[i].bridge = 0.5 + 0.1 * nd(rng);
    table[i].centrality = 0.1 + 0.02 * nd(rng);
    table[i].mean_delta_s = 0.1 * nd(rng);
    table[i].mean_delta_m = 0.2 * nd(rng);
  }
  return table;
}

}  // namespace

TEST_CASE("nested specifications share the intercept and grow in fit") {
  std::mt19937_64 rng(99);
  for (int it = 0; it < 60; ++it) {
    const std::vector<SectorFeatures> table = random_sector_table(rng, 30);
    for (ChangeKind kind : {ChangeKind::segregation, ChangeKind::mobility}) {
      const std::vector<RegressionTable> specs = nested_regressions(table, kind);
      REQUIRE(specs.size() == 4);
      for (int s = 0; s < 4; ++s) {
        CHECK(specs[s].n_obs == 30);
        CHECK(static_cast<int>(specs[s].coefficients.size()) == s + 1);
        CHECK(specs[s].intercept == doctest::Approx(specs[0].intercept).epsilon(1e-9));
        if (s > 0) CHECK(specs[s].r2 >= specs[s - 1].r2 - 1e-12);
      }
      const char* own = kind == ChangeKind::segregation ? "pre_segregation" : "pre_mobility";
      const char* other = kind == ChangeKind::segregation ? "pre_mobility" : "pre_segregation";
      CHECK(specs[3].feature_names[0] == own);
      CHECK(specs[3].feature_names[1] == other);
      CHECK(specs[3].feature_names[2] == "bridge_index");
      CHECK(specs[3].feature_names[3] == "centrality");
    }
  }
}

TEST_CASE("a change planted on centrality is fully explained once centrality enters") {
  std::mt19937_64 rng(4);
  std::vector<SectorFeatures> table = random_sector_table(rng, 40);
  for (SectorFeatures& r : table) r.mean_delta_s = 0.2 - 1.5 * r.centrality;
  const std::vector<RegressionTable> specs = nested_regressions(table, ChangeKind::segregation);
  CHECK(specs[3].r2 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(specs[2].r2 < 0.999);  // the first three features cannot reproduce it
  CHECK(specs[3].coefficients[3] < 0.0);
}

TEST_CASE("sectors without a defined segregation change drop from that regression only") {
  std::mt19937_64 rng(5);
  std::vector<SectorFeatures> table = random_sector_table(rng, 30);
  table[3].mean_delta_s.reset();
  table[17].mean_delta_s.reset();
  CHECK(nested_regressions(table, ChangeKind::segregation)[0].n_obs == 28);
  CHECK(nested_regressions(table, ChangeKind::mobility)[0].n_obs == 30);
}

TEST_CASE("wilcoxon all-positive signatures") {
  std::vector<std::pair<double, double>> ten;
  for (int i = 1; i <= 10; ++i) ten.emplace_back(static_cast<double>(i), 0.0);
  const PairedTestResult r10 = wilcoxon_signed_rank(ten);
  CHECK(r10.exact);
  CHECK(r10.n_effective == 10);
  CHECK(r10.statistic_w == 55.0);
  CHECK(r10.p_two_sided == doctest::Approx(2.0 / 1024.0).epsilon(1e-12));
  CHECK(r10.effect_r == doctest::Approx(0.886).epsilon(1e-3));

  std::vector<std::pair<double, double>> nine(ten.begin(), ten.begin() + 9);
  const PairedTestResult r9 = wilcoxon_signed_rank(nine);
  CHECK(r9.p_two_sided == doctest::Approx(2.0 / 512.0).epsilon(1e-12));
  CHECK(r9.effect_r == doctest::Approx(0.889).epsilon(1e-3));

  // A zero difference is dropped, reproducing the nine-pair signature.
  std::vector<std::pair<double, double>> with_zero = nine;
  with_zero.emplace_back(4.0, 4.0);
  const PairedTestResult rz = wilcoxon_signed_rank(with_zero);
  CHECK(rz.n_effective == 9);
  CHECK(rz.p_two_sided == doctest::Approx(r9.p_two_sided).epsilon(1e-15));
  CHECK(rz.effect_r == doctest::Approx(r9.effect_r).epsilon(1e-15));
}

TEST_CASE("wilcoxon on balanced signs sits at the null center") {
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 3; ++i) pairs.emplace_back(1.0, 0.0);
  for (int i = 0; i < 3; ++i) pairs.emplace_back(0.0, 1.0);
  const PairedTestResult r = wilcoxon_signed_rank(pairs);
  CHECK(r.statistic_w == doctest::Approx(6 * 7 / 4.0).epsilon(1e-15));
  CHECK(r.p_two_sided == 1.0);
  CHECK(r.effect_r == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("wilcoxon requires five nonzero differences") {
  std::vector<std::pair<double, double>> pairs{{1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 5}};
  CHECK_THROWS_AS(wilcoxon_signed_rank(pairs), std::invalid_argument);
}

TEST_CASE("exact wilcoxon p equals full sign enumeration") {
  std::mt19937_64 rng(123);
  std::normal_distribution<double> nd;
  for (int it = 0; it < 160; ++it) {
    const int n = 5 + static_cast<int>(rng() % 8);  // 5..12
    std::vector<std::pair<double, double>> pairs;
    for (int i = 0; i < n; ++i) {
      // Half-integer magnitudes force plenty of rank ties.
      const double d = (1.0 + static_cast<double>(rng() % 5)) / 2.0;
      const double sign = (rng() & 1) ? 1.0 : -1.0;
      pairs.emplace_back(sign * d, 0.0);
    }
    const PairedTestResult r = wilcoxon_signed_rank(pairs);
    REQUIRE(r.exact);

    std::vector<double> absd;
    for (const auto& [a, b] : pairs) absd.push_back(std::abs(a - b));
    const std::vector<double> ranks = average_ranks(absd);
    const oracle::WilcoxonCounts c = oracle::wilcoxon_enumerate(ranks, r.statistic_w);
    const double p = std::min(
        1.0, 2.0 * static_cast<double>(std::min(c.le, c.ge)) / static_cast<double>(c.total));
    CHECK(r.p_two_sided == doctest::Approx(p).epsilon(1e-14));
  }
}

TEST_CASE("beyond the exact threshold the normal approximation takes over") {
  std::vector<std::pair<double, double>> pairs;
  std::mt19937_64 rng(9);
  for (int i = 0; i < 12; ++i) {
    const double d = 1.0 + static_cast<double>(rng() % 7);
    pairs.emplace_back((rng() & 1) ? d : -d, 0.0);
  }
  const PairedTestResult ex = wilcoxon_signed_rank(pairs, 25);
  const PairedTestResult ap = wilcoxon_signed_rank(pairs, 8);
  CHECK(ex.exact);
  CHECK(!ap.exact);
  CHECK(ap.statistic_w == ex.statistic_w);
  CHECK(ap.effect_r == doctest::Approx(ex.effect_r).epsilon(1e-15));
  const int n = ap.n_effective;
  const double mu = n * (n + 1) / 4.0;
  const double sigma = std::sqrt(n * (n + 1) * (2.0 * n + 1) / 24.0);
  const double z = std::abs((ap.statistic_w - mu) / sigma);
  CHECK(ap.p_two_sided == doctest::Approx(std::erfc(z / std::sqrt(2.0))).epsilon(1e-12));
}

TEST_CASE("bridge index evenness on hand catchments") {
  using testsup::CbgSpec;
  using testsup::EdgeSpec;
  using testsup::VenueSpec;

  // One venue; three nearby CBGs with populations 100/100/200 in groups 0/1/1.
  std::vector<CbgSpec> cbgs{{"c0", 40.0, -75.0, 30000, 100, 0},
                            {"c1", 40.001, -75.0, 40000, 100, 1},
                            {"c2", 40.002, -75.0, 50000, 200, 1}};
  const Dataset ds = testsup::make_dataset({{"v1", "food", 40.0, -75.0}}, cbgs,
                                           std::vector<EdgeSpec>{}, 5);
  const BridgeResult r = bridge_index(ds, 0, 5.0);
  REQUIRE(r.value.has_value());
  CHECK(*r.value == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(r.excluded_venues.empty());

  // Scaling every population by the same factor changes nothing.
  for (CbgSpec& c : cbgs) c.population *= 7;
  const Dataset scaled = testsup::make_dataset({{"v1", "food", 40.0, -75.0}}, cbgs,
                                               std::vector<EdgeSpec>{}, 5);
  CHECK(*bridge_index(scaled, 0, 5.0).value == doctest::Approx(*r.value).epsilon(1e-12));
}

TEST_CASE("bridge index endpoints") {
  using testsup::CbgSpec;
  std::vector<CbgSpec> even;
  for (int g = 0; g < 5; ++g)
    even.push_back({"c" + std::to_string(g), 40.0 + 0.001 * g, -75.0, 30000.0, 100, g});
  const Dataset ds_even = testsup::make_dataset({{"v1", "food", 40.0, -75.0}}, even, {}, 5);
  CHECK(*bridge_index(ds_even, 0, 10.0).value == doctest::Approx(1.0).epsilon(1e-12));

  const Dataset ds_one = testsup::make_dataset(
      {{"v1", "food", 40.0, -75.0}}, {{"c0", 40.0, -75.0, 30000.0, 500, 2}}, {}, 5);
  CHECK(*bridge_index(ds_one, 0, 10.0).value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("bridge index reports venues with empty catchments") {
  using testsup::CbgSpec;
  using testsup::VenueSpec;
  // v_far sits ~111 km north of the only CBG; v_near is on top of it.
  std::vector<VenueSpec> venues{{"va", "food", 40.0, -75.0}, {"vb", "food", 41.0, -75.0}};
  std::vector<CbgSpec> cbgs{{"c0", 40.0005, -75.0, 30000.0, 100, 0},
                            {"c1", 40.001, -75.0, 35000.0, 100, 1}};
  Dataset ds = testsup::make_dataset(venues, cbgs, {}, 2);
  const BridgeResult r = bridge_index(ds, 0, 5.0);
  REQUIRE(r.value.has_value());
  CHECK(*r.value == doctest::Approx(1.0).epsilon(1e-12));  // only the covered venue counts
  REQUIRE(r.excluded_venues.size() == 1);
  CHECK(ds.venues[r.excluded_venues[0]].id == "vb");

  // No venue reaches any CBG: value absent, both venues reported.
  const BridgeResult none = bridge_index(ds, 0, 0.001);
  CHECK(!none.value.has_value());
  CHECK(none.excluded_venues.size() == 2);

  CHECK_THROWS_AS(bridge_index(ds, 0, 0.0), std::invalid_argument);
  ds.sectors.push_back("zz");  // sorts after "food"; no venue belongs to it
  ds.build_indexes();
  CHECK_THROWS_AS(bridge_index(ds, 1, 5.0), std::invalid_argument);
}
