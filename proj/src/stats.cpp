#include "resil/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "resil/metrics.hpp"
#include "resil/spatiotemporal.hpp"

namespace resil {
namespace {

// Continued-fraction evaluation of the regularized incomplete beta function
// (modified Lentz), the standard route to Student-t tail probabilities.
double beta_cont_frac(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                       b * std::log1p(-x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cont_frac(a, b, x) / a;
  return 1.0 - bt * beta_cont_frac(b, a, 1.0 - x) / b;
}

// Cholesky factorization of a dense symmetric positive-definite matrix
// (row-major, in place); throws when a pivot collapses, which surfaces
// rank-deficient design matrices.
void cholesky(std::vector<double>& a, int n) {
  double max_diag = 0.0;
  for (int i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a[i * n + i]));
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) {
      double sum = a[i * n + j];
      for (int k = 0; k < j; ++k) sum -= a[i * n + k] * a[j * n + k];
      if (i == j) {
        if (!(sum > 1e-13 * max_diag))
          throw std::invalid_argument("design matrix is rank deficient");
        a[j * n + j] = std::sqrt(sum);
      } else {
        a[i * n + j] = sum / a[j * n + j];
      }
    }
  }
}

// Solves L L^T x = b given the Cholesky factor in the lower triangle.
std::vector<double> chol_solve(const std::vector<double>& l, int n, std::vector<double> b) {
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < i; ++k) b[i] -= l[i * n + k] * b[k];
    b[i] /= l[i * n + i];
  }
  for (int i = n - 1; i >= 0; --i) {
    for (int k = i + 1; k < n; ++k) b[i] -= l[k * n + i] * b[k];
    b[i] /= l[i * n + i];
  }
  return b;
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty vector");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

double weighted_median(std::vector<std::pair<double, long long>> value_weight) {
  long long total = 0;
  for (const auto& [v, w] : value_weight) {
    if (w < 0) throw std::invalid_argument("negative weight");
    total += w;
  }
  if (total <= 0) throw std::invalid_argument("weighted median needs positive total weight");
  std::sort(value_weight.begin(), value_weight.end());
  // Midpoint rule on the expanded multiset: average the elements at 1-based
  // positions (total+1)/2 and total/2+1 (equal when total is odd).
  const long long k1 = (total + 1) / 2;
  const long long k2 = total % 2 == 0 ? total / 2 + 1 : k1;
  double v1 = 0.0, v2 = 0.0;
  long long cum = 0;
  bool got1 = false, got2 = false;
  for (const auto& [v, w] : value_weight) {
    cum += w;
    if (!got1 && cum >= k1) {
      v1 = v;
      got1 = true;
    }
    if (!got2 && cum >= k2) {
      v2 = v;
      got2 = true;
      break;
    }
  }
  return (v1 + v2) / 2.0;
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

std::vector<double> standardize(std::span<const double> column) {
  const std::size_t n = column.size();
  if (n < 2) throw std::invalid_argument("standardize needs at least 2 values");
  const double mean = std::accumulate(column.begin(), column.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : column) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw std::invalid_argument("standardize: zero variance");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = (column[i] - mean) / sd;
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("length mismatch");
  const std::size_t n = x.size();
  if (n < 3) throw std::invalid_argument("correlation needs at least 3 points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw std::invalid_argument("correlation of constant vector");
  return sxy / std::sqrt(sxx * syy);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  return pearson(rx, ry);
}

double student_t_two_sided_p(double t, double df) {
  if (df <= 0.0) throw std::invalid_argument("degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  return reg_inc_beta(df / 2.0, 0.5, df / (df + t * t));
}

RegressionTable ols_fit(std::span<const double> y, const std::vector<std::vector<double>>& x_columns,
                        std::vector<std::string> names) {
  const int n = static_cast<int>(y.size());
  const int k = static_cast<int>(x_columns.size());
  if (names.size() != x_columns.size()) throw std::invalid_argument("names/columns mismatch");
  for (const auto& col : x_columns)
    if (static_cast<int>(col.size()) != n) throw std::invalid_argument("column length mismatch");
  if (n <= k + 1) throw std::invalid_argument("not enough observations for OLS");

  // Normal equations on the design matrix Z = [1 | X].
  const int m = k + 1;
  std::vector<double> a(static_cast<std::size_t>(m) * m, 0.0);
  std::vector<double> b(m, 0.0);
  auto zcol = [&](int j, int row) -> double { return j == 0 ? 1.0 : x_columns[j - 1][row]; };
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      double s = 0.0;
      for (int r = 0; r < n; ++r) s += zcol(i, r) * zcol(j, r);
      a[i * m + j] = a[j * m + i] = s;
    }
    double s = 0.0;
    for (int r = 0; r < n; ++r) s += zcol(i, r) * y[r];
    b[i] = s;
  }

  std::vector<double> l = a;
  cholesky(l, m);
  const std::vector<double> beta = chol_solve(l, m, b);

  // (Z'Z)^-1 column by column for the covariance diagonal.
  std::vector<double> inv_diag(m, 0.0);
  for (int j = 0; j < m; ++j) {
    std::vector<double> e(m, 0.0);
    e[j] = 1.0;
    inv_diag[j] = chol_solve(l, m, std::move(e))[j];
  }

  double sse = 0.0;
  double ybar = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sst = 0.0;
  for (int r = 0; r < n; ++r) {
    double fit = beta[0];
    for (int j = 1; j < m; ++j) fit += beta[j] * x_columns[j - 1][r];
    const double e = y[r] - fit;
    sse += e * e;
    sst += (y[r] - ybar) * (y[r] - ybar);
  }
  if (!(sst > 0.0)) throw std::invalid_argument("dependent variable is constant");

  const int df = n - k - 1;
  const double sigma2 = sse / df;

  RegressionTable out;
  out.feature_names = std::move(names);
  out.n_obs = n;
  out.r2 = 1.0 - sse / sst;
  out.adj_r2 = 1.0 - (1.0 - out.r2) * (n - 1.0) / df;
  out.intercept = beta[0];
  out.intercept_se = std::sqrt(std::max(0.0, sigma2 * inv_diag[0]));
  auto p_of = [&](double coef, double se) {
    if (se > 0.0) return student_t_two_sided_p(coef / se, df);
    return coef == 0.0 ? 1.0 : 0.0;  // exact fit: zero residual variance
  };
  out.intercept_p = p_of(out.intercept, out.intercept_se);
  for (int j = 1; j < m; ++j) {
    const double se = std::sqrt(std::max(0.0, sigma2 * inv_diag[j]));
    out.coefficients.push_back(beta[j]);
    out.std_errors.push_back(se);
    out.p_values.push_back(p_of(beta[j], se));
  }
  return out;
}

std::vector<RegressionTable> nested_regressions(std::span<const SectorFeatures> table,
                                                ChangeKind kind) {
  std::vector<const SectorFeatures*> rows;
  for (const SectorFeatures& r : table)
    if (kind == ChangeKind::mobility || r.mean_delta_s.has_value()) rows.push_back(&r);

  std::vector<double> y;
  y.reserve(rows.size());
  for (const SectorFeatures* r : rows)
    y.push_back(kind == ChangeKind::segregation ? *r->mean_delta_s : r->mean_delta_m);

  // Feature order mirrors the nested table layout: own pre-shock level first,
  // then the other pre-shock level, bridge, and centrality.
  struct Feat {
    const char* name;
    double (*get)(const SectorFeatures&);
  };
  const Feat pre_seg{"pre_segregation", [](const SectorFeatures& r) { return r.pre_segregation; }};
  const Feat pre_mob{"pre_mobility", [](const SectorFeatures& r) { return r.pre_mobility; }};
  const Feat bridge{"bridge_index", [](const SectorFeatures& r) { return r.bridge; }};
  const Feat centr{"centrality", [](const SectorFeatures& r) { return r.centrality; }};
  const std::vector<Feat> order = kind == ChangeKind::segregation
                                      ? std::vector<Feat>{pre_seg, pre_mob, bridge, centr}
                                      : std::vector<Feat>{pre_mob, pre_seg, bridge, centr};

  std::vector<std::vector<double>> std_cols;
  std::vector<std::string> names;
  for (const Feat& f : order) {
    std::vector<double> col;
    col.reserve(rows.size());
    for (const SectorFeatures* r : rows) col.push_back(f.get(*r));
    std_cols.push_back(standardize(col));
    names.emplace_back(f.name);
  }

  std::vector<RegressionTable> specs;
  for (int s = 1; s <= 4; ++s) {
    std::vector<std::vector<double>> x(std_cols.begin(), std_cols.begin() + s);
    std::vector<std::string> nm(names.begin(), names.begin() + s);
    specs.push_back(ols_fit(y, x, std::move(nm)));
  }
  return specs;
}

PairedTestResult wilcoxon_signed_rank(std::span<const std::pair<double, double>> pairs,
                                      int exact_max) {
  std::vector<double> d;
  d.reserve(pairs.size());
  for (const auto& [a, b] : pairs)
    if (a != b) d.push_back(a - b);
  const int n = static_cast<int>(d.size());
  if (n < 5) throw std::invalid_argument("wilcoxon needs at least 5 nonzero differences");

  std::vector<double> absd(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) absd[i] = std::abs(d[i]);
  const std::vector<double> ranks = average_ranks(absd);

  double w = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] > 0.0) w += ranks[i];

  const double mu = n * (n + 1) / 4.0;
  const double sigma = std::sqrt(n * (n + 1) * (2.0 * n + 1) / 24.0);
  const double z = (w - mu) / sigma;

  PairedTestResult res;
  res.statistic_w = w;
  res.n_effective = n;
  res.effect_r = std::abs(z) / std::sqrt(static_cast<double>(n));

  if (n <= exact_max) {
    // Doubled ranks are integers even with tie halves, so the full null
    // distribution over all 2^n sign assignments is an exact integer count.
    std::vector<long long> dr(d.size());
    long long total = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      dr[i] = std::llround(2.0 * ranks[i]);
      total += dr[i];
    }
    std::vector<std::uint64_t> count(static_cast<std::size_t>(total) + 1, 0);
    count[0] = 1;
    for (long long step : dr)
      for (long long s = total; s >= step; --s) count[s] += count[s - step];
    const long long tw = std::llround(2.0 * w);
    std::uint64_t le = 0, ge = 0;
    for (long long s = 0; s <= total; ++s) {
      if (s <= tw) le += count[s];
      if (s >= tw) ge += count[s];
    }
    const double denom = std::ldexp(1.0, n);  // 2^n, exact
    res.p_two_sided = std::min(1.0, 2.0 * static_cast<double>(std::min(le, ge)) / denom);
    res.exact = true;
  } else {
    res.p_two_sided = std::erfc(std::abs(z) / std::sqrt(2.0));
    res.exact = false;
  }
  return res;
}

BridgeResult bridge_index(const Dataset& ds, int sector, double radius_km) {
  if (!(radius_km > 0.0)) throw std::invalid_argument("catchment radius must be positive");
  std::vector<int> members;
  for (int v = 0; v < ds.n_venues(); ++v)
    if (ds.venues[v].sector == sector) members.push_back(v);
  if (members.empty()) throw std::invalid_argument("sector has no venues");

  std::vector<double> score(members.size(), -1.0);  // -1 marks an empty catchment
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(members.size()); ++idx) {
    const Venue& venue = ds.venues[members[static_cast<std::size_t>(idx)]];
    const GeoPoint vp{venue.lat, venue.lon};
    std::vector<long long> pop(ds.n_groups, 0);
    long long total = 0;
    for (const Cbg& c : ds.cbgs) {
      if (haversine_km(vp, {c.lat, c.lon}) <= radius_km) {
        pop[c.income_group] += c.population;
        total += c.population;
      }
    }
    if (total > 0) score[static_cast<std::size_t>(idx)] = 1.0 - segregation_index(pop);
  }

  BridgeResult out;
  double sum = 0.0;
  long long counted = 0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (score[i] < 0.0) {
      out.excluded_venues.push_back(members[i]);
    } else {
      sum += score[i];
      ++counted;
    }
  }
  if (counted > 0) out.value = sum / static_cast<double>(counted);
  return out;
}

}  // namespace resil
