#include "resil/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace resil::oracle {

ProximityOracle proximity_exhaustive(const std::vector<std::vector<bool>>& preferred) {
  const std::size_t rows = preferred.size();
  const std::size_t cols = rows == 0 ? 0 : preferred[0].size();

  std::vector<std::vector<std::size_t>> sets(cols);
  for (std::size_t m = 0; m < rows; ++m) {
    if (preferred[m].size() != cols) throw std::invalid_argument("ragged preference matrix");
    for (std::size_t j = 0; j < cols; ++j)
      if (preferred[m][j]) sets[j].push_back(m);
  }

  ProximityOracle out;
  for (std::size_t j = 0; j < cols; ++j)
    if (!sets[j].empty()) out.kept_cols.push_back(static_cast<int>(j));

  const std::size_t n = out.kept_cols.size();
  out.p.assign(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      const auto& si = sets[out.kept_cols[a]];
      const auto& sj = sets[out.kept_cols[b]];
      std::size_t inter = 0;
      for (std::size_t m : si) inter += std::count(sj.begin(), sj.end(), m);
      const double p_a_given_b = static_cast<double>(inter) / static_cast<double>(sj.size());
      const double p_b_given_a = static_cast<double>(inter) / static_cast<double>(si.size());
      out.p[a * n + b] = std::max(p_a_given_b, p_b_given_a);
    }
  }
  return out;
}

std::vector<double> dominant_eigenvector_jacobi(std::vector<double> a, int n) {
  if (n <= 0 || static_cast<int>(a.size()) != n * n) throw std::invalid_argument("bad matrix");
  std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a[static_cast<std::size_t>(p) * n + q] * a[static_cast<std::size_t>(p) * n + q];
    if (off < 1e-26) break;

    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a[static_cast<std::size_t>(p) * n + q];
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a[static_cast<std::size_t>(q) * n + q] - a[static_cast<std::size_t>(p) * n + p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[static_cast<std::size_t>(k) * n + p];
          const double akq = a[static_cast<std::size_t>(k) * n + q];
          a[static_cast<std::size_t>(k) * n + p] = c * akp - s * akq;
          a[static_cast<std::size_t>(k) * n + q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[static_cast<std::size_t>(p) * n + k];
          const double aqk = a[static_cast<std::size_t>(q) * n + k];
          a[static_cast<std::size_t>(p) * n + k] = c * apk - s * aqk;
          a[static_cast<std::size_t>(q) * n + k] = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v[static_cast<std::size_t>(k) * n + p];
          const double vkq = v[static_cast<std::size_t>(k) * n + q];
          v[static_cast<std::size_t>(k) * n + p] = c * vkp - s * vkq;
          v[static_cast<std::size_t>(k) * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  int best = 0;
  for (int i = 1; i < n; ++i)
    if (a[static_cast<std::size_t>(i) * n + i] > a[static_cast<std::size_t>(best) * n + best]) best = i;

  std::vector<double> vec(n);
  for (int i = 0; i < n; ++i) vec[i] = v[static_cast<std::size_t>(i) * n + best];
  int big = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(vec[i]) > std::abs(vec[big])) big = i;
  double norm = 0.0;
  for (double x : vec) norm += x * x;
  norm = std::sqrt(norm);
  const double sign = vec[big] < 0.0 ? -1.0 : 1.0;
  for (double& x : vec) x = x * sign / norm;
  return vec;
}

WilcoxonCounts wilcoxon_enumerate(const std::vector<double>& ranks, double w) {
  const int n = static_cast<int>(ranks.size());
  if (n > 30) throw std::invalid_argument("enumeration limited to n <= 30");
  // Doubled ranks are exact integers (ties contribute halves).
  std::vector<long long> dr(ranks.size());
  for (std::size_t i = 0; i < ranks.size(); ++i) dr[i] = std::llround(2.0 * ranks[i]);
  const long long tw = std::llround(2.0 * w);
  const std::uint64_t total = 1ull << n;

  std::uint64_t le = 0, ge = 0;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(+ : le, ge)
#endif
  for (std::int64_t mask = 0; mask < static_cast<std::int64_t>(total); ++mask) {
    long long s = 0;
    for (int i = 0; i < n; ++i)
      if (mask & (1ll << i)) s += dr[i];
    if (s <= tw) ++le;
    if (s >= tw) ++ge;
  }
  return {le, ge, total};
}

std::vector<SimpleOutcome> outcomes_by_maps(const Dataset& ds) {
  // venue id -> period -> income group -> count, straight off the edge list.
  std::map<std::string, std::map<int, std::map<int, long long>>> counts;
  for (const VisitEdge& e : ds.edges)
    counts[ds.venues[e.venue].id][static_cast<int>(e.period)][ds.cbgs[e.cbg].income_group] +=
        e.count;

  auto seg = [&](const std::map<int, long long>& by_group) {
    long long total = 0;
    for (const auto& [g, c] : by_group) total += c;
    const int n = ds.n_groups;
    double sum = 0.0;
    for (int g = 0; g < n; ++g) {
      const auto it = by_group.find(g);
      const double share = it == by_group.end() ? 0.0 : static_cast<double>(it->second) / total;
      sum += std::abs(share - 1.0 / n);
    }
    return n * sum / (2.0 * (n - 1));
  };

  std::vector<SimpleOutcome> out;
  for (const auto& [venue_id, by_period] : counts) {
    const auto pre = by_period.find(0);
    const auto in = by_period.find(1);
    if (pre == by_period.end() || in == by_period.end()) continue;
    SimpleOutcome o;
    o.venue_id = venue_id;
    for (const auto& [g, c] : pre->second) o.m_pre += c;
    for (const auto& [g, c] : in->second) o.m_in += c;
    if (o.m_pre == 0 || o.m_in == 0) continue;
    o.s_pre = seg(pre->second);
    o.s_in = seg(in->second);
    if (o.s_pre > 0.0) {
      o.has_delta_s = true;
      o.delta_s = (o.s_in - o.s_pre) / o.s_pre;
    }
    o.delta_m = (static_cast<double>(o.m_in) - static_cast<double>(o.m_pre)) / static_cast<double>(o.m_pre);
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<double> ols_coefficients_gauss_jordan(const std::vector<double>& y,
                                                  const std::vector<std::vector<double>>& x_columns) {
  const int n = static_cast<int>(y.size());
  const int m = static_cast<int>(x_columns.size()) + 1;
  auto z = [&](int j, int r) -> double { return j == 0 ? 1.0 : x_columns[j - 1][r]; };

  std::vector<double> a(static_cast<std::size_t>(m) * m, 0.0);
  std::vector<double> b(m, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (int r = 0; r < n; ++r) s += z(i, r) * z(j, r);
      a[static_cast<std::size_t>(i) * m + j] = s;
    }
    for (int r = 0; r < n; ++r) b[i] += z(i, r) * y[r];
  }

  // Gauss-Jordan with partial pivoting on the augmented system.
  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int r = col + 1; r < m; ++r)
      if (std::abs(a[static_cast<std::size_t>(r) * m + col]) > std::abs(a[static_cast<std::size_t>(piv) * m + col])) piv = r;
    if (std::abs(a[static_cast<std::size_t>(piv) * m + col]) < 1e-12)
      throw std::invalid_argument("singular normal equations");
    if (piv != col) {
      for (int j = 0; j < m; ++j)
        std::swap(a[static_cast<std::size_t>(piv) * m + j], a[static_cast<std::size_t>(col) * m + j]);
      std::swap(b[piv], b[col]);
    }
    const double d = a[static_cast<std::size_t>(col) * m + col];
    for (int j = 0; j < m; ++j) a[static_cast<std::size_t>(col) * m + j] /= d;
    b[col] /= d;
    for (int r = 0; r < m; ++r) {
      if (r == col) continue;
      const double f = a[static_cast<std::size_t>(r) * m + col];
      if (f == 0.0) continue;
      for (int j = 0; j < m; ++j)
        a[static_cast<std::size_t>(r) * m + j] -= f * a[static_cast<std::size_t>(col) * m + j];
      b[r] -= f * b[col];
    }
  }
  return b;
}

double mec_radius_brute(const std::vector<XY>& pts) {
  const std::size_t n = pts.size();
  if (n == 0) throw std::invalid_argument("empty point set");
  if (n == 1) return 0.0;
  const double eps = 1e-9;

  auto contains_all = [&](double cx, double cy, double r) {
    for (const XY& p : pts) {
      const double dx = p.x - cx;
      const double dy = p.y - cy;
      if (std::sqrt(dx * dx + dy * dy) > r + eps) return false;
    }
    return true;
  };

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double cx = (pts[i].x + pts[j].x) / 2.0;
      const double cy = (pts[i].y + pts[j].y) / 2.0;
      const double r = std::hypot(pts[i].x - cx, pts[i].y - cy);
      if (r < best && contains_all(cx, cy, r)) best = r;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        const double bx = pts[j].x - pts[i].x, by = pts[j].y - pts[i].y;
        const double cx = pts[k].x - pts[i].x, cy = pts[k].y - pts[i].y;
        const double d = 2.0 * (bx * cy - by * cx);
        if (std::abs(d) < 1e-14) continue;
        const double b2 = bx * bx + by * by;
        const double c2 = cx * cx + cy * cy;
        const double ux = pts[i].x + (cy * b2 - by * c2) / d;
        const double uy = pts[i].y + (bx * c2 - cx * b2) / d;
        const double r = std::hypot(pts[i].x - ux, pts[i].y - uy);
        if (r < best && contains_all(ux, uy, r)) best = r;
      }
    }
  }
  return best;
}

}  // namespace resil::oracle
