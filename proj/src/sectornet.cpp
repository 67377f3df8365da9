#include "resil/sectornet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "resil/rng.hpp"

namespace resil {

PreferenceMatrix preference_matrix(const Dataset& ds, Period p) {
  PreferenceMatrix out;

  std::vector<long long> sector_totals(ds.n_sectors(), 0);
  std::vector<long long> cbg_totals(ds.n_cbgs(), 0);
  for (const VisitEdge& e : ds.edges) {
    if (e.period != p) continue;
    sector_totals[ds.venues[e.venue].sector] += e.count;
    cbg_totals[e.cbg] += e.count;
  }
  for (int s = 0; s < ds.n_sectors(); ++s)
    (sector_totals[s] > 0 ? out.sector_cols : out.dropped_sectors).push_back(s);
  for (int c = 0; c < ds.n_cbgs(); ++c)
    if (cbg_totals[c] > 0) out.cbg_rows.push_back(c);

  for (int c : out.cbg_rows) {
    out.row_totals.push_back(cbg_totals[c]);
    out.grand_total += cbg_totals[c];
  }
  if (out.grand_total == 0) throw std::invalid_argument("no visits in the requested period");

  std::vector<int> col_of_sector(ds.n_sectors(), -1);
  for (std::size_t j = 0; j < out.sector_cols.size(); ++j) col_of_sector[out.sector_cols[j]] = static_cast<int>(j);

  const std::size_t cols = out.sector_cols.size();
  out.r.assign(out.cbg_rows.size() * cols, 0.0);
  const double grand = static_cast<double>(out.grand_total);

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::ptrdiff_t row = 0; row < static_cast<std::ptrdiff_t>(out.cbg_rows.size()); ++row) {
    const int c = out.cbg_rows[static_cast<std::size_t>(row)];
    const double t_m = static_cast<double>(cbg_totals[c]);
    double* dst = out.r.data() + static_cast<std::size_t>(row) * cols;
    for (std::uint32_t eid : ds.cbg_edge_ids(c, p)) {
      const VisitEdge& e = ds.edges[eid];
      const int j = col_of_sector[ds.venues[e.venue].sector];
      // R = (v/t_m) / (s_total/grand); accumulate v first, scale below.
      dst[j] += static_cast<double>(e.count);
    }
    for (std::size_t j = 0; j < cols; ++j)
      dst[j] = dst[j] / t_m * grand / static_cast<double>(sector_totals[out.sector_cols[j]]);
  }
  return out;
}

ProximityResult proximity(const PreferenceMatrix& pref) {
  const std::size_t rows = pref.cbg_rows.size();
  const std::size_t all_cols = pref.sector_cols.size();
  const std::size_t words = (rows + 63) / 64;

  // One bitset over CBG rows per sector: proximity reduces to popcounts of
  // pairwise intersections.
  std::vector<std::uint64_t> bits(all_cols * words, 0);
  std::vector<long long> pref_count(all_cols, 0);
  for (std::size_t row = 0; row < rows; ++row)
    for (std::size_t j = 0; j < all_cols; ++j)
      if (pref.preferred(row, j)) {
        bits[j * words + row / 64] |= 1ull << (row % 64);
        ++pref_count[j];
      }

  ProximityResult out;
  std::vector<std::size_t> kept_cols;
  for (std::size_t j = 0; j < all_cols; ++j) {
    if (pref_count[j] > 0) {
      kept_cols.push_back(j);
      out.sectors.push_back(pref.sector_cols[j]);
    } else {
      out.excluded_sectors.push_back(pref.sector_cols[j]);
    }
  }

  const std::size_t n = kept_cols.size();
  out.p.assign(n * n, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const std::uint64_t* bi = bits.data() + kept_cols[static_cast<std::size_t>(i)] * words;
    for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n; ++j) {
      const std::uint64_t* bj = bits.data() + kept_cols[j] * words;
      long long inter = 0;
      for (std::size_t w = 0; w < words; ++w) inter += std::popcount(bi[w] & bj[w]);
      // max of the two conditionals = intersection over the smaller base.
      const long long base = std::min(pref_count[kept_cols[static_cast<std::size_t>(i)]],
                                      pref_count[kept_cols[j]]);
      const double v = static_cast<double>(inter) / static_cast<double>(base);
      out.p[static_cast<std::size_t>(i) * n + j] = v;
      out.p[j * n + static_cast<std::size_t>(i)] = v;
    }
  }
  return out;
}

CentralityResult eigenvector_centrality(std::span<const double> sym, int n, double tol,
                                        int max_iter) {
  if (n < 2) throw std::invalid_argument("centrality needs at least 2 nodes");
  if (static_cast<int>(sym.size()) != n * n) throw std::invalid_argument("matrix size mismatch");
  double mass = 0.0;
  for (double v : sym) {
    if (v < 0.0) throw std::invalid_argument("matrix entries must be nonnegative");
    mass += v;
  }
  if (mass == 0.0) throw std::invalid_argument("centrality of an all-zero matrix");

  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> y(n);
  for (int it = 1; it <= max_iter; ++it) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < n; ++i) {
      double s = x[i];  // the +I shift
      const double* row = sym.data() + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) s += row[j] * x[j];
      y[i] = s;
    }
    double norm = 0.0;
    for (int i = 0; i < n; ++i) norm += y[i] * y[i];
    norm = std::sqrt(norm);
    double diff = 0.0;
    for (int i = 0; i < n; ++i) {
      y[i] /= norm;
      const double d = y[i] - x[i];
      diff += d * d;
    }
    x = y;
    if (std::sqrt(diff) < tol) return {std::move(x), it};
  }
  throw std::runtime_error("eigenvector centrality did not converge within max_iter");
}

SectorNetwork build_sector_network(const Dataset& ds, Period p, double tol, int max_iter) {
  const PreferenceMatrix pref = preference_matrix(ds, p);
  ProximityResult prox = proximity(pref);

  SectorNetwork net;
  net.sectors = std::move(prox.sectors);
  net.proximity = std::move(prox.p);
  net.dropped_zero_visit = pref.dropped_sectors;
  net.dropped_unpreferred = std::move(prox.excluded_sectors);

  const int n = static_cast<int>(net.sectors.size());
  CentralityResult cent = eigenvector_centrality(net.proximity, n, tol, max_iter);
  net.centrality = std::move(cent.v);
  net.iterations = cent.iterations;

  // Power iteration lands on the dominant component; nodes elsewhere decay
  // toward zero and are flagged rather than silently reported as scores.
  for (int i = 0; i < n; ++i)
    if (net.centrality[i] < 1e-8) net.weak.push_back(net.sectors[i]);
  return net;
}

CorePeripheryLabels classify_core_periphery(const Dataset& ds, const SectorNetwork& net, int k) {
  const int n = static_cast<int>(net.sectors.size());
  if (k <= 0) throw std::invalid_argument("k must be positive");
  if (2 * k > n) throw std::invalid_argument("2k exceeds the sector count");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (net.centrality[a] != net.centrality[b]) return net.centrality[a] > net.centrality[b];
    return ds.sectors[net.sectors[a]] < ds.sectors[net.sectors[b]];
  });

  CorePeripheryLabels labels;
  labels.k = k;
  for (int i = 0; i < k; ++i) labels.core.push_back(net.sectors[order[i]]);
  for (int i = n - k; i < n; ++i) labels.peripheral.push_back(net.sectors[order[i]]);
  std::sort(labels.core.begin(), labels.core.end());
  std::sort(labels.peripheral.begin(), labels.peripheral.end());
  return labels;
}

BalancedSample sample_balanced_pois(const Dataset& ds, const CorePeripheryLabels& labels,
                                    std::uint64_t seed) {
  std::vector<char> is_core(ds.n_sectors(), 0), is_peri(ds.n_sectors(), 0);
  for (int s : labels.core) is_core[s] = 1;
  for (int s : labels.peripheral) is_peri[s] = 1;

  std::vector<int> core_pool, peri_pool;
  for (int v = 0; v < ds.n_venues(); ++v) {
    if (is_core[ds.venues[v].sector]) core_pool.push_back(v);
    if (is_peri[ds.venues[v].sector]) peri_pool.push_back(v);
  }
  if (core_pool.empty() || peri_pool.empty())
    throw std::invalid_argument("both classes need at least one venue");

  const std::size_t take = std::min(core_pool.size(), peri_pool.size());
  auto down_sample = [&](std::vector<int>& pool, std::string_view stream) {
    CounterRng rng(seed, fnv1a64(stream));
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.next_below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(take);
    std::sort(pool.begin(), pool.end());
  };

  BalancedSample out;
  if (core_pool.size() > take) {
    down_sample(core_pool, "balanced-core");
    out.core_was_sampled = true;
  }
  if (peri_pool.size() > take) {
    down_sample(peri_pool, "balanced-peripheral");
    out.peripheral_was_sampled = true;
  }
  out.core_venues = std::move(core_pool);
  out.peripheral_venues = std::move(peri_pool);
  return out;
}

}  // namespace resil
