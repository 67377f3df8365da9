#include "resil/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace resil {

double segregation_index(std::span<const long long> group_counts) {
  const int n = static_cast<int>(group_counts.size());
  if (n < 2) throw std::invalid_argument("segregation_index needs at least 2 groups");
  long long total = 0;
  for (long long c : group_counts) total += c;
  if (total <= 0) throw std::invalid_argument("segregation_index needs a positive visit total");
  // tau * sum |c_i/total - 1/n| == sum |n*c_i - total| / (2*(n-1)*total).  The right-hand
  // numerator is an exact integer, so the whole index rounds once: uniform counts give an
  // exact 0.0 and a single nonzero group gives an exact 1.0.
  long long num = 0;
  for (long long c : group_counts) num += std::llabs(n * c - total);
  return static_cast<double>(num) / (2.0 * (n - 1) * static_cast<double>(total));
}

double relative_change(double before, double now) { return (now - before) / before; }

OutcomeReport compute_outcomes(const Dataset& ds) {
  const int nv = ds.n_venues();
  std::vector<VenueOutcome> all(nv);
  std::vector<int> status(nv, 0);  // 0 ok, 1 no pre, 2 no shock, 3 neither

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int v = 0; v < nv; ++v) {
    std::vector<long long> groups[kPeriods];
    long long totals[kPeriods] = {0, 0};
    for (int p = 0; p < kPeriods; ++p) {
      groups[p].assign(ds.n_groups, 0);
      for (const VisitEdge& e : ds.venue_edges(v, static_cast<Period>(p))) {
        groups[p][ds.cbgs[e.cbg].income_group] += e.count;
        totals[p] += e.count;
      }
    }
    if (totals[0] <= 0 || totals[1] <= 0) {
      status[v] = (totals[0] <= 0 ? 1 : 0) | (totals[1] <= 0 ? 2 : 0);
      continue;
    }
    VenueOutcome& o = all[v];
    o.venue = v;
    o.s_pre = segregation_index(groups[0]);
    o.s_in = segregation_index(groups[1]);
    if (o.s_pre != 0.0) o.delta_s = relative_change(o.s_pre, o.s_in);
    o.m_pre = totals[0];
    o.m_in = totals[1];
    o.delta_m = relative_change(static_cast<double>(totals[0]), static_cast<double>(totals[1]));
  }

  OutcomeReport report;
  for (int v = 0; v < nv; ++v) {
    switch (status[v]) {
      case 0:
        report.outcomes.push_back(all[v]);
        break;
      case 1:
        report.exclusions.push_back({v, "no pre-shock visits"});
        break;
      case 2:
        report.exclusions.push_back({v, "no in-shock visits"});
        break;
      default:
        report.exclusions.push_back({v, "no visits in either period"});
        break;
    }
  }
  return report;
}

std::vector<SectorBandShare> sector_band_share(const Dataset& ds,
                                               std::span<const VenueOutcome> outcomes,
                                               ChangeField field, BandSide side, double band) {
  if (!(band > 0.0 && band <= 1.0)) throw std::invalid_argument("band must be in (0, 1]");

  std::vector<std::pair<double, int>> ranked;  // (value, venue)
  ranked.reserve(outcomes.size());
  for (const VenueOutcome& o : outcomes) {
    if (field == ChangeField::delta_m)
      ranked.emplace_back(o.delta_m, o.venue);
    else if (o.delta_s)
      ranked.emplace_back(*o.delta_s, o.venue);
  }
  const long long n = static_cast<long long>(ranked.size());
  // ceil(band * n) with a guard against products like 0.2*100 landing a hair
  // above the exact integer.
  const long long k =
      std::min<long long>(n, static_cast<long long>(std::ceil(band * static_cast<double>(n) - 1e-9)));

  std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return side == BandSide::highest ? a.first > b.first : a.first < b.first;
    return ds.venues[a.second].id < ds.venues[b.second].id;
  });

  std::vector<long long> total(ds.n_sectors(), 0);
  std::vector<long long> marked(ds.n_sectors(), 0);
  for (long long i = 0; i < n; ++i) {
    const int s = ds.venues[ranked[i].second].sector;
    ++total[s];
    if (i < k) ++marked[s];
  }

  // Sectors with no defined value still get a row (share 0, count 0) so a
  // consumer can filter on venue_count instead of guessing at missing keys.
  std::vector<SectorBandShare> out;
  for (int s = 0; s < ds.n_sectors(); ++s) {
    const double share = total[s] > 0 ? static_cast<double>(marked[s]) / total[s] : 0.0;
    out.push_back({s, total[s], marked[s], share});
  }
  return out;
}

}  // namespace resil
