#include "resil/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "resil/ingest.hpp"
#include "resil/rng.hpp"
#include "resil/spatiotemporal.hpp"

namespace resil {
namespace {

// City frame and response-shape constants. The planted signal must survive
// the pipeline's estimators with margin but stay noisy enough that the null
// world (budget_contraction = 1) is genuinely null.
constexpr double kLat0 = 40.0;
constexpr double kLon0 = -75.0;
constexpr double kHalfSpanKm = 15.0;
constexpr double kPopMedian = 1500.0;
constexpr double kPopSpread = 0.35;
constexpr double kIncomeBase = 60000.0;
constexpr double kIncomeNoise = 0.4;
constexpr double kIncomeGradient = 0.8;    // east-west income tilt
constexpr double kSectorWeightNoise = 0.3; // sector size heterogeneity
constexpr double kBreadthNoise = 0.3;      // decouples pre-shock niche width from coreness
constexpr double kNicheJitter = 0.5;       // idiosyncratic taste on top of the income niche
constexpr double kSharpen = 2.4;           // in-shock niche sharpening of peripheral sectors
constexpr double kVenueQualityNoise = 0.3;
constexpr double kDampGamma = 2.0;         // extra in-shock suppression of peripheral demand
constexpr double kLambdaCoreKm = 3.0;      // gravity range of the most core sector
constexpr double kLambdaSpanKm = 7.0;      // peripheral sectors reach this much farther
constexpr double kDwellCoreMin = 25.0;
constexpr double kDwellSpanMin = 40.0;
constexpr double kDwellNoise = 0.08;
constexpr double kHourlyKappaMax = 3.0;    // peakedness of peripheral hourly profiles

std::string padded_id(char prefix, int value, int count) {
  int width = 2;
  for (long long bound = 100; bound < count; bound *= 10) ++width;
  std::string digits = std::to_string(value);
  return prefix + std::string(static_cast<std::size_t>(width) - digits.size(), '0') + digits;
}

// Largest-remainder apportionment of `total` slots by weight, each bucket
// getting at least one slot.
std::vector<int> apportion(const std::vector<double>& weights, int total) {
  const int n = static_cast<int>(weights.size());
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<int> out(n, 1);
  std::vector<std::pair<double, int>> frac(n);
  int used = n;
  for (int i = 0; i < n; ++i) {
    const double share = weights[i] / wsum * (total - n);
    out[i] += static_cast<int>(share);
    used += static_cast<int>(share);
    frac[i] = {share - std::floor(share), i};
  }
  std::sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int i = 0; used < total; ++used, ++i) ++out[frac[i % n].second];
  return out;
}

}  // namespace

SynthCity generate_city(const SynthConfig& cfg) {
  if (cfg.n_cbgs < 2 || cfg.n_sectors < 2 || cfg.n_venues < cfg.n_sectors)
    throw std::invalid_argument("infeasible synth config: need >= 2 CBGs/sectors and >= 1 venue per sector");
  if (!(cfg.core_fraction > 0.0 && cfg.core_fraction < 1.0))
    throw std::invalid_argument("core_fraction must be in (0,1)");
  if (!(cfg.budget_contraction > 0.0 && cfg.budget_contraction <= 1.0))
    throw std::invalid_argument("budget_contraction must be in (0,1]");
  if (!(cfg.niche_affinity >= 0.0)) throw std::invalid_argument("niche_affinity must be nonnegative");

  const int ns = cfg.n_sectors;
  const int nc = cfg.n_cbgs;
  const int nv = cfg.n_venues;
  const std::uint64_t seed = cfg.seed;

  SynthCity city;
  Dataset& ds = city.dataset;

  // Sectors with planted coreness descending in index.
  std::vector<double> coreness(ns);
  for (int i = 0; i < ns; ++i) coreness[i] = 1.0 - static_cast<double>(i) / (ns - 1);
  ds.sectors.resize(ns);
  for (int i = 0; i < ns; ++i) ds.sectors[i] = padded_id('S', i, ns);

  // Sector demand weight (size), income-niche strength and direction, and the
  // in-shock response. Peripheral (low coreness) sectors target an income
  // tail; during the shock their demand is damped and their niche sharpens —
  // the habitual tail keeps coming while the marginal, diverse visitors drop
  // off. Both shock terms vanish when budget_contraction is 1, so that world
  // is exchangeable across periods up to resampling noise.
  std::vector<double> weight(ns), sigma(ns), niche_dir(ns), sharpen(ns), shock_scale(ns),
      lambda_km(ns);
  {
    // E[exp(s(q + jitter z))] for q ~ U[-1,1], z ~ N(0,1): sharpened utilities
    // are divided by this so sharpening tilts a sector's clientele without
    // changing its expected city-wide mass — volume loss stays keyed to the
    // damping alone.
    const auto tilt_norm = [](double s) {
      const double base = std::abs(s) < 1e-9 ? 1.0 : std::sinh(s) / s;
      return base * std::exp(0.5 * (s * kNicheJitter) * (s * kNicheJitter));
    };
    CounterRng wrng(seed, fnv1a64("sector-weight"));
    CounterRng brng(seed, fnv1a64("sector-breadth"));
    for (int i = 0; i < ns; ++i) {
      sigma[i] = cfg.niche_affinity * (1.0 - coreness[i]) * std::exp(kBreadthNoise * brng.next_normal());
      // Dividing by the niche mass factor makes expected sector size (and so
      // expected visits per venue) independent of niche width; otherwise the
      // small-count bias of relative changes would itself track coreness.
      weight[i] = std::exp(kSectorWeightNoise * wrng.next_normal()) / tilt_norm(sigma[i]);
      niche_dir[i] = (brng.next_u64() & 1) ? 1.0 : -1.0;
      sharpen[i] = 1.0 + kSharpen * (1.0 - cfg.budget_contraction) * (1.0 - coreness[i]);
      const double damp = std::pow(cfg.budget_contraction, kDampGamma * (1.0 - coreness[i]));
      shock_scale[i] = damp * tilt_norm(sigma[i]) / tilt_norm(sigma[i] * sharpen[i]);
      lambda_km[i] = kLambdaCoreKm + kLambdaSpanKm * (1.0 - coreness[i]);
    }
  }

  // Venues: counts per sector by size-weighted apportionment, locations
  // uniform over the city square, per-venue quality noise.
  // Venue counts are independent of coreness so expected visits per venue are
  // flat across sectors; a coreness-keyed count would push the small-count
  // bias of relative changes into the planted gradient.
  std::vector<double> count_weight(ns);
  {
    CounterRng rng(seed, fnv1a64("sector-venues"));
    for (int i = 0; i < ns; ++i) count_weight[i] = std::exp(0.15 * rng.next_normal());
  }
  const std::vector<int> venues_per_sector = apportion(count_weight, nv);

  const double dlat_per_km = 1.0 / (kEarthRadiusKm * std::numbers::pi / 180.0);
  const double dlon_per_km = dlat_per_km / std::cos(kLat0 * std::numbers::pi / 180.0);

  ds.venues.resize(nv);
  std::vector<double> quality(nv);
  std::vector<int> venue_sector(nv);
  {
    int v = 0;
    for (int i = 0; i < ns; ++i)
      for (int k = 0; k < venues_per_sector[i]; ++k) venue_sector[v++] = i;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int v = 0; v < nv; ++v) {
    CounterRng rng(seed, fnv1a64("venue") ^ mix64(static_cast<std::uint64_t>(v)));
    Venue& ven = ds.venues[v];
    ven.id = padded_id('V', v, nv);
    ven.sector = venue_sector[v];
    ven.lat = kLat0 + (rng.next_unit() - 0.5) * 2.0 * kHalfSpanKm * dlat_per_km;
    ven.lon = kLon0 + (rng.next_unit() - 0.5) * 2.0 * kHalfSpanKm * dlon_per_km;
    quality[v] = std::exp(kVenueQualityNoise * rng.next_normal());
    const double dwell_base =
        (kDwellCoreMin + kDwellSpanMin * (1.0 - coreness[ven.sector])) *
        std::exp(kDwellNoise * rng.next_normal());
    ven.dwell_min[0] = dwell_base * std::exp(kDwellNoise * rng.next_normal());
    ven.dwell_min[1] = dwell_base * std::exp(kDwellNoise * rng.next_normal());
  }

  // CBGs: location, population, income with an east-west gradient so the
  // bridge covariate has real spatial variation.
  ds.cbgs.resize(nc);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int m = 0; m < nc; ++m) {
    CounterRng rng(seed, fnv1a64("cbg") ^ mix64(static_cast<std::uint64_t>(m)));
    Cbg& c = ds.cbgs[m];
    c.id = padded_id('C', m, nc);
    const double ux = rng.next_unit();
    c.lat = kLat0 + (rng.next_unit() - 0.5) * 2.0 * kHalfSpanKm * dlat_per_km;
    c.lon = kLon0 + (ux - 0.5) * 2.0 * kHalfSpanKm * dlon_per_km;
    c.population =
        std::max<long long>(200, std::llround(kPopMedian * std::exp(kPopSpread * rng.next_normal())));
    c.median_income = kIncomeBase * std::exp(kIncomeNoise * rng.next_normal() +
                                             kIncomeGradient * (ux - 0.5));
  }

  // Income rank of each CBG mapped onto [-1, 1]: the axis sector niches
  // point along.
  std::vector<double> income_q(nc);
  {
    std::vector<int> order(nc);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (ds.cbgs[a].median_income != ds.cbgs[b].median_income)
        return ds.cbgs[a].median_income < ds.cbgs[b].median_income;
      return a < b;
    });
    for (int r = 0; r < nc; ++r)
      income_q[order[r]] = nc > 1 ? 2.0 * r / (nc - 1.0) - 1.0 : 0.0;
  }

  // Visits. Each CBG spends an integer trip budget per period: a sector is
  // chosen by utility share, then a venue within the sector by quality x
  // distance gravity. Every draw comes from a stream keyed by (cbg, period),
  // so CBGs are independent and parallel.
  std::vector<std::vector<VisitEdge>> edges_by_cbg(nc);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int m = 0; m < nc; ++m) {
    const GeoPoint home{ds.cbgs[m].lat, ds.cbgs[m].lon};

    // Venue gravity cumulative weights, blocked by sector.
    std::vector<double> venue_cum(nv);
    std::vector<std::size_t> sector_begin(ns + 1, 0);
    {
      std::size_t pos = 0;
      for (int i = 0; i < ns; ++i) {
        sector_begin[i] = pos;
        pos += static_cast<std::size_t>(venues_per_sector[i]);
      }
      sector_begin[ns] = pos;
    }
    {
      double cum = 0.0;  // cumulative across all venues; sector blocks are slices
      for (int i = 0; i < ns; ++i) {
        for (std::size_t v = sector_begin[i]; v < sector_begin[i + 1]; ++v) {
          const double d = haversine_km(home, {ds.venues[v].lat, ds.venues[v].lon});
          cum += quality[v] * std::exp(-d / lambda_km[i]);
          venue_cum[v] = cum;
        }
      }
    }

    CounterRng arng(seed, fnv1a64("affinity") ^ mix64(static_cast<std::uint64_t>(m)));
    std::vector<double> z(ns);
    for (int i = 0; i < ns; ++i) z[i] = arng.next_normal();

    // Trips lost to damped sectors are not reallocated: the in-shock budget
    // shrinks with the CBG's own surviving utility (capped at the pre level),
    // so an undamped core sector keeps its expected visit counts while
    // peripheral ones lose both volume and visitor diversity.
    const long long budget_pre = std::max<long long>(60, (2 * ds.cbgs[m].population) / 3);
    double sum_pre = 1.0;
    std::vector<long long> tally(nv);
    for (int p = 0; p < kPeriods; ++p) {
      std::vector<double> sector_cum(ns);
      double cum = 0.0;
      for (int i = 0; i < ns; ++i) {
        const double sig = sigma[i] * (p == 0 ? 1.0 : sharpen[i]);
        const double a = weight[i] * (p == 0 ? 1.0 : shock_scale[i]) *
                         std::exp(sig * (niche_dir[i] * income_q[m] + kNicheJitter * z[i]));
        cum += a;
        sector_cum[i] = cum;
      }
      if (p == 0) sum_pre = cum;
      const long long budget =
          p == 0 ? budget_pre
                 : std::llround(static_cast<double>(budget_pre) * std::min(1.0, cum / sum_pre));

      std::fill(tally.begin(), tally.end(), 0);
      CounterRng vrng(seed, fnv1a64("visits") ^ mix64(static_cast<std::uint64_t>(m) * 2 + p));
      for (long long b = 0; b < budget; ++b) {
        const double r1 = vrng.next_unit() * cum;
        const int i = static_cast<int>(
            std::lower_bound(sector_cum.begin(), sector_cum.end(), r1) - sector_cum.begin());
        const std::size_t lo = sector_begin[i];
        const std::size_t hi = sector_begin[i + 1];
        const double base = lo == 0 ? 0.0 : venue_cum[lo - 1];
        const double r2 = base + vrng.next_unit() * (venue_cum[hi - 1] - base);
        const std::size_t v = static_cast<std::size_t>(
            std::lower_bound(venue_cum.begin() + lo, venue_cum.begin() + hi, r2) -
            venue_cum.begin());
        ++tally[std::min(v, hi - 1)];
      }
      for (int v = 0; v < nv; ++v)
        if (tally[v] > 0)
          edges_by_cbg[m].push_back({v, m, static_cast<Period>(p), tally[v]});
    }
  }
  for (int m = 0; m < nc; ++m)
    ds.edges.insert(ds.edges.end(), edges_by_cbg[m].begin(), edges_by_cbg[m].end());

  // Hourly profiles: total visits per venue spread over 24 bins around a
  // venue-specific peak hour; core sectors are flat (high entropy),
  // peripheral ones peaked. Omitted when a venue has no visits that period.
  std::vector<std::array<long long, kPeriods>> venue_totals(nv, {0, 0});
  for (const VisitEdge& e : ds.edges) venue_totals[e.venue][static_cast<int>(e.period)] += e.count;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int v = 0; v < nv; ++v) {
    CounterRng rng(seed, fnv1a64("hourly") ^ mix64(static_cast<std::uint64_t>(v)));
    const double kappa = kHourlyKappaMax * (1.0 - coreness[ds.venues[v].sector]);
    const int peak = static_cast<int>(rng.next_below(24));
    std::array<double, 24> cum;
    double c = 0.0;
    for (int h = 0; h < 24; ++h) {
      c += std::exp(kappa * std::cos(2.0 * std::numbers::pi * (h - peak) / 24.0));
      cum[h] = c;
    }
    for (int p = 0; p < kPeriods; ++p) {
      if (venue_totals[v][p] == 0) continue;
      std::array<long long, 24> bins{};
      for (long long t = 0; t < venue_totals[v][p]; ++t) {
        const double r = rng.next_unit() * c;
        const int h = static_cast<int>(std::lower_bound(cum.begin(), cum.end(), r) - cum.begin());
        ++bins[std::min(h, 23)];
      }
      ds.venues[v].hourly[p] = bins;
    }
  }

  ds.n_groups = 5;
  assign_income_groups(ds.cbgs, ds.n_groups);
  ds.build_indexes();

  GroundTruth& gt = city.truth;
  gt.sector_ids = ds.sectors;
  gt.coreness = coreness;
  const int n_core = static_cast<int>(std::ceil(cfg.core_fraction * ns));
  for (int i = 0; i < n_core; ++i) gt.planted_core.push_back(ds.sectors[i]);
  const double median_c = coreness[(ns - 1) / 2];
  for (int i = 0; i < ns; ++i) {
    const bool corish = coreness[i] >= median_c;
    gt.expected_delta_s_sign.push_back(corish ? "-" : "+");
    gt.expected_delta_m_sign.push_back(corish ? "+" : "-");
  }
  return city;
}

}  // namespace resil
