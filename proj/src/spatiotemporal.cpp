#include "resil/spatiotemporal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

#include "resil/stats.hpp"

namespace resil {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double dist2(const XY& a, const XY& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

bool in_circle(const Circle& c, const XY& p) {
  const double slack = 1e-10 * std::max(1.0, c.radius);
  const double rr = c.radius + slack;
  return dist2(c.center, p) <= rr * rr;
}

Circle circle_from(const XY& a, const XY& b) {
  const XY center{(a.x + b.x) / 2.0, (a.y + b.y) / 2.0};
  return {center, std::sqrt(dist2(center, a))};
}

Circle circle_from(const XY& a, const XY& b, const XY& c) {
  const double bx = b.x - a.x, by = b.y - a.y;
  const double cx = c.x - a.x, cy = c.y - a.y;
  const double d = 2.0 * (bx * cy - by * cx);
  const double scale = std::max({std::abs(bx), std::abs(by), std::abs(cx), std::abs(cy), 1e-30});
  if (std::abs(d) < 1e-14 * scale * scale) {
    // Collinear: the widest pair's diameter circle covers all three.
    Circle best = circle_from(a, b);
    for (const Circle& cand : {circle_from(a, c), circle_from(b, c)})
      if (cand.radius > best.radius) best = cand;
    return best;
  }
  const double b2 = bx * bx + by * by;
  const double c2 = cx * cx + cy * cy;
  const XY center{a.x + (cy * b2 - by * c2) / d, a.y + (bx * c2 - cx * b2) / d};
  return {center, std::sqrt(dist2(center, a))};
}

Circle circle_of_support(const XY* r, int nr) {
  switch (nr) {
    case 0:
      return {{0.0, 0.0}, 0.0};
    case 1:
      return {r[0], 0.0};
    case 2:
      return circle_from(r[0], r[1]);
    default:
      return circle_from(r[0], r[1], r[2]);
  }
}

Circle welzl(std::vector<XY>& pts, int n, XY* support, int nr) {
  if (n == 0 || nr == 3) return circle_of_support(support, nr);
  Circle c = welzl(pts, n - 1, support, nr);
  if (in_circle(c, pts[n - 1])) return c;
  support[nr] = pts[n - 1];
  c = welzl(pts, n - 1, support, nr + 1);
  // Move-to-front: boundary points get retested first in later calls.
  const XY p = pts[n - 1];
  for (int i = n - 1; i > 0; --i) pts[i] = pts[i - 1];
  pts[0] = p;
  return c;
}

}  // namespace

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlam = (b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlam / 2.0);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

GeoPoint coordinate_centroid(std::span<const GeoPoint> pts) {
  if (pts.empty()) throw std::invalid_argument("centroid of empty point set");
  double lat = 0.0, lon = 0.0;
  for (const GeoPoint& p : pts) {
    lat += p.lat;
    lon += p.lon;
  }
  const double n = static_cast<double>(pts.size());
  return {lat / n, lon / n};
}

XY project_local_km(const GeoPoint& p, const GeoPoint& origin) {
  const double x = kEarthRadiusKm * (p.lon - origin.lon) * kDegToRad * std::cos(origin.lat * kDegToRad);
  const double y = kEarthRadiusKm * (p.lat - origin.lat) * kDegToRad;
  return {x, y};
}

Circle min_enclosing_circle(std::span<const XY> pts) {
  if (pts.empty()) throw std::invalid_argument("minimum enclosing circle of empty point set");
  std::vector<XY> work(pts.begin(), pts.end());
  XY support[3];
  return welzl(work, static_cast<int>(work.size()), support, 0);
}

double radius_of_gyration_km(std::span<const GeoPoint> pts) {
  const GeoPoint c = coordinate_centroid(pts);
  double sq = 0.0;
  for (const GeoPoint& p : pts) {
    const double d = haversine_km(p, c);
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(pts.size()));
}

double min_enclosing_radius_km(std::span<const GeoPoint> pts) {
  const GeoPoint origin = coordinate_centroid(pts);
  std::vector<XY> proj(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) proj[i] = project_local_km(pts[i], origin);
  return min_enclosing_circle(proj).radius;
}

double spatial_entropy_bits(std::span<const GeoPoint> pts, double cell_km) {
  if (pts.empty()) throw std::invalid_argument("spatial entropy of empty point set");
  if (!(cell_km > 0.0)) throw std::invalid_argument("cell size must be positive");
  const GeoPoint origin = coordinate_centroid(pts);
  std::unordered_map<std::uint64_t, long long> cells;
  for (const GeoPoint& p : pts) {
    const XY q = project_local_km(p, origin);
    // Half-cell shift centers a cell on the centroid, so a tight cluster
    // occupies one cell instead of straddling the grid lines that would
    // otherwise cross exactly there.
    const auto cx = static_cast<std::int32_t>(std::floor(q.x / cell_km + 0.5));
    const auto cy = static_cast<std::int32_t>(std::floor(q.y / cell_km + 0.5));
    const std::uint64_t key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cx)) << 32) |
                              static_cast<std::uint32_t>(cy);
    ++cells[key];
  }
  std::vector<long long> counts;
  counts.reserve(cells.size());
  for (const auto& [key, c] : cells) counts.push_back(c);
  return shannon_entropy_bits(counts);
}

double shannon_entropy_bits(std::span<const long long> counts) {
  long long total = 0;
  for (long long c : counts) total += c;
  if (total <= 0) throw std::invalid_argument("entropy needs a positive total count");
  double h = 0.0;
  for (long long c : counts) {
    if (c <= 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

SpatialStats spatial_stats(std::span<const GeoPoint> pts, double cell_km) {
  return {radius_of_gyration_km(pts), min_enclosing_radius_km(pts),
          spatial_entropy_bits(pts, cell_km)};
}

VenueVisitStats venue_visit_stats(const Dataset& ds, int venue, Period p) {
  VenueVisitStats out;
  const GeoPoint vp{ds.venues[venue].lat, ds.venues[venue].lon};
  std::vector<std::pair<double, long long>> dist_weight;
  long long covered = 0;
  for (const VisitEdge& e : ds.venue_edges(venue, p)) {
    const GeoPoint cp{ds.cbgs[e.cbg].lat, ds.cbgs[e.cbg].lon};
    dist_weight.emplace_back(haversine_km(vp, cp), e.count);
    ++covered;
  }
  out.covered_cbgs = static_cast<double>(covered);
  if (!dist_weight.empty()) out.distance_km = weighted_median(std::move(dist_weight));
  const int pi = static_cast<int>(p);
  if (ds.venues[venue].dwell_min[pi]) out.dwell_min = *ds.venues[venue].dwell_min[pi];
  if (ds.venues[venue].hourly[pi]) {
    const auto& h = *ds.venues[venue].hourly[pi];
    long long total = 0;
    for (long long c : h) total += c;
    if (total > 0) out.hourly_entropy_bits = shannon_entropy_bits(h);
  }
  return out;
}

VisitationStats visitation_stats(const Dataset& ds, std::span<const int> venue_set, Period p) {
  if (venue_set.empty()) throw std::invalid_argument("visitation stats of empty venue set");
  std::vector<VenueVisitStats> per(venue_set.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(venue_set.size()); ++i)
    per[static_cast<std::size_t>(i)] = venue_visit_stats(ds, venue_set[static_cast<std::size_t>(i)], p);

  std::vector<double> dist, cover, dwell, hourly;
  for (const VenueVisitStats& s : per) {
    cover.push_back(s.covered_cbgs);
    if (s.distance_km) dist.push_back(*s.distance_km);
    if (s.dwell_min) dwell.push_back(*s.dwell_min);
    if (s.hourly_entropy_bits) hourly.push_back(*s.hourly_entropy_bits);
  }
  VisitationStats out;
  out.covered_cbgs = median(std::move(cover));
  if (!dist.empty()) out.median_distance_km = median(std::move(dist));
  if (!dwell.empty()) out.median_dwell_min = median(std::move(dwell));
  if (!hourly.empty()) out.hourly_entropy_bits = median(std::move(hourly));
  return out;
}

}  // namespace resil
