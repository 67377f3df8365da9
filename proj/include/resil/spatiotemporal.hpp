#pragma once

#include <optional>
#include <span>
#include <vector>

#include "resil/dataset.hpp"

namespace resil {

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

struct XY {
  double x = 0.0;
  double y = 0.0;
};

inline constexpr double kEarthRadiusKm = 6371.0088;

double haversine_km(const GeoPoint& a, const GeoPoint& b);

// Arithmetic mean of latitudes and longitudes; reference point for the local
// projection. Valid at metro scale (no dateline/pole handling).
GeoPoint coordinate_centroid(std::span<const GeoPoint> pts);

// Local equirectangular projection in km about `origin`:
// x = R * dlon * cos(origin.lat), y = R * dlat.
XY project_local_km(const GeoPoint& p, const GeoPoint& origin);

struct Circle {
  XY center;
  double radius = 0.0;
};

// Exact minimum enclosing circle (Welzl with move-to-front), determined by at
// most three support points; O(n) expected after warm-up, fine at desk scale.
Circle min_enclosing_circle(std::span<const XY> pts);

// Root-mean-square haversine distance from the coordinate centroid.
double radius_of_gyration_km(std::span<const GeoPoint> pts);

// Radius of the minimum enclosing circle in the local projection about the
// centroid; exact in that plane, metro-scale approximation of the sphere.
double min_enclosing_radius_km(std::span<const GeoPoint> pts);

// Shannon entropy (base 2) of point counts over a square grid of side cell_km
// in the local projection about the centroid.
double spatial_entropy_bits(std::span<const GeoPoint> pts, double cell_km);

double shannon_entropy_bits(std::span<const long long> counts);

struct SpatialStats {
  double rog_km = 0.0;
  double mer_km = 0.0;
  double entropy_bits = 0.0;
};

SpatialStats spatial_stats(std::span<const GeoPoint> pts, double cell_km);

// Per-venue visitation statistics for one period. A field is absent when the
// underlying data are: distance needs at least one visit, dwell needs the
// dwell column, hourly entropy needs a nonzero hourly profile. Coverage is
// always defined (zero for an unvisited venue).
struct VenueVisitStats {
  std::optional<double> distance_km;  // visit-count-weighted median CBG distance
  double covered_cbgs = 0.0;          // distinct CBGs with >= 1 visit
  std::optional<double> dwell_min;
  std::optional<double> hourly_entropy_bits;
};

VenueVisitStats venue_visit_stats(const Dataset& ds, int venue, Period p);

// Class-level summary: medians (midpoint rule) over the venues whose per-venue
// value is defined; a stat is absent when no venue in the set defines it.
// covered_cbgs is a median of integers and can land on a half-integer.
struct VisitationStats {
  std::optional<double> median_distance_km;
  std::optional<double> covered_cbgs;
  std::optional<double> median_dwell_min;
  std::optional<double> hourly_entropy_bits;
};

VisitationStats visitation_stats(const Dataset& ds, std::span<const int> venue_set, Period p);

}  // namespace resil
