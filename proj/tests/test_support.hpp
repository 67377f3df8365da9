#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "resil/dataset.hpp"

// Hand-fixture builder shared by the unit suites. Tests describe a city as
// three small literal tables; the builder resolves ids, sorts everything the
// way the loader would, and builds the index structures.
namespace testsup {

struct VenueSpec {
  std::string id;
  std::string sector;
  double lat = 0.0;
  double lon = 0.0;
};

struct CbgSpec {
  std::string id;
  double lat = 0.0;
  double lon = 0.0;
  double income = 50000.0;
  long long population = 1000;
  int group = 0;  // set directly; loader-path grouping is tested separately
};

struct EdgeSpec {
  std::string venue;
  std::string cbg;
  int period = 0;  // 0 = pre, 1 = shock
  long long count = 0;
};

inline resil::Dataset make_dataset(std::vector<VenueSpec> venues, std::vector<CbgSpec> cbgs,
                                   const std::vector<EdgeSpec>& edges, int n_groups = 5) {
  std::sort(venues.begin(), venues.end(),
            [](const VenueSpec& a, const VenueSpec& b) { return a.id < b.id; });
  std::sort(cbgs.begin(), cbgs.end(),
            [](const CbgSpec& a, const CbgSpec& b) { return a.id < b.id; });

  resil::Dataset ds;
  ds.n_groups = n_groups;
  for (const VenueSpec& v : venues)
    if (std::find(ds.sectors.begin(), ds.sectors.end(), v.sector) == ds.sectors.end())
      ds.sectors.push_back(v.sector);
  std::sort(ds.sectors.begin(), ds.sectors.end());

  for (const VenueSpec& v : venues) {
    resil::Venue out;
    out.id = v.id;
    out.lat = v.lat;
    out.lon = v.lon;
    out.sector = static_cast<int>(std::lower_bound(ds.sectors.begin(), ds.sectors.end(), v.sector) -
                                  ds.sectors.begin());
    ds.venues.push_back(std::move(out));
  }
  for (const CbgSpec& c : cbgs) {
    resil::Cbg out;
    out.id = c.id;
    out.lat = c.lat;
    out.lon = c.lon;
    out.median_income = c.income;
    out.population = c.population;
    out.income_group = c.group;
    ds.cbgs.push_back(std::move(out));
  }

  auto index_of = [](const auto& items, const std::string& id) {
    for (std::size_t i = 0; i < items.size(); ++i)
      if (items[i].id == id) return static_cast<int>(i);
    return -1;
  };
  for (const EdgeSpec& e : edges) {
    resil::VisitEdge out;
    out.venue = index_of(ds.venues, e.venue);
    out.cbg = index_of(ds.cbgs, e.cbg);
    out.period = e.period == 0 ? resil::Period::pre_shock : resil::Period::in_shock;
    out.count = e.count;
    ds.edges.push_back(out);
  }
  ds.build_indexes();
  return ds;
}

// CBGs laid out so close together that any sane radius covers them all;
// handy for tests that only care about visit counts, not geometry.
inline std::vector<CbgSpec> clustered_cbgs(int n, int n_groups) {
  std::vector<CbgSpec> out;
  for (int i = 0; i < n; ++i) {
    CbgSpec c;
    c.id = "c" + std::to_string(i);
    c.lat = 40.0 + 0.0001 * i;
    c.lon = -75.0;
    c.income = 30000.0 + 1000.0 * i;
    c.group = i % n_groups;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace testsup
