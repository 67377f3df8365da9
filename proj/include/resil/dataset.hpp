#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace resil {

enum class Period : int { pre_shock = 0, in_shock = 1 };
inline constexpr int kPeriods = 2;
inline constexpr const char* kPeriodNames[kPeriods] = {"pre", "shock"};

struct Venue {
  std::string id;
  double lat = 0.0;
  double lon = 0.0;
  int sector = -1;  // index into Dataset::sectors
  std::array<std::optional<double>, kPeriods> dwell_min{};
  std::array<std::optional<std::array<long long, 24>>, kPeriods> hourly{};
};

struct Cbg {
  std::string id;
  double lat = 0.0;
  double lon = 0.0;
  double median_income = 0.0;
  long long population = 0;
  int income_group = -1;
};

struct VisitEdge {
  std::int32_t venue = -1;
  std::int32_t cbg = -1;
  Period period = Period::pre_shock;
  long long count = 0;
};

// Fully resolved input tables. Venues, CBGs and sectors are sorted by id so
// every downstream index, artifact row and parallel reduction has one fixed
// order regardless of input file order or thread count.
struct Dataset {
  std::vector<Venue> venues;
  std::vector<Cbg> cbgs;
  std::vector<std::string> sectors;  // distinct sector ids, sorted
  std::vector<VisitEdge> edges;      // venue-major, aggregated, sorted
  int n_groups = 5;

  std::unordered_map<std::string, int> venue_index;
  std::unordered_map<std::string, int> cbg_index;
  std::unordered_map<std::string, int> sector_index;

  // venue_offsets[v*2+p] .. venue_offsets[v*2+p+1) spans edges of venue v in
  // period p; cbg_order/cbg_offsets give the same for the CBG-major view.
  std::vector<std::size_t> venue_offsets;
  std::vector<std::uint32_t> cbg_order;
  std::vector<std::size_t> cbg_offsets;

  void build_indexes();

  std::span<const VisitEdge> venue_edges(int venue, Period p) const {
    const std::size_t k = static_cast<std::size_t>(venue) * kPeriods + static_cast<int>(p);
    return {edges.data() + venue_offsets[k], venue_offsets[k + 1] - venue_offsets[k]};
  }

  // Edge indices (into `edges`) touching `cbg` in period p.
  std::span<const std::uint32_t> cbg_edge_ids(int cbg, Period p) const {
    const std::size_t k = static_cast<std::size_t>(cbg) * kPeriods + static_cast<int>(p);
    return {cbg_order.data() + cbg_offsets[k], cbg_offsets[k + 1] - cbg_offsets[k]};
  }

  int n_venues() const { return static_cast<int>(venues.size()); }
  int n_cbgs() const { return static_cast<int>(cbgs.size()); }
  int n_sectors() const { return static_cast<int>(sectors.size()); }
};

}  // namespace resil
