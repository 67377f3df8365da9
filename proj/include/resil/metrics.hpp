#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "resil/dataset.hpp"

namespace resil {

// Deviation of a venue's visitor mix from an even split over income groups:
// tau * sum_i |m_i/M - 1/n| with tau = n/(2(n-1)), so 0 means perfectly even
// and 1 means all visits from a single group. Requires a positive total.
double segregation_index(std::span<const long long> group_counts);

// (now - before) / before; caller guarantees before != 0.
double relative_change(double before, double now);

struct VenueOutcome {
  int venue = -1;
  double s_pre = 0.0;
  double s_in = 0.0;
  std::optional<double> delta_s;  // undefined when s_pre == 0
  long long m_pre = 0;
  long long m_in = 0;
  double delta_m = 0.0;
};

struct ExcludedVenue {
  int venue = -1;
  std::string reason;
};

struct OutcomeReport {
  std::vector<VenueOutcome> outcomes;  // venues with visits in both periods, in venue order
  std::vector<ExcludedVenue> exclusions;
};

OutcomeReport compute_outcomes(const Dataset& ds);

enum class ChangeField { delta_s, delta_m };
enum class BandSide { highest, lowest };

struct SectorBandShare {
  int sector = -1;
  long long venues_total = 0;    // sector venues with the field defined
  long long venues_in_band = 0;  // of those, ranked inside the extreme band
  double share = 0.0;
};

// Ranks venues on the chosen change field, marks the extreme ceil(band * N)
// of them (ties at the cutoff resolved by venue id), and reports each
// sector's share of marked venues. Every sector gets a row; one with no
// defined value reports share 0 and venues_total 0 for downstream filtering.
std::vector<SectorBandShare> sector_band_share(const Dataset& ds,
                                               std::span<const VenueOutcome> outcomes,
                                               ChangeField field, BandSide side, double band);

}  // namespace resil
