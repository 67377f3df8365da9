#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "resil/dataset.hpp"

namespace resil {

// Assigns each CBG to one of n_groups income groups by the population-midpoint
// rule: order CBGs by (median_income, id), and place a CBG whose residents
// occupy cumulative positions [c, c+pop) into the group containing position
// c + pop/2. Groups are then repaired so the assignment is monotone with
// steps of at most one group and, whenever there are at least n_groups CBGs,
// every group is non-empty.
void assign_income_groups(std::vector<Cbg>& cbgs, int n_groups);

// Loads and cross-validates the three input tables, resolves ids to indices,
// aggregates duplicate (venue, cbg, period) visit rows, and assigns income
// groups. Throws input_error with file/line context on malformed input.
Dataset load_dataset(const std::string& visits_path, const std::string& venues_path,
                     const std::string& cbgs_path, int n_groups);

struct ValidationSummary {
  long long venues = 0;
  long long cbgs = 0;
  long long sectors = 0;
  long long visit_rows = 0;
  std::array<long long, kPeriods> total_visits{};
  std::vector<long long> group_population;  // residents per income group
};

ValidationSummary summarize(const Dataset& ds);

// Serialization back to the same three schemas load_dataset() consumes.
// `meta` is emitted as a '#' comment header on each file.
void write_visits_csv(std::ostream& os, const Dataset& ds, const std::string& meta);
void write_venues_csv(std::ostream& os, const Dataset& ds, const std::string& meta);
void write_cbgs_csv(std::ostream& os, const Dataset& ds, const std::string& meta);

}  // namespace resil
