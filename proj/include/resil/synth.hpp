#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "resil/dataset.hpp"

namespace resil {

struct SynthConfig {
  int n_cbgs = 200;
  int n_sectors = 50;
  int n_venues = 2000;
  double core_fraction = 0.2;       // fraction of sectors planted as core
  double budget_contraction = 0.5;  // in-shock visit budget multiplier; 1.0 = null world
  double niche_affinity = 2.0;      // demand concentration of peripheral sectors
  std::uint64_t seed = 1;
};

struct GroundTruth {
  std::vector<std::string> sector_ids;     // all sectors, generator order
  std::vector<double> coreness;            // planted continuous core score in [0,1]
  std::vector<std::string> planted_core;   // top ceil(core_fraction * n_sectors)
  // Expected direction of each sector's shock response relative to the city
  // median: "+" / "-" keyed by whether its coreness is above the median.
  std::vector<std::string> expected_delta_s_sign;
  std::vector<std::string> expected_delta_m_sign;
};

struct SynthCity {
  Dataset dataset;
  GroundTruth truth;
};

// Deterministic synthetic city with planted core/peripheral structure.
// Core sectors draw near-uniform demand from all CBGs at short range;
// peripheral sectors concentrate on few high-affinity CBGs. The shock
// contracts every CBG's visit budget and tilts it further toward core
// sectors, so peripheral venues lose volume and their surviving visitor
// mix narrows. With budget_contraction = 1.0 the two periods are draws
// from the same process (exchangeable null). Identical config => identical
// output, independent of thread count.
SynthCity generate_city(const SynthConfig& cfg);

}  // namespace resil
