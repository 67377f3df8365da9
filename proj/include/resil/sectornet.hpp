#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "resil/dataset.hpp"

namespace resil {

// Revealed visitation preferences for one period. Rows are CBGs with at
// least one visit; columns are sectors with at least one visit. An entry is
// the ratio of the CBG's visit share to the sector over the sector's share
// of all visits; a CBG "prefers" a sector when the ratio exceeds 1 strictly.
struct PreferenceMatrix {
  std::vector<int> cbg_rows;     // dataset CBG indices, ascending
  std::vector<int> sector_cols;  // dataset sector indices, ascending
  std::vector<double> r;         // row-major [rows x cols]
  std::vector<long long> row_totals;
  long long grand_total = 0;
  std::vector<int> dropped_sectors;  // sectors with zero visits in the period

  double value(std::size_t row, std::size_t col) const { return r[row * sector_cols.size() + col]; }
  bool preferred(std::size_t row, std::size_t col) const { return value(row, col) > 1.0; }
};

PreferenceMatrix preference_matrix(const Dataset& ds, Period p);

// Symmetric sector proximity: for sectors i, j the larger of the two
// conditional probabilities that a CBG preferring one also prefers the
// other. Sectors preferred by no CBG are excluded (listed separately).
struct ProximityResult {
  std::vector<int> sectors;            // dataset sector indices in the network
  std::vector<double> p;               // row-major n x n, symmetric, zero diagonal
  std::vector<int> excluded_sectors;   // dropped from the matrix: preferred by no CBG
};

ProximityResult proximity(const PreferenceMatrix& pref);

struct CentralityResult {
  std::vector<double> v;  // nonnegative, L2 norm 1
  int iterations = 0;
};

// Dominant eigenvector by power iteration. Iterates on (P + I), which has the
// same eigenvectors but a strictly dominant positive extreme eigenvalue, so
// structures whose extreme eigenvalues are paired +/-lambda (e.g. bipartite
// graphs) still converge; the plain iteration would oscillate on them.
// Stops when the successive L2 difference drops below tol.
CentralityResult eigenvector_centrality(std::span<const double> sym, int n, double tol = 1e-10,
                                        int max_iter = 1000);

struct SectorNetwork {
  std::vector<int> sectors;        // dataset sector indices, ascending
  std::vector<double> proximity;   // row-major n x n
  std::vector<double> centrality;  // aligned with sectors
  int iterations = 0;
  std::vector<int> dropped_zero_visit;  // no visits in the period
  std::vector<int> dropped_unpreferred; // preferred by no CBG
  std::vector<int> weak;                // centrality ~ 0: outside the dominant component
};

SectorNetwork build_sector_network(const Dataset& ds, Period p, double tol = 1e-10,
                                   int max_iter = 1000);

struct CorePeripheryLabels {
  std::vector<int> core;        // dataset sector indices, ascending
  std::vector<int> peripheral;  // dataset sector indices, ascending
  int k = 0;
};

// Top-k / bottom-k sectors by centrality; ties resolved by sector id, so at
// the core cutoff the lexicographically smaller id enters the core, and at
// the peripheral cutoff the larger id falls to the periphery.
CorePeripheryLabels classify_core_periphery(const Dataset& ds, const SectorNetwork& net, int k);

struct BalancedSample {
  std::vector<int> core_venues;        // ascending venue indices
  std::vector<int> peripheral_venues;  // ascending venue indices
  bool core_was_sampled = false;
  bool peripheral_was_sampled = false;
};

// Equal-size venue sets for the two classes: the smaller pool is taken whole
// and the larger pool is down-sampled uniformly without replacement, driven
// by the seed only.
BalancedSample sample_balanced_pois(const Dataset& ds, const CorePeripheryLabels& labels,
                                    std::uint64_t seed);

}  // namespace resil
