#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "resil/dataset.hpp"
#include "resil/spatiotemporal.hpp"

// Brute-force / textbook reference implementations, deliberately sharing no
// algorithmic code with the optimized paths they verify. Tests compare the
// two routes; the benchmark binary measures them against each other.
namespace resil::oracle {

struct ProximityOracle {
  std::vector<int> kept_cols;  // columns preferred by at least one row
  std::vector<double> p;       // kept x kept, row-major, zero diagonal
};

// Literal set semantics: for every column pair, enumerate rows, build the
// preferring sets, count the intersection, divide by each base.
ProximityOracle proximity_exhaustive(const std::vector<std::vector<bool>>& preferred);

// Full dense eigendecomposition by cyclic Jacobi rotations; returns the
// eigenvector of the largest eigenvalue (ties -> lowest eigenvalue index
// after the final sweep), sign-fixed so its largest-magnitude entry is
// positive, L2-normalized.
std::vector<double> dominant_eigenvector_jacobi(std::vector<double> sym, int n);

struct WilcoxonCounts {
  std::uint64_t le = 0;     // sign assignments with W <= observed
  std::uint64_t ge = 0;     // sign assignments with W >= observed
  std::uint64_t total = 0;  // 2^n
};

// Exact Wilcoxon null distribution by literally enumerating all 2^n sign
// assignments over the given ranks (n <= 30; parallel integer tallies).
WilcoxonCounts wilcoxon_enumerate(const std::vector<double>& ranks, double w);

struct SimpleOutcome {
  std::string venue_id;
  double s_pre = 0.0;
  double s_in = 0.0;
  bool has_delta_s = false;
  double delta_s = 0.0;
  long long m_pre = 0;
  long long m_in = 0;
  double delta_m = 0.0;
};

// Per-venue segregation/mobility outcomes recomputed with nested maps
// straight off the edge list (no index structures, serial).
std::vector<SimpleOutcome> outcomes_by_maps(const Dataset& ds);

// OLS coefficients (intercept first) via Gauss-Jordan inversion of the
// normal equations, an independent route to the same estimator.
std::vector<double> ols_coefficients_gauss_jordan(const std::vector<double>& y,
                                                  const std::vector<std::vector<double>>& x_columns);

// Minimum enclosing radius by brute force over all point pairs and triples.
double mec_radius_brute(const std::vector<XY>& pts);

}  // namespace resil::oracle
