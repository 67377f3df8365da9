#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "resil/dataset.hpp"
#include "resil/metrics.hpp"
#include "resil/sectornet.hpp"
#include "resil/stats.hpp"

namespace resil {

inline constexpr const char* kToolVersion = "resil 0.1.0";

// Resolved run parameters: defaults, overridden by a config file, overridden
// by CLI flags. `out` and `threads` affect where and how fast results are
// produced, never what they contain, so they stay out of the config hash.
struct RunConfig {
  std::string visits;
  std::string venues;
  std::string cbgs;
  std::string out = "out";
  int n_groups = 5;
  double band = 0.3;
  int core_k = 10;
  double cell_km = 1.0;
  double bridge_radius_km = 5.0;
  int wilcoxon_exact_max = 25;
  double centrality_tol = 1e-10;
  int centrality_max_iter = 1000;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = library default
  // Synthetic-city parameters (synth subcommand).
  int n_cbgs = 200;
  int n_sectors = 50;
  int n_venues = 2000;
  double core_fraction = 0.2;
  double contraction = 0.5;
  double niche_affinity = 2.0;
};

// Applies `key = value` lines ('#' comments allowed) over the current values;
// unknown keys are input errors.
void apply_config_file(RunConfig& cfg, const std::string& path);

// Range checks on every user-settable parameter; throws input_error so a bad
// value is reported as a usage problem regardless of how it was supplied.
void validate_config(const RunConfig& cfg);

// FNV-1a over the canonical key=value listing (semantic keys only).
std::string config_hash_hex(const RunConfig& cfg);

// "config_hash=... tool_version=..." — the header line every artifact carries.
std::string meta_line(const RunConfig& cfg);

void apply_thread_cap(const RunConfig& cfg);

// In-memory sector-level analysis shared by the regress stage and tests.
struct SectorExclusion {
  int sector = -1;
  std::string reason;
};

struct SectorAnalysis {
  OutcomeReport outcomes;
  SectorNetwork network;
  std::vector<SectorFeatures> features;  // complete rows, ascending sector index
  std::vector<SectorExclusion> excluded;
  std::vector<RegressionTable> specs_delta_s;  // 4 nested specifications
  std::vector<RegressionTable> specs_delta_m;  // 4 nested specifications
};

SectorAnalysis analyze_sectors(const Dataset& ds, const RunConfig& cfg);

// Subcommand bodies. Artifacts land in cfg.out; validation prints to `log`.
// input_error propagates for malformed inputs (CLI exit 2); anything else is
// an internal failure (exit 1).
void cmd_validate(const RunConfig& cfg, std::ostream& log);
void cmd_analyze(const RunConfig& cfg);
void cmd_network(const RunConfig& cfg);
void cmd_regress(const RunConfig& cfg);
void cmd_compare(const RunConfig& cfg);
void cmd_synth(const RunConfig& cfg);
void cmd_report(const RunConfig& cfg);

}  // namespace resil
