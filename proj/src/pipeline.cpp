#include "resil/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "json.hpp"
#include "resil/csv.hpp"
#include "resil/ingest.hpp"
#include "resil/rng.hpp"
#include "resil/spatiotemporal.hpp"
#include "resil/synth.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace resil {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

void set_config_key(RunConfig& c, std::string_view key, std::string_view value,
                    const std::string& ctx) {
  const std::string val(value);
  auto as_ll = [&](long long lo, long long hi) {
    long long v = 0;
    const auto res = std::from_chars(val.data(), val.data() + val.size(), v);
    if (res.ec != std::errc{} || res.ptr != val.data() + val.size() || v < lo || v > hi)
      throw input_error(ctx + ": bad integer for '" + std::string(key) + "': " + val);
    return v;
  };
  auto as_double = [&]() {
    double v = 0.0;
    const auto res = std::from_chars(val.data(), val.data() + val.size(), v);
    if (res.ec != std::errc{} || res.ptr != val.data() + val.size())
      throw input_error(ctx + ": bad number for '" + std::string(key) + "': " + val);
    return v;
  };

  if (key == "visits") c.visits = val;
  else if (key == "venues") c.venues = val;
  else if (key == "cbgs") c.cbgs = val;
  else if (key == "out") c.out = val;
  else if (key == "groups") c.n_groups = static_cast<int>(as_ll(2, 64));
  else if (key == "band") c.band = as_double();
  else if (key == "core_k") c.core_k = static_cast<int>(as_ll(1, 1'000'000));
  else if (key == "cell_km") c.cell_km = as_double();
  else if (key == "bridge_radius_km") c.bridge_radius_km = as_double();
  else if (key == "wilcoxon_exact_max") c.wilcoxon_exact_max = static_cast<int>(as_ll(0, 60));
  else if (key == "centrality_tol") c.centrality_tol = as_double();
  else if (key == "centrality_max_iter") c.centrality_max_iter = static_cast<int>(as_ll(1, 1'000'000'000));
  else if (key == "seed") c.seed = static_cast<std::uint64_t>(as_ll(0, std::numeric_limits<long long>::max()));
  else if (key == "threads") c.threads = static_cast<int>(as_ll(0, 4096));
  else if (key == "n_cbgs") c.n_cbgs = static_cast<int>(as_ll(1, 10'000'000));
  else if (key == "n_sectors") c.n_sectors = static_cast<int>(as_ll(1, 1'000'000));
  else if (key == "n_venues") c.n_venues = static_cast<int>(as_ll(1, 100'000'000));
  else if (key == "core_fraction") c.core_fraction = as_double();
  else if (key == "contraction") c.contraction = as_double();
  else if (key == "niche_affinity") c.niche_affinity = as_double();
  else throw input_error(ctx + ": unknown config key '" + std::string(key) + "'");
}

// Alphabetical key=value listing of everything that affects results. `out`
// and `threads` are deliberately absent: artifacts must hash identically
// wherever and however parallel they were produced.
std::vector<std::pair<std::string, std::string>> semantic_items(const RunConfig& c) {
  return {
      {"band", format_double(c.band)},
      {"bridge_radius_km", format_double(c.bridge_radius_km)},
      {"cbgs", c.cbgs},
      {"cell_km", format_double(c.cell_km)},
      {"centrality_max_iter", std::to_string(c.centrality_max_iter)},
      {"centrality_tol", format_double(c.centrality_tol)},
      {"contraction", format_double(c.contraction)},
      {"core_fraction", format_double(c.core_fraction)},
      {"core_k", std::to_string(c.core_k)},
      {"groups", std::to_string(c.n_groups)},
      {"n_cbgs", std::to_string(c.n_cbgs)},
      {"n_sectors", std::to_string(c.n_sectors)},
      {"n_venues", std::to_string(c.n_venues)},
      {"niche_affinity", format_double(c.niche_affinity)},
      {"seed", std::to_string(c.seed)},
      {"venues", c.venues},
      {"visits", c.visits},
      {"wilcoxon_exact_max", std::to_string(c.wilcoxon_exact_max)},
  };
}

Dataset load_inputs(const RunConfig& cfg) {
  if (cfg.visits.empty() || cfg.venues.empty() || cfg.cbgs.empty())
    throw input_error("visits, venues and cbgs paths must all be set (config file or flags)");
  return load_dataset(cfg.visits, cfg.venues, cfg.cbgs, cfg.n_groups);
}

void require_period(const Dataset& ds, Period p) {
  for (const VisitEdge& e : ds.edges)
    if (e.period == p) return;
  throw input_error(std::string("dataset has no '") + kPeriodNames[static_cast<int>(p)] +
                    "' period visits");
}

void write_artifact(const RunConfig& cfg, const std::string& name, std::string_view content) {
  std::filesystem::create_directories(cfg.out);
  write_text_file((std::filesystem::path(cfg.out) / name).string(), content);
}

std::string json_artifact(const RunConfig& cfg, const ordered_json& j) {
  return "// " + meta_line(cfg) + "\n" + j.dump(2) + "\n";
}

const char* stars(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.1) return "*";
  return "";
}

ordered_json regression_table_json(const RegressionTable& t) {
  ordered_json feats = ordered_json::array();
  for (std::size_t j = 0; j < t.feature_names.size(); ++j) {
    feats.push_back({{"name", t.feature_names[j]},
                     {"coefficient", t.coefficients[j]},
                     {"std_error", t.std_errors[j]},
                     {"p_value", t.p_values[j]},
                     {"stars", stars(t.p_values[j])}});
  }
  return {{"features", std::move(feats)},
          {"intercept",
           {{"coefficient", t.intercept},
            {"std_error", t.intercept_se},
            {"p_value", t.intercept_p},
            {"stars", stars(t.intercept_p)}}},
          {"r2", t.r2},
          {"adj_r2", t.adj_r2},
          {"n_obs", t.n_obs}};
}

ordered_json paired_test_json(const PairedTestResult& r) {
  return {{"n", r.n_effective}, {"w", r.statistic_w},   {"p", r.p_two_sided},
          {"r", r.effect_r},    {"exact", r.exact}};
}

}  // namespace

void apply_config_file(RunConfig& cfg, const std::string& path) {
  const std::string text = read_text_file(path);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    ++line_no;
    const std::string_view line = trim(std::string_view(text).substr(pos, eol - pos));
    pos = eol + 1;
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    const std::string ctx = path + ":" + std::to_string(line_no);
    if (eq == std::string_view::npos) throw input_error(ctx + ": expected 'key = value'");
    set_config_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), ctx);
  }
}

void validate_config(const RunConfig& cfg) {
  const auto fail = [](const std::string& what) { throw input_error("bad parameter: " + what); };
  if (cfg.n_groups < 2) fail("groups must be at least 2");
  if (!(cfg.band > 0.0 && cfg.band <= 1.0)) fail("band must be in (0, 1]");
  if (cfg.core_k < 1) fail("core_k must be positive");
  if (!(cfg.cell_km > 0.0) || !std::isfinite(cfg.cell_km)) fail("cell_km must be positive");
  if (!(cfg.bridge_radius_km > 0.0) || !std::isfinite(cfg.bridge_radius_km))
    fail("bridge_radius_km must be positive");
  if (cfg.wilcoxon_exact_max < 0 || cfg.wilcoxon_exact_max > 60)
    fail("wilcoxon_exact_max must be in [0, 60]");
  if (!(cfg.centrality_tol > 0.0)) fail("centrality_tol must be positive");
  if (cfg.centrality_max_iter < 1) fail("centrality_max_iter must be positive");
  if (cfg.threads < 0) fail("threads must be nonnegative");
  if (cfg.n_cbgs < 1 || cfg.n_sectors < 1 || cfg.n_venues < 1)
    fail("n_cbgs, n_sectors and n_venues must be positive");
  if (!(cfg.core_fraction > 0.0 && cfg.core_fraction <= 0.5))
    fail("core_fraction must be in (0, 0.5]");
  if (!(cfg.contraction >= 0.0) || !std::isfinite(cfg.contraction))
    fail("contraction must be nonnegative");
  if (!(cfg.niche_affinity >= 0.0) || !std::isfinite(cfg.niche_affinity))
    fail("niche_affinity must be nonnegative");
}

std::string config_hash_hex(const RunConfig& cfg) {
  std::string blob;
  for (const auto& [k, v] : semantic_items(cfg)) {
    blob += k;
    blob += '=';
    blob += v;
    blob += '\n';
  }
  const std::uint64_t h = fnv1a64(blob);
  char buf[17];
  static const char* hex = "0123456789abcdef";
  for (int i = 0; i < 16; ++i) buf[i] = hex[(h >> (60 - 4 * i)) & 0xf];
  buf[16] = '\0';
  return buf;
}

std::string meta_line(const RunConfig& cfg) {
  return "config_hash=" + config_hash_hex(cfg) + " tool_version=" + kToolVersion;
}

void apply_thread_cap(const RunConfig& cfg) {
#ifdef _OPENMP
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#else
  (void)cfg;
#endif
}

namespace {

// Degenerate data (a period with no visits, a co-preference matrix with no
// mass) surfaces from the network layer as invalid_argument; at this
// boundary that is bad input, not an internal failure.
SectorNetwork network_for(const Dataset& ds, const RunConfig& cfg) {
  try {
    return build_sector_network(ds, Period::pre_shock, cfg.centrality_tol,
                                cfg.centrality_max_iter);
  } catch (const std::invalid_argument& e) {
    throw input_error(std::string("cannot build the sector network: ") + e.what());
  }
}

}  // namespace

SectorAnalysis analyze_sectors(const Dataset& ds, const RunConfig& cfg) {
  SectorAnalysis a;
  a.outcomes = compute_outcomes(ds);
  a.network = network_for(ds, cfg);

  struct Agg {
    long long n = 0;
    long long n_ds = 0;
    double sum_ds = 0.0;
    double sum_dm = 0.0;
    double sum_spre = 0.0;
    double sum_mpre = 0.0;
  };
  std::vector<Agg> agg(ds.n_sectors());
  for (const VenueOutcome& o : a.outcomes.outcomes) {
    Agg& g = agg[ds.venues[o.venue].sector];
    ++g.n;
    g.sum_dm += o.delta_m;
    g.sum_spre += o.s_pre;
    g.sum_mpre += static_cast<double>(o.m_pre);
    if (o.delta_s) {
      g.sum_ds += *o.delta_s;
      ++g.n_ds;
    }
  }

  std::vector<double> centrality(ds.n_sectors(), -1.0);
  for (std::size_t i = 0; i < a.network.sectors.size(); ++i)
    centrality[a.network.sectors[i]] = a.network.centrality[i];
  std::vector<char> unpreferred(ds.n_sectors(), 0);
  for (int s : a.network.dropped_unpreferred) unpreferred[s] = 1;

  for (int s = 0; s < ds.n_sectors(); ++s) {
    if (centrality[s] < 0.0) {
      a.excluded.push_back({s, unpreferred[s] ? "preferred by no CBG in the pre-shock period"
                                              : "no pre-shock visits"});
      continue;
    }
    if (agg[s].n == 0) {
      a.excluded.push_back({s, "no venues with visits in both periods"});
      continue;
    }
    const BridgeResult bridge = bridge_index(ds, s, cfg.bridge_radius_km);
    if (!bridge.value) {
      a.excluded.push_back({s, "all venue catchments empty"});
      continue;
    }
    SectorFeatures f;
    f.sector = s;
    f.venue_count = agg[s].n;
    if (agg[s].n_ds > 0) f.mean_delta_s = agg[s].sum_ds / agg[s].n_ds;
    f.mean_delta_m = agg[s].sum_dm / agg[s].n;
    f.pre_segregation = agg[s].sum_spre / agg[s].n;
    f.pre_mobility = agg[s].sum_mpre / agg[s].n;
    f.bridge = *bridge.value;
    f.centrality = centrality[s];
    a.features.push_back(std::move(f));
  }

  a.specs_delta_s = nested_regressions(a.features, ChangeKind::segregation);
  a.specs_delta_m = nested_regressions(a.features, ChangeKind::mobility);
  return a;
}

void cmd_validate(const RunConfig& cfg, std::ostream& log) {
  const Dataset ds = load_inputs(cfg);
  const ValidationSummary s = summarize(ds);
  log << "venues: " << s.venues << "\n";
  log << "cbgs: " << s.cbgs << "\n";
  log << "sectors: " << s.sectors << "\n";
  log << "visit rows (aggregated): " << s.visit_rows << "\n";
  log << "pre-shock visits: " << s.total_visits[0] << "\n";
  log << "in-shock visits: " << s.total_visits[1] << "\n";
  log << "income group populations:";
  for (long long p : s.group_population) log << ' ' << p;
  log << "\n";
  log << "ok\n";
}

void cmd_analyze(const RunConfig& cfg) {
  const Dataset ds = load_inputs(cfg);
  require_period(ds, Period::pre_shock);
  require_period(ds, Period::in_shock);
  const OutcomeReport rep = compute_outcomes(ds);

  std::ostringstream out;
  out << "# " << meta_line(cfg) << "\n";
  out << "venue_id,sector_id,s_pre,s_in,delta_s,m_pre,m_in,delta_m\n";
  for (const VenueOutcome& o : rep.outcomes) {
    out << ds.venues[o.venue].id << ',' << ds.sectors[ds.venues[o.venue].sector] << ','
        << format_double(o.s_pre) << ',' << format_double(o.s_in) << ','
        << (o.delta_s ? format_double(*o.delta_s) : std::string()) << ',' << o.m_pre << ','
        << o.m_in << ',' << format_double(o.delta_m) << "\n";
  }
  write_artifact(cfg, "outcomes.csv", out.str());

  std::ostringstream exc;
  exc << "# " << meta_line(cfg) << "\n";
  exc << "venue_id,reason\n";
  for (const ExcludedVenue& e : rep.exclusions)
    exc << ds.venues[e.venue].id << ',' << e.reason << "\n";
  write_artifact(cfg, "exclusions.csv", exc.str());

  // delta_s ranked from the top (worst deterioration), delta_m from the
  // bottom (worst mobility loss).
  std::ostringstream sh;
  sh << "# " << meta_line(cfg) << "\n";
  sh << "field,sector_id,share_in_top_band,venue_count\n";
  const auto emit = [&](ChangeField field, BandSide side, const char* name) {
    for (const SectorBandShare& s : sector_band_share(ds, rep.outcomes, field, side, cfg.band))
      sh << name << ',' << ds.sectors[s.sector] << ',' << format_double(s.share) << ','
         << s.venues_total << "\n";
  };
  emit(ChangeField::delta_s, BandSide::highest, "delta_s");
  emit(ChangeField::delta_m, BandSide::lowest, "delta_m");
  write_artifact(cfg, "sector_shares.csv", sh.str());
}

void cmd_network(const RunConfig& cfg) {
  const Dataset ds = load_inputs(cfg);
  require_period(ds, Period::pre_shock);
  const SectorNetwork net = network_for(ds, cfg);
  if (2 * cfg.core_k > static_cast<int>(net.sectors.size()))
    throw input_error("core_k too large: 2k exceeds the " +
                      std::to_string(net.sectors.size()) + " sectors in the network");
  const CorePeripheryLabels labels = classify_core_periphery(ds, net, cfg.core_k);

  auto ids = [&](const std::vector<int>& sectors) {
    ordered_json arr = ordered_json::array();
    for (int s : sectors) arr.push_back(ds.sectors[s]);
    return arr;
  };
  ordered_json j{{"sectors", ids(net.sectors)},
                 {"proximity", net.proximity},
                 {"centrality", net.centrality},
                 {"iterations", net.iterations},
                 {"core_k", labels.k},
                 {"core", ids(labels.core)},
                 {"peripheral", ids(labels.peripheral)},
                 {"dropped_zero_visit", ids(net.dropped_zero_visit)},
                 {"dropped_unpreferred", ids(net.dropped_unpreferred)},
                 {"weak", ids(net.weak)}};
  write_artifact(cfg, "network.json", json_artifact(cfg, j));

  std::ostringstream el;
  el << "# " << meta_line(cfg) << "\n";
  el << "sector_i,sector_j,proximity\n";
  const std::size_t n = net.sectors.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i + 1; k < n; ++k)
      if (net.proximity[i * n + k] > 0.0)
        el << ds.sectors[net.sectors[i]] << ',' << ds.sectors[net.sectors[k]] << ','
           << format_double(net.proximity[i * n + k]) << "\n";
  write_artifact(cfg, "edgelist.csv", el.str());
}

void cmd_regress(const RunConfig& cfg) {
  const Dataset ds = load_inputs(cfg);
  require_period(ds, Period::pre_shock);
  require_period(ds, Period::in_shock);
  const SectorAnalysis a = analyze_sectors(ds, cfg);

  ordered_json table = ordered_json::array();
  for (const SectorFeatures& f : a.features) {
    ordered_json row{{"sector_id", ds.sectors[f.sector]},
                     {"venue_count", f.venue_count},
                     {"mean_delta_s", f.mean_delta_s ? ordered_json(*f.mean_delta_s) : ordered_json(nullptr)},
                     {"mean_delta_m", f.mean_delta_m},
                     {"pre_segregation", f.pre_segregation},
                     {"pre_mobility", f.pre_mobility},
                     {"bridge_index", f.bridge},
                     {"centrality", f.centrality}};
    table.push_back(std::move(row));
  }
  ordered_json excluded = ordered_json::array();
  for (const SectorExclusion& e : a.excluded)
    excluded.push_back({{"sector_id", ds.sectors[e.sector]}, {"reason", e.reason}});

  auto spec_array = [](const std::vector<RegressionTable>& specs) {
    ordered_json arr = ordered_json::array();
    for (const RegressionTable& t : specs) arr.push_back(regression_table_json(t));
    return arr;
  };

  // The narrative in the source material quotes the relationship in both
  // orientations; emit single-feature fits with centrality as the response
  // alongside the main tables so either reading is checkable.
  auto reverse_fit = [&](bool use_delta_s) {
    std::vector<double> y;
    std::vector<double> x;
    for (const SectorFeatures& f : a.features) {
      if (use_delta_s) {
        if (!f.mean_delta_s) continue;
        x.push_back(*f.mean_delta_s);
      } else {
        x.push_back(f.mean_delta_m);
      }
      y.push_back(f.centrality);
    }
    return ols_fit(y, {standardize(x)}, {use_delta_s ? "mean_delta_s" : "mean_delta_m"});
  };

  ordered_json j{
      {"sector_table", std::move(table)},
      {"excluded_sectors", std::move(excluded)},
      {"delta_s", {{"specifications", spec_array(a.specs_delta_s)}}},
      {"delta_m", {{"specifications", spec_array(a.specs_delta_m)}}},
      {"reverse_direction",
       {{"note", "single-feature fits with centrality as the response; the prose quotes the "
                 "relationship in this orientation while the main tables use the change as the "
                 "response"},
        {"centrality_on_delta_s", regression_table_json(reverse_fit(true))},
        {"centrality_on_delta_m", regression_table_json(reverse_fit(false))}}}};
  write_artifact(cfg, "regression.json", json_artifact(cfg, j));

  std::ostringstream fi;
  fi << "# " << meta_line(cfg) << "\n";
  fi << "# method=squared standardized coefficient share of specification 4\n";
  fi << "dependent,feature,share\n";
  const auto emit_importance = [&](const char* dep, const RegressionTable& t) {
    double total = 0.0;
    for (double c : t.coefficients) total += c * c;
    for (std::size_t i = 0; i < t.coefficients.size(); ++i)
      fi << dep << ',' << t.feature_names[i] << ','
         << format_double(total > 0.0 ? t.coefficients[i] * t.coefficients[i] / total : 0.0)
         << "\n";
  };
  emit_importance("delta_s", a.specs_delta_s.back());
  emit_importance("delta_m", a.specs_delta_m.back());
  write_artifact(cfg, "feature_importance.csv", fi.str());
}

void cmd_compare(const RunConfig& cfg) {
  const Dataset ds = load_inputs(cfg);
  require_period(ds, Period::pre_shock);
  require_period(ds, Period::in_shock);
  const SectorNetwork net = network_for(ds, cfg);
  if (2 * cfg.core_k > static_cast<int>(net.sectors.size()))
    throw input_error("core_k too large: 2k exceeds the " +
                      std::to_string(net.sectors.size()) + " sectors in the network");
  const CorePeripheryLabels labels = classify_core_periphery(ds, net, cfg.core_k);
  const BalancedSample sample = sample_balanced_pois(ds, labels, cfg.seed);

  struct Class {
    const char* name;
    const std::vector<int>* venues;
  };
  const Class classes[2] = {{"core", &sample.core_venues},
                            {"peripheral", &sample.peripheral_venues}};

  std::ostringstream out;
  out << "# " << meta_line(cfg) << "\n";
  out << "metric,class,period,value\n";
  for (const Class& cl : classes) {
    std::vector<GeoPoint> pts;
    for (int v : *cl.venues) pts.push_back({ds.venues[v].lat, ds.venues[v].lon});
    const SpatialStats st = spatial_stats(pts, cfg.cell_km);
    out << "rog_km," << cl.name << ",all," << format_double(st.rog_km) << "\n";
    out << "mer_km," << cl.name << ",all," << format_double(st.mer_km) << "\n";
    out << "spatial_entropy_bits," << cl.name << ",all," << format_double(st.entropy_bits) << "\n";
  }
  struct Metric {
    const char* name;
    std::optional<double> VisitationStats::*field;
  };
  const Metric metrics[4] = {{"median_distance_km", &VisitationStats::median_distance_km},
                             {"covered_cbgs", &VisitationStats::covered_cbgs},
                             {"median_dwell_min", &VisitationStats::median_dwell_min},
                             {"hourly_entropy_bits", &VisitationStats::hourly_entropy_bits}};
  for (const Class& cl : classes) {
    for (int p = 0; p < kPeriods; ++p) {
      const VisitationStats vs = visitation_stats(ds, *cl.venues, static_cast<Period>(p));
      for (const Metric& m : metrics) {
        const std::optional<double>& val = vs.*(m.field);
        out << m.name << ',' << cl.name << ',' << kPeriodNames[p] << ','
            << (val ? format_double(*val) : std::string()) << "\n";
      }
    }
  }
  write_artifact(cfg, "compare.csv", out.str());

  // Per-venue values drive the paired tests: venue against itself across the
  // shock, and positional pairs of the two balanced samples within a period.
  struct VenueMetric {
    std::optional<double> value[kPeriods];
  };
  auto venue_values = [&](const std::vector<int>& venues, const Metric& m) {
    std::vector<VenueMetric> vals(venues.size());
    for (std::size_t i = 0; i < venues.size(); ++i) {
      for (int p = 0; p < kPeriods; ++p) {
        const VenueVisitStats s = venue_visit_stats(ds, venues[i], static_cast<Period>(p));
        VisitationStats single;
        single.median_distance_km = s.distance_km;
        single.covered_cbgs = s.covered_cbgs;
        single.median_dwell_min = s.dwell_min;
        single.hourly_entropy_bits = s.hourly_entropy_bits;
        vals[i].value[p] = single.*(m.field);
      }
    }
    return vals;
  };

  ordered_json tests{{"balanced_sample",
                      {{"size", sample.core_venues.size()},
                       {"core_sampled", sample.core_was_sampled},
                       {"peripheral_sampled", sample.peripheral_was_sampled}}},
                     {"pre_vs_shock", ordered_json::array()},
                     {"core_vs_peripheral", ordered_json::array()}};

  for (const Class& cl : classes) {
    for (const Metric& m : metrics) {
      const auto vals = venue_values(*cl.venues, m);
      std::vector<std::pair<double, double>> pairs;
      for (const VenueMetric& v : vals)
        if (v.value[0] && v.value[1]) pairs.emplace_back(*v.value[0], *v.value[1]);
      ordered_json entry{{"metric", m.name}, {"class", cl.name}, {"pairs", pairs.size()}};
      try {
        entry.update(paired_test_json(wilcoxon_signed_rank(pairs, cfg.wilcoxon_exact_max)));
      } catch (const std::invalid_argument& e) {
        entry["skipped"] = e.what();
      }
      tests["pre_vs_shock"].push_back(std::move(entry));
    }
  }
  for (int p = 0; p < kPeriods; ++p) {
    for (const Metric& m : metrics) {
      const auto core_vals = venue_values(sample.core_venues, m);
      const auto peri_vals = venue_values(sample.peripheral_venues, m);
      std::vector<std::pair<double, double>> pairs;
      for (std::size_t i = 0; i < core_vals.size() && i < peri_vals.size(); ++i)
        if (core_vals[i].value[p] && peri_vals[i].value[p])
          pairs.emplace_back(*core_vals[i].value[p], *peri_vals[i].value[p]);
      ordered_json entry{{"metric", m.name}, {"period", kPeriodNames[p]}, {"pairs", pairs.size()}};
      try {
        entry.update(paired_test_json(wilcoxon_signed_rank(pairs, cfg.wilcoxon_exact_max)));
      } catch (const std::invalid_argument& e) {
        entry["skipped"] = e.what();
      }
      tests["core_vs_peripheral"].push_back(std::move(entry));
    }
  }
  write_artifact(cfg, "tests.json", json_artifact(cfg, tests));
}

void cmd_synth(const RunConfig& cfg) {
  SynthConfig sc;
  sc.n_cbgs = cfg.n_cbgs;
  sc.n_sectors = cfg.n_sectors;
  sc.n_venues = cfg.n_venues;
  sc.core_fraction = cfg.core_fraction;
  sc.budget_contraction = cfg.contraction;
  sc.niche_affinity = cfg.niche_affinity;
  sc.seed = cfg.seed;
  SynthCity city;
  try {
    city = generate_city(sc);
  } catch (const std::invalid_argument& e) {
    throw input_error(e.what());
  }

  const std::string meta = meta_line(cfg);
  std::ostringstream visits, venues, cbgs;
  write_visits_csv(visits, city.dataset, meta);
  write_venues_csv(venues, city.dataset, meta);
  write_cbgs_csv(cbgs, city.dataset, meta);
  write_artifact(cfg, "visits.csv", visits.str());
  write_artifact(cfg, "venues.csv", venues.str());
  write_artifact(cfg, "cbgs.csv", cbgs.str());

  ordered_json coreness = ordered_json::object();
  ordered_json signs = ordered_json::object();
  for (std::size_t i = 0; i < city.truth.sector_ids.size(); ++i) {
    coreness[city.truth.sector_ids[i]] = city.truth.coreness[i];
    signs[city.truth.sector_ids[i]] = {{"delta_s", city.truth.expected_delta_s_sign[i]},
                                       {"delta_m", city.truth.expected_delta_m_sign[i]}};
  }
  ordered_json j{{"planted_core", city.truth.planted_core},
                 {"coreness", std::move(coreness)},
                 {"expected_sign", std::move(signs)}};
  write_artifact(cfg, "ground_truth.json", json_artifact(cfg, j));
}

void cmd_report(const RunConfig& cfg) {
  cmd_analyze(cfg);
  cmd_network(cfg);
  cmd_regress(cfg);
  cmd_compare(cfg);

  ordered_json params = ordered_json::object();
  for (const auto& [k, v] : semantic_items(cfg)) params[k] = v;
  ordered_json j{{"config_hash", config_hash_hex(cfg)},
                 {"tool_version", kToolVersion},
                 {"parameters", std::move(params)},
                 {"artifacts",
                  {"outcomes.csv", "exclusions.csv", "sector_shares.csv", "network.json",
                   "edgelist.csv", "regression.json", "feature_importance.csv", "compare.csv",
                   "tests.json"}}};
  write_artifact(cfg, "manifest.json", json_artifact(cfg, j));
}

}  // namespace resil
