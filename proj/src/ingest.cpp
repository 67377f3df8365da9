#include "resil/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "resil/csv.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace resil {
namespace {

void require(bool ok, const std::string& file, std::size_t line, const std::string& msg) {
  if (!ok) throw input_error(file + ":" + std::to_string(line) + ": " + msg);
}

void check_header(const CsvRow& row, std::span<const char* const> expected, const std::string& file) {
  bool ok = row.fields.size() == expected.size();
  for (std::size_t i = 0; ok && i < expected.size(); ++i) ok = row.fields[i] == expected[i];
  if (!ok) {
    std::string want;
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) want += ',';
      want += expected[i];
    }
    throw input_error(file + ":" + std::to_string(row.line) + ": expected header '" + want + "'");
  }
}

std::array<long long, 24> parse_hourly(std::string_view s, const std::string& file, std::size_t line) {
  std::array<long long, 24> out{};
  std::size_t pos = 0;
  for (int h = 0; h < 24; ++h) {
    const std::size_t bar = s.find('|', pos);
    const bool last = (h == 23);
    require(last == (bar == std::string_view::npos), file, line,
            "hourly profile must have 24 '|'-separated counts");
    const std::string_view part = s.substr(pos, last ? std::string_view::npos : bar - pos);
    out[h] = parse_int_field(part, file, line);
    require(out[h] >= 0, file, line, "hourly count must be non-negative");
    pos = bar + 1;
  }
  return out;
}

struct ParsedVenues {
  std::vector<Venue> venues;
  std::vector<std::string> sector_ids;  // parallel to venues, unresolved
};

ParsedVenues parse_venues(const std::string& path) {
  const std::string text = read_text_file(path);
  const std::vector<CsvRow> rows = parse_csv(text);
  require(!rows.empty(), path, 1, "missing header row");
  static constexpr const char* kBase[] = {"venue_id", "lat", "lon", "sector_id"};
  static constexpr const char* kFull[] = {"venue_id", "lat",        "lon",         "sector_id",
                                          "dwell_pre", "dwell_shock", "hourly_pre", "hourly_shock"};
  const bool extended = rows[0].fields.size() > 4;
  check_header(rows[0], extended ? std::span<const char* const>(kFull) : std::span<const char* const>(kBase),
               path);
  const std::size_t n_cols = extended ? 8 : 4;

  ParsedVenues out;
  out.venues.reserve(rows.size() - 1);
  out.sector_ids.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const CsvRow& row = rows[r];
    require(row.fields.size() == n_cols, path, row.line, "wrong field count");
    Venue v;
    v.id = std::string(row.fields[0]);
    require(!v.id.empty(), path, row.line, "empty venue_id");
    v.lat = parse_double_field(row.fields[1], path, row.line);
    v.lon = parse_double_field(row.fields[2], path, row.line);
    require(v.lat >= -90.0 && v.lat <= 90.0, path, row.line, "lat out of range");
    require(v.lon >= -180.0 && v.lon <= 180.0, path, row.line, "lon out of range");
    require(!row.fields[3].empty(), path, row.line, "empty sector_id");
    if (extended) {
      for (int p = 0; p < kPeriods; ++p) {
        const std::string_view dw = row.fields[4 + p];
        if (!dw.empty()) {
          const double d = parse_double_field(dw, path, row.line);
          require(d > 0.0, path, row.line, "dwell minutes must be positive");
          v.dwell_min[p] = d;
        }
        const std::string_view hp = row.fields[6 + p];
        if (!hp.empty()) v.hourly[p] = parse_hourly(hp, path, row.line);
      }
    }
    out.venues.push_back(std::move(v));
    out.sector_ids.emplace_back(row.fields[3]);
  }
  return out;
}

std::vector<Cbg> parse_cbgs(const std::string& path) {
  const std::string text = read_text_file(path);
  const std::vector<CsvRow> rows = parse_csv(text);
  require(!rows.empty(), path, 1, "missing header row");
  static constexpr const char* kCols[] = {"cbg_id", "lat", "lon", "median_income", "population"};
  check_header(rows[0], std::span<const char* const>(kCols), path);
  std::vector<Cbg> cbgs;
  cbgs.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const CsvRow& row = rows[r];
    require(row.fields.size() == 5, path, row.line, "wrong field count");
    Cbg c;
    c.id = std::string(row.fields[0]);
    require(!c.id.empty(), path, row.line, "empty cbg_id");
    c.lat = parse_double_field(row.fields[1], path, row.line);
    c.lon = parse_double_field(row.fields[2], path, row.line);
    require(c.lat >= -90.0 && c.lat <= 90.0, path, row.line, "lat out of range");
    require(c.lon >= -180.0 && c.lon <= 180.0, path, row.line, "lon out of range");
    c.median_income = parse_double_field(row.fields[3], path, row.line);
    require(c.median_income > 0.0 && std::isfinite(c.median_income), path, row.line,
            "median_income must be positive");
    c.population = parse_int_field(row.fields[4], path, row.line);
    require(c.population > 0, path, row.line, "population must be positive");
    cbgs.push_back(std::move(c));
  }
  return cbgs;
}

}  // namespace

void assign_income_groups(std::vector<Cbg>& cbgs, int n_groups) {
  if (cbgs.empty()) return;
  std::vector<int> order(cbgs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (cbgs[a].median_income != cbgs[b].median_income)
      return cbgs[a].median_income < cbgs[b].median_income;
    return cbgs[a].id < cbgs[b].id;
  });

  unsigned long long total = 0;
  for (const Cbg& c : cbgs) total += static_cast<unsigned long long>(c.population);

  // Midpoint rule in exact integer arithmetic: the group of a CBG occupying
  // cumulative resident positions [cum, cum+pop) is
  // floor((cum + pop/2) / (total/n)) == floor((2*cum + pop)*n / (2*total)).
  const int n = static_cast<int>(cbgs.size());
  std::vector<int> group(n);
  unsigned long long cum = 0;
  for (int k = 0; k < n; ++k) {
    const auto pop = static_cast<unsigned long long>(cbgs[order[k]].population);
    const unsigned __int128 num =
        (static_cast<unsigned __int128>(2 * cum + pop)) * static_cast<unsigned>(n_groups);
    group[k] = static_cast<int>(num / (2 * static_cast<unsigned __int128>(total)));
    cum += pop;
  }

  // Repair pass. Raw groups are non-decreasing but can skip a group (one huge
  // CBG straddling it) or leave the extremes unused. Cap forward steps at one,
  // then raise the tail so the last CBG reaches the top group; both passes
  // keep the assignment monotone in income with steps of at most one, and
  // with >= n_groups CBGs every group ends up non-empty.
  group[0] = 0;
  for (int k = 1; k < n; ++k) group[k] = std::min(group[k], group[k - 1] + 1);
  if (n >= n_groups)
    for (int k = n - 1; k >= 0; --k) group[k] = std::max(group[k], n_groups - (n - k));

  for (int k = 0; k < n; ++k) cbgs[order[k]].income_group = group[k];
}

void Dataset::build_indexes() {
  venue_index.clear();
  cbg_index.clear();
  sector_index.clear();
  for (int i = 0; i < n_venues(); ++i) venue_index.emplace(venues[i].id, i);
  for (int i = 0; i < n_cbgs(); ++i) cbg_index.emplace(cbgs[i].id, i);
  for (int i = 0; i < n_sectors(); ++i) sector_index.emplace(sectors[i], i);

  std::sort(edges.begin(), edges.end(), [](const VisitEdge& a, const VisitEdge& b) {
    if (a.venue != b.venue) return a.venue < b.venue;
    if (a.period != b.period) return a.period < b.period;
    return a.cbg < b.cbg;
  });

  venue_offsets.assign(static_cast<std::size_t>(n_venues()) * kPeriods + 1, 0);
  for (const VisitEdge& e : edges)
    ++venue_offsets[static_cast<std::size_t>(e.venue) * kPeriods + static_cast<int>(e.period) + 1];
  for (std::size_t k = 1; k < venue_offsets.size(); ++k) venue_offsets[k] += venue_offsets[k - 1];

  cbg_order.resize(edges.size());
  std::iota(cbg_order.begin(), cbg_order.end(), 0u);
  std::sort(cbg_order.begin(), cbg_order.end(), [&](std::uint32_t a, std::uint32_t b) {
    const VisitEdge& x = edges[a];
    const VisitEdge& y = edges[b];
    if (x.cbg != y.cbg) return x.cbg < y.cbg;
    if (x.period != y.period) return x.period < y.period;
    return x.venue < y.venue;
  });
  cbg_offsets.assign(static_cast<std::size_t>(n_cbgs()) * kPeriods + 1, 0);
  for (const VisitEdge& e : edges)
    ++cbg_offsets[static_cast<std::size_t>(e.cbg) * kPeriods + static_cast<int>(e.period) + 1];
  for (std::size_t k = 1; k < cbg_offsets.size(); ++k) cbg_offsets[k] += cbg_offsets[k - 1];
}

Dataset load_dataset(const std::string& visits_path, const std::string& venues_path,
                     const std::string& cbgs_path, int n_groups) {
  if (n_groups < 2) throw input_error("income group count must be at least 2");
  Dataset ds;
  ds.n_groups = n_groups;
  ParsedVenues pv = parse_venues(venues_path);
  ds.cbgs = parse_cbgs(cbgs_path);

  // Sort venues by id through an index permutation so the parallel sector-id
  // table stays aligned, then resolve sector ids against the sorted table.
  std::vector<int> vperm(pv.venues.size());
  std::iota(vperm.begin(), vperm.end(), 0);
  std::sort(vperm.begin(), vperm.end(),
            [&](int a, int b) { return pv.venues[a].id < pv.venues[b].id; });
  ds.venues.reserve(pv.venues.size());
  std::vector<std::string> sector_of_venue;
  sector_of_venue.reserve(pv.venues.size());
  for (int idx : vperm) {
    ds.venues.push_back(std::move(pv.venues[idx]));
    sector_of_venue.push_back(std::move(pv.sector_ids[idx]));
  }
  std::sort(ds.cbgs.begin(), ds.cbgs.end(), [](const Cbg& a, const Cbg& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < ds.venues.size(); ++i)
    if (ds.venues[i].id == ds.venues[i - 1].id)
      throw input_error(venues_path + ": duplicate venue_id '" + ds.venues[i].id + "'");
  for (std::size_t i = 1; i < ds.cbgs.size(); ++i)
    if (ds.cbgs[i].id == ds.cbgs[i - 1].id)
      throw input_error(cbgs_path + ": duplicate cbg_id '" + ds.cbgs[i].id + "'");

  ds.sectors = sector_of_venue;
  std::sort(ds.sectors.begin(), ds.sectors.end());
  ds.sectors.erase(std::unique(ds.sectors.begin(), ds.sectors.end()), ds.sectors.end());
  {
    std::unordered_map<std::string, int> sector_pos;
    for (int i = 0; i < ds.n_sectors(); ++i) sector_pos.emplace(ds.sectors[i], i);
    for (int i = 0; i < ds.n_venues(); ++i) ds.venues[i].sector = sector_pos.at(sector_of_venue[i]);
  }

  std::unordered_map<std::string, int> venue_pos;
  venue_pos.reserve(ds.venues.size());
  for (int i = 0; i < ds.n_venues(); ++i) venue_pos.emplace(ds.venues[i].id, i);

  std::unordered_map<std::string, int> cbg_pos;
  cbg_pos.reserve(ds.cbgs.size());
  for (int i = 0; i < ds.n_cbgs(); ++i) cbg_pos.emplace(ds.cbgs[i].id, i);

  // Visits: by far the largest table. Rows are independent, so field decoding
  // and id resolution run in parallel over row chunks; each row writes its own
  // slot, so the result is identical for any thread count.
  const std::string visit_text = read_text_file(visits_path);
  const std::vector<CsvRow> rows = parse_csv(visit_text);
  require(!rows.empty(), visits_path, 1, "missing header row");
  static constexpr const char* kCols[] = {"venue_id", "cbg_id", "period", "visit_count"};
  check_header(rows[0], std::span<const char* const>(kCols), visits_path);

  const std::size_t n_rows = rows.size() - 1;
  std::vector<VisitEdge> raw(n_rows);
  std::size_t err_line = SIZE_MAX;
  std::string err_msg;
#ifdef _OPENMP
#pragma omp parallel
#endif
  {
    std::size_t local_err_line = SIZE_MAX;
    std::string local_err_msg;
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
    for (std::ptrdiff_t ri = 0; ri < static_cast<std::ptrdiff_t>(n_rows); ++ri) {
      if (local_err_line != SIZE_MAX) continue;  // already failing; finish fast
      const CsvRow& row = rows[static_cast<std::size_t>(ri) + 1];
      try {
        require(row.fields.size() == 4, visits_path, row.line, "wrong field count");
        const auto vit = venue_pos.find(std::string(row.fields[0]));
        require(vit != venue_pos.end(), visits_path, row.line,
                "unknown venue_id '" + std::string(row.fields[0]) + "'");
        const auto cit = cbg_pos.find(std::string(row.fields[1]));
        require(cit != cbg_pos.end(), visits_path, row.line,
                "unknown cbg_id '" + std::string(row.fields[1]) + "'");
        Period period;
        if (row.fields[2] == kPeriodNames[0])
          period = Period::pre_shock;
        else if (row.fields[2] == kPeriodNames[1])
          period = Period::in_shock;
        else
          throw input_error(visits_path + ":" + std::to_string(row.line) +
                            ": period must be 'pre' or 'shock'");
        const long long count = parse_int_field(row.fields[3], visits_path, row.line);
        require(count >= 0, visits_path, row.line, "visit_count must be non-negative");
        raw[static_cast<std::size_t>(ri)] = {static_cast<std::int32_t>(vit->second),
                                             static_cast<std::int32_t>(cit->second), period, count};
      } catch (const input_error& e) {
        local_err_line = row.line;
        local_err_msg = e.what();
      }
    }
    if (local_err_line != SIZE_MAX) {
#ifdef _OPENMP
#pragma omp critical
#endif
      if (local_err_line < err_line) {
        err_line = local_err_line;
        err_msg = local_err_msg;
      }
    }
  }
  if (err_line != SIZE_MAX) throw input_error(err_msg);

  // Aggregate duplicate (venue, cbg, period) rows and drop zero totals.
  std::sort(raw.begin(), raw.end(), [](const VisitEdge& a, const VisitEdge& b) {
    if (a.venue != b.venue) return a.venue < b.venue;
    if (a.period != b.period) return a.period < b.period;
    return a.cbg < b.cbg;
  });
  ds.edges.reserve(raw.size());
  for (const VisitEdge& e : raw) {
    if (!ds.edges.empty() && ds.edges.back().venue == e.venue && ds.edges.back().cbg == e.cbg &&
        ds.edges.back().period == e.period)
      ds.edges.back().count += e.count;
    else
      ds.edges.push_back(e);
  }
  std::erase_if(ds.edges, [](const VisitEdge& e) { return e.count == 0; });

  // Every downstream comparison needs both sides of the shock.
  bool seen[kPeriods] = {false, false};
  for (const VisitEdge& e : ds.edges) seen[static_cast<int>(e.period)] = true;
  static constexpr const char* kPeriodLabels[kPeriods] = {"pre_shock", "in_shock"};
  for (int p = 0; p < kPeriods; ++p)
    if (!seen[p]) throw input_error(visits_path + ": no " + kPeriodLabels[p] + " records");

  assign_income_groups(ds.cbgs, n_groups);
  ds.build_indexes();
  return ds;
}

ValidationSummary summarize(const Dataset& ds) {
  ValidationSummary s;
  s.venues = ds.n_venues();
  s.cbgs = ds.n_cbgs();
  s.sectors = ds.n_sectors();
  s.visit_rows = static_cast<long long>(ds.edges.size());
  for (const VisitEdge& e : ds.edges) s.total_visits[static_cast<int>(e.period)] += e.count;
  s.group_population.assign(ds.n_groups, 0);
  for (const Cbg& c : ds.cbgs) s.group_population[c.income_group] += c.population;
  return s;
}

void write_visits_csv(std::ostream& os, const Dataset& ds, const std::string& meta) {
  os << "# " << meta << "\n";
  os << "venue_id,cbg_id,period,visit_count\n";
  for (const VisitEdge& e : ds.edges)
    os << ds.venues[e.venue].id << ',' << ds.cbgs[e.cbg].id << ','
       << kPeriodNames[static_cast<int>(e.period)] << ',' << e.count << "\n";
}

void write_venues_csv(std::ostream& os, const Dataset& ds, const std::string& meta) {
  bool extended = false;
  for (const Venue& v : ds.venues)
    for (int p = 0; p < kPeriods; ++p) extended = extended || v.dwell_min[p] || v.hourly[p];
  os << "# " << meta << "\n";
  os << (extended ? "venue_id,lat,lon,sector_id,dwell_pre,dwell_shock,hourly_pre,hourly_shock"
                  : "venue_id,lat,lon,sector_id")
     << "\n";
  for (const Venue& v : ds.venues) {
    os << v.id << ',' << format_double(v.lat) << ',' << format_double(v.lon) << ','
       << ds.sectors[v.sector];
    if (extended) {
      for (int p = 0; p < kPeriods; ++p) {
        os << ',';
        if (v.dwell_min[p]) os << format_double(*v.dwell_min[p]);
      }
      for (int p = 0; p < kPeriods; ++p) {
        os << ',';
        if (v.hourly[p]) {
          const auto& h = *v.hourly[p];
          for (int i = 0; i < 24; ++i) os << (i ? "|" : "") << h[i];
        }
      }
    }
    os << "\n";
  }
}

void write_cbgs_csv(std::ostream& os, const Dataset& ds, const std::string& meta) {
  os << "# " << meta << "\n";
  os << "cbg_id,lat,lon,median_income,population\n";
  for (const Cbg& c : ds.cbgs)
    os << c.id << ',' << format_double(c.lat) << ',' << format_double(c.lon) << ','
       << format_double(c.median_income) << ',' << c.population << "\n";
}

}  // namespace resil
