#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "resil/csv.hpp"
#include "resil/ingest.hpp"

using namespace resil;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content) const {
    const fs::path p = path / name;
    std::ofstream os(p);
    os << content;
    return p.string();
  }
};

const char* kVenuesCsv =
    "venue_id,lat,lon,sector_id\n"
    "v1,40.0,-75.0,food\n"
    "v2,40.01,-75.0,food\n"
    "v3,40.02,-75.0,gym\n";

const char* kCbgsCsv =
    "cbg_id,lat,lon,median_income,population\n"
    "c1,40.0,-75.0,30000,100\n"
    "c2,40.1,-75.0,50000,100\n"
    "c3,40.2,-75.0,70000,100\n";

const char* kVisitsCsv =
    "venue_id,cbg_id,period,visit_count\n"
    "v1,c1,pre,3\n"
    "v1,c1,pre,4\n"
    "v1,c2,shock,5\n"
    "v2,c3,pre,2\n"
    "v2,c3,shock,2\n";

std::vector<Cbg> cbgs_with(const std::vector<std::pair<double, long long>>& income_pop) {
  std::vector<Cbg> out;
  char id = 'a';
  for (const auto& [income, pop] : income_pop) {
    Cbg c;
    c.id = std::string("c") + id++;
    c.median_income = income;
    c.population = pop;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<int> groups_of(const std::vector<Cbg>& cbgs) {
  std::vector<int> g;
  for (const Cbg& c : cbgs) g.push_back(c.income_group);
  return g;
}

}  // namespace

TEST_CASE("equal-population groups split evenly") {
  std::vector<Cbg> five = cbgs_with({{10, 1}, {20, 1}, {30, 1}, {40, 1}, {50, 1}});
  assign_income_groups(five, 5);
  CHECK(groups_of(five) == std::vector<int>{0, 1, 2, 3, 4});

  std::vector<Cbg> ten =
      cbgs_with({{10, 7}, {20, 7}, {30, 7}, {40, 7}, {50, 7},
                 {60, 7}, {70, 7}, {80, 7}, {90, 7}, {100, 7}});
  assign_income_groups(ten, 5);
  CHECK(groups_of(ten) == std::vector<int>{0, 0, 1, 1, 2, 2, 3, 3, 4, 4});
}

TEST_CASE("a dominant cbg pulls the cut by population midpoints") {
  // Midpoints 50 and 150 both fall under the 500 cut; the 800-resident CBG's
  // midpoint 500 lands in the upper half.
  std::vector<Cbg> three = cbgs_with({{10, 100}, {20, 100}, {30, 800}});
  assign_income_groups(three, 2);
  CHECK(groups_of(three) == std::vector<int>{0, 0, 1});
}

TEST_CASE("group assignment properties") {
  std::mt19937_64 rng(64);
  for (int it = 0; it < 300; ++it) {
    const int n = 2 + static_cast<int>(rng() % 30);
    const int n_groups = 2 + static_cast<int>(rng() % 5);
    std::vector<std::pair<double, long long>> spec;
    for (int i = 0; i < n; ++i)
      spec.emplace_back(1000.0 + static_cast<double>(rng() % 500) * 100.0,
                        1 + static_cast<long long>(rng() % 2000));
    std::vector<Cbg> cbgs = cbgs_with(spec);
    assign_income_groups(cbgs, n_groups);

    long long max_pop = 0;
    for (const Cbg& c : cbgs) max_pop = std::max(max_pop, c.population);

    // Monotone in income.
    std::vector<const Cbg*> by_income;
    for (const Cbg& c : cbgs) by_income.push_back(&c);
    std::sort(by_income.begin(), by_income.end(), [](const Cbg* a, const Cbg* b) {
      if (a->median_income != b->median_income) return a->median_income < b->median_income;
      return a->id < b->id;
    });
    for (std::size_t i = 1; i < by_income.size(); ++i) {
      CHECK(by_income[i]->income_group >= by_income[i - 1]->income_group);
      CHECK(by_income[i]->income_group <= by_income[i - 1]->income_group + 1);
    }

    // All groups used once there are enough CBGs; range always valid.
    std::vector<long long> pop_of_group(n_groups, 0);
    for (const Cbg& c : cbgs) {
      CHECK(c.income_group >= 0);
      CHECK(c.income_group < n_groups);
      pop_of_group[c.income_group] += c.population;
    }
    if (n >= n_groups)
      for (long long p : pop_of_group) CHECK(p > 0);

    // Idempotence.
    std::vector<Cbg> again = cbgs;
    assign_income_groups(again, n_groups);
    CHECK(groups_of(again) == groups_of(cbgs));
  }
}

TEST_CASE("quantile cut granularity is bounded by the largest cbg") {
  // Whole-CBG assignment can park half a boundary CBG on the wrong side of
  // each of a group's two cuts, so a group deviates from total/n_groups by
  // at most one max-size CBG and the spread between groups by two.
  std::mt19937_64 rng(65);
  for (int it = 0; it < 100; ++it) {
    const int n = 10 + static_cast<int>(rng() % 40);
    std::vector<std::pair<double, long long>> spec;
    for (int i = 0; i < n; ++i)
      spec.emplace_back(1000.0 * (1 + rng() % 1000), 1 + static_cast<long long>(rng() % 300));
    std::vector<Cbg> cbgs = cbgs_with(spec);
    assign_income_groups(cbgs, 5);
    long long total = 0;
    long long max_pop = 0;
    std::vector<long long> pop_of_group(5, 0);
    for (const Cbg& c : cbgs) {
      total += c.population;
      max_pop = std::max(max_pop, c.population);
      pop_of_group[c.income_group] += c.population;
    }
    for (long long p : pop_of_group) CHECK(std::abs(p - total / 5) <= max_pop + 5);
    const auto [lo, hi] = std::minmax_element(pop_of_group.begin(), pop_of_group.end());
    CHECK(*hi - *lo <= 2 * max_pop);
  }
}

TEST_CASE("loading aggregates duplicates and resolves ids") {
  TempDir tmp("resil_test_load");
  const std::string visits = tmp.file("visits.csv", kVisitsCsv);
  const std::string venues = tmp.file("venues.csv", kVenuesCsv);
  const std::string cbgs = tmp.file("cbgs.csv", kCbgsCsv);

  const Dataset ds = load_dataset(visits, venues, cbgs, 3);
  CHECK(ds.n_venues() == 3);
  CHECK(ds.n_cbgs() == 3);
  CHECK(ds.sectors == std::vector<std::string>{"food", "gym"});
  REQUIRE(ds.edges.size() == 4);  // the two v1/c1/pre rows merged

  const auto pre = ds.venue_edges(ds.venue_index.at("v1"), Period::pre_shock);
  REQUIRE(pre.size() == 1);
  CHECK(pre[0].count == 7);
  CHECK(ds.cbgs[pre[0].cbg].id == "c1");

  const ValidationSummary sum = summarize(ds);
  CHECK(sum.venues == 3);
  CHECK(sum.cbgs == 3);
  CHECK(sum.sectors == 2);
  CHECK(sum.visit_rows == 4);
  CHECK(sum.total_visits[0] == 9);
  CHECK(sum.total_visits[1] == 7);
  CHECK(sum.group_population == std::vector<long long>{100, 100, 100});
}

TEST_CASE("load order does not matter") {
  TempDir tmp("resil_test_shuffle");
  const std::string venues = tmp.file("venues.csv", kVenuesCsv);
  const std::string cbgs = tmp.file("cbgs.csv", kCbgsCsv);
  const std::string visits = tmp.file("visits.csv", kVisitsCsv);

  // Same rows, different order (including the duplicate pair split apart).
  const std::string shuffled = tmp.file("visits2.csv",
                                        "venue_id,cbg_id,period,visit_count\n"
                                        "v2,c3,shock,2\n"
                                        "v1,c1,pre,4\n"
                                        "v2,c3,pre,2\n"
                                        "v1,c2,shock,5\n"
                                        "v1,c1,pre,3\n");
  const Dataset a = load_dataset(visits, venues, cbgs, 3);
  const Dataset b = load_dataset(shuffled, venues, cbgs, 3);
  REQUIRE(a.edges.size() == b.edges.size());
  for (std::size_t i = 0; i < a.edges.size(); ++i) {
    CHECK(a.edges[i].venue == b.edges[i].venue);
    CHECK(a.edges[i].cbg == b.edges[i].cbg);
    CHECK(a.edges[i].period == b.edges[i].period);
    CHECK(a.edges[i].count == b.edges[i].count);
  }
}

TEST_CASE("referential and schema errors carry file and line context") {
  TempDir tmp("resil_test_errors");
  const std::string venues = tmp.file("venues.csv", kVenuesCsv);
  const std::string cbgs = tmp.file("cbgs.csv", kCbgsCsv);

  const std::string dangling = tmp.file("visits_dangling.csv",
                                        "venue_id,cbg_id,period,visit_count\n"
                                        "v1,c1,pre,3\n"
                                        "X9,c1,shock,2\n");
  CHECK_THROWS_WITH_AS(load_dataset(dangling, venues, cbgs, 3),
                       doctest::Contains("unknown venue_id 'X9'"), input_error);
  try {
    load_dataset(dangling, venues, cbgs, 3);
  } catch (const input_error& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);  // row cited
  }

  const std::string empty = tmp.file("visits_empty.csv", "venue_id,cbg_id,period,visit_count\n");
  CHECK_THROWS_WITH_AS(load_dataset(empty, venues, cbgs, 3),
                       doctest::Contains("no pre_shock records"), input_error);

  const std::string pre_only = tmp.file("visits_pre_only.csv",
                                        "venue_id,cbg_id,period,visit_count\n"
                                        "v1,c1,pre,3\n");
  CHECK_THROWS_WITH_AS(load_dataset(pre_only, venues, cbgs, 3),
                       doctest::Contains("no in_shock records"), input_error);

  const std::string bad_period = tmp.file("visits_bad_period.csv",
                                          "venue_id,cbg_id,period,visit_count\n"
                                          "v1,c1,during,3\n");
  CHECK_THROWS_AS(load_dataset(bad_period, venues, cbgs, 3), input_error);

  const std::string bad_header = tmp.file("visits_bad_header.csv",
                                          "venue,cbg,period,count\n"
                                          "v1,c1,pre,3\n");
  CHECK_THROWS_WITH_AS(load_dataset(bad_header, venues, cbgs, 3),
                       doctest::Contains("expected header"), input_error);

  CHECK_THROWS_AS(load_dataset(tmp.file("x.csv", kVisitsCsv), venues, cbgs, 1), input_error);
  CHECK_THROWS_AS(load_dataset((tmp.path / "absent.csv").string(), venues, cbgs, 3), input_error);
}

TEST_CASE("optional venue columns load and absent fields stay absent") {
  TempDir tmp("resil_test_optional");
  const std::string venues = tmp.file(
      "venues.csv",
      "venue_id,lat,lon,sector_id,dwell_pre,dwell_shock,hourly_pre,hourly_shock\n"
      "v1,40.0,-75.0,food,12.5,,1|2|3|4|5|6|7|8|9|10|11|12|13|14|15|16|17|18|19|20|21|22|23|24,\n"
      "v2,40.01,-75.0,gym,,,,\n");
  const std::string cbgs = tmp.file("cbgs.csv", kCbgsCsv);
  const std::string visits = tmp.file("visits.csv",
                                      "venue_id,cbg_id,period,visit_count\n"
                                      "v1,c1,pre,3\n"
                                      "v2,c2,shock,2\n");
  const Dataset ds = load_dataset(visits, venues, cbgs, 2);
  const Venue& v1 = ds.venues[ds.venue_index.at("v1")];
  REQUIRE(v1.dwell_min[0].has_value());
  CHECK(*v1.dwell_min[0] == 12.5);
  CHECK(!v1.dwell_min[1].has_value());
  REQUIRE(v1.hourly[0].has_value());
  CHECK((*v1.hourly[0])[23] == 24);
  CHECK(!v1.hourly[1].has_value());
  const Venue& v2 = ds.venues[ds.venue_index.at("v2")];
  CHECK(!v2.dwell_min[0].has_value());
  CHECK(!v2.hourly[0].has_value());

  const std::string bad_hourly = tmp.file(
      "venues_bad.csv",
      "venue_id,lat,lon,sector_id,dwell_pre,dwell_shock,hourly_pre,hourly_shock\n"
      "v1,40.0,-75.0,food,,,1|2|3,\n");
  CHECK_THROWS_WITH_AS(load_dataset(visits, bad_hourly, cbgs, 2),
                       doctest::Contains("24"), input_error);
}

TEST_CASE("written tables load back identically") {
  TempDir tmp("resil_test_roundtrip");
  const std::string venues = tmp.file(
      "venues.csv",
      "venue_id,lat,lon,sector_id,dwell_pre,dwell_shock,hourly_pre,hourly_shock\n"
      "v1,40.125,-75.25,food,12.5,8.25,1|2|3|4|5|6|7|8|9|10|11|12|13|14|15|16|17|18|19|20|21|22|23|24,\n"
      "v2,40.0625,-75.0,gym,,,,\n");
  const std::string cbgs = tmp.file("cbgs.csv", kCbgsCsv);
  const std::string visits = tmp.file("visits.csv",
                                      "venue_id,cbg_id,period,visit_count\n"
                                      "v1,c1,pre,3\n"
                                      "v1,c2,shock,5\n"
                                      "v2,c2,pre,2\n"
                                      "v2,c3,shock,1\n");
  const Dataset ds = load_dataset(visits, venues, cbgs, 2);

  std::ostringstream vs, ve, cb;
  write_visits_csv(vs, ds, "round trip");
  write_venues_csv(ve, ds, "round trip");
  write_cbgs_csv(cb, ds, "round trip");
  CHECK(vs.str().rfind("# round trip\n", 0) == 0);

  const std::string v2 = tmp.file("visits2.csv", vs.str());
  const std::string e2 = tmp.file("venues2.csv", ve.str());
  const std::string c2 = tmp.file("cbgs2.csv", cb.str());
  const Dataset back = load_dataset(v2, e2, c2, 2);

  REQUIRE(back.n_venues() == ds.n_venues());
  REQUIRE(back.n_cbgs() == ds.n_cbgs());
  REQUIRE(back.edges.size() == ds.edges.size());
  for (int v = 0; v < ds.n_venues(); ++v) {
    CHECK(back.venues[v].id == ds.venues[v].id);
    CHECK(back.venues[v].lat == ds.venues[v].lat);
    CHECK(back.venues[v].lon == ds.venues[v].lon);
    CHECK(back.venues[v].sector == ds.venues[v].sector);
    CHECK(back.venues[v].dwell_min == ds.venues[v].dwell_min);
    CHECK(back.venues[v].hourly == ds.venues[v].hourly);
  }
  for (int c = 0; c < ds.n_cbgs(); ++c) {
    CHECK(back.cbgs[c].id == ds.cbgs[c].id);
    CHECK(back.cbgs[c].median_income == ds.cbgs[c].median_income);
    CHECK(back.cbgs[c].population == ds.cbgs[c].population);
    CHECK(back.cbgs[c].income_group == ds.cbgs[c].income_group);
  }
  for (std::size_t i = 0; i < ds.edges.size(); ++i) {
    CHECK(back.edges[i].venue == ds.edges[i].venue);
    CHECK(back.edges[i].cbg == ds.edges[i].cbg);
    CHECK(back.edges[i].period == ds.edges[i].period);
    CHECK(back.edges[i].count == ds.edges[i].count);
  }

  // A second write of the reloaded dataset is byte-identical.
  std::ostringstream vs2;
  write_visits_csv(vs2, back, "round trip");
  CHECK(vs2.str() == vs.str());
}
