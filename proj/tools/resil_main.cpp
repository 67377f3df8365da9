#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "resil/csv.hpp"
#include "resil/pipeline.hpp"

namespace {

struct SubState {
  CLI::App* sub = nullptr;
  std::string config_path;
  resil::RunConfig flags;  // CLI-bound values; only flags actually passed win
};

void add_options(CLI::App* sub, SubState& st) {
  sub->add_option("--config", st.config_path, "key = value config file");
  sub->add_option("--visits", st.flags.visits, "visits CSV (venue_id,cbg_id,period,count)");
  sub->add_option("--venues", st.flags.venues, "venues CSV");
  sub->add_option("--cbgs", st.flags.cbgs, "CBGs CSV");
  sub->add_option("--out", st.flags.out, "output directory");
  sub->add_option("--groups", st.flags.n_groups, "number of income groups");
  sub->add_option("--band", st.flags.band, "extreme-band fraction for sector shares");
  sub->add_option("--core-k", st.flags.core_k, "sectors per core/peripheral class");
  sub->add_option("--cell-km", st.flags.cell_km, "grid cell side for spatial entropy");
  sub->add_option("--bridge-radius-km", st.flags.bridge_radius_km, "venue catchment radius");
  sub->add_option("--wilcoxon-exact-max", st.flags.wilcoxon_exact_max,
                  "largest n for the exact signed-rank distribution");
  sub->add_option("--centrality-tol", st.flags.centrality_tol, "power-iteration tolerance");
  sub->add_option("--centrality-max-iter", st.flags.centrality_max_iter,
                  "power-iteration cap");
  sub->add_option("--seed", st.flags.seed, "RNG seed (sampling, synthesis)");
  sub->add_option("--threads", st.flags.threads, "OpenMP thread cap (0 = default)");
  sub->add_option("--n-cbgs", st.flags.n_cbgs, "synthetic city: number of CBGs");
  sub->add_option("--n-sectors", st.flags.n_sectors, "synthetic city: number of sectors");
  sub->add_option("--n-venues", st.flags.n_venues, "synthetic city: number of venues");
  sub->add_option("--core-fraction", st.flags.core_fraction,
                  "synthetic city: planted core sector fraction");
  sub->add_option("--contraction", st.flags.contraction,
                  "synthetic city: in-shock visit budget multiplier (1 = no shock)");
  sub->add_option("--niche-affinity", st.flags.niche_affinity,
                  "synthetic city: strength of income-niche targeting");
}

resil::RunConfig resolve(const SubState& st) {
  resil::RunConfig cfg;
  if (st.sub->count("--config") > 0) resil::apply_config_file(cfg, st.config_path);

  struct Overlay {
    const char* flag;
    void (*apply)(resil::RunConfig&, const resil::RunConfig&);
  };
  static const Overlay overlays[] = {
      {"--visits", [](resil::RunConfig& c, const resil::RunConfig& f) { c.visits = f.visits; }},
      {"--venues", [](resil::RunConfig& c, const resil::RunConfig& f) { c.venues = f.venues; }},
      {"--cbgs", [](resil::RunConfig& c, const resil::RunConfig& f) { c.cbgs = f.cbgs; }},
      {"--out", [](resil::RunConfig& c, const resil::RunConfig& f) { c.out = f.out; }},
      {"--groups", [](resil::RunConfig& c, const resil::RunConfig& f) { c.n_groups = f.n_groups; }},
      {"--band", [](resil::RunConfig& c, const resil::RunConfig& f) { c.band = f.band; }},
      {"--core-k", [](resil::RunConfig& c, const resil::RunConfig& f) { c.core_k = f.core_k; }},
      {"--cell-km", [](resil::RunConfig& c, const resil::RunConfig& f) { c.cell_km = f.cell_km; }},
      {"--bridge-radius-km",
       [](resil::RunConfig& c, const resil::RunConfig& f) { c.bridge_radius_km = f.bridge_radius_km; }},
      {"--wilcoxon-exact-max",
       [](resil::RunConfig& c, const resil::RunConfig& f) { c.wilcoxon_exact_max = f.wilcoxon_exact_max; }},
      {"--centrality-tol",
       [](resil::RunConfig& c, const resil::RunConfig& f) { c.centrality_tol = f.centrality_tol; }},
      {"--centrality-max-iter",
       [](resil::RunConfig& c, const resil::RunConfig& f) { c.centrality_max_iter = f.centrality_max_iter; }},
      {"--seed", [](resil::RunConfig& c, const resil::RunConfig& f) { c.seed = f.seed; }},
      {"--threads", [](resil::RunConfig& c, const resil::RunConfig& f) { c.threads = f.threads; }},
      {"--n-cbgs", [](resil::RunConfig& c, const resil::RunConfig& f) { c.n_cbgs = f.n_cbgs; }},
      {"--n-sectors", [](resil::RunConfig& c, const resil::RunConfig& f) { c.n_sectors = f.n_sectors; }},
      {"--n-venues", [](resil::RunConfig& c, const resil::RunConfig& f) { c.n_venues = f.n_venues; }},
      {"--core-fraction",
       [](resil::RunConfig& c, const resil::RunConfig& f) { c.core_fraction = f.core_fraction; }},
      {"--contraction",
       [](resil::RunConfig& c, const resil::RunConfig& f) { c.contraction = f.contraction; }},
      {"--niche-affinity",
       [](resil::RunConfig& c, const resil::RunConfig& f) { c.niche_affinity = f.niche_affinity; }},
  };
  for (const Overlay& o : overlays)
    if (st.sub->count(o.flag) > 0) o.apply(cfg, st.flags);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"venue-level segregation/mobility outcomes, sector dependency networks and "
               "core-periphery comparisons across a mobility shock"};
  app.require_subcommand(1);

  std::vector<std::unique_ptr<SubState>> states;
  const auto make_sub = [&](const char* name, const char* desc) -> SubState& {
    auto st = std::make_unique<SubState>();
    st->sub = app.add_subcommand(name, desc);
    add_options(st->sub, *st);
    states.push_back(std::move(st));
    return *states.back();
  };

  SubState& validate = make_sub("validate", "load the three input tables and print a summary");
  SubState& analyze =
      make_sub("analyze", "per-venue segregation/mobility outcomes and sector band shares");
  SubState& network =
      make_sub("network", "sector proximity network, centrality and core/periphery labels");
  SubState& regress = make_sub("regress", "nested sector-level resilience regressions");
  SubState& compare =
      make_sub("compare", "spatiotemporal core-vs-peripheral comparison with paired tests");
  SubState& synth = make_sub("synth", "generate a synthetic city with planted structure");
  SubState& report = make_sub("report", "run every analysis stage and write a manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad usage is an input error
  }

  try {
    if (validate.sub->parsed()) {
      const resil::RunConfig cfg = resolve(validate);
      resil::validate_config(cfg);
      resil::apply_thread_cap(cfg);
      resil::cmd_validate(cfg, std::cout);
    } else if (analyze.sub->parsed()) {
      const resil::RunConfig cfg = resolve(analyze);
      resil::validate_config(cfg);
      resil::apply_thread_cap(cfg);
      resil::cmd_analyze(cfg);
    } else if (network.sub->parsed()) {
      const resil::RunConfig cfg = resolve(network);
      resil::validate_config(cfg);
      resil::apply_thread_cap(cfg);
      resil::cmd_network(cfg);
    } else if (regress.sub->parsed()) {
      const resil::RunConfig cfg = resolve(regress);
      resil::validate_config(cfg);
      resil::apply_thread_cap(cfg);
      resil::cmd_regress(cfg);
    } else if (compare.sub->parsed()) {
      const resil::RunConfig cfg = resolve(compare);
      resil::validate_config(cfg);
      resil::apply_thread_cap(cfg);
      resil::cmd_compare(cfg);
    } else if (synth.sub->parsed()) {
      const resil::RunConfig cfg = resolve(synth);
      resil::validate_config(cfg);
      resil::apply_thread_cap(cfg);
      resil::cmd_synth(cfg);
    } else if (report.sub->parsed()) {
      const resil::RunConfig cfg = resolve(report);
      resil::validate_config(cfg);
      resil::apply_thread_cap(cfg);
      resil::cmd_report(cfg);
    }
  } catch (const resil::input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
