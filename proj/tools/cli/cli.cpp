#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "disrupt/audit.hpp"
#include "disrupt/error.hpp"
#include "disrupt/graph.hpp"
#include "disrupt/metrics.hpp"
#include "disrupt/nullmodel.hpp"
#include "disrupt/parallel.hpp"
#include "disrupt/rewire.hpp"
#include "disrupt/stats.hpp"
#include "disrupt/synth.hpp"
#include "disrupt/table_io.hpp"
#include "run_record.hpp"
#include "version.hpp"

#ifndef DISRUPT_DATA_DIR
#define DISRUPT_DATA_DIR "share/disrupt"
#endif
#ifndef DISRUPT_SOURCE_DATA_DIR
#define DISRUPT_SOURCE_DATA_DIR DISRUPT_DATA_DIR
#endif

namespace disrupt::cli {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

char parse_delimiter(const std::string& s) {
  if (s == "tab" || s == "\\t" || s == "\t") return '\t';
  if (s.size() == 1) return s[0];
  throw DomainError("delimiter must be a single character or 'tab'");
}

json parse_json(const std::string& text) { return json::parse(text); }

/// Shipped crosswalk file: $DISRUPT_DATA_DIR, then the install prefix, then the source tree.
std::string default_crosswalk(const std::string& name) {
  std::vector<fs::path> roots;
  if (const char* env = std::getenv("DISRUPT_DATA_DIR")) roots.emplace_back(env);
  roots.emplace_back(DISRUPT_DATA_DIR);
  roots.emplace_back(DISRUPT_SOURCE_DATA_DIR);
  for (const auto& r : roots)
    if (fs::exists(r / "crosswalks" / name)) return (r / "crosswalks" / name).string();
  return (roots.back() / "crosswalks" / name).string();
}

// ---- Shared option groups ------------------------------------------------------

struct Common {
  std::string out;
  bool force = false;
  std::uint64_t seed = 0;

  void add(CLI::App* app) {
    app->add_option("-o,--out", out, "Output directory")->required();
    app->add_flag("--force", force, "Allow writing into a non-empty output directory");
    app->add_option("--seed", seed, "Root seed for all randomness")->capture_default_str();
  }
};

struct GraphArgs {
  std::string nodes;
  std::string edges;
  bool lenient = false;
  bool forbid_same_year = false;
  std::string delimiter = ",";
  Year year_min = -100000;
  Year year_max = 100000;

  void add(CLI::App* app, bool required = true) {
    auto* n = app->add_option("--nodes", nodes, "Nodes file");
    auto* e = app->add_option("--edges", edges, "Edges file");
    if (required) {
      n->required();
      e->required();
    }
    app->add_flag("--lenient", lenient, "Drop offending records instead of failing");
    app->add_flag("--forbid-same-year", forbid_same_year, "Treat same-year citations as year violations");
    app->add_option("--delimiter", delimiter, "Field delimiter (one character or 'tab')")->capture_default_str();
    app->add_option("--year-min", year_min, "Smallest valid publication year")->capture_default_str();
    app->add_option("--year-max", year_max, "Largest valid publication year")->capture_default_str();
  }
  bool given() const { return !nodes.empty() || !edges.empty(); }
  LoadPolicy policy() const {
    LoadPolicy p = lenient ? LoadPolicy::lenient() : LoadPolicy::strict();
    p.allow_same_year = !forbid_same_year;
    p.year_min = year_min;
    p.year_max = year_max;
    p.delimiter = parse_delimiter(delimiter);
    return p;
  }
  CitationGraph load() const {
    if (nodes.empty() || edges.empty()) throw DomainError("both --nodes and --edges are required");
    return load_graph(fs::path(nodes), fs::path(edges), policy());
  }
  void record(RunRecord& rec) const {
    rec.add_input(nodes);
    rec.add_input(edges);
  }
  json to_json() const {
    return {{"nodes", nodes},
            {"edges", edges},
            {"lenient", lenient},
            {"allow_same_year", !forbid_same_year},
            {"delimiter", delimiter},
            {"year_min", year_min},
            {"year_max", year_max}};
  }
};

struct MetricArgs {
  int window = 5;
  int threshold = 1;
  bool exclude_same_year = false;

  void add(CLI::App* app) {
    app->add_option("--window", window, "Forward window t in years")->capture_default_str();
    app->add_option("--threshold", threshold, "Coupling threshold l")->capture_default_str();
    app->add_flag("--exclude-same-year", exclude_same_year, "Start the window the year after publication");
  }
  MetricConfig config() const {
    MetricConfig c;
    c.window_years = window;
    c.coupling_threshold = threshold;
    c.include_same_year = !exclude_same_year;
    c.check();
    return c;
  }
  json to_json() const {
    return {{"window_years", window}, {"coupling_threshold", threshold}, {"include_same_year", !exclude_same_year}};
  }
};

// ---- Output helpers -------------------------------------------------------------

/// year, mean, ci_low, ci_high, n; CI is mean +/- 1.96 standard errors.
std::string series_csv(const std::vector<std::pair<Year, double>>& values) {
  std::map<Year, std::vector<double>> by_year;
  for (const auto& [y, v] : values) by_year[y].push_back(v);
  std::ostringstream os;
  const std::string header[] = {"year", "mean", "ci_low", "ci_high", "n"};
  io::write_row(os, header);
  for (const auto& [y, vs] : by_year) {
    const double n = static_cast<double>(vs.size());
    double sum = 0.0;
    for (double v : vs) sum += v;
    const double mean = sum / n;
    std::string lo, hi;
    if (vs.size() >= 2) {
      double ss = 0.0;
      for (double v : vs) ss += (v - mean) * (v - mean);
      const double se = std::sqrt(ss / (n - 1.0) / n);
      lo = io::format_double(mean - stats::kCiMultiplier * se);
      hi = io::format_double(mean + stats::kCiMultiplier * se);
    }
    const std::string row[] = {std::to_string(y), io::format_double(mean), lo, hi, std::to_string(vs.size())};
    io::write_row(os, row);
  }
  return os.str();
}

template <class F>
std::vector<std::pair<Year, double>> collect(const MetricsTable& table, F&& value) {
  std::vector<std::pair<Year, double>> out;
  for (const auto& r : table)
    if (std::optional<double> v = value(r)) out.emplace_back(r.year, *v);
  return out;
}

json samples_json(const std::vector<EdgeSample>& samples) {
  json arr = json::array();
  for (const auto& s : samples) arr.push_back({s.citing_id, s.cited_id});
  return arr;
}

json validation_json(const ValidationReport& r) {
  json j;
  j["clean"] = r.clean();
  j["dangling_edge_count"] = r.dangling_edge_count;
  j["duplicate_edge_count"] = r.duplicate_edge_count;
  j["self_loop_count"] = r.self_loop_count;
  j["year_violation_count"] = r.year_violation_count;
  j["year_range_node_count"] = r.year_range_node_count;
  j["samples"] = {{"dangling", samples_json(r.dangling_samples)},
                  {"duplicate", samples_json(r.duplicate_samples)},
                  {"self_loop", samples_json(r.self_loop_samples)},
                  {"year_violation", samples_json(r.year_violation_samples)},
                  {"year_range", r.year_range_samples}};
  return j;
}

std::string to_text(const std::function<void(std::ostream&)>& writer) {
  std::ostringstream os;
  writer(os);
  return os.str();
}

// ---- metrics ----------------------------------------------------------------------

struct MetricsCmd {
  Common common;
  GraphArgs graph;
  MetricArgs metric;

  void run(unsigned workers, std::ostream& out) const {
    const MetricConfig mcfg = metric.config();
    const CitationGraph g = graph.load();
    RunRecord rec(common.out, common.force, "metrics", common.seed,
                  {{"graph", graph.to_json()}, {"metrics", metric.to_json()}});
    graph.record(rec);

    const MetricsTable table = compute_all(g, mcfg, workers);
    rec.write_table("metrics.csv", to_text([&](std::ostream& os) { write_metrics(os, table); }));
    rec.write_json("validation.json", {{"nodes", g.node_count()},
                                       {"edges", g.edge_count()},
                                       {"report", validation_json(validate(g, !graph.forbid_same_year))}});

    std::vector<std::optional<double>> cd, cd_nok, cyg_v;
    for (const auto& r : table) {
      cd.push_back(r.cd);
      cd_nok.push_back(r.cd_nok);
      cyg_v.push_back(r.cyg);
    }
    const auto p_cd = percentile_normalize(cd);
    const auto p_nok = percentile_normalize(cd_nok);
    const auto p_cyg = percentile_normalize(cyg_v);
    std::ostringstream pct;
    const std::string header[] = {"id", "year", "cd_percentile", "cd_nok_percentile", "cyg_percentile"};
    io::write_row(pct, header);
    std::vector<std::pair<Year, double>> pct_series;
    for (std::size_t i = 0; i < table.size(); ++i) {
      const std::string row[] = {table[i].id, std::to_string(table[i].year), io::format_optional(p_cd[i]),
                                 io::format_optional(p_nok[i]), io::format_optional(p_cyg[i])};
      io::write_row(pct, row);
      if (p_cd[i]) pct_series.emplace_back(table[i].year, *p_cd[i]);
    }
    rec.write_table("percentiles.csv", pct.str());

    rec.write_table("series_cd.csv", series_csv(collect(table, [](const MetricsRecord& r) { return r.cd; })));
    rec.write_table("series_cd_nok.csv",
                    series_csv(collect(table, [](const MetricsRecord& r) { return r.cd_nok; })));
    rec.write_table("series_cd_percentile.csv", series_csv(pct_series));
    rec.write_table("series_mean_ref_age.csv",
                    series_csv(collect(table, [](const MetricsRecord& r) { return r.mean_ref_age; })));
    std::vector<std::pair<Year, double>> team;
    for (NodeIndex i = 0; i < g.node_count(); ++i)
      if (const auto& a = g.node(i).author_count) team.emplace_back(g.year(i), static_cast<double>(*a));
    rec.write_table("series_team_size.csv", series_csv(team));
    rec.finish();
    out << "metrics: " << table.size() << " works, " << g.edge_count() << " edges -> " << common.out << '\n';
  }
};

// ---- rewire -----------------------------------------------------------------------

struct RewireCmd {
  Common common;
  GraphArgs graph;
  MetricArgs metric;
  int replicates = 10;
  double swaps_per_edge = 10.0;
  bool exclude_zero_bcite = false;
  bool write_graphs = false;

  void add(CLI::App* app) {
    common.add(app);
    graph.add(app);
    metric.add(app);
    app->add_option("-k,--replicates", replicates, "Number of rewired replicates K")->capture_default_str();
    app->add_option("--swaps-per-edge", swaps_per_edge, "Swap attempts per edge")->capture_default_str();
    app->add_flag("--exclude-zero-bcite", exclude_zero_bcite, "Skip works without references in z-scores");
    app->add_flag("--write-graphs", write_graphs, "Write the rewired edge lists");
  }

  void run(unsigned workers, std::ostream& out) const {
    const MetricConfig mcfg = metric.config();
    RewireConfig rc;
    rc.replicates = replicates;
    rc.swaps_per_edge = swaps_per_edge;
    rc.seed = common.seed;
    rc.check();
    const CitationGraph g = graph.load();
    RunRecord rec(common.out, common.force, "rewire", common.seed,
                  {{"graph", graph.to_json()},
                   {"metrics", metric.to_json()},
                   {"rewire",
                    {{"replicates", replicates},
                     {"swaps_per_edge", swaps_per_edge},
                     {"exclude_zero_bcite", exclude_zero_bcite},
                     {"write_graphs", write_graphs}}}});
    graph.record(rec);

    const RewireEnsemble ens = build_ensemble(g, rc, mcfg, workers, write_graphs);
    const auto z = component_zscores(g, ens, mcfg, exclude_zero_bcite);
    rec.write_table("zscores.csv", to_text([&](std::ostream& os) { write_zscores(os, z); }));

    std::ostringstream cdr;
    const std::string header[] = {"id", "cd_random", "cd_nok_random"};
    io::write_row(cdr, header);
    std::vector<std::pair<Year, double>> nok_obs, nok_rand;
    for (NodeIndex i = 0; i < g.node_count(); ++i) {
      const auto s_cd = ens.summary(i, Quantity::cd);
      const auto s_nok = ens.summary(i, Quantity::cd_nok);
      const std::string row[] = {g.id(i), io::format_optional(s_cd.mean), io::format_optional(s_nok.mean)};
      io::write_row(cdr, row);
      if (exclude_zero_bcite && ens.observed[i].bcite_count == 0) continue;
      if (auto v = cd_nok(ens.observed[i])) nok_obs.emplace_back(g.year(i), *v);
      if (s_nok.mean) nok_rand.emplace_back(g.year(i), *s_nok.mean);
    }
    rec.write_table("cd_random.csv", cdr.str());
    rec.write_table("series_cd_nok_observed.csv", series_csv(nok_obs));
    rec.write_table("series_cd_nok_rewired.csv", series_csv(nok_rand));

    json quantities = json::object();
    for (Quantity q : kAllQuantities) {
      std::vector<std::pair<Year, double>> zs;
      double obs_sum = 0.0, rand_sum = 0.0, z_sum = 0.0;
      std::size_t obs_n = 0, rand_n = 0, small = 0;
      for (const auto& rec_z : z) {
        const auto& qz = rec_z[q];
        if (qz.observed) obs_sum += *qz.observed, ++obs_n;
        if (qz.random_mean) rand_sum += *qz.random_mean, ++rand_n;
        if (qz.z) {
          zs.emplace_back(rec_z.year, *qz.z);
          z_sum += *qz.z;
          if (std::abs(*qz.z) < 0.5) ++small;
        }
      }
      auto mean_or_null = [](double s, std::size_t n) { return n ? json(s / static_cast<double>(n)) : json(); };
      quantities[quantity_name(q)] = {{"mean_observed", mean_or_null(obs_sum, obs_n)},
                                      {"mean_random", mean_or_null(rand_sum, rand_n)},
                                      {"works_with_z", zs.size()},
                                      {"mean_z", mean_or_null(z_sum, zs.size())},
                                      {"share_abs_z_below_0_5", mean_or_null(static_cast<double>(small), zs.size())}};
      rec.write_table(std::string("series_z_") + quantity_name(q) + ".csv", series_csv(zs));
    }
    rec.write_json("ensemble.json", {{"works", g.node_count()},
                                     {"edges", g.edge_count()},
                                     {"replicates", replicates},
                                     {"quantities", quantities}});
    if (write_graphs) {
      for (std::size_t r = 0; r < ens.graphs.size(); ++r)
        rec.write_table("rewired_edges_r" + std::to_string(r) + ".csv",
                        to_text([&](std::ostream& os) { write_edges(os, ens.graphs[r]); }));
    }
    rec.finish();
    out << "rewire: " << replicates << " replicates of " << g.edge_count() << " edges -> " << common.out << '\n';
  }
};

// ---- nullcheck --------------------------------------------------------------------

struct NullcheckCmd {
  Common common;
  GraphArgs graph;
  MetricArgs metric;
  std::optional<Year> cited_year;
  std::optional<Year> citing_year;
  std::size_t draws = 1000;
  double swaps_per_edge = 10.0;
  double tolerance_se = 3.0;
  double min_expected = 5.0;
  double required_fraction = 0.95;
  std::string scored = "directed";

  void add(CLI::App* app) {
    common.add(app);
    graph.add(app);
    metric.add(app);
    app->add_option("--cited-year", cited_year, "Stratum cited year (default: largest stratum)");
    app->add_option("--citing-year", citing_year, "Stratum citing year (default: largest stratum)");
    app->add_option("--draws", draws, "Rewired draws")->capture_default_str();
    app->add_option("--swaps-per-edge", swaps_per_edge, "Swap attempts per edge")->capture_default_str();
    app->add_option("--tolerance-se", tolerance_se, "Pass tolerance in binomial SEs")->capture_default_str();
    app->add_option("--min-expected", min_expected, "Minimum expected events to score a bucket")
        ->capture_default_str();
    app->add_option("--required-fraction", required_fraction, "Share of scored buckets that must pass")
        ->capture_default_str();
    app->add_option("--scored-convention", scored, "Mean citing degree convention: directed or printed")
        ->check(CLI::IsMember({"directed", "printed"}))
        ->capture_default_str();
  }

  void run(unsigned workers, std::ostream& out) const {
    const MetricConfig mcfg = metric.config();
    if (cited_year.has_value() != citing_year.has_value())
      throw DomainError("--cited-year and --citing-year must be given together");
    const CitationGraph g = graph.load();
    nullmodel::CocitationCheckConfig cfg;
    if (cited_year) {
      cfg.cited_year = *cited_year;
      cfg.citing_year = *citing_year;
    } else {
      std::tie(cfg.cited_year, cfg.citing_year) = nullmodel::largest_stratum(g);
    }
    cfg.draws = draws;
    cfg.swaps_per_edge = swaps_per_edge;
    cfg.seed = common.seed;
    cfg.tolerance_se = tolerance_se;
    cfg.min_expected_events = min_expected;
    cfg.required_pass_fraction = required_fraction;
    cfg.scored_convention =
        scored == "printed" ? nullmodel::DegreeConvention::printed : nullmodel::DegreeConvention::directed;
    cfg.workers = workers;

    RunRecord rec(common.out, common.force, "nullcheck", common.seed,
                  {{"graph", graph.to_json()},
                   {"metrics", metric.to_json()},
                   {"nullcheck",
                    {{"cited_year", cfg.cited_year},
                     {"citing_year", cfg.citing_year},
                     {"draws", draws},
                     {"swaps_per_edge", swaps_per_edge},
                     {"tolerance_se", tolerance_se},
                     {"min_expected", min_expected},
                     {"required_fraction", required_fraction},
                     {"scored_convention", scored}}}});
    graph.record(rec);

    const auto check = nullmodel::verify_cocitation(g, cfg);
    rec.write_json("cocitation.json",
                   parse_json(to_text([&](std::ostream& os) { nullmodel::write_cocitation_json(os, check); })));

    // Large-network limit of CD: n_I over n_I plus in-window citations of the
    // focal work's references by other works.
    std::ostringstream lim;
    const std::string header[] = {"id", "year", "n_citers", "ref_citation_sum", "limiting_cd", "cd"};
    io::write_row(lim, header);
    for (NodeIndex f = 0; f < g.node_count(); ++f) {
      const auto refs = g.references(f);
      if (refs.empty()) continue;
      const Year lo = mcfg.window_begin(g.year(f));
      const Year hi = mcfg.window_end(g.year(f));
      std::int64_t citers = 0;
      for (NodeIndex c : g.citers(f))
        if (g.year(c) >= lo && g.year(c) <= hi) ++citers;
      std::int64_t ref_sum = 0;
      for (NodeIndex r : refs)
        for (NodeIndex c : g.citers(r))
          if (c != f && g.year(c) >= lo && g.year(c) <= hi) ++ref_sum;
      if (citers + ref_sum == 0) continue;
      const std::string row[] = {g.id(f),
                                 std::to_string(g.year(f)),
                                 std::to_string(citers),
                                 std::to_string(ref_sum),
                                 io::format_double(nullmodel::limiting_cd(citers, ref_sum)),
                                 io::format_optional(cd_index(cd_components(g, f, mcfg)))};
      io::write_row(lim, row);
    }
    rec.write_table("limiting_cd.csv", lim.str());
    rec.finish();
    out << "nullcheck: stratum " << cfg.cited_year << "->" << cfg.citing_year << ", "
        << check.scored_buckets << " scored buckets, pass=" << (check.passed() ? "true" : "false") << " -> "
        << common.out << '\n';
  }
};

// ---- regress ----------------------------------------------------------------------

std::unordered_map<std::string, double> read_id_values(const std::string& path, const std::string& column,
                                                      char delimiter) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("input not found: " + path);
  io::DelimitedReader reader(in, path, delimiter);
  const auto c_id = reader.require_column("id");
  const auto c_v = reader.require_column(column);
  std::unordered_map<std::string, double> out;
  while (auto row = reader.next()) {
    row->fields.resize(reader.header().size());
    const std::string& v = row->fields[c_v];
    if (v.empty()) continue;
    out[row->fields[c_id]] = io::parse_double(v, path, row->line, c_v + 1);
  }
  return out;
}

struct RegressCmd {
  Common common;
  GraphArgs graph;
  MetricArgs metric;
  std::string metrics_file;
  std::string response = "cd";
  std::optional<Year> base_year;
  bool no_year_dummies = false;
  std::vector<std::string> controls;
  std::string fixed_effects;
  std::string cluster;
  std::string se = "robust_hc1";
  std::size_t within_threshold = 1000;
  std::string cd_random_file;
  int cd_random_replicates = 0;
  double swaps_per_edge = 10.0;

  void add(CLI::App* app) {
    common.add(app);
    graph.add(app);
    metric.add(app);
    app->add_option("--metrics", metrics_file, "Precomputed metrics file (default: compute from the graph)");
    app->add_option("--response", response, "cd, cd_nok, is_d, cyg, mean_ref_age, n_i, n_j, n_k, bcite_count")
        ->capture_default_str();
    app->add_option("--base-year", base_year, "Reference year for year dummies (default: earliest year)");
    app->add_flag("--no-year-dummies", no_year_dummies, "Omit year dummies");
    app->add_option("--controls", controls,
                    "zero_bcite_dummy, n_cited, n_new_works_field_year, mean_cited_field_year, "
                    "mean_authors_field_year, unlinked_refs, cd_random")
        ->delimiter(',');
    app->add_option("--fe", fixed_effects, "Fixed effects: field or subfield");
    app->add_option("--cluster", cluster, "Cluster key: id, year, field or subfield");
    app->add_option("--se", se, "classical, robust_hc0, robust_hc1 or clustered")->capture_default_str();
    app->add_option("--within-threshold", within_threshold, "Absorb fixed effects above this many groups")
        ->capture_default_str();
    app->add_option("--cd-random", cd_random_file, "File with columns id, cd_random");
    app->add_option("--cd-random-replicates", cd_random_replicates,
                    "Rewired replicates used to compute cd_random when no file is given")
        ->capture_default_str();
    app->add_option("--swaps-per-edge", swaps_per_edge, "Swap attempts per edge for cd_random")
        ->capture_default_str();
  }

  void run(unsigned workers, std::ostream& out) const {
    const MetricConfig mcfg = metric.config();
    stats::DesignSpec spec;
    spec.response = response;
    for (const auto& c : controls) spec.controls.push_back(stats::parse_control(c));
    if (!fixed_effects.empty()) spec.fixed_effects = fixed_effects;
    if (!cluster.empty()) spec.cluster_key = cluster;
    spec.se_kind = stats::parse_se_kind(se);
    spec.within_threshold = within_threshold;
    const bool wants_random =
        std::find(spec.controls.begin(), spec.controls.end(), stats::Control::cd_random) != spec.controls.end();
    if (wants_random && cd_random_file.empty() && cd_random_replicates < 1)
      throw DomainError("cd_random control needs --cd-random or --cd-random-replicates");

    const CitationGraph g = graph.load();
    const char delim = parse_delimiter(graph.delimiter);
    MetricsTable table;
    if (!metrics_file.empty()) {
      std::ifstream in(metrics_file);
      if (!in) throw NotFoundError("input not found: " + metrics_file);
      table = read_metrics(in, metrics_file, delim);
    } else {
      table = compute_all(g, mcfg, workers);
    }
    if (!no_year_dummies) {
      if (base_year) {
        spec.base_year = base_year;
      } else {
        for (const auto& r : table)
          if (stats::response_value(r, response) && (!spec.base_year || r.year < *spec.base_year))
            spec.base_year = r.year;
        if (!spec.base_year) throw DomainError("response '" + response + "' is undefined for every work");
      }
    }
    spec.check();

    RunRecord rec(common.out, common.force, "regress", common.seed,
                  {{"graph", graph.to_json()},
                   {"metrics", metric.to_json()},
                   {"regress",
                    {{"metrics_file", metrics_file},
                     {"response", response},
                     {"base_year", spec.base_year ? json(*spec.base_year) : json()},
                     {"controls", controls},
                     {"fixed_effects", fixed_effects},
                     {"cluster", cluster},
                     {"se", se},
                     {"within_threshold", within_threshold},
                     {"cd_random_file", cd_random_file},
                     {"cd_random_replicates", cd_random_replicates},
                     {"swaps_per_edge", swaps_per_edge}}}});
    graph.record(rec);
    if (!metrics_file.empty()) rec.add_input(metrics_file);

    stats::ExternalColumn cd_random;
    if (wants_random) {
      if (!cd_random_file.empty()) {
        rec.add_input(cd_random_file);
        cd_random = read_id_values(cd_random_file, "cd_random", delim);
      } else {
        RewireConfig rc;
        rc.replicates = cd_random_replicates;
        rc.swaps_per_edge = swaps_per_edge;
        rc.seed = common.seed;
        rc.check();
        const auto ens = build_ensemble(g, rc, mcfg, workers);
        for (NodeIndex i = 0; i < g.node_count(); ++i)
          if (auto m = ens.summary(i, Quantity::cd).mean) cd_random[g.id(i)] = *m;
      }
    }

    const stats::Design design = stats::build_design(table, g, spec, wants_random ? &cd_random : nullptr);
    const stats::RegressionFit fit = stats::ols_fit(design, spec.se_kind);
    json fit_j = parse_json(to_text([&](std::ostream& os) { stats::write_fit_json(os, fit); }));
    json body;
    body["response"] = response;
    body["base_year"] = spec.base_year ? json(*spec.base_year) : json();
    body["fit"] = std::move(fit_j);
    rec.write_json("fit.json", std::move(body));
    if (spec.base_year) {
      const auto curve = stats::predict_years(fit, design);
      rec.write_table("predictions.csv", to_text([&](std::ostream& os) { stats::write_prediction_csv(os, curve); }));
    }

    // Pooled percentile trend of the response.
    std::vector<std::optional<double>> values;
    for (const auto& r : table) values.push_back(stats::response_value(r, response));
    const auto pct = percentile_normalize(values);
    std::vector<std::pair<Year, double>> series;
    for (std::size_t i = 0; i < table.size(); ++i)
      if (pct[i]) series.emplace_back(table[i].year, *pct[i]);
    rec.write_table("series_" + response + "_percentile.csv", series_csv(series));
    std::map<Year, int> distinct;
    for (const auto& [y, v] : series) distinct[y] = 1;
    if (distinct.size() >= 3) {
      const auto trend = stats::trend_slope(series);
      const auto k = *trend.index_of("year");
      rec.write_json("trend.json", {{"response", response + "_percentile"},
                                    {"slope", trend.beta[k]},
                                    {"se", trend.se[k]},
                                    {"p", trend.p[k]},
                                    {"ci_low", trend.ci_low[k]},
                                    {"ci_high", trend.ci_high[k]},
                                    {"se_kind", stats::se_kind_name(trend.se_kind)},
                                    {"n", trend.n}});
    }
    rec.finish();
    out << "regress: N=" << fit.n << ", k=" << fit.k << " -> " << common.out << '\n';
  }
};

// ---- audit ------------------------------------------------------------------------

audit::Crosswalk load_crosswalk(const std::string& path, audit::UnmappedPolicy policy, char delimiter) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("input not found: " + path);
  auto cw = audit::read_crosswalk(in, path, delimiter);
  cw.unmapped = policy;
  return cw;
}

json crosswalk_json(const audit::CrosswalkResult& r) {
  json labels = json::object();
  for (const auto& [k, v] : r.unmapped_labels) labels[k] = v;
  return {{"mapped", r.mapped}, {"unmapped", r.unmapped}, {"absent", r.absent}, {"unmapped_labels", labels}};
}

struct AuditCmd {
  Common common;
  GraphArgs graph;
  MetricArgs metric;
  std::string table_file;
  std::string field_crosswalk = default_crosswalk("fields_sciscinet_to_wos.csv");
  std::string doctype_crosswalk = default_crosswalk("doctypes_to_meta.csv");
  bool no_crosswalk = false;
  std::string unmapped = "keep_as_other";
  std::vector<std::string> include_doctypes = {"Research articles"};
  bool all_doctypes = false;
  std::vector<std::string> include_fields;
  std::vector<std::string> exclude_languages;
  std::optional<Year> filter_year_min;
  std::optional<Year> filter_year_max;
  bool exclude_zero_bcite = false;
  bool exclude_cd_one = false;
  std::vector<std::string> group_by = {"field_meta", "year"};
  std::string compare;
  std::string match_key = "id";
  bool no_unlinked = false;
  std::string row_label = "A";
  std::string column_label = "B";

  void add(CLI::App* app) {
    common.add(app);
    graph.add(app, false);
    metric.add(app);
    app->add_option("--table", table_file, "Metrics-with-metadata table (instead of --nodes/--edges)");
    app->add_option("--field-crosswalk", field_crosswalk, "Field crosswalk file")->capture_default_str();
    app->add_option("--doctype-crosswalk", doctype_crosswalk, "Document-type crosswalk file")
        ->capture_default_str();
    app->add_flag("--no-crosswalk", no_crosswalk, "Use the table's *_meta columns as given");
    app->add_option("--unmapped", unmapped, "keep_as_other, drop or error")
        ->check(CLI::IsMember({"keep_as_other", "drop", "error"}))
        ->capture_default_str();
    app->add_option("--include-doctype", include_doctypes, "Document-type meta categories to keep")
        ->capture_default_str();
    app->add_flag("--all-doctypes", all_doctypes, "Do not filter on document type");
    app->add_option("--include-field", include_fields, "Field meta categories to keep");
    app->add_option("--exclude-language", exclude_languages, "Languages to drop");
    app->add_option("--filter-year-min", filter_year_min, "Drop works published before this year");
    app->add_option("--filter-year-max", filter_year_max, "Drop works published after this year");
    app->add_flag("--exclude-zero-bcite", exclude_zero_bcite, "Drop works without references");
    app->add_flag("--exclude-cd-one", exclude_cd_one, "Drop works with CD = 1");
    app->add_option("--group-by", group_by, "Columns for prevalence shares")->delimiter(',')->capture_default_str();
    app->add_option("--compare", compare, "Second table for the coverage contingency table");
    app->add_option("--match-key", match_key, "Join column for --compare")->capture_default_str();
    app->add_flag("--no-unlinked", no_unlinked, "Do not count unlinked references as recorded");
    app->add_option("--row-label", row_label, "Label of this table in the contingency table")
        ->capture_default_str();
    app->add_option("--column-label", column_label, "Label of the --compare table")->capture_default_str();
  }

  void run(unsigned workers, std::ostream& out) const {
    const char delim = parse_delimiter(graph.delimiter);
    const auto policy = unmapped == "drop"    ? audit::UnmappedPolicy::drop
                        : unmapped == "error" ? audit::UnmappedPolicy::error
                                              : audit::UnmappedPolicy::keep_as_other;
    if (table_file.empty() == !graph.given()) throw DomainError("give either --table or --nodes/--edges");

    audit::Table table;
    std::optional<CitationGraph> g;
    if (!table_file.empty()) {
      std::ifstream in(table_file);
      if (!in) throw NotFoundError("input not found: " + table_file);
      table = audit::read_table(in, table_file, delim);
    } else {
      g = graph.load();
      table = audit::metrics_with_metadata(compute_all(*g, metric.config(), workers), *g);
    }
    std::optional<audit::Crosswalk> fields_cw, doctypes_cw;
    if (!no_crosswalk) {
      fields_cw = load_crosswalk(field_crosswalk, policy, ',');
      doctypes_cw = load_crosswalk(doctype_crosswalk, policy, ',');
    }
    audit::Table compare_table;
    if (!compare.empty()) {
      std::ifstream in(compare);
      if (!in) throw NotFoundError("input not found: " + compare);
      compare_table = audit::read_table(in, compare, delim);
    }

    audit::FilterCriteria crit;
    if (!all_doctypes) crit.include_doctypes = {include_doctypes.begin(), include_doctypes.end()};
    else crit.include_doctypes.clear();
    crit.include_fields = {include_fields.begin(), include_fields.end()};
    crit.exclude_languages = {exclude_languages.begin(), exclude_languages.end()};
    crit.year_min = filter_year_min;
    crit.year_max = filter_year_max;
    crit.exclude_zero_bcite = exclude_zero_bcite;
    crit.exclude_cd_equal_one = exclude_cd_one;

    RunRecord rec(common.out, common.force, "audit", common.seed,
                  {{"graph", graph.to_json()},
                   {"metrics", metric.to_json()},
                   {"audit",
                    {{"table", table_file},
                     {"field_crosswalk", no_crosswalk ? "" : field_crosswalk},
                     {"doctype_crosswalk", no_crosswalk ? "" : doctype_crosswalk},
                     {"unmapped", unmapped},
                     {"include_doctypes", all_doctypes ? std::vector<std::string>{} : include_doctypes},
                     {"include_fields", include_fields},
                     {"exclude_languages", exclude_languages},
                     {"year_min", filter_year_min ? json(*filter_year_min) : json()},
                     {"year_max", filter_year_max ? json(*filter_year_max) : json()},
                     {"exclude_zero_bcite", exclude_zero_bcite},
                     {"exclude_cd_one", exclude_cd_one},
                     {"group_by", group_by},
                     {"compare", compare},
                     {"match_key", match_key},
                     {"count_unlinked", !no_unlinked}}}});
    if (!table_file.empty()) rec.add_input(table_file);
    else graph.record(rec);
    if (!no_crosswalk) {
      rec.add_input(field_crosswalk);
      rec.add_input(doctype_crosswalk);
    }
    if (!compare.empty()) rec.add_input(compare);

    json cw_report = json::object();
    if (!no_crosswalk) {
      auto fr = audit::apply_crosswalk(table, *fields_cw, "field");
      cw_report["field"] = crosswalk_json(fr);
      auto dr = audit::apply_crosswalk(fr.table, *doctypes_cw, "doctype");
      cw_report["doctype"] = crosswalk_json(dr);
      table = std::move(dr.table);
      rec.write_json("crosswalk.json", {{"policy", unmapped}, {"columns", cw_report}});
    }

    const auto filtered = audit::filter_corpus(table, crit);
    rec.write_table("audited.csv", to_text([&](std::ostream& os) { audit::write_table(os, filtered.kept); }));
    rec.write_table("exclusions.csv",
                    to_text([&](std::ostream& os) { audit::write_exclusion_csv(os, filtered.report); }));
    rec.write_json("exclusions.json", parse_json(to_text(
                                          [&](std::ostream& os) { audit::write_exclusion_json(os, filtered.report); })));

    for (const char* predicate : {"zero_bcite", "cd_equals_one"}) {
      const auto shares = audit::group_share(filtered.kept, group_by, predicate);
      const std::string stem = std::string("shares_") + predicate;
      rec.write_table(stem + ".csv",
                      to_text([&](std::ostream& os) { audit::write_group_shares_csv(os, group_by, shares); }));
      rec.write_json(stem + ".json",
                     {{"predicate", predicate},
                      {"groups", parse_json(to_text([&](std::ostream& os) {
                         audit::write_group_shares_json(os, group_by, shares);
                       }))}});
    }

    if (!compare.empty()) {
      audit::CoverageOptions opt;
      opt.match_key = match_key;
      opt.count_unlinked = !no_unlinked;
      opt.row_label = row_label;
      opt.column_label = column_label;
      const auto ct = audit::coverage_contingency(filtered.kept, compare_table, opt);
      rec.write_table("contingency.csv", to_text([&](std::ostream& os) { audit::write_contingency_csv(os, ct); }));
      rec.write_json("contingency.json",
                     parse_json(to_text([&](std::ostream& os) { audit::write_contingency_json(os, ct); })));
    }
    rec.finish();
    out << "audit: kept " << filtered.report.kept_rows << " of " << filtered.report.input_rows << " rows -> "
        << common.out << '\n';
  }
};

// ---- synth ------------------------------------------------------------------------

struct SynthCmd {
  Common common;
  SyntheticSpec spec;
  LayeredSpec layered;
  bool use_layered = false;
  std::vector<std::string> doctype_weights;

  void add(CLI::App* app) {
    common.add(app);
    app->add_flag("--layered", use_layered, "Layered configuration-model corpus");
    app->add_option("--first-year", spec.first_year, "First publication year")->capture_default_str();
    app->add_option("--years", spec.years, "Number of years")->capture_default_str();
    app->add_option("--works", spec.works_first_year, "Works in the first year")->capture_default_str();
    app->add_option("--growth", spec.growth, "Yearly growth rate of works")->capture_default_str();
    app->add_option("--ref-mean", spec.ref_mean, "Mean references per work")->capture_default_str();
    app->add_option("--ref-dispersion", spec.ref_dispersion, "Negative binomial size (0 = Poisson)")
        ->capture_default_str();
    app->add_option("--rho", spec.rho, "Triadic-closure rate in the first year")->capture_default_str();
    app->add_option("--rho-slope", spec.rho_slope, "Change of the triadic-closure rate per year")
        ->capture_default_str();
    app->add_option("--pa", spec.pa_strength, "Preferential-attachment strength")->capture_default_str();
    app->add_option("--max-lag", spec.max_lag, "Oldest citable year offset (0 = unlimited)")->capture_default_str();
    app->add_option("--fields", spec.fields, "Raw field labels")->delimiter(',')->capture_default_str();
    app->add_option("--subfields", spec.subfields_per_field, "Subfields per field")->capture_default_str();
    app->add_option("--doctype", doctype_weights, "Raw doctype with weight, LABEL=WEIGHT (repeatable)");
    app->add_option("--author-mean", spec.author_mean, "Mean authors per work")->capture_default_str();
    app->add_option("--missing-refs", spec.missing_refs_fraction, "Share of works with unlinked references only")
        ->capture_default_str();
    app->add_option("--unlinked-mean", spec.unlinked_mean, "Mean unlinked references per work")
        ->capture_default_str();
    app->add_option("--layers", layered.layers, "Layered: number of years")->capture_default_str();
    app->add_option("--out-min", layered.out_min, "Layered: smallest out-degree per earlier layer")
        ->capture_default_str();
    app->add_option("--out-max", layered.out_max, "Layered: largest out-degree per earlier layer")
        ->capture_default_str();
    app->add_option("--hub-fraction", layered.hub_fraction, "Layered: share of high-weight targets")
        ->capture_default_str();
    app->add_option("--hub-weight", layered.hub_weight, "Layered: weight of a high-weight target")
        ->capture_default_str();
  }

  void run(unsigned, std::ostream& out, std::ostream& err) {
    if (!doctype_weights.empty()) {
      spec.doctypes.clear();
      for (const auto& dw : doctype_weights) {
        const auto eq = dw.rfind('=');
        if (eq == std::string::npos) throw DomainError("--doctype expects LABEL=WEIGHT, got '" + dw + "'");
        spec.doctypes.emplace_back(dw.substr(0, eq), io::parse_double(dw.substr(eq + 1), "--doctype", 1, 1));
      }
    }
    json doctypes = json::array();
    for (const auto& [l, w] : spec.doctypes) doctypes.push_back({l, w});
    json config;
    if (use_layered) {
      layered.works_per_year = spec.works_first_year;
      layered.first_year = spec.first_year;
      layered.check();
      config = {{"layered",
                 {{"works_per_year", layered.works_per_year},
                  {"layers", layered.layers},
                  {"first_year", layered.first_year},
                  {"out_min", layered.out_min},
                  {"out_max", layered.out_max},
                  {"hub_fraction", layered.hub_fraction},
                  {"hub_weight", layered.hub_weight}}}};
    } else {
      spec.check();
      config = {{"synthetic",
                 {{"first_year", spec.first_year},
                  {"years", spec.years},
                  {"works_first_year", spec.works_first_year},
                  {"growth", spec.growth},
                  {"ref_mean", spec.ref_mean},
                  {"ref_dispersion", spec.ref_dispersion},
                  {"rho", spec.rho},
                  {"rho_slope", spec.rho_slope},
                  {"pa_strength", spec.pa_strength},
                  {"max_lag", spec.max_lag},
                  {"fields", spec.fields},
                  {"subfields_per_field", spec.subfields_per_field},
                  {"doctypes", doctypes},
                  {"author_mean", spec.author_mean},
                  {"missing_refs_fraction", spec.missing_refs_fraction},
                  {"unlinked_mean", spec.unlinked_mean}}}};
    }
    RunRecord rec(common.out, common.force, "synth", common.seed, config);

    std::vector<std::string> warnings;
    std::size_t truncated = 0;
    CitationGraph g;
    if (use_layered) {
      g = generate_layered(layered, common.seed);
    } else {
      auto corpus = generate_synthetic(spec, common.seed);
      warnings = std::move(corpus.warnings);
      truncated = corpus.truncated_works;
      g = std::move(corpus.graph);
    }
    for (const auto& w : warnings) err << "warning: " << w << '\n';
    rec.write_table("nodes.csv", to_text([&](std::ostream& os) { write_nodes(os, g); }));
    rec.write_table("edges.csv", to_text([&](std::ostream& os) { write_edges(os, g); }));
    json per_year = json::object();
    for (const auto& [y, n] : g.works_per_year()) per_year[std::to_string(y)] = n;
    rec.write_json("synth.json", {{"works", g.node_count()},
                                  {"edges", g.edge_count()},
                                  {"works_per_year", per_year},
                                  {"truncated_works", truncated},
                                  {"warnings", warnings}});
    rec.finish();
    out << "synth: " << g.node_count() << " works, " << g.edge_count() << " edges -> " << common.out << '\n';
  }
};

void print_error(std::ostream& err, const std::string& kind, const std::string& message,
                 const std::string& subcommand) {
  json j;
  j["error"] = {{"kind", kind}, {"message", message}, {"subcommand", subcommand}};
  err << j.dump() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Disruption metrics, rewired null models, regressions and corpus audits for citation graphs",
               "disrupt"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "INI file; [section] per subcommand, flags override");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.fallthrough();
  unsigned workers = 0;
  app.add_option("-j,--workers", workers, "Worker threads (0 = hardware); never changes outputs")
      ->envname("DISRUPT_WORKERS");

  MetricsCmd metrics;
  auto* m = app.add_subcommand("metrics", "CD-index family per work");
  metrics.common.add(m);
  metrics.graph.add(m);
  metrics.metric.add(m);

  RewireCmd rewire;
  rewire.add(app.add_subcommand("rewire", "Rewired ensemble and component z-scores"));
  NullcheckCmd nullcheck;
  nullcheck.add(app.add_subcommand("nullcheck", "Configuration-model co-citation check on one stratum"));
  RegressCmd regress;
  regress.add(app.add_subcommand("regress", "OLS with year dummies, controls and fixed effects"));
  AuditCmd audit_cmd;
  audit_cmd.add(app.add_subcommand("audit", "Crosswalks, filters, prevalence shares and coverage tables"));
  SynthCmd synth;
  synth.add(app.add_subcommand("synth", "Synthetic citation corpus"));

  std::string sub;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    print_error(err, "usage", e.what(), "");
    return 2;
  }
  sub = app.get_subcommands().front()->get_name();
  try {
    const unsigned w = resolve_workers(workers);
    if (sub == "metrics") metrics.run(w, out);
    else if (sub == "rewire") rewire.run(w, out);
    else if (sub == "nullcheck") nullcheck.run(w, out);
    else if (sub == "regress") regress.run(w, out);
    else if (sub == "audit") audit_cmd.run(w, out);
    else if (sub == "synth") synth.run(w, out, err);
  } catch (const Error& e) {
    print_error(err, e.kind(), e.what(), sub);
    return 1;
  } catch (const std::exception& e) {
    print_error(err, "internal", e.what(), sub);
    return 1;
  }
  return 0;
}

}  // namespace disrupt::cli
