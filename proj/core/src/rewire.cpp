#include "disrupt/rewire.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "disrupt/error.hpp"
#include "disrupt/parallel.hpp"
#include "disrupt/random.hpp"
#include "disrupt/table_io.hpp"

namespace disrupt {

void RewireConfig::check() const {
  if (replicates < 1) throw DomainError("replicates must be >= 1");
  if (!(swaps_per_edge > 0.0)) throw DomainError("swaps_per_edge must be > 0");
}

namespace {

std::uint64_t key(NodeIndex a, NodeIndex b) { return (std::uint64_t{a} << 32) | b; }

RewireStats swap_within(std::vector<Edge>& edges, double swaps_per_edge, Rng& rng) {
  RewireStats stats;
  const std::size_t m = edges.size();
  if (m < 2) return stats;
  std::unordered_set<std::uint64_t> present;
  present.reserve(m * 2);
  for (const Edge& e : edges) present.insert(key(e.citing, e.cited));

  const auto attempts = static_cast<std::uint64_t>(std::ceil(swaps_per_edge * static_cast<double>(m)));
  for (std::uint64_t t = 0; t < attempts; ++t) {
    ++stats.attempts;
    const auto i = uniform_below(rng, m);
    const auto j = uniform_below(rng, m);
    if (i == j) continue;
    const Edge e1 = edges[i];
    const Edge e2 = edges[j];
    const NodeIndex a = e1.citing, x = e1.cited;
    const NodeIndex b = e2.citing, y = e2.cited;
    if (a == b || x == y) continue;  // swap would be a no-op
    if (a == y || b == x) continue;  // self-citation
    if (present.contains(key(a, y)) || present.contains(key(b, x))) continue;
    present.erase(key(a, x));
    present.erase(key(b, y));
    present.insert(key(a, y));
    present.insert(key(b, x));
    edges[i] = {a, y};
    edges[j] = {b, x};
    ++stats.accepted;
  }
  return stats;
}

}  // namespace

std::map<std::pair<Year, Year>, std::size_t> stratum_counts(const CitationGraph& graph) {
  std::map<std::pair<Year, Year>, std::size_t> counts;
  for (const Edge& e : graph.edges()) ++counts[{graph.year(e.citing), graph.year(e.cited)}];
  return counts;
}

CitationGraph rewire(const CitationGraph& graph, const RewireConfig& config, std::uint32_t replicate_index,
                     RewireStats* stats, unsigned workers) {
  config.check();
  std::map<std::pair<Year, Year>, std::vector<Edge>> strata;
  for (const Edge& e : graph.edges()) strata[{graph.year(e.citing), graph.year(e.cited)}].push_back(e);

  std::vector<std::pair<std::pair<Year, Year>, std::vector<Edge>>> jobs(std::make_move_iterator(strata.begin()),
                                                                         std::make_move_iterator(strata.end()));
  std::vector<RewireStats> job_stats(jobs.size());
  parallel_for_blocks(jobs.size(), resolve_workers(workers), [&](std::size_t b, std::size_t e, unsigned) {
    for (std::size_t k = b; k < e; ++k) {
      const auto [citing_year, cited_year] = jobs[k].first;
      Rng rng(derive_seed(config.seed, {replicate_index, static_cast<std::uint64_t>(static_cast<std::int64_t>(citing_year)),
                                        static_cast<std::uint64_t>(static_cast<std::int64_t>(cited_year))}));
      job_stats[k] = swap_within(jobs[k].second, config.swaps_per_edge, rng);
    }
  });

  std::vector<Edge> edges;
  edges.reserve(graph.edge_count());
  RewireStats total;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    edges.insert(edges.end(), jobs[k].second.begin(), jobs[k].second.end());
    total.attempts += job_stats[k].attempts;
    total.accepted += job_stats[k].accepted;
  }
  if (stats) *stats = total;
  return CitationGraph::from_indexed(graph.node_table(), std::move(edges));
}

const char* quantity_name(Quantity q) {
  switch (q) {
    case Quantity::n_i: return "n_i";
    case Quantity::n_j: return "n_j";
    case Quantity::n_k: return "n_k";
    case Quantity::cd: return "cd";
    case Quantity::cd_nok: return "cd_nok";
  }
  return "?";
}

std::optional<double> quantity_value(const CdComponents& c, Quantity q) {
  switch (q) {
    case Quantity::n_i: return static_cast<double>(c.n_i);
    case Quantity::n_j: return static_cast<double>(c.n_j);
    case Quantity::n_k: return static_cast<double>(c.n_k);
    case Quantity::cd: return cd_index(c);
    case Quantity::cd_nok: return cd_nok(c);
  }
  return std::nullopt;
}

EnsembleSummary RewireEnsemble::summary(NodeIndex work, Quantity q) const {
  EnsembleSummary s;
  double sum = 0.0;
  double lo = 0.0, hi = 0.0;
  for (const auto& rep : replicates) {
    if (auto v = quantity_value(rep[work], q)) {
      lo = s.defined == 0 ? *v : std::min(lo, *v);
      hi = s.defined == 0 ? *v : std::max(hi, *v);
      sum += *v;
      ++s.defined;
    }
  }
  if (s.defined == 0) return s;
  if (lo == hi) {  // exact, avoids rounding residue in the mean
    s.mean = lo;
    if (s.defined >= 2) s.sd = 0.0;
    return s;
  }
  const double mean = sum / static_cast<double>(s.defined);
  s.mean = mean;
  if (s.defined < 2) return s;
  double ss = 0.0;
  for (const auto& rep : replicates)
    if (auto v = quantity_value(rep[work], q)) ss += (*v - mean) * (*v - mean);
  s.sd = std::sqrt(ss / static_cast<double>(s.defined - 1));
  return s;
}

RewireEnsemble build_ensemble(const CitationGraph& graph, const RewireConfig& config,
                              const MetricConfig& metric_config, unsigned workers, bool keep_graphs) {
  config.check();
  metric_config.check();
  RewireEnsemble ens;
  ens.config = config;
  ens.metric_config = metric_config;

  auto components_of = [&](const CitationGraph& g) {
    std::vector<CdComponents> out(g.node_count());
    ComponentCounter counter(g);
    for (NodeIndex i = 0; i < g.node_count(); ++i) out[i] = counter(i, metric_config);
    return out;
  };
  ens.observed = components_of(graph);

  const auto k = static_cast<std::size_t>(config.replicates);
  ens.replicates.resize(k);
  std::vector<std::optional<CitationGraph>> kept(keep_graphs ? k : 0);
  parallel_for_blocks(k, resolve_workers(workers), [&](std::size_t b, std::size_t e, unsigned) {
    for (std::size_t r = b; r < e; ++r) {
      CitationGraph g = rewire(graph, config, static_cast<std::uint32_t>(r));
      ens.replicates[r] = components_of(g);
      if (keep_graphs) kept[r] = std::move(g);
    }
  });
  for (auto& g : kept) ens.graphs.push_back(std::move(*g));
  return ens;
}

std::optional<double> zscore(double observed, double random_mean, double random_sd) {
  if (random_sd == 0.0 || !std::isfinite(random_sd)) return std::nullopt;
  return (observed - random_mean) / random_sd;
}

std::vector<ZScoreRecord> component_zscores(const CitationGraph& graph, const RewireEnsemble& ensemble,
                                            const MetricConfig& metric_config, bool exclude_zero_bcite) {
  const MetricConfig& built = ensemble.metric_config;
  if (built.window_years != metric_config.window_years ||
      built.coupling_threshold != metric_config.coupling_threshold ||
      built.include_same_year != metric_config.include_same_year)
    throw DomainError("ensemble was built with a different metric configuration");
  if (ensemble.work_count() != graph.node_count()) throw DomainError("ensemble does not match graph");

  std::vector<ZScoreRecord> out;
  out.reserve(graph.node_count());
  for (NodeIndex i = 0; i < graph.node_count(); ++i) {
    const CdComponents& obs = ensemble.observed[i];
    if (exclude_zero_bcite && obs.bcite_count == 0) continue;
    ZScoreRecord rec;
    rec.id = graph.id(i);
    rec.year = graph.year(i);
    for (std::size_t qi = 0; qi < kAllQuantities.size(); ++qi) {
      const Quantity q = kAllQuantities[qi];
      QuantityZ& z = rec.by_quantity[qi];
      z.observed = quantity_value(obs, q);
      const EnsembleSummary s = ensemble.summary(i, q);
      z.random_mean = s.mean;
      z.random_sd = s.sd;
      if (z.observed && s.mean && s.sd) z.z = zscore(*z.observed, *s.mean, *s.sd);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

void write_zscores(std::ostream& out, const std::vector<ZScoreRecord>& records, char delimiter) {
  const std::string header[] = {"id", "quantity", "observed", "random_mean", "random_sd", "z"};
  io::write_row(out, header, delimiter);
  for (const auto& rec : records) {
    for (std::size_t qi = 0; qi < kAllQuantities.size(); ++qi) {
      const QuantityZ& z = rec.by_quantity[qi];
      const std::string row[] = {rec.id,
                                 quantity_name(kAllQuantities[qi]),
                                 io::format_optional(z.observed),
                                 io::format_optional(z.random_mean),
                                 io::format_optional(z.random_sd),
                                 io::format_optional(z.z)};
      io::write_row(out, row, delimiter);
    }
  }
}

}  // namespace disrupt
