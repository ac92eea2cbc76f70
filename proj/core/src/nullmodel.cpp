#include "disrupt/nullmodel.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "disrupt/error.hpp"
#include "disrupt/parallel.hpp"
#include "disrupt/rewire.hpp"

namespace disrupt::nullmodel {

const char* convention_name(DegreeConvention c) {
  return c == DegreeConvention::printed ? "printed_2m_over_nc" : "directed_m_over_nc";
}

StratumMoments stratum_moments(const CitationGraph& graph, Year cited_year, Year citing_year) {
  if (cited_year > citing_year) throw DomainError("stratum requires cited year <= citing year");
  StratumMoments mo;
  mo.cited_year = cited_year;
  mo.citing_year = citing_year;
  double sum_b2 = 0.0;
  for (NodeIndex j = 0; j < graph.node_count(); ++j) {
    if (graph.year(j) != citing_year) continue;
    ++mo.n_c;
    std::size_t b = 0;
    for (NodeIndex r : graph.references(j))
      if (graph.year(r) == cited_year) ++b;
    mo.m += b;
    sum_b2 += static_cast<double>(b) * static_cast<double>(b);
  }
  if (mo.n_c == 0) return mo;
  const double nc = static_cast<double>(mo.n_c);
  mo.mean_b_directed = static_cast<double>(mo.m) / nc;
  mo.mean_b_printed = 2.0 * static_cast<double>(mo.m) / nc;
  mo.mean_b2 = sum_b2 / nc;
  return mo;
}

Probability edge_probability(std::int64_t c_i, std::int64_t b_j, std::size_t m, DegreeConvention convention) {
  if (m == 0) throw DomainError("edge probability undefined for an empty stratum (m = 0)");
  const double stubs = convention == DegreeConvention::printed ? 2.0 * static_cast<double>(m) : static_cast<double>(m);
  Probability p;
  p.value = static_cast<double>(c_i) * static_cast<double>(b_j) / stubs;
  p.out_of_regime = p.value > 1.0;
  return p;
}

Probability cocitation_probability(std::int64_t c_i, std::int64_t c_h, const StratumMoments& moments,
                                   DegreeConvention convention) {
  const double b = moments.mean_b(convention);
  if (!(b > 0.0)) throw DomainError("co-citation probability undefined for zero mean citing degree");
  if (moments.n_c == 0) throw DomainError("co-citation probability undefined for an empty citing year");
  Probability p;
  p.value = (static_cast<double>(c_i) * static_cast<double>(c_h) / (b * static_cast<double>(moments.n_c))) *
            (moments.mean_b2 - b) / b;
  p.out_of_regime = p.value > 1.0 || p.value < 0.0;
  return p;
}

double limiting_cd(std::int64_t n_i, std::int64_t ref_citation_sum) {
  const std::int64_t denom = n_i + ref_citation_sum;
  if (denom <= 0) throw DomainError("limiting CD undefined for a zero denominator");
  return static_cast<double>(n_i) / static_cast<double>(denom);
}

double CocitationCheck::pass_fraction(DegreeConvention c) const {
  if (scored_buckets == 0) return 0.0;
  const auto passed = c == DegreeConvention::printed ? passed_printed : passed_directed;
  return static_cast<double>(passed) / static_cast<double>(scored_buckets);
}

std::pair<Year, Year> largest_stratum(const CitationGraph& graph) {
  const auto counts = stratum_counts(graph);
  if (counts.empty()) throw DomainError("graph has no edges");
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it)
    if (it->second > best->second) best = it;
  return {best->first.second, best->first.first};
}

CocitationCheck verify_cocitation(const CitationGraph& graph, const CocitationCheckConfig& config) {
  if (config.draws == 0) throw DomainError("draws must be >= 1");
  CocitationCheck check;
  check.config = config;
  check.moments = stratum_moments(graph, config.cited_year, config.citing_year);
  if (check.moments.m == 0) throw DomainError("stratum has no edges");

  // Restrict to the stratum so only its edges are rewired.
  std::vector<Edge> stratum_edges;
  for (const Edge& e : graph.edges())
    if (graph.year(e.citing) == config.citing_year && graph.year(e.cited) == config.cited_year)
      stratum_edges.push_back(e);
  const CitationGraph sub = CitationGraph::from_indexed(graph.node_table(), stratum_edges);

  // Stratum in-degrees are invariant under rewiring.
  std::vector<std::int64_t> indeg(sub.node_count(), 0);
  std::map<std::int64_t, std::uint64_t> works_with_degree;
  for (NodeIndex i = 0; i < sub.node_count(); ++i) {
    indeg[i] = static_cast<std::int64_t>(sub.in_degree(i));
    if (sub.year(i) == config.cited_year && indeg[i] > 0) ++works_with_degree[indeg[i]];
  }

  using BucketKey = std::pair<std::int64_t, std::int64_t>;
  const unsigned workers = resolve_workers(config.workers);
  std::vector<std::map<BucketKey, std::uint64_t>> partial(workers);
  RewireConfig rc;
  rc.replicates = 1;
  rc.swaps_per_edge = config.swaps_per_edge;
  rc.seed = config.seed;
  parallel_for_blocks(config.draws, workers, [&](std::size_t b, std::size_t e, unsigned w) {
    auto& counts = partial[w];
    for (std::size_t d = b; d < e; ++d) {
      const CitationGraph g = rewire(sub, rc, static_cast<std::uint32_t>(d));
      for (NodeIndex j = 0; j < g.node_count(); ++j) {
        const auto refs = g.references(j);
        for (std::size_t x = 0; x < refs.size(); ++x)
          for (std::size_t y = x + 1; y < refs.size(); ++y) {
            const auto lo = std::min(indeg[refs[x]], indeg[refs[y]]);
            const auto hi = std::max(indeg[refs[x]], indeg[refs[y]]);
            ++counts[{lo, hi}];
          }
      }
    }
  });
  std::map<BucketKey, std::uint64_t> cocitations;
  for (const auto& p : partial)
    for (const auto& [k, v] : p) cocitations[k] += v;

  for (auto a = works_with_degree.begin(); a != works_with_degree.end(); ++a) {
    for (auto b = a; b != works_with_degree.end(); ++b) {
      CocitationBucket bucket;
      bucket.c_low = a->first;
      bucket.c_high = b->first;
      bucket.pairs = a == b ? a->second * (a->second - 1) / 2 : a->second * b->second;
      if (bucket.pairs == 0) continue;
      bucket.trials = bucket.pairs * config.draws;
      auto it = cocitations.find({bucket.c_low, bucket.c_high});
      bucket.cocitations = it == cocitations.end() ? 0 : it->second;
      bucket.empirical = static_cast<double>(bucket.cocitations) / static_cast<double>(bucket.trials);
      bucket.predicted_directed =
          cocitation_probability(bucket.c_low, bucket.c_high, check.moments, DegreeConvention::directed).value;
      bucket.predicted_printed =
          cocitation_probability(bucket.c_low, bucket.c_high, check.moments, DegreeConvention::printed).value;

      const auto n = static_cast<double>(bucket.trials);
      auto se_at = [&](double p) {
        const double q = std::clamp(p, 0.0, 1.0);
        return std::sqrt(q * (1.0 - q) / n);
      };
      auto passes = [&](double p) {
        const double se = se_at(p);
        if (se == 0.0) return bucket.empirical == p;
        return std::abs(bucket.empirical - p) <= config.tolerance_se * se;
      };
      const double scored_p = config.scored_convention == DegreeConvention::printed ? bucket.predicted_printed
                                                                                     : bucket.predicted_directed;
      bucket.se = se_at(scored_p);
      bucket.out_of_regime = scored_p >= 1.0;
      bucket.scored = !bucket.out_of_regime && scored_p * n >= config.min_expected_events;
      bucket.pass_directed = passes(bucket.predicted_directed);
      bucket.pass_printed = passes(bucket.predicted_printed);
      if (bucket.scored) {
        ++check.scored_buckets;
        if (bucket.pass_directed) ++check.passed_directed;
        if (bucket.pass_printed) ++check.passed_printed;
      }
      check.buckets.push_back(bucket);
    }
  }
  return check;
}

void write_cocitation_json(std::ostream& out, const CocitationCheck& check, int indent) {
  nlohmann::ordered_json j;
  const auto& mo = check.moments;
  j["stratum"] = {{"cited_year", mo.cited_year}, {"citing_year", mo.citing_year}};
  j["moments"] = {{"m", mo.m},
                  {"n_c", mo.n_c},
                  {"mean_b_directed", mo.mean_b_directed},
                  {"mean_b_printed", mo.mean_b_printed},
                  {"mean_b2", mo.mean_b2}};
  j["draws"] = check.config.draws;
  j["swaps_per_edge"] = check.config.swaps_per_edge;
  j["seed"] = check.config.seed;
  j["tolerance_se"] = check.config.tolerance_se;
  j["scored_convention"] = convention_name(check.config.scored_convention);
  j["better_convention"] = convention_name(check.better_convention());
  j["scored_buckets"] = check.scored_buckets;
  j["pass_fraction_directed"] = check.pass_fraction(DegreeConvention::directed);
  j["pass_fraction_printed"] = check.pass_fraction(DegreeConvention::printed);
  j["required_pass_fraction"] = check.config.required_pass_fraction;
  j["pass"] = check.passed();
  auto& arr = j["buckets"] = nlohmann::ordered_json::array();
  for (const auto& b : check.buckets) {
    arr.push_back({{"c_low", b.c_low},
                   {"c_high", b.c_high},
                   {"pairs", b.pairs},
                   {"trials", b.trials},
                   {"cocitations", b.cocitations},
                   {"empirical", b.empirical},
                   {"predicted_directed", b.predicted_directed},
                   {"predicted_printed", b.predicted_printed},
                   {"se", b.se},
                   {"out_of_regime", b.out_of_regime},
                   {"scored", b.scored},
                   {"pass_directed", b.pass_directed},
                   {"pass_printed", b.pass_printed}});
  }
  out << j.dump(indent) << '\n';
}

}  // namespace disrupt::nullmodel
