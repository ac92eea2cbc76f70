#include "disrupt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "disrupt/error.hpp"
#include "disrupt/random.hpp"

namespace disrupt {

void SyntheticSpec::check() const {
  if (years < 1) throw DomainError("years must be >= 1");
  if (!(growth > -1.0)) throw DomainError("growth must be > -1");
  if (!(ref_mean >= 0.0)) throw DomainError("ref_mean must be >= 0");
  if (!(ref_dispersion >= 0.0)) throw DomainError("ref_dispersion must be >= 0");
  if (!(pa_strength >= 0.0)) throw DomainError("pa_strength must be >= 0");
  if (max_lag < 0) throw DomainError("max_lag must be >= 0");
  if (subfields_per_field < 1) throw DomainError("subfields_per_field must be >= 1");
  if (fields.empty()) throw DomainError("at least one field is required");
  if (doctypes.empty()) throw DomainError("at least one doctype is required");
  for (const auto& [label, w] : doctypes)
    if (!(w >= 0.0)) throw DomainError("doctype weight for '" + label + "' must be >= 0");
  if (!(author_mean >= 1.0)) throw DomainError("author_mean must be >= 1");
  if (!(missing_refs_fraction >= 0.0 && missing_refs_fraction <= 1.0))
    throw DomainError("missing_refs_fraction must be in [0,1]");
  if (!(unlinked_mean >= 0.0)) throw DomainError("unlinked_mean must be >= 0");
  for (int k = 0; k < years; ++k) {
    const double r = rho_at(first_year + k);
    if (!(r >= 0.0 && r <= 1.0))
      throw DomainError("rho in year " + std::to_string(first_year + k) + " is " + std::to_string(r) +
                        ", outside [0,1]");
  }
}

namespace {

std::string padded_id(const std::string& prefix, std::size_t n, int width) {
  std::string digits = std::to_string(n);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  return prefix + digits;
}

int id_width(std::size_t total) { return std::max(6, static_cast<int>(std::to_string(total).size())); }

std::int64_t poisson(Rng& rng, double mean) {
  if (mean <= 0.0) return 0;
  return std::poisson_distribution<std::int64_t>(mean)(rng);
}

std::int64_t reference_count(Rng& rng, double mean, double dispersion) {
  if (mean <= 0.0) return 0;
  if (dispersion <= 0.0) return poisson(rng, mean);
  const double lambda = std::gamma_distribution<double>(dispersion, mean / dispersion)(rng);
  return poisson(rng, lambda);
}

std::size_t weighted_pick(Rng& rng, const std::vector<double>& cumulative) {
  const double u = uniform_unit(rng) * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

}  // namespace

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.check();
  Rng rng(derive_seed(seed, {0x5EED}));

  std::vector<std::size_t> per_year(static_cast<std::size_t>(spec.years));
  std::size_t total = 0;
  for (int k = 0; k < spec.years; ++k) {
    per_year[k] = static_cast<std::size_t>(
        std::llround(static_cast<double>(spec.works_first_year) * std::pow(1.0 + spec.growth, k)));
    total += per_year[k];
  }
  const int width = id_width(total);

  std::vector<double> doctype_cum;
  double acc = 0.0;
  for (const auto& [label, w] : spec.doctypes) doctype_cum.push_back(acc += w);
  if (!(acc > 0.0)) throw DomainError("doctype weights sum to zero");

  std::vector<WorkNode> nodes;
  nodes.reserve(total);
  std::vector<std::size_t> year_start;  // first index of each year
  std::vector<std::vector<NodeIndex>> refs(total);
  std::vector<NodeIndex> cited_list;  // one entry per edge, by target
  std::vector<Edge> edges;

  SyntheticCorpus out;
  std::vector<NodeIndex> chosen;

  for (int k = 0; k < spec.years; ++k) {
    const Year y = spec.first_year + k;
    const double rho = spec.rho_at(y);
    year_start.push_back(nodes.size());
    const int oldest = spec.max_lag > 0 ? std::max(0, k - spec.max_lag) : 0;
    const std::size_t lo = year_start[static_cast<std::size_t>(oldest)];
    const std::size_t hi = year_start.back();  // works of earlier years only
    const std::size_t pool = hi - lo;

    for (std::size_t w = 0; w < per_year[k]; ++w) {
      const auto self = static_cast<NodeIndex>(nodes.size());
      WorkNode node;
      node.id = padded_id(spec.id_prefix, self + 1, width);
      node.year = y;
      const auto f = uniform_below(rng, spec.fields.size());
      node.field = spec.fields[f];
      node.subfield = spec.fields[f] + "-" + std::to_string(1 + uniform_below(rng, spec.subfields_per_field));
      node.doctype = spec.doctypes[weighted_pick(rng, doctype_cum)].first;
      node.language = spec.language;
      node.author_count = 1 + poisson(rng, spec.author_mean - 1.0);
      node.unlinked_ref_count = poisson(rng, spec.unlinked_mean);

      const std::int64_t drawn = reference_count(rng, spec.ref_mean, spec.ref_dispersion);
      const bool missing = spec.missing_refs_fraction > 0.0 && uniform_unit(rng) < spec.missing_refs_fraction;
      if (missing) {
        node.unlinked_ref_count += drawn;
        nodes.push_back(std::move(node));
        continue;
      }
      const std::size_t want = std::min(static_cast<std::size_t>(drawn), pool);

      chosen.clear();
      auto in_pool = [&](NodeIndex t) { return t >= lo && t < hi; };
      auto taken = [&](NodeIndex t) { return std::find(chosen.begin(), chosen.end(), t) != chosen.end(); };
      const std::size_t max_attempts = 50 * want + 100;
      std::size_t attempts = 0;
      while (chosen.size() < want && attempts++ < max_attempts) {
        NodeIndex target = 0;
        bool have = false;
        if (!chosen.empty() && rho > 0.0 && uniform_unit(rng) < rho) {
          const NodeIndex via = chosen[uniform_below(rng, chosen.size())];
          const auto& vr = refs[via];
          if (!vr.empty()) {
            target = vr[uniform_below(rng, vr.size())];
            have = in_pool(target);
          }
        }
        if (!have) {
          const double uniform_mass = static_cast<double>(pool);
          const double pa_mass = spec.pa_strength * static_cast<double>(cited_list.size());
          if (uniform_unit(rng) * (uniform_mass + pa_mass) < uniform_mass) {
            target = static_cast<NodeIndex>(lo + uniform_below(rng, pool));
          } else {
            target = cited_list[uniform_below(rng, cited_list.size())];
            if (!in_pool(target)) continue;
          }
        }
        if (!taken(target)) chosen.push_back(target);
      }
      if (chosen.size() < static_cast<std::size_t>(drawn)) ++out.truncated_works;
      std::sort(chosen.begin(), chosen.end());
      refs[self] = chosen;
      for (NodeIndex t : chosen) edges.push_back({self, t});
      nodes.push_back(std::move(node));
    }
    // Targets become eligible for attachment only once their year is complete.
    for (std::size_t e = cited_list.size(); e < edges.size(); ++e) cited_list.push_back(edges[e].cited);
  }
  if (out.truncated_works > 0)
    out.warnings.push_back(std::to_string(out.truncated_works) +
                           " works received fewer references than drawn (not enough earlier works)");

  auto table = std::make_shared<const NodeTable>(std::move(nodes));
  out.graph = CitationGraph::from_indexed(std::move(table), std::move(edges));
  return out;
}

void LayeredSpec::check() const {
  if (works_per_year < 1) throw DomainError("works_per_year must be >= 1");
  if (layers < 2) throw DomainError("layers must be >= 2");
  if (out_min < 0 || out_max < out_min) throw DomainError("need 0 <= out_min <= out_max");
  if (static_cast<std::size_t>(out_max) > works_per_year) throw DomainError("out_max exceeds works_per_year");
  if (!(hub_fraction >= 0.0 && hub_fraction <= 1.0)) throw DomainError("hub_fraction must be in [0,1]");
  if (!(hub_weight > 0.0)) throw DomainError("hub_weight must be > 0");
}

CitationGraph generate_layered(const LayeredSpec& spec, std::uint64_t seed) {
  spec.check();
  Rng rng(derive_seed(seed, {0x1A7E}));
  const std::size_t n = spec.works_per_year;
  const std::size_t total = n * static_cast<std::size_t>(spec.layers);
  const int width = id_width(total);

  std::vector<WorkNode> nodes(total);
  std::vector<double> weight(total);
  for (std::size_t i = 0; i < total; ++i) {
    nodes[i].id = padded_id("L", i + 1, width);
    nodes[i].year = spec.first_year + static_cast<Year>(i / n);
    weight[i] = uniform_unit(rng) < spec.hub_fraction ? spec.hub_weight : 1.0;
  }

  std::vector<Edge> edges;
  std::vector<NodeIndex> chosen;
  for (int y = 1; y < spec.layers; ++y) {
    for (int x = 0; x < y; ++x) {
      const std::size_t base = static_cast<std::size_t>(x) * n;
      std::vector<double> cum(n);
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) cum[i] = acc += weight[base + i];
      for (std::size_t j = static_cast<std::size_t>(y) * n; j < static_cast<std::size_t>(y + 1) * n; ++j) {
        const auto b = static_cast<std::size_t>(spec.out_min) +
                       uniform_below(rng, static_cast<std::uint64_t>(spec.out_max - spec.out_min + 1));
        chosen.clear();
        while (chosen.size() < b) {
          const auto t = static_cast<NodeIndex>(base + weighted_pick(rng, cum));
          if (std::find(chosen.begin(), chosen.end(), t) == chosen.end()) chosen.push_back(t);
        }
        for (NodeIndex t : chosen) edges.push_back({static_cast<NodeIndex>(j), t});
      }
    }
  }
  return CitationGraph::from_indexed(std::make_shared<const NodeTable>(std::move(nodes)), std::move(edges));
}

}  // namespace disrupt
