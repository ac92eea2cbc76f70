#include <doctest.h>

#include "disrupt/error.hpp"
#include "disrupt/synth.hpp"

using namespace disrupt;

namespace {

bool same_graph(const CitationGraph& a, const CitationGraph& b) {
  if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return false;
  for (NodeIndex i = 0; i < a.node_count(); ++i)
    if (!(a.node(i) == b.node(i))) return false;
  return std::equal(a.edges().begin(), a.edges().end(), b.edges().begin(), b.edges().end(),
                    [](const Edge& x, const Edge& y) { return x.citing == y.citing && x.cited == y.cited; });
}

}  // namespace

TEST_CASE("one year without references gives isolated works") {
  SyntheticSpec spec;
  spec.years = 1;
  spec.works_first_year = 5;
  spec.ref_mean = 0;
  const auto c = generate_synthetic(spec, 1);
  CHECK(c.graph.node_count() == 5);
  CHECK(c.graph.edge_count() == 0);
}

TEST_CASE("synthetic corpus is deterministic in the seed") {
  SyntheticSpec spec;
  spec.years = 4;
  spec.works_first_year = 80;
  spec.growth = 0.1;
  spec.rho = 0.4;
  spec.ref_dispersion = 2.0;
  spec.missing_refs_fraction = 0.05;
  spec.unlinked_mean = 1.0;
  const auto a = generate_synthetic(spec, 7);
  const auto b = generate_synthetic(spec, 7);
  const auto c = generate_synthetic(spec, 8);
  CHECK(same_graph(a.graph, b.graph));
  CHECK_FALSE(same_graph(a.graph, c.graph));
  CHECK(a.warnings == b.warnings);
}

TEST_CASE("synthetic corpus respects its contract") {
  SyntheticSpec spec;
  spec.years = 5;
  spec.works_first_year = 100;
  spec.growth = 0.2;
  spec.max_lag = 2;
  spec.rho = 0.5;
  const auto c = generate_synthetic(spec, 3);
  const auto& g = c.graph;
  CHECK(validate(g).clean());
  const auto per_year = g.works_per_year();
  CHECK(per_year.at(2000) == 100);
  CHECK(per_year.at(2001) == 120);
  for (const auto& e : g.edges()) {
    CHECK(g.year(e.citing) > g.year(e.cited));
    CHECK(g.year(e.citing) - g.year(e.cited) <= 2);
  }
  for (NodeIndex i = 0; i < g.node_count(); ++i) {
    const auto& n = g.node(i);
    CHECK(n.field.has_value());
    CHECK(n.subfield->rfind(*n.field, 0) == 0);
    CHECK(*n.author_count >= 1);
    CHECK(n.language == std::optional<std::string>("English"));
  }
  CHECK_FALSE(c.warnings.empty());
}

TEST_CASE("generator parameter validation") {
  SyntheticSpec spec;
  spec.rho = 0.9;
  spec.rho_slope = 0.1;
  CHECK_THROWS_AS(spec.check(), DomainError);
  spec = SyntheticSpec{};
  spec.years = 0;
  CHECK_THROWS_AS(spec.check(), DomainError);
  LayeredSpec l;
  l.out_min = 5;
  l.out_max = 2;
  CHECK_THROWS_AS(l.check(), DomainError);
}

TEST_CASE("layered corpus") {
  LayeredSpec spec;
  spec.works_per_year = 200;
  const auto g = generate_layered(spec, 2);
  CHECK(g.node_count() == 600);
  CHECK(validate(g).clean());
  for (NodeIndex i = 0; i < g.node_count(); ++i) {
    const Year layer = g.year(i) - spec.first_year;
    std::map<Year, int> per_layer;
    for (NodeIndex r : g.references(i)) ++per_layer[g.year(r)];
    CHECK(per_layer.size() == static_cast<std::size_t>(layer));
    for (const auto& [y, n] : per_layer) {
      CHECK(n >= spec.out_min);
      CHECK(n <= spec.out_max);
    }
  }
  CHECK(same_graph(g, generate_layered(spec, 2)));
}
