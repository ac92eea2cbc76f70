#include <doctest.h>

#include <map>
#include <random>
#include <sstream>

#include "disrupt/error.hpp"
#include "disrupt/graph.hpp"
#include "disrupt/table_io.hpp"
#include "fixtures.hpp"

using namespace disrupt;
using fixtures::make_graph;

namespace {

std::vector<std::string> ids_of(const CitationGraph& g, std::span<const NodeIndex> s) {
  std::vector<std::string> out;
  for (NodeIndex i : s) out.push_back(g.id(i));
  return out;
}

CitationGraph load_text(const std::string& nodes, const std::string& edges,
                        const LoadPolicy& policy = LoadPolicy::strict()) {
  std::istringstream n(nodes), e(edges);
  return load_graph(n, e, policy);
}

}  // namespace

TEST_CASE("two-node chain") {
  const auto g = make_graph({{"A", 2000}, {"B", 2001}}, {{"B", "A"}});
  const auto a = g.index_of("A"), b = g.index_of("B");
  CHECK(g.in_degree(a) == 1);
  CHECK(g.out_degree(b) == 1);
  CHECK(g.out_degree(a) == 0);
  CHECK(g.edge_count() == 1);

  const auto nb = neighborhood(g, "A");
  CHECK(nb.references.empty());
  CHECK(ids_of(g, nb.citers) == std::vector<std::string>{"B"});
}

TEST_CASE("isolated node has empty neighborhood") {
  const auto g = make_graph({{"A", 2000}, {"B", 2001}, {"C", 1999}}, {{"B", "A"}});
  const auto nb = neighborhood(g, "C");
  CHECK(nb.references.empty());
  CHECK(nb.citers.empty());
}

TEST_CASE("unknown id") {
  const auto g = make_graph({{"A", 2000}}, {});
  CHECK_THROWS_AS(neighborhood(g, "Z"), NotFoundError);
  CHECK_THROWS_AS(g.index_of("Z"), NotFoundError);
}

TEST_CASE("strict policy rejects self-citation") {
  CHECK_THROWS_AS(make_graph({{"A", 2000}}, {{"A", "A"}}), ValidationError);
}

TEST_CASE("lenient load records the dropped self-loop") {
  const auto g = make_graph({{"A", 2000}, {"B", 2001}}, {{"A", "A"}, {"B", "A"}}, LoadPolicy::lenient());
  CHECK(g.edge_count() == 1);
  const auto r = validate(g);
  CHECK(r.self_loop_count == 1);
  CHECK(r.self_loop_samples.size() == 1);
  CHECK(r.self_loop_samples[0] == EdgeSample{"A", "A"});
  CHECK_FALSE(r.clean());
}

TEST_CASE("clean fixture validates clean") {
  std::mt19937_64 rng(3);
  const auto g = fixtures::to_graph(fixtures::random_dag(rng, 20, 4, 0.2));
  const auto r = validate(g);
  CHECK(r.clean());
  CHECK(r == ValidationReport{});
}

TEST_CASE("injected year violations are counted") {
  std::mt19937_64 rng(11);
  auto raw = fixtures::random_dag(rng, 20, 5, 0.15);
  // Inject three backward-in-time edges between distinct-year pairs not already present.
  int injected = 0;
  for (int a = 0; a < 20 && injected < 3; ++a)
    for (int b = 0; b < 20 && injected < 3; ++b)
      if (raw.years[a] < raw.years[b] && !raw.has_edge(a, b)) {
        raw.edges.emplace_back(a, b);
        ++injected;
        break;
      }
  REQUIRE(injected == 3);
  CHECK_THROWS_AS(load_text(fixtures::nodes_csv(raw), fixtures::edges_csv(raw)), ValidationError);
  const auto g = load_text(fixtures::nodes_csv(raw), fixtures::edges_csv(raw), LoadPolicy::lenient());
  CHECK(validate(g).year_violation_count == 3);
  CHECK(g.edge_count() == raw.edges.size() - 3);
}

TEST_CASE("same-year citations follow the policy") {
  const std::string nodes = "id,year\nA,2000\nB,2000\n";
  const std::string edges = "citing_id,cited_id\nB,A\n";
  CHECK(load_text(nodes, edges).edge_count() == 1);
  LoadPolicy p;
  p.allow_same_year = false;
  CHECK_THROWS_AS(load_text(nodes, edges, p), ValidationError);
}

TEST_CASE("duplicates dropped by default, dangling fatal") {
  const std::string nodes = "id,year\nA,2000\nB,2001\n";
  const auto g = load_text(nodes, "citing_id,cited_id\nB,A\nB,A\n");
  CHECK(g.edge_count() == 1);
  CHECK(validate(g).duplicate_edge_count == 1);
  CHECK_THROWS_AS(load_text(nodes, "citing_id,cited_id\nB,Q\n"), ValidationError);
  const auto lenient = load_text(nodes, "citing_id,cited_id\nB,Q\n", LoadPolicy::lenient());
  CHECK(validate(lenient).dangling_edge_count == 1);
}

TEST_CASE("duplicate node id is an error") {
  CHECK_THROWS_AS(load_text("id,year\nA,2000\nA,2001\n", "citing_id,cited_id\n"), ValidationError);
}

TEST_CASE("malformed row reports line and column") {
  try {
    load_text("id,year\nA,2000\nB,20x1\n", "citing_id,cited_id\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 2);
  }
  try {
    load_text("id,year\nA,2000\n", "citing_id,cited_id\nA\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("year range") {
  LoadPolicy p;
  p.year_min = 1950;
  p.year_max = 2020;
  CHECK_THROWS_AS(load_text("id,year\nA,1900\n", "citing_id,cited_id\n", p), ValidationError);
}

TEST_CASE("optional metadata columns and absent values") {
  const std::string nodes =
      "id,year,field,subfield,doctype,language,author_count,unlinked_ref_count\n"
      "A,2000,history,,Article,en,3,2\n"
      "B,2001\n";
  const auto g = load_text(nodes, "citing_id,cited_id\nB,A\n");
  const auto& a = g.node(g.index_of("A"));
  CHECK(a.field == std::optional<std::string>("history"));
  CHECK_FALSE(a.subfield.has_value());
  CHECK(a.author_count == std::optional<std::int64_t>(3));
  CHECK(a.unlinked_ref_count == 2);
  const auto& b = g.node(g.index_of("B"));
  CHECK_FALSE(b.field.has_value());
  CHECK_FALSE(b.author_count.has_value());
  CHECK(b.unlinked_ref_count == 0);
}

TEST_CASE("degrees equal a recount of the raw edge file") {
  std::mt19937_64 rng(20);
  const auto raw = fixtures::random_dag(rng, 20, 4, 0.25);
  const auto g = load_text(fixtures::nodes_csv(raw), fixtures::edges_csv(raw));

  // Recount straight from the file text.
  std::map<std::string, std::size_t> in, out;
  std::istringstream lines(fixtures::edges_csv(raw));
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) {
    const auto comma = line.find(',');
    ++out[line.substr(0, comma)];
    ++in[line.substr(comma + 1)];
  }
  for (NodeIndex i = 0; i < g.node_count(); ++i) {
    CHECK(g.in_degree(i) == in[g.id(i)]);
    CHECK(g.out_degree(i) == out[g.id(i)]);
  }
}

TEST_CASE("neighborhood equals a linear scan for every node") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    const auto raw = fixtures::random_dag(rng, 40, 6, 0.1);
    REQUIRE(raw.edges.size() <= 1000);
    const auto g = fixtures::to_graph(raw);
    for (int f = 0; f < static_cast<int>(raw.size()); ++f) {
      std::vector<std::string> refs, citers;
      for (auto [a, b] : raw.edges) {
        if (a == f) refs.push_back(fixtures::node_id(b));
        if (b == f) citers.push_back(fixtures::node_id(a));
      }
      std::sort(refs.begin(), refs.end());
      std::sort(citers.begin(), citers.end());
      const auto nb = neighborhood(g, fixtures::node_id(f));
      CHECK(ids_of(g, nb.references) == refs);
      CHECK(ids_of(g, nb.citers) == citers);
    }
  }
}

TEST_CASE("degree bookkeeping") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const auto g = fixtures::to_graph(fixtures::random_dag(rng, 30, 5, 0.1));
    std::size_t sin = 0, sout = 0;
    for (NodeIndex i = 0; i < g.node_count(); ++i) {
      sin += g.in_degree(i);
      sout += g.out_degree(i);
    }
    CHECK(sin == g.edge_count());
    CHECK(sout == g.edge_count());
    std::size_t per_year = 0;
    for (const auto& [y, n] : g.works_per_year()) per_year += n;
    CHECK(per_year == g.node_count());
  }
}

TEST_CASE("round trip through the file formats") {
  std::vector<WorkNode> nodes(3);
  nodes[0] = {"w1", 1999, "physics", "optics", "Article", "en", 4, 1};
  nodes[1] = {"w,2", 2000, std::nullopt, std::nullopt, "Letter \"x\"", std::nullopt, std::nullopt, 0};
  nodes[2] = {"w3", 2001, "history", std::nullopt, std::nullopt, "de", 0, 7};
  const std::vector<std::pair<std::string, std::string>> edges = {{"w3", "w1"}, {"w3", "w,2"}, {"w,2", "w1"}};
  const auto g = CitationGraph::from_records(nodes, edges);

  std::ostringstream n_out, e_out;
  write_nodes(n_out, g);
  write_edges(e_out, g);
  const auto h = load_text(n_out.str(), e_out.str());
  REQUIRE(h.node_count() == g.node_count());
  for (NodeIndex i = 0; i < g.node_count(); ++i) {
    CHECK(h.node(i) == g.node(i));
    CHECK(h.in_degree(i) == g.in_degree(i));
    CHECK(h.out_degree(i) == g.out_degree(i));
  }
  CHECK(std::equal(g.edges().begin(), g.edges().end(), h.edges().begin(), h.edges().end()));
}

TEST_CASE("delimiter, comments and byte order mark") {
  LoadPolicy p;
  p.delimiter = '\t';
  const auto g = load_text("\xEF\xBB\xBF# exported\nid\tyear\nA\t2000\nB\t2001\n", "citing_id\tcited_id\nB\tA\n", p);
  CHECK(g.edge_count() == 1);
  CHECK(g.find("A").has_value());
}

TEST_CASE("format_double is shortest round-trip") {
  CHECK(io::format_double(0.125) == "0.125");
  CHECK(io::format_double(-0.0) == "0");
  CHECK(io::format_double(1.0) == "1");
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_optional(std::nullopt).empty());
}
