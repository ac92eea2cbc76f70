#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "disrupt/error.hpp"
#include "disrupt/nullmodel.hpp"
#include "disrupt/synth.hpp"
#include "fixtures.hpp"

using namespace disrupt;
using namespace disrupt::nullmodel;
using fixtures::make_graph;

TEST_CASE("edge probability") {
  const auto p = edge_probability(2, 3, 100);
  CHECK(p.value == doctest::Approx(0.03));
  CHECK_FALSE(p.out_of_regime);
  CHECK(edge_probability(2, 3, 100, DegreeConvention::directed).value == doctest::Approx(0.06));
  CHECK(edge_probability(20, 30, 100).out_of_regime);
  CHECK_THROWS_AS(edge_probability(1, 1, 0), DomainError);
}

TEST_CASE("stratum moments: four citers with two citations each") {
  const auto g = make_graph({{"A", 2000}, {"B", 2000}, {"C", 2001}, {"D", 2001}, {"E", 2001}, {"F", 2001}},
                            {{"C", "A"}, {"C", "B"}, {"D", "A"}, {"D", "B"}, {"E", "A"}, {"E", "B"}, {"F", "A"},
                             {"F", "B"}});
  const auto m = stratum_moments(g, 2000, 2001);
  CHECK(m.m == 8);
  CHECK(m.n_c == 4);
  CHECK(m.mean_b_directed == 2.0);
  CHECK(m.mean_b_printed == 4.0);
  CHECK(m.mean_b2 == 4.0);
  CHECK_THROWS_AS(stratum_moments(g, 2001, 2000), DomainError);
  const auto empty = stratum_moments(g, 2000, 2005);
  CHECK(empty.n_c == 0);
  CHECK(empty.m == 0);
}

TEST_CASE("co-citation vanishes when every citer makes one citation") {
  // <b^2> = <b> = 1 under the directed convention.
  const auto g = make_graph({{"A", 2000}, {"B", 2000}, {"C", 2001}, {"D", 2001}}, {{"C", "A"}, {"D", "B"}});
  const auto m = stratum_moments(g, 2000, 2001);
  CHECK(m.mean_b2 == m.mean_b_directed);
  CHECK(cocitation_probability(1, 1, m).value == 0.0);
  // The printed convention goes negative here and is flagged.
  const auto printed = cocitation_probability(1, 1, m, DegreeConvention::printed);
  CHECK(printed.value < 0.0);
  CHECK(printed.out_of_regime);
}

TEST_CASE("co-citation formula") {
  StratumMoments m;
  m.n_c = 10;
  m.m = 30;
  m.mean_b_directed = 3.0;
  m.mean_b_printed = 6.0;
  m.mean_b2 = 12.0;
  // (2 * 3 / (3 * 10)) * (12 - 3) / 3 = 0.6
  CHECK(cocitation_probability(2, 3, m).value == doctest::Approx(0.6));
  // (6 / 60) * (12 - 6) / 6 = 0.1
  CHECK(cocitation_probability(2, 3, m, DegreeConvention::printed).value == doctest::Approx(0.1));
  StratumMoments zero;
  CHECK_THROWS_AS(cocitation_probability(1, 1, zero), DomainError);
}

TEST_CASE("limiting cd") {
  CHECK(limiting_cd(5, 0) == 1.0);
  CHECK(limiting_cd(0, 7) == 0.0);
  CHECK(limiting_cd(3, 1) == 0.75);
  CHECK_THROWS_AS(limiting_cd(0, 0), DomainError);
}

TEST_CASE("largest stratum") {
  const auto g = make_graph({{"A", 2000}, {"B", 2001}, {"C", 2002}, {"D", 2002}},
                            {{"B", "A"}, {"C", "A"}, {"D", "A"}, {"C", "B"}});
  CHECK(largest_stratum(g) == std::pair<Year, Year>{2000, 2002});
  CHECK_THROWS_AS(largest_stratum(make_graph({}, {})), DomainError);
}

TEST_CASE("monte carlo check on a small layered corpus") {
  LayeredSpec spec;
  spec.works_per_year = 100;
  spec.layers = 2;
  const auto g = generate_layered(spec, 3);
  CocitationCheckConfig cfg;
  cfg.cited_year = 2000;
  cfg.citing_year = 2001;
  cfg.draws = 200;
  cfg.seed = 5;
  const auto check = verify_cocitation(g, cfg);
  CHECK(check.moments.n_c == 100);
  CHECK(check.scored_buckets > 0);
  std::uint64_t pairs = 0;
  for (const auto& b : check.buckets) {
    pairs += b.pairs;
    CHECK(b.trials == b.pairs * cfg.draws);
    CHECK(b.c_low <= b.c_high);
  }
  std::uint64_t cited = 0;
  for (NodeIndex i = 0; i < g.node_count(); ++i) cited += g.year(i) == 2000 && g.in_degree(i) > 0;
  CHECK(pairs == cited * (cited - 1) / 2);

  cfg.workers = 3;
  const auto again = verify_cocitation(g, cfg);
  REQUIRE(again.buckets.size() == check.buckets.size());
  for (std::size_t i = 0; i < check.buckets.size(); ++i)
    CHECK(again.buckets[i].cocitations == check.buckets[i].cocitations);

  std::ostringstream os;
  write_cocitation_json(os, check);
  const auto j = nlohmann::json::parse(os.str());
  CHECK(j.contains("buckets"));
}
