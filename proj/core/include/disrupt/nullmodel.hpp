#pragma once

// Configuration-model predictions for rewired citation networks, and a Monte
// Carlo harness that checks them against the rewiring algorithm.
//
// Within one (citing year t_c, cited year t_b) stratum, c_i is the number of
// citations work i receives from t_c and b_j the number of citations work j
// makes into t_b; m is the stratum edge count and n_c the number of works
// published in t_c.
//
// The mean citing degree enters the formulas in two conventions:
//   printed:  <b> = 2m / n_c   (undirected stub-counting normalization)
//   directed: <b> = m / n_c    (plain mean of b over citing-year works)
// Both are computed and reported; verify_cocitation measures which one the
// rewiring actually follows.

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <vector>

#include "disrupt/graph.hpp"

namespace disrupt::nullmodel {

enum class DegreeConvention { printed, directed };
const char* convention_name(DegreeConvention c);

struct StratumMoments {
  Year cited_year = 0;   // t_b
  Year citing_year = 0;  // t_c
  std::size_t m = 0;
  std::size_t n_c = 0;
  double mean_b_directed = 0.0;  // m / n_c
  double mean_b_printed = 0.0;   // 2m / n_c
  double mean_b2 = 0.0;          // <b^2> over the n_c citing-year works

  double mean_b(DegreeConvention c) const {
    return c == DegreeConvention::printed ? mean_b_printed : mean_b_directed;
  }
};

/// Moments of the stratum t_c -> t_b. Throws DomainError if t_b > t_c. An
/// empty citing year yields n_c = 0 and zero moments.
StratumMoments stratum_moments(const CitationGraph& graph, Year cited_year, Year citing_year);

struct Probability {
  double value = 0.0;
  bool out_of_regime = false;  // value > 1: the linear approximation does not hold here
};

/// p_ij = c_i b_j / (2m) (printed) or c_i b_j / m (directed). Throws DomainError for m = 0.
Probability edge_probability(std::int64_t c_i, std::int64_t b_j, std::size_t m,
                             DegreeConvention convention = DegreeConvention::printed);

/// p_hij = (c_i c_h / (<b> n_c)) (<b^2> - <b>) / <b>. Throws DomainError when
/// <b> = 0 or n_c = 0. A negative value (possible under the printed
/// convention) is reported out of regime.
Probability cocitation_probability(std::int64_t c_i, std::int64_t c_h, const StratumMoments& moments,
                                   DegreeConvention convention = DegreeConvention::directed);

/// n_I / (n_I + ref_citation_sum): the CD of a work once J-type citations
/// vanish. Throws DomainError on a zero denominator.
double limiting_cd(std::int64_t n_i, std::int64_t ref_citation_sum);

// ---- Monte Carlo verification ------------------------------------------------

struct CocitationCheckConfig {
  Year cited_year = 0;
  Year citing_year = 0;
  std::size_t draws = 1000;
  double swaps_per_edge = 10.0;
  std::uint64_t seed = 0;
  double tolerance_se = 3.0;
  /// Buckets whose predicted co-citation count over all trials is below this
  /// are reported but not scored (normal approximation not trustworthy).
  /// Out-of-regime buckets are never scored.
  double min_expected_events = 5.0;
  double required_pass_fraction = 0.95;
  DegreeConvention scored_convention = DegreeConvention::directed;
  unsigned workers = 1;
};

struct CocitationBucket {
  std::int64_t c_low = 0;  // stratum in-degree of the lower-degree work of the pair
  std::int64_t c_high = 0;
  std::uint64_t pairs = 0;
  std::uint64_t trials = 0;  // pairs * draws
  std::uint64_t cocitations = 0;
  double empirical = 0.0;  // mean co-citing works per pair and draw
  double predicted_directed = 0.0;
  double predicted_printed = 0.0;
  double se = 0.0;  // binomial SE at the scored prediction
  /// Scored prediction >= 1: not a probability, so no binomial test applies.
  bool out_of_regime = false;
  bool scored = false;
  bool pass_directed = false;
  bool pass_printed = false;
};

struct CocitationCheck {
  CocitationCheckConfig config;
  StratumMoments moments;
  std::vector<CocitationBucket> buckets;
  std::size_t scored_buckets = 0;
  std::size_t passed_directed = 0;
  std::size_t passed_printed = 0;

  double pass_fraction(DegreeConvention c) const;
  bool passed() const { return pass_fraction(config.scored_convention) >= config.required_pass_fraction; }
  /// Convention with more passing buckets; ties go to directed.
  DegreeConvention better_convention() const {
    return passed_printed > passed_directed ? DegreeConvention::printed : DegreeConvention::directed;
  }
};

/// Rewires the single stratum citing_year -> cited_year `draws` times and
/// compares the per-bucket empirical co-citation rate with p_hij.
CocitationCheck verify_cocitation(const CitationGraph& graph, const CocitationCheckConfig& config);

/// Stratum with the most edges, as (cited_year, citing_year). Throws DomainError on an empty graph.
std::pair<Year, Year> largest_stratum(const CitationGraph& graph);

/// JSON report: per-bucket predicted vs empirical rates, standard errors, pass/fail.
void write_cocitation_json(std::ostream& out, const CocitationCheck& check, int indent = 2);

}  // namespace disrupt::nullmodel
