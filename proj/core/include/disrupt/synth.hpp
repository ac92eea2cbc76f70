#pragma once

// Synthetic citation corpora: a growth model with preferential attachment and
// triadic closure, and a layered configuration-model generator.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "disrupt/graph.hpp"

namespace disrupt {

struct SyntheticSpec {
  Year first_year = 2000;
  int years = 10;
  std::size_t works_first_year = 500;
  double growth = 0.0;  // works in year y = works_first_year * (1 + growth)^(y - first_year)

  double ref_mean = 10.0;
  /// Negative binomial size parameter; 0 means Poisson.
  double ref_dispersion = 0.0;

  /// Probability that a reference copies a reference of an already chosen one.
  double rho = 0.0;
  double rho_slope = 0.0;  // added per year after first_year

  /// Target weight 1 + pa_strength * in_degree.
  double pa_strength = 1.0;
  /// Oldest cited year is citing year - max_lag; 0 = unlimited.
  int max_lag = 0;

  std::vector<std::string> fields = {"physics", "biology", "history"};
  int subfields_per_field = 2;
  /// Raw document-type labels with weights.
  std::vector<std::pair<std::string, double>> doctypes = {
      {"RESEARCH_ARTICLE", 0.9}, {"EDITORIAL", 0.05}, {"REVIEW_ARTICLE", 0.05}};
  std::string language = "English";
  double author_mean = 3.0;  // 1 + Poisson(author_mean - 1)
  /// Share of works whose references are all missing (unlinked only).
  double missing_refs_fraction = 0.0;
  double unlinked_mean = 0.0;
  std::string id_prefix = "W";

  double rho_at(Year y) const { return rho + rho_slope * static_cast<double>(y - first_year); }
  /// Throws DomainError on a negative count, a non-positive year span, or rho outside [0,1] in any year.
  void check() const;
};

struct SyntheticCorpus {
  CitationGraph graph;
  std::vector<std::string> warnings;
  std::size_t truncated_works = 0;  // works that received fewer references than drawn
};

/// Deterministic in (spec, seed).
SyntheticCorpus generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

struct LayeredSpec {
  std::size_t works_per_year = 1000;  // n_c
  int layers = 3;                     // works in layer y cite every earlier layer
  Year first_year = 2000;
  /// Out-degree per earlier layer: uniform on [out_min, out_max].
  int out_min = 1;
  int out_max = 7;
  /// Target weights: 1 with probability 1 - hub_fraction, else hub_weight.
  double hub_fraction = 0.1;
  double hub_weight = 5.0;

  void check() const;
};

/// Configuration-model corpus whose degree distribution does not depend on
/// works_per_year. Endpoints are drawn proportionally to fixed target weights
/// and duplicate draws are redrawn.
CitationGraph generate_layered(const LayeredSpec& spec, std::uint64_t seed);

}  // namespace disrupt
