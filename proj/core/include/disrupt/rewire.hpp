#pragma once

// Degree- and year-stratum-preserving randomization of a citation graph, and
// per-work z-scores of CD quantities against the randomized ensemble.
//
// Edges are grouped into strata by (citing year, cited year). Inside a stratum
// a double-edge swap turns (a -> x, b -> y) into (a -> y, b -> x), which keeps
// every out-degree, in-degree and stratum size. Swaps that would create a
// self-citation or an edge already present are rejected.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "disrupt/graph.hpp"
#include "disrupt/metrics.hpp"

namespace disrupt {

struct RewireConfig {
  int replicates = 10;  // K
  double swaps_per_edge = 10.0;
  std::uint64_t seed = 0;

  /// Throws DomainError unless K >= 1 and swaps_per_edge > 0.
  void check() const;
};

struct RewireStats {
  std::uint64_t attempts = 0;
  std::uint64_t accepted = 0;
};

/// One randomized copy. Deterministic in (seed, replicate_index) and
/// independent of the worker count: every stratum draws from its own stream
/// derived from (seed, replicate_index, citing_year, cited_year).
CitationGraph rewire(const CitationGraph& graph, const RewireConfig& config, std::uint32_t replicate_index,
                     RewireStats* stats = nullptr, unsigned workers = 1);

/// Edge counts per (citing year, cited year).
std::map<std::pair<Year, Year>, std::size_t> stratum_counts(const CitationGraph& graph);

enum class Quantity { n_i, n_j, n_k, cd, cd_nok };
inline constexpr std::array<Quantity, 5> kAllQuantities = {Quantity::n_i, Quantity::n_j, Quantity::n_k, Quantity::cd,
                                                           Quantity::cd_nok};
const char* quantity_name(Quantity q);
std::optional<double> quantity_value(const CdComponents& c, Quantity q);

struct EnsembleSummary {
  std::optional<double> mean;  // over replicates where the quantity is defined
  std::optional<double> sd;    // sample (n-1) convention; absent with < 2 defined values
  std::size_t defined = 0;
};

struct RewireEnsemble {
  RewireConfig config;
  MetricConfig metric_config;
  std::vector<CdComponents> observed;                 // per work
  std::vector<std::vector<CdComponents>> replicates;  // [replicate][work]
  std::vector<CitationGraph> graphs;                  // kept only on request

  std::size_t work_count() const noexcept { return observed.size(); }
  EnsembleSummary summary(NodeIndex work, Quantity q) const;
};

RewireEnsemble build_ensemble(const CitationGraph& graph, const RewireConfig& config,
                              const MetricConfig& metric_config, unsigned workers = 1, bool keep_graphs = false);

/// (observed - mean) / sd; absent when sd is zero.
std::optional<double> zscore(double observed, double random_mean, double random_sd);

struct QuantityZ {
  std::optional<double> observed;
  std::optional<double> random_mean;
  std::optional<double> random_sd;
  std::optional<double> z;
};

struct ZScoreRecord {
  std::string id;
  Year year = 0;
  std::array<QuantityZ, 5> by_quantity;  // indexed like kAllQuantities

  const QuantityZ& operator[](Quantity q) const { return by_quantity[static_cast<std::size_t>(q)]; }
};

/// Per-work z-scores of n_I, n_J, n_K, CD and CD^noK. Works with no
/// references are skipped when exclude_zero_bcite is set. Throws DomainError
/// when the ensemble was built with a different metric configuration.
std::vector<ZScoreRecord> component_zscores(const CitationGraph& graph, const RewireEnsemble& ensemble,
                                            const MetricConfig& metric_config, bool exclude_zero_bcite = false);

/// Long format: id, quantity, observed, random_mean, random_sd, z.
void write_zscores(std::ostream& out, const std::vector<ZScoreRecord>& records, char delimiter = ',');

}  // namespace disrupt
