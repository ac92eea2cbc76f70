#pragma once

// CD-index family and auxiliary disruptiveness measures.
//
// For a focal work f with references B_f, a work w published inside the
// forward window [year(f), year(f) + t] (or (year(f), year(f) + t] when
// same-year works are excluded) is
//   - I-type if it cites f and fewer than l references of f,
//   - J-type if it cites f and at least l references of f,
//   - K-type if it does not cite f but cites at least one reference of f.
// The focal work itself is never classified. Classification uses the full
// reference list of w.

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "disrupt/graph.hpp"

namespace disrupt {

struct MetricConfig {
  int window_years = 5;        // t
  int coupling_threshold = 1;  // l; 5 gives CD_5^5
  bool include_same_year = true;

  /// Throws DomainError unless t >= 1 and l >= 1.
  void check() const;
  Year window_begin(Year focal_year) const { return include_same_year ? focal_year : focal_year + 1; }
  Year window_end(Year focal_year) const { return focal_year + window_years; }
};

struct CdComponents {
  std::int64_t n_i = 0;
  std::int64_t n_j = 0;
  std::int64_t n_k = 0;
  std::int64_t bcite_count = 0;

  friend bool operator==(const CdComponents&, const CdComponents&) = default;
};

/// (n_I - n_J) / (n_I + n_J + n_K); nullopt when the denominator is zero.
std::optional<double> cd_index(const CdComponents& c);
/// (n_I - n_J) / (n_I + n_J); nullopt when no in-window citers.
std::optional<double> cd_nok(const CdComponents& c);
/// Strictly positive CD.
std::optional<bool> is_disruptive(std::optional<double> cd);

/// Reusable per-thread scratch for component counting over one graph.
class ComponentCounter {
 public:
  explicit ComponentCounter(const CitationGraph& graph);
  CdComponents operator()(NodeIndex focal, const MetricConfig& config);

 private:
  const CitationGraph* graph_;
  std::vector<std::uint32_t> shared_;  // per work: number of focal references it cites
  std::vector<std::uint32_t> citer_mark_;
  std::uint32_t epoch_ = 0;
  std::vector<NodeIndex> touched_;
};

CdComponents cd_components(const CitationGraph& graph, NodeIndex focal, const MetricConfig& config);
/// Throws NotFoundError for an unknown id.
CdComponents cd_components(const CitationGraph& graph, std::string_view focal, const MetricConfig& config);

/// Citation year gap: mean of year(r) - year(f) over pairs (c, r) where c is
/// an in-window citer of f and r any reference of c.
std::optional<double> cyg(const CitationGraph& graph, NodeIndex focal, const MetricConfig& config);
/// Mean of year(f) - year(r) over r in B_f.
std::optional<double> mean_reference_age(const CitationGraph& graph, NodeIndex focal);

struct MetricsRecord {
  std::string id;
  Year year = 0;
  CdComponents components;
  std::optional<double> cd;
  std::optional<double> cd_nok;
  std::optional<bool> is_d;
  std::optional<double> cyg;
  std::optional<double> mean_ref_age;
  bool zero_bcite = false;
  bool cd_equals_one = false;

  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

using MetricsTable = std::vector<MetricsRecord>;

MetricsRecord compute_record(const CitationGraph& graph, NodeIndex focal, const MetricConfig& config,
                             ComponentCounter& counter);

/// One record per work in id order. Output is identical for any worker count.
MetricsTable compute_all(const CitationGraph& graph, const MetricConfig& config, unsigned workers = 1);

/// 100 * (rank - 0.5) / n over defined entries, average ranks for ties,
/// pooled over the whole input. Absent entries stay absent.
std::vector<std::optional<double>> percentile_normalize(std::span<const std::optional<double>> values);

void write_metrics(std::ostream& out, const MetricsTable& table, char delimiter = ',');
MetricsTable read_metrics(std::istream& in, const std::string& source, char delimiter = ',');

}  // namespace disrupt
