#pragma once

// Immutable citation graph with per-work metadata.
//
// Works are addressed by dense indices assigned in ascending id order, so
// iterating indices visits works sorted by id. Reference and citer lists are
// stored as CSR arrays sorted by index.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace disrupt {

using NodeIndex = std::uint32_t;
using Year = std::int32_t;

struct WorkNode {
  std::string id;
  Year year = 0;
  std::optional<std::string> field;
  std::optional<std::string> subfield;
  std::optional<std::string> doctype;
  std::optional<std::string> language;
  std::optional<std::int64_t> author_count;
  std::int64_t unlinked_ref_count = 0;

  bool operator==(const WorkNode&) const = default;
};

struct Edge {
  NodeIndex citing = 0;
  NodeIndex cited = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// What to do with an offending record at load time.
enum class OnViolation { fatal, drop };

struct LoadPolicy {
  OnViolation dangling = OnViolation::fatal;
  OnViolation self_loop = OnViolation::fatal;
  OnViolation duplicate = OnViolation::drop;
  OnViolation year_order = OnViolation::fatal;
  OnViolation year_range = OnViolation::fatal;
  /// Permit citing year == cited year. Citing year < cited year is always a violation.
  bool allow_same_year = true;
  Year year_min = -100000;
  Year year_max = 100000;
  char delimiter = ',';

  /// Defaults: every violation fatal except duplicates, which are dropped.
  static LoadPolicy strict() { return {}; }
  /// Every offending record is dropped and counted.
  static LoadPolicy lenient();
};

struct EdgeSample {
  std::string citing_id;
  std::string cited_id;
  friend bool operator==(const EdgeSample&, const EdgeSample&) = default;
};

struct ValidationReport {
  static constexpr std::size_t kMaxSamples = 10;

  std::size_t dangling_edge_count = 0;
  std::size_t duplicate_edge_count = 0;
  std::size_t self_loop_count = 0;
  std::size_t year_violation_count = 0;
  std::size_t year_range_node_count = 0;
  std::vector<EdgeSample> dangling_samples;
  std::vector<EdgeSample> duplicate_samples;
  std::vector<EdgeSample> self_loop_samples;
  std::vector<EdgeSample> year_violation_samples;
  std::vector<std::string> year_range_samples;

  bool clean() const noexcept {
    return dangling_edge_count == 0 && duplicate_edge_count == 0 && self_loop_count == 0 &&
           year_violation_count == 0 && year_range_node_count == 0;
  }
  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

/// Node metadata shared between an observed graph and its rewired copies.
class NodeTable {
 public:
  explicit NodeTable(std::vector<WorkNode> nodes);  // sorts by id; throws on duplicate id
  NodeTable(const NodeTable&) = delete;  // the index holds views into nodes_
  NodeTable& operator=(const NodeTable&) = delete;
  NodeTable(NodeTable&&) = default;
  NodeTable& operator=(NodeTable&&) = default;

  std::size_t size() const noexcept { return nodes_.size(); }
  const WorkNode& operator[](NodeIndex i) const { return nodes_[i]; }
  std::span<const WorkNode> nodes() const noexcept { return nodes_; }
  std::span<const Year> years() const noexcept { return years_; }
  std::optional<NodeIndex> find(std::string_view id) const;

 private:
  std::vector<WorkNode> nodes_;
  std::vector<Year> years_;
  std::unordered_map<std::string_view, NodeIndex> index_;
};

class CitationGraph {
 public:
  CitationGraph();

  /// Builds from id-keyed records, applying the policy. Throws ValidationError
  /// for fatal violations and for duplicate node ids.
  static CitationGraph from_records(std::vector<WorkNode> nodes,
                                    std::span<const std::pair<std::string, std::string>> edges,
                                    const LoadPolicy& policy = LoadPolicy::strict());

  /// Builds from trusted indexed edges over an existing node table. Edges must
  /// already satisfy every invariant; violations throw ValidationError.
  static CitationGraph from_indexed(std::shared_ptr<const NodeTable> nodes, std::vector<Edge> edges,
                                    bool allow_same_year = true);

  std::size_t node_count() const noexcept { return nodes_->size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  const WorkNode& node(NodeIndex i) const { return (*nodes_)[i]; }
  const std::string& id(NodeIndex i) const { return (*nodes_)[i].id; }
  Year year(NodeIndex i) const { return years_[i]; }
  std::span<const Year> years() const noexcept { return years_; }
  const std::shared_ptr<const NodeTable>& node_table() const noexcept { return nodes_; }

  std::optional<NodeIndex> find(std::string_view id) const { return nodes_->find(id); }
  /// Throws NotFoundError for an unknown id.
  NodeIndex index_of(std::string_view id) const;

  /// B_f: works cited by i, ascending index.
  std::span<const NodeIndex> references(NodeIndex i) const {
    return {ref_targets_.data() + ref_offsets_[i], ref_targets_.data() + ref_offsets_[i + 1]};
  }
  /// C_f: works citing i, ascending index.
  std::span<const NodeIndex> citers(NodeIndex i) const {
    return {cit_sources_.data() + cit_offsets_[i], cit_sources_.data() + cit_offsets_[i + 1]};
  }
  std::size_t out_degree(NodeIndex i) const { return ref_offsets_[i + 1] - ref_offsets_[i]; }
  std::size_t in_degree(NodeIndex i) const { return cit_offsets_[i + 1] - cit_offsets_[i]; }

  /// All edges, sorted by (citing, cited).
  std::span<const Edge> edges() const noexcept { return edges_; }
  bool has_edge(NodeIndex citing, NodeIndex cited) const;

  /// Works published per year (n_c), ascending by year.
  const std::map<Year, std::size_t>& works_per_year() const noexcept { return works_per_year_; }
  std::size_t works_in_year(Year y) const;

  /// Violations seen while loading (offending records that were dropped).
  const ValidationReport& load_report() const noexcept { return load_report_; }

 private:
  void build_adjacency();

  std::shared_ptr<const NodeTable> nodes_;
  std::vector<Year> years_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> ref_offsets_;
  std::vector<NodeIndex> ref_targets_;
  std::vector<std::size_t> cit_offsets_;
  std::vector<NodeIndex> cit_sources_;
  std::map<Year, std::size_t> works_per_year_;
  ValidationReport load_report_;
};

struct Neighborhood {
  std::span<const NodeIndex> references;
  std::span<const NodeIndex> citers;
};

/// B_f and C_f of a work; throws NotFoundError for an unknown id.
Neighborhood neighborhood(const CitationGraph& graph, std::string_view focal);

/// Violations recorded at load plus a recount over the retained edge set.
ValidationReport validate(const CitationGraph& graph, bool allow_same_year = true);

// ---- File formats ----------------------------------------------------------

/// Nodes: header with id, year and optional field, subfield, doctype,
/// language, author_count, unlinked_ref_count. Edges: citing_id, cited_id.
CitationGraph load_graph(std::istream& nodes, std::istream& edges, const LoadPolicy& policy = {},
                         const std::string& nodes_name = "nodes", const std::string& edges_name = "edges");
CitationGraph load_graph(const std::filesystem::path& nodes, const std::filesystem::path& edges,
                         const LoadPolicy& policy = {});

std::vector<WorkNode> read_nodes(std::istream& in, const std::string& source, char delimiter = ',');
std::vector<std::pair<std::string, std::string>> read_edges(std::istream& in, const std::string& source,
                                                            char delimiter = ',');

void write_nodes(std::ostream& out, const CitationGraph& graph, char delimiter = ',');
void write_edges(std::ostream& out, const CitationGraph& graph, char delimiter = ',');

}  // namespace disrupt
