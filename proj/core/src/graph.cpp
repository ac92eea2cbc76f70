#include "disrupt/graph.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "disrupt/error.hpp"
#include "disrupt/table_io.hpp"

namespace disrupt {

namespace {

template <typename T>
void push_sample(std::vector<T>& samples, T value) {
  if (samples.size() < ValidationReport::kMaxSamples) samples.push_back(std::move(value));
}

std::uint64_t edge_key(NodeIndex a, NodeIndex b) { return (std::uint64_t{a} << 32) | b; }

}  // namespace

LoadPolicy LoadPolicy::lenient() {
  LoadPolicy p;
  p.dangling = p.self_loop = p.duplicate = p.year_order = p.year_range = OnViolation::drop;
  return p;
}

NodeTable::NodeTable(std::vector<WorkNode> nodes) : nodes_(std::move(nodes)) {
  std::sort(nodes_.begin(), nodes_.end(), [](const WorkNode& a, const WorkNode& b) { return a.id < b.id; });
  index_.reserve(nodes_.size());
  years_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id.empty()) throw ValidationError("empty node id");
    if (i > 0 && nodes_[i].id == nodes_[i - 1].id)
      throw ValidationError("duplicate node id '" + nodes_[i].id + "'");
    index_.emplace(nodes_[i].id, static_cast<NodeIndex>(i));
    years_.push_back(nodes_[i].year);
  }
}

std::optional<NodeIndex> NodeTable::find(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

CitationGraph::CitationGraph() : nodes_(std::make_shared<NodeTable>(std::vector<WorkNode>{})) {
  build_adjacency();
}

CitationGraph CitationGraph::from_records(std::vector<WorkNode> nodes,
                                          std::span<const std::pair<std::string, std::string>> edges,
                                          const LoadPolicy& policy) {
  ValidationReport report;
  std::vector<WorkNode> kept;
  kept.reserve(nodes.size());
  for (auto& n : nodes) {
    if (n.year < policy.year_min || n.year > policy.year_max) {
      if (policy.year_range == OnViolation::fatal)
        throw ValidationError("work '" + n.id + "' year " + std::to_string(n.year) + " outside [" +
                              std::to_string(policy.year_min) + ", " + std::to_string(policy.year_max) + "]");
      ++report.year_range_node_count;
      push_sample(report.year_range_samples, n.id);
      continue;
    }
    if (n.author_count && *n.author_count < 0)
      throw ValidationError("work '" + n.id + "' has negative author_count");
    if (n.unlinked_ref_count < 0) throw ValidationError("work '" + n.id + "' has negative unlinked_ref_count");
    kept.push_back(std::move(n));
  }

  CitationGraph g;
  g.nodes_ = std::make_shared<NodeTable>(std::move(kept));
  const NodeTable& table = *g.nodes_;

  std::unordered_set<std::uint64_t> seen;
  seen.reserve(edges.size());
  g.edges_.reserve(edges.size());
  for (const auto& [citing_id, cited_id] : edges) {
    const EdgeSample sample{citing_id, cited_id};
    auto citing = table.find(citing_id);
    auto cited = table.find(cited_id);
    if (!citing || !cited) {
      if (policy.dangling == OnViolation::fatal)
        throw ValidationError("edge (" + citing_id + ", " + cited_id + ") references an unknown work");
      ++report.dangling_edge_count;
      push_sample(report.dangling_samples, sample);
      continue;
    }
    if (*citing == *cited) {
      if (policy.self_loop == OnViolation::fatal) throw ValidationError("self-citation by '" + citing_id + "'");
      ++report.self_loop_count;
      push_sample(report.self_loop_samples, sample);
      continue;
    }
    const Year yc = table[*citing].year;
    const Year yr = table[*cited].year;
    if (yc < yr || (!policy.allow_same_year && yc == yr)) {
      if (policy.year_order == OnViolation::fatal)
        throw ValidationError("edge (" + citing_id + ", " + cited_id + ") cites forward in time (" +
                              std::to_string(yc) + " -> " + std::to_string(yr) + ")");
      ++report.year_violation_count;
      push_sample(report.year_violation_samples, sample);
      continue;
    }
    if (!seen.insert(edge_key(*citing, *cited)).second) {
      if (policy.duplicate == OnViolation::fatal)
        throw ValidationError("duplicate edge (" + citing_id + ", " + cited_id + ")");
      ++report.duplicate_edge_count;
      push_sample(report.duplicate_samples, sample);
      continue;
    }
    g.edges_.push_back({*citing, *cited});
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  g.load_report_ = std::move(report);
  g.build_adjacency();
  return g;
}

CitationGraph CitationGraph::from_indexed(std::shared_ptr<const NodeTable> nodes, std::vector<Edge> edges,
                                          bool allow_same_year) {
  CitationGraph g;
  g.nodes_ = std::move(nodes);
  const auto years = g.nodes_->years();
  std::sort(edges.begin(), edges.end());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    if (e.citing >= years.size() || e.cited >= years.size()) throw ValidationError("edge endpoint out of range");
    if (e.citing == e.cited) throw ValidationError("self-citation in indexed edge list");
    if (years[e.citing] < years[e.cited] || (!allow_same_year && years[e.citing] == years[e.cited]))
      throw ValidationError("edge cites forward in time");
    if (i > 0 && edges[i - 1] == e) throw ValidationError("duplicate edge in indexed edge list");
  }
  g.edges_ = std::move(edges);
  g.build_adjacency();
  return g;
}

void CitationGraph::build_adjacency() {
  const std::size_t n = nodes_->size();
  years_.assign(nodes_->years().begin(), nodes_->years().end());

  ref_offsets_.assign(n + 1, 0);
  cit_offsets_.assign(n + 1, 0);
  for (const Edge& e : edges_) {
    ++ref_offsets_[e.citing + 1];
    ++cit_offsets_[e.cited + 1];
  }
  for (std::size_t i = 0; i < n; ++i) {
    ref_offsets_[i + 1] += ref_offsets_[i];
    cit_offsets_[i + 1] += cit_offsets_[i];
  }
  ref_targets_.resize(edges_.size());
  cit_sources_.resize(edges_.size());
  // edges_ is sorted by (citing, cited), so both fills come out sorted.
  std::vector<std::size_t> cit_fill(cit_offsets_.begin(), cit_offsets_.end() - 1);
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    ref_targets_[k] = edges_[k].cited;
    cit_sources_[cit_fill[edges_[k].cited]++] = edges_[k].citing;
  }

  works_per_year_.clear();
  for (Year y : years_) ++works_per_year_[y];
}

NodeIndex CitationGraph::index_of(std::string_view id) const {
  if (auto i = find(id)) return *i;
  throw NotFoundError("unknown work id '" + std::string(id) + "'");
}

bool CitationGraph::has_edge(NodeIndex citing, NodeIndex cited) const {
  auto refs = references(citing);
  return std::binary_search(refs.begin(), refs.end(), cited);
}

std::size_t CitationGraph::works_in_year(Year y) const {
  auto it = works_per_year_.find(y);
  return it == works_per_year_.end() ? 0 : it->second;
}

Neighborhood neighborhood(const CitationGraph& graph, std::string_view focal) {
  const NodeIndex f = graph.index_of(focal);
  return {graph.references(f), graph.citers(f)};
}

ValidationReport validate(const CitationGraph& graph, bool allow_same_year) {
  ValidationReport report = graph.load_report();
  const auto edges = graph.edges();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const Edge& e = edges[k];
    const EdgeSample sample{graph.id(e.citing), graph.id(e.cited)};
    if (e.citing == e.cited) {
      ++report.self_loop_count;
      push_sample(report.self_loop_samples, sample);
    }
    if (k > 0 && edges[k - 1] == e) {
      ++report.duplicate_edge_count;
      push_sample(report.duplicate_samples, sample);
    }
    const Year yc = graph.year(e.citing);
    const Year yr = graph.year(e.cited);
    if (yc < yr || (!allow_same_year && yc == yr)) {
      ++report.year_violation_count;
      push_sample(report.year_violation_samples, sample);
    }
  }
  return report;
}

// ---- File formats ----------------------------------------------------------

namespace {

std::optional<std::string> optional_text(const io::DelimitedRow& row, std::optional<std::size_t> col) {
  if (!col || *col >= row.fields.size() || row.fields[*col].empty()) return std::nullopt;
  return row.fields[*col];
}

}  // namespace

std::vector<WorkNode> read_nodes(std::istream& in, const std::string& source, char delimiter) {
  io::DelimitedReader reader(in, source, delimiter);
  const std::size_t c_id = reader.require_column("id");
  const std::size_t c_year = reader.require_column("year");
  const auto c_field = reader.column("field");
  const auto c_subfield = reader.column("subfield");
  const auto c_doctype = reader.column("doctype");
  const auto c_language = reader.column("language");
  const auto c_authors = reader.column("author_count");
  const auto c_unlinked = reader.column("unlinked_ref_count");

  std::vector<WorkNode> nodes;
  while (auto row = reader.next()) {
    auto& f = row->fields;
    if (c_id >= f.size() || f[c_id].empty()) throw ParseError(source, row->line, c_id + 1, "empty id");
    if (c_year >= f.size() || f[c_year].empty()) throw ParseError(source, row->line, c_year + 1, "missing year");
    WorkNode n;
    n.id = f[c_id];
    n.year = static_cast<Year>(io::parse_int(f[c_year], source, row->line, c_year + 1));
    n.field = optional_text(*row, c_field);
    n.subfield = optional_text(*row, c_subfield);
    n.doctype = optional_text(*row, c_doctype);
    n.language = optional_text(*row, c_language);
    if (auto a = optional_text(*row, c_authors)) {
      n.author_count = io::parse_int(*a, source, row->line, *c_authors + 1);
      if (*n.author_count < 0) throw ParseError(source, row->line, *c_authors + 1, "negative author_count");
    }
    if (auto u = optional_text(*row, c_unlinked)) {
      n.unlinked_ref_count = io::parse_int(*u, source, row->line, *c_unlinked + 1);
      if (n.unlinked_ref_count < 0)
        throw ParseError(source, row->line, *c_unlinked + 1, "negative unlinked_ref_count");
    }
    nodes.push_back(std::move(n));
  }
  return nodes;
}

std::vector<std::pair<std::string, std::string>> read_edges(std::istream& in, const std::string& source,
                                                            char delimiter) {
  io::DelimitedReader reader(in, source, delimiter);
  const std::size_t c_from = reader.require_column("citing_id");
  const std::size_t c_to = reader.require_column("cited_id");
  std::vector<std::pair<std::string, std::string>> edges;
  while (auto row = reader.next()) {
    auto& f = row->fields;
    if (c_from >= f.size() || f[c_from].empty()) throw ParseError(source, row->line, c_from + 1, "empty citing_id");
    if (c_to >= f.size() || f[c_to].empty()) throw ParseError(source, row->line, c_to + 1, "empty cited_id");
    edges.emplace_back(std::move(f[c_from]), std::move(f[c_to]));
  }
  return edges;
}

CitationGraph load_graph(std::istream& nodes, std::istream& edges, const LoadPolicy& policy,
                         const std::string& nodes_name, const std::string& edges_name) {
  auto node_rows = read_nodes(nodes, nodes_name, policy.delimiter);
  auto edge_rows = read_edges(edges, edges_name, policy.delimiter);
  return CitationGraph::from_records(std::move(node_rows), edge_rows, policy);
}

CitationGraph load_graph(const std::filesystem::path& nodes, const std::filesystem::path& edges,
                         const LoadPolicy& policy) {
  std::ifstream nin(nodes);
  if (!nin) throw NotFoundError("input not found: " + nodes.string());
  std::ifstream ein(edges);
  if (!ein) throw NotFoundError("input not found: " + edges.string());
  return load_graph(nin, ein, policy, nodes.string(), edges.string());
}

void write_nodes(std::ostream& out, const CitationGraph& graph, char delimiter) {
  const std::string header[] = {"id",       "year",         "field",
                                "subfield", "doctype",      "language",
                                "author_count", "unlinked_ref_count"};
  io::write_row(out, header, delimiter);
  for (const WorkNode& n : graph.node_table()->nodes()) {
    const std::string row[] = {n.id,
                               std::to_string(n.year),
                               n.field.value_or(""),
                               n.subfield.value_or(""),
                               n.doctype.value_or(""),
                               n.language.value_or(""),
                               n.author_count ? std::to_string(*n.author_count) : "",
                               std::to_string(n.unlinked_ref_count)};
    io::write_row(out, row, delimiter);
  }
}

void write_edges(std::ostream& out, const CitationGraph& graph, char delimiter) {
  const std::string header[] = {"citing_id", "cited_id"};
  io::write_row(out, header, delimiter);
  for (const Edge& e : graph.edges()) {
    const std::string row[] = {graph.id(e.citing), graph.id(e.cited)};
    io::write_row(out, row, delimiter);
  }
}

}  // namespace disrupt
