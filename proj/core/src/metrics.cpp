#include "disrupt/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "disrupt/error.hpp"
#include "disrupt/parallel.hpp"
#include "disrupt/table_io.hpp"

namespace disrupt {

void MetricConfig::check() const {
  if (window_years < 1) throw DomainError("window_years must be >= 1");
  if (coupling_threshold < 1) throw DomainError("coupling_threshold must be >= 1");
}

std::optional<double> cd_index(const CdComponents& c) {
  const auto denom = c.n_i + c.n_j + c.n_k;
  if (denom <= 0) return std::nullopt;
  return static_cast<double>(c.n_i - c.n_j) / static_cast<double>(denom);
}

std::optional<double> cd_nok(const CdComponents& c) {
  const auto denom = c.n_i + c.n_j;
  if (denom <= 0) return std::nullopt;
  return static_cast<double>(c.n_i - c.n_j) / static_cast<double>(denom);
}

std::optional<bool> is_disruptive(std::optional<double> cd) {
  if (!cd) return std::nullopt;
  return *cd > 0.0;
}

ComponentCounter::ComponentCounter(const CitationGraph& graph)
    : graph_(&graph), shared_(graph.node_count(), 0), citer_mark_(graph.node_count(), 0) {}

CdComponents ComponentCounter::operator()(NodeIndex focal, const MetricConfig& config) {
  const CitationGraph& g = *graph_;
  const Year lo = config.window_begin(g.year(focal));
  const Year hi = config.window_end(g.year(focal));
  const auto in_window = [&](NodeIndex w) { return g.year(w) >= lo && g.year(w) <= hi; };

  if (++epoch_ == 0) {  // wrapped; clear stale marks
    std::fill(citer_mark_.begin(), citer_mark_.end(), 0);
    epoch_ = 1;
  }

  CdComponents out;
  const auto refs = g.references(focal);
  out.bcite_count = static_cast<std::int64_t>(refs.size());

  touched_.clear();
  for (NodeIndex r : refs) {
    for (NodeIndex w : g.citers(r)) {
      if (w == focal || !in_window(w)) continue;
      if (shared_[w]++ == 0) touched_.push_back(w);
    }
  }

  const auto threshold = static_cast<std::uint32_t>(config.coupling_threshold);
  for (NodeIndex c : g.citers(focal)) {
    citer_mark_[c] = epoch_;
    if (!in_window(c)) continue;
    if (shared_[c] >= threshold)
      ++out.n_j;
    else
      ++out.n_i;
  }
  for (NodeIndex w : touched_) {
    if (citer_mark_[w] != epoch_) ++out.n_k;
    shared_[w] = 0;
  }
  return out;
}

CdComponents cd_components(const CitationGraph& graph, NodeIndex focal, const MetricConfig& config) {
  ComponentCounter counter(graph);
  return counter(focal, config);
}

CdComponents cd_components(const CitationGraph& graph, std::string_view focal, const MetricConfig& config) {
  return cd_components(graph, graph.index_of(focal), config);
}

std::optional<double> cyg(const CitationGraph& graph, NodeIndex focal, const MetricConfig& config) {
  const Year yf = graph.year(focal);
  const Year lo = config.window_begin(yf);
  const Year hi = config.window_end(yf);
  std::int64_t sum = 0;
  std::int64_t pairs = 0;
  for (NodeIndex c : graph.citers(focal)) {
    if (graph.year(c) < lo || graph.year(c) > hi) continue;
    for (NodeIndex r : graph.references(c)) {
      sum += graph.year(r) - yf;
      ++pairs;
    }
  }
  if (pairs == 0) return std::nullopt;
  return static_cast<double>(sum) / static_cast<double>(pairs);
}

std::optional<double> mean_reference_age(const CitationGraph& graph, NodeIndex focal) {
  const auto refs = graph.references(focal);
  if (refs.empty()) return std::nullopt;
  std::int64_t sum = 0;
  for (NodeIndex r : refs) sum += graph.year(focal) - graph.year(r);
  return static_cast<double>(sum) / static_cast<double>(refs.size());
}

MetricsRecord compute_record(const CitationGraph& graph, NodeIndex focal, const MetricConfig& config,
                             ComponentCounter& counter) {
  MetricsRecord rec;
  rec.id = graph.id(focal);
  rec.year = graph.year(focal);
  rec.components = counter(focal, config);
  rec.cd = cd_index(rec.components);
  rec.cd_nok = disrupt::cd_nok(rec.components);
  rec.is_d = is_disruptive(rec.cd);
  rec.cyg = disrupt::cyg(graph, focal, config);
  rec.mean_ref_age = mean_reference_age(graph, focal);
  rec.zero_bcite = rec.components.bcite_count == 0;
  rec.cd_equals_one = rec.cd && *rec.cd == 1.0;
  return rec;
}

MetricsTable compute_all(const CitationGraph& graph, const MetricConfig& config, unsigned workers) {
  config.check();
  MetricsTable table(graph.node_count());
  parallel_for_blocks(graph.node_count(), resolve_workers(workers), [&](std::size_t b, std::size_t e, unsigned) {
    ComponentCounter counter(graph);
    for (std::size_t i = b; i < e; ++i)
      table[i] = compute_record(graph, static_cast<NodeIndex>(i), config, counter);
  });
  return table;
}

std::vector<std::optional<double>> percentile_normalize(std::span<const std::optional<double>> values) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i]) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return *values[a] < *values[b]; });

  std::vector<std::optional<double>> out(values.size());
  const double n = static_cast<double>(order.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && *values[order[j + 1]] == *values[order[i]]) ++j;
    // ranks i+1 .. j+1 share their average
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j + 1);
    const double pct = 100.0 * (avg_rank - 0.5) / n;
    for (std::size_t k = i; k <= j; ++k) out[order[k]] = pct;
    i = j + 1;
  }
  return out;
}

// ---- Serialization -----------------------------------------------------------

namespace {

const std::vector<std::string>& metrics_header() {
  static const std::vector<std::string> h = {"id",    "year",   "n_i", "n_j", "n_k",          "bcite_count", "cd",
                                             "cd_nok", "is_d", "cyg", "mean_ref_age", "zero_bcite", "cd_equals_one"};
  return h;
}

std::string flag(bool b) { return b ? "1" : "0"; }

bool parse_flag(const std::string& s, const std::string& src, std::size_t line, std::size_t col) {
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw ParseError(src, line, col, "expected 0/1, got '" + s + "'");
}

}  // namespace

void write_metrics(std::ostream& out, const MetricsTable& table, char delimiter) {
  io::write_row(out, metrics_header(), delimiter);
  std::vector<std::string> row(metrics_header().size());
  for (const auto& r : table) {
    row[0] = r.id;
    row[1] = std::to_string(r.year);
    row[2] = std::to_string(r.components.n_i);
    row[3] = std::to_string(r.components.n_j);
    row[4] = std::to_string(r.components.n_k);
    row[5] = std::to_string(r.components.bcite_count);
    row[6] = io::format_optional(r.cd);
    row[7] = io::format_optional(r.cd_nok);
    row[8] = r.is_d ? flag(*r.is_d) : "";
    row[9] = io::format_optional(r.cyg);
    row[10] = io::format_optional(r.mean_ref_age);
    row[11] = flag(r.zero_bcite);
    row[12] = flag(r.cd_equals_one);
    io::write_row(out, row, delimiter);
  }
}

MetricsTable read_metrics(std::istream& in, const std::string& source, char delimiter) {
  io::DelimitedReader reader(in, source, delimiter);
  std::vector<std::size_t> col;
  for (const auto& name : metrics_header()) col.push_back(reader.require_column(name));

  MetricsTable table;
  while (auto row = reader.next()) {
    const auto& f = row->fields;
    auto cell = [&](std::size_t k) -> const std::string& {
      static const std::string empty;
      return col[k] < f.size() ? f[col[k]] : empty;
    };
    auto integer = [&](std::size_t k) { return io::parse_int(cell(k), source, row->line, col[k] + 1); };
    auto real = [&](std::size_t k) -> std::optional<double> {
      if (cell(k).empty()) return std::nullopt;
      return io::parse_double(cell(k), source, row->line, col[k] + 1);
    };
    MetricsRecord r;
    r.id = cell(0);
    if (r.id.empty()) throw ParseError(source, row->line, col[0] + 1, "empty id");
    r.year = static_cast<Year>(integer(1));
    r.components = {integer(2), integer(3), integer(4), integer(5)};
    r.cd = real(6);
    r.cd_nok = real(7);
    if (!cell(8).empty()) r.is_d = parse_flag(cell(8), source, row->line, col[8] + 1);
    r.cyg = real(9);
    r.mean_ref_age = real(10);
    r.zero_bcite = parse_flag(cell(11), source, row->line, col[11] + 1);
    r.cd_equals_one = parse_flag(cell(12), source, row->line, col[12] + 1);
    table.push_back(std::move(r));
  }
  return table;
}

}  // namespace disrupt
