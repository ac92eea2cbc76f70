#include "disrupt/audit.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <unordered_map>

#include <json.hpp>

#include "disrupt/error.hpp"
#include "disrupt/table_io.hpp"

namespace disrupt::audit {

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

std::optional<std::size_t> Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i] == name) return i;
  return std::nullopt;
}

std::size_t Table::require_column(std::string_view name) const {
  if (auto c = column(name)) return *c;
  throw NotFoundError("table has no column '" + std::string(name) + "'");
}

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != columns_.size())
    throw DomainError("row has " + std::to_string(row.size()) + " cells, table has " +
                      std::to_string(columns_.size()) + " columns");
  rows_.push_back(std::move(row));
}

void Table::set_column(const std::string& name, std::vector<std::string> values) {
  if (values.size() != rows_.size()) throw DomainError("column length does not match row count");
  if (auto c = column(name)) {
    for (std::size_t r = 0; r < rows_.size(); ++r) rows_[r][*c] = std::move(values[r]);
    return;
  }
  columns_.push_back(name);
  for (std::size_t r = 0; r < rows_.size(); ++r) rows_[r].push_back(std::move(values[r]));
}

Table read_table(std::istream& in, const std::string& source, char delimiter) {
  io::DelimitedReader reader(in, source, delimiter);
  Table t(reader.header());
  while (auto row = reader.next()) {
    row->fields.resize(reader.header().size());
    t.add_row(std::move(row->fields));
  }
  return t;
}

void write_table(std::ostream& out, const Table& table, char delimiter) {
  io::write_row(out, table.columns(), delimiter);
  for (std::size_t r = 0; r < table.row_count(); ++r) io::write_row(out, table.row(r), delimiter);
}

Table metrics_with_metadata(const MetricsTable& metrics, const CitationGraph& graph) {
  Table t({"id", "year", "field", "subfield", "doctype", "language", "author_count", "unlinked_ref_count", "n_i",
           "n_j", "n_k", "bcite_count", "cd", "cd_nok", "zero_bcite", "cd_equals_one"});
  for (const MetricsRecord& m : metrics) {
    const WorkNode& n = graph.node(graph.index_of(m.id));
    t.add_row({m.id, std::to_string(m.year), n.field.value_or(""), n.subfield.value_or(""), n.doctype.value_or(""),
               n.language.value_or(""), n.author_count ? std::to_string(*n.author_count) : "",
               std::to_string(n.unlinked_ref_count), std::to_string(m.components.n_i),
               std::to_string(m.components.n_j), std::to_string(m.components.n_k),
               std::to_string(m.components.bcite_count), io::format_optional(m.cd), io::format_optional(m.cd_nok),
               m.zero_bcite ? "1" : "0", m.cd_equals_one ? "1" : "0"});
  }
  return t;
}

// ---- Crosswalks -----------------------------------------------------------------

std::set<std::string> Crosswalk::categories() const {
  std::set<std::string> out;
  for (const auto& [raw, meta] : mapping) out.insert(meta);
  return out;
}

std::optional<std::string> Crosswalk::lookup(std::string_view raw) const {
  if (auto it = mapping.find(std::string(raw)); it != mapping.end()) return it->second;
  for (const auto& [r, meta] : mapping)
    if (meta == raw) return meta;
  if (raw == other_label) return other_label;
  return std::nullopt;
}

Crosswalk read_crosswalk(std::istream& in, const std::string& source, char delimiter) {
  io::DelimitedReader reader(in, source, delimiter);
  const auto c_raw = reader.require_column("raw_label");
  const auto c_meta = reader.require_column("meta_category");
  Crosswalk cw;
  while (auto row = reader.next()) {
    row->fields.resize(reader.header().size());
    const std::string& raw = row->fields[c_raw];
    const std::string& meta = row->fields[c_meta];
    if (raw.empty()) throw ParseError(source, row->line, c_raw + 1, "empty raw_label");
    if (meta.empty()) throw ParseError(source, row->line, c_meta + 1, "empty meta_category");
    if (!cw.mapping.emplace(raw, meta).second)
      throw ParseError(source, row->line, c_raw + 1, "duplicate raw_label '" + raw + "'");
  }
  return cw;
}

CrosswalkResult apply_crosswalk(const Table& table, const Crosswalk& crosswalk, std::string_view column,
                                std::string output_column) {
  const std::size_t c = table.require_column(column);
  if (output_column.empty()) output_column = std::string(column) + "_meta";

  CrosswalkResult res;
  std::vector<std::string> out_columns = table.columns();
  const bool overwrite = table.column(output_column).has_value();
  if (!overwrite) out_columns.push_back(output_column);
  const std::size_t out_c = overwrite ? *table.column(output_column) : out_columns.size() - 1;
  res.table = Table(out_columns);

  for (std::size_t r = 0; r < table.row_count(); ++r) {
    std::vector<std::string> row = table.row(r);
    if (!overwrite) row.emplace_back();
    const std::string& raw = table.cell(r, c);
    if (raw.empty()) {
      ++res.absent;
      row[out_c].clear();
      res.table.add_row(std::move(row));
      continue;
    }
    if (auto meta = crosswalk.lookup(raw)) {
      ++res.mapped;
      row[out_c] = *meta;
      res.table.add_row(std::move(row));
      continue;
    }
    ++res.unmapped;
    ++res.unmapped_labels[raw];
    switch (crosswalk.unmapped) {
      case UnmappedPolicy::error: throw DomainError("unmapped label '" + raw + "' in column " + std::string(column));
      case UnmappedPolicy::drop: break;
      case UnmappedPolicy::keep_as_other:
        row[out_c] = crosswalk.other_label;
        res.table.add_row(std::move(row));
        break;
    }
  }
  return res;
}

// ---- Filters --------------------------------------------------------------------

std::size_t ExclusionReport::excluded_total() const {
  std::size_t s = 0;
  for (auto v : excluded) s += v;
  return s;
}

FilterResult filter_corpus(const Table& table, const FilterCriteria& criteria) {
  using Check = std::function<bool(const std::vector<std::string>&)>;
  std::array<Check, kFilterOrder.size()> checks;

  if (!criteria.include_doctypes.empty()) {
    const auto c = table.require_column(criteria.doctype_column);
    checks[0] = [&, c](const auto& row) { return criteria.include_doctypes.contains(row[c]); };
  }
  if (!criteria.include_fields.empty()) {
    const auto c = table.require_column(criteria.field_column);
    checks[1] = [&, c](const auto& row) { return criteria.include_fields.contains(row[c]); };
  }
  if (!criteria.exclude_languages.empty()) {
    const auto c = table.require_column(criteria.language_column);
    checks[2] = [&, c](const auto& row) { return !criteria.exclude_languages.contains(row[c]); };
  }
  if (criteria.year_min || criteria.year_max) {
    const auto c = table.require_column("year");
    checks[3] = [&, c](const auto& row) {
      Year y = 0;
      const std::string& s = row[c];
      if (std::from_chars(s.data(), s.data() + s.size(), y).ec != std::errc{}) return false;
      return (!criteria.year_min || y >= *criteria.year_min) && (!criteria.year_max || y <= *criteria.year_max);
    };
  }
  if (criteria.exclude_zero_bcite) {
    const auto c = table.require_column("zero_bcite");
    checks[4] = [c](const auto& row) { return row[c] != "1"; };
  }
  if (criteria.exclude_cd_equal_one) {
    const auto c = table.require_column("cd_equals_one");
    checks[5] = [c](const auto& row) { return row[c] != "1"; };
  }

  FilterResult res;
  res.kept = Table(table.columns());
  res.report.input_rows = table.row_count();
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    const auto& row = table.row(r);
    bool keep = true;
    for (std::size_t k = 0; k < checks.size(); ++k) {
      if (checks[k] && !checks[k](row)) {
        ++res.report.excluded[k];
        keep = false;
        break;
      }
    }
    if (keep) res.kept.add_row(row);
  }
  res.report.kept_rows = res.kept.row_count();
  return res;
}

// ---- Shares and contingency --------------------------------------------------------

std::vector<GroupShare> group_share(const Table& table, std::span<const std::string> group_keys,
                                    std::string_view predicate_column) {
  std::vector<std::size_t> key_cols;
  for (const auto& k : group_keys) key_cols.push_back(table.require_column(k));
  const std::size_t pc = table.require_column(predicate_column);

  std::map<std::vector<std::string>, std::pair<std::size_t, std::size_t>> groups;
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    std::vector<std::string> key;
    key.reserve(key_cols.size());
    for (auto c : key_cols) key.push_back(table.cell(r, c));
    auto& [count, hits] = groups[std::move(key)];
    ++count;
    if (table.cell(r, pc) == "1") ++hits;
  }
  std::vector<GroupShare> out;
  out.reserve(groups.size());
  for (auto& [key, ch] : groups)
    out.push_back({key, ch.first, ch.second, static_cast<double>(ch.second) / static_cast<double>(ch.first)});
  return out;
}

std::uint64_t ContingencyTable2x2::total() const {
  return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

double ContingencyTable2x2::percent(int row, int col) const {
  const auto t = total();
  if (t == 0) return 0.0;
  return 100.0 * static_cast<double>(counts[row][col]) / static_cast<double>(t);
}

ContingencyTable2x2 ContingencyTable2x2::transposed() const {
  ContingencyTable2x2 t;
  t.row_label = column_label;
  t.column_label = row_label;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) t.counts[c][r] = counts[r][c];
  return t;
}

namespace {

std::unordered_map<std::string, bool> coverage_by_key(const Table& t, const CoverageOptions& opt,
                                                      const std::string& side) {
  const auto key_c = t.require_column(opt.match_key);
  const auto zero_c = t.require_column("zero_bcite");
  const auto unlinked_c = opt.count_unlinked ? t.column("unlinked_ref_count") : std::nullopt;
  std::unordered_map<std::string, bool> out;
  for (std::size_t r = 0; r < t.row_count(); ++r) {
    const std::string& key = t.cell(r, key_c);
    if (key.empty()) continue;
    bool recorded = t.cell(r, zero_c) != "1";
    if (!recorded && unlinked_c) {
      const std::string& u = t.cell(r, *unlinked_c);
      std::int64_t v = 0;
      if (!u.empty() && std::from_chars(u.data(), u.data() + u.size(), v).ec == std::errc{} && v > 0) recorded = true;
    }
    if (!out.emplace(key, recorded).second)
      throw DomainError("duplicate match key '" + key + "' in table " + side);
  }
  return out;
}

}  // namespace

ContingencyTable2x2 coverage_contingency(const Table& a, const Table& b, const CoverageOptions& options) {
  const auto ka = coverage_by_key(a, options, options.row_label);
  const auto kb = coverage_by_key(b, options, options.column_label);
  ContingencyTable2x2 t;
  t.row_label = options.row_label;
  t.column_label = options.column_label;
  for (const auto& [key, ra] : ka) {
    auto it = kb.find(key);
    if (it == kb.end()) continue;
    ++t.counts[ra ? 0 : 1][it->second ? 0 : 1];
  }
  return t;
}

// ---- Reports ------------------------------------------------------------------------

void write_group_shares_csv(std::ostream& out, std::span<const std::string> keys,
                            const std::vector<GroupShare>& shares, char delimiter) {
  std::vector<std::string> header(keys.begin(), keys.end());
  header.insert(header.end(), {"count", "hits", "share"});
  io::write_row(out, header, delimiter);
  for (const auto& s : shares) {
    std::vector<std::string> row = s.key;
    row.insert(row.end(), {std::to_string(s.count), std::to_string(s.hits), io::format_double(s.share)});
    io::write_row(out, row, delimiter);
  }
}

void write_group_shares_json(std::ostream& out, std::span<const std::string> keys,
                             const std::vector<GroupShare>& shares, int indent) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& s : shares) {
    nlohmann::ordered_json g;
    for (std::size_t k = 0; k < keys.size(); ++k) g[keys[k]] = s.key[k];
    g["count"] = s.count;
    g["hits"] = s.hits;
    g["share"] = s.share;
    j.push_back(std::move(g));
  }
  out << j.dump(indent) << '\n';
}

void write_exclusion_csv(std::ostream& out, const ExclusionReport& report, char delimiter) {
  const std::string header[] = {"criterion", "excluded"};
  io::write_row(out, header, delimiter);
  for (std::size_t k = 0; k < kFilterOrder.size(); ++k) {
    const std::string row[] = {std::string(kFilterOrder[k]), std::to_string(report.excluded[k])};
    io::write_row(out, row, delimiter);
  }
  const std::string kept[] = {"kept", std::to_string(report.kept_rows)};
  io::write_row(out, kept, delimiter);
  const std::string input[] = {"input", std::to_string(report.input_rows)};
  io::write_row(out, input, delimiter);
}

void write_exclusion_json(std::ostream& out, const ExclusionReport& report, int indent) {
  nlohmann::ordered_json j;
  j["input_rows"] = report.input_rows;
  j["kept_rows"] = report.kept_rows;
  auto& ex = j["excluded"] = nlohmann::ordered_json::object();
  for (std::size_t k = 0; k < kFilterOrder.size(); ++k) ex[std::string(kFilterOrder[k])] = report.excluded[k];
  j["attribution"] = "first failing criterion in listed order";
  out << j.dump(indent) << '\n';
}

void write_contingency_csv(std::ostream& out, const ContingencyTable2x2& t, char delimiter) {
  const std::string header[] = {t.row_label + "\\" + t.column_label, "yes", "no", "yes_pct", "no_pct"};
  io::write_row(out, header, delimiter);
  const char* labels[] = {"yes", "no"};
  for (int r = 0; r < 2; ++r) {
    const std::string row[] = {labels[r], std::to_string(t.counts[r][0]), std::to_string(t.counts[r][1]),
                               io::format_double(t.percent(r, 0)), io::format_double(t.percent(r, 1))};
    io::write_row(out, row, delimiter);
  }
}

void write_contingency_json(std::ostream& out, const ContingencyTable2x2& t, int indent) {
  nlohmann::ordered_json j;
  j["rows"] = t.row_label;
  j["columns"] = t.column_label;
  j["total"] = t.total();
  const char* labels[] = {"yes", "no"};
  auto& cells = j["cells"] = nlohmann::ordered_json::array();
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      cells.push_back({{t.row_label, labels[r]},
                       {t.column_label, labels[c]},
                       {"count", t.counts[r][c]},
                       {"percent", t.percent(r, c)}});
  out << j.dump(indent) << '\n';
}

}  // namespace disrupt::audit
