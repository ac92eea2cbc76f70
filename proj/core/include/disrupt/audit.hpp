#pragma once

// Corpus audits: label crosswalks, inclusion filters with per-criterion
// exclusion accounting, grouped prevalence shares, and cross-corpus coverage
// contingency tables.

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "disrupt/graph.hpp"
#include "disrupt/metrics.hpp"

namespace disrupt::audit {

/// Row-major string table; an empty cell is an absent value.
class Table {
 public:
  Table() = default;
  explicit Table(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  std::size_t row_count() const noexcept { return rows_.size(); }
  std::optional<std::size_t> column(std::string_view name) const;
  /// Throws NotFoundError naming the missing column.
  std::size_t require_column(std::string_view name) const;

  const std::vector<std::string>& row(std::size_t r) const { return rows_[r]; }
  const std::string& cell(std::size_t r, std::size_t c) const { return rows_[r][c]; }
  void add_row(std::vector<std::string> row);  // throws DomainError on width mismatch
  /// Appends a column, or overwrites it when the name already exists.
  void set_column(const std::string& name, std::vector<std::string> values);

  friend bool operator==(const Table&, const Table&) = default;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

Table read_table(std::istream& in, const std::string& source, char delimiter = ',');
void write_table(std::ostream& out, const Table& table, char delimiter = ',');

/// Metrics joined with node metadata: id, year, field, subfield, doctype,
/// language, author_count, unlinked_ref_count, then the metrics columns.
Table metrics_with_metadata(const MetricsTable& metrics, const CitationGraph& graph);

// ---- Crosswalks -----------------------------------------------------------------

enum class UnmappedPolicy { keep_as_other, drop, error };

struct Crosswalk {
  std::map<std::string, std::string> mapping;  // raw label -> meta category
  UnmappedPolicy unmapped = UnmappedPolicy::keep_as_other;
  std::string other_label = "All others";

  /// Meta categories in the mapping.
  std::set<std::string> categories() const;
  /// Mapping for one label; meta categories map to themselves.
  std::optional<std::string> lookup(std::string_view raw) const;
};

/// Two columns with header raw_label, meta_category. Throws ParseError on a
/// duplicate raw label or an empty category.
Crosswalk read_crosswalk(std::istream& in, const std::string& source, char delimiter = ',');

struct CrosswalkResult {
  Table table;
  std::size_t mapped = 0;
  std::size_t unmapped = 0;  // labels sent to other_label, dropped, or rejected
  std::size_t absent = 0;    // empty cells, left empty
  std::map<std::string, std::size_t> unmapped_labels;
};

/// Adds `<column>_meta` (or output_column) with each label mapped. Throws
/// NotFoundError for a missing column and DomainError for an unmapped label
/// under the error policy.
CrosswalkResult apply_crosswalk(const Table& table, const Crosswalk& crosswalk, std::string_view column,
                                std::string output_column = {});

// ---- Filters --------------------------------------------------------------------

struct FilterCriteria {
  std::set<std::string> include_doctypes = {"Research articles"};  // empty = unrestricted
  std::string doctype_column = "doctype_meta";
  std::set<std::string> include_fields;  // empty = unrestricted
  std::string field_column = "field_meta";
  std::set<std::string> exclude_languages;
  std::string language_column = "language";
  std::optional<Year> year_min;
  std::optional<Year> year_max;
  bool exclude_zero_bcite = false;
  bool exclude_cd_equal_one = false;
};

/// Criteria in the order exclusions are attributed.
inline constexpr std::array<std::string_view, 6> kFilterOrder = {"doctype", "field", "language",
                                                                 "year", "zero_bcite", "cd_equals_one"};

struct ExclusionReport {
  std::size_t input_rows = 0;
  std::size_t kept_rows = 0;
  /// Rows dropped by each criterion (first failing criterion wins), in kFilterOrder.
  std::array<std::size_t, kFilterOrder.size()> excluded{};

  std::size_t excluded_total() const;
};

struct FilterResult {
  Table kept;
  ExclusionReport report;
};

/// Conjunctive filter. Throws NotFoundError when an active criterion's column is missing.
FilterResult filter_corpus(const Table& table, const FilterCriteria& criteria);

// ---- Shares and contingency --------------------------------------------------------

struct GroupShare {
  std::vector<std::string> key;
  std::size_t count = 0;
  std::size_t hits = 0;
  double share = 0.0;
};

/// Share of rows with predicate column == "1", per distinct key tuple,
/// ascending by key. Groups with no rows do not appear.
std::vector<GroupShare> group_share(const Table& table, std::span<const std::string> group_keys,
                                    std::string_view predicate_column);

struct ContingencyTable2x2 {
  std::string row_label;
  std::string column_label;
  /// counts[row][col], index 0 = yes (references recorded), 1 = no.
  std::array<std::array<std::uint64_t, 2>, 2> counts{};

  std::uint64_t total() const;
  double percent(int row, int col) const;  // of total; 0 for an empty table
  ContingencyTable2x2 transposed() const;
  friend bool operator==(const ContingencyTable2x2&, const ContingencyTable2x2&) = default;
};

struct CoverageOptions {
  std::string match_key = "id";
  /// Treat unlinked_ref_count > 0 as recorded references.
  bool count_unlinked = true;
  std::string row_label = "A";
  std::string column_label = "B";
};

/// Inner join on match_key; each side classified as having recorded
/// references or not. Rows with an empty key do not join. Throws DomainError
/// on a duplicate key.
ContingencyTable2x2 coverage_contingency(const Table& a, const Table& b, const CoverageOptions& options);

// ---- Reports ------------------------------------------------------------------------

void write_group_shares_csv(std::ostream& out, std::span<const std::string> keys,
                            const std::vector<GroupShare>& shares, char delimiter = ',');
void write_group_shares_json(std::ostream& out, std::span<const std::string> keys,
                             const std::vector<GroupShare>& shares, int indent = 2);
void write_exclusion_csv(std::ostream& out, const ExclusionReport& report, char delimiter = ',');
void write_exclusion_json(std::ostream& out, const ExclusionReport& report, int indent = 2);
void write_contingency_csv(std::ostream& out, const ContingencyTable2x2& table, char delimiter = ',');
void write_contingency_json(std::ostream& out, const ContingencyTable2x2& table, int indent = 2);

}  // namespace disrupt::audit
