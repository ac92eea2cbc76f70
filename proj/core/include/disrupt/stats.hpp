#pragma once

// Ordinary least squares with year dummies, work-level and field x year
// controls, fixed effects, and classical / heteroskedasticity-robust /
// cluster-robust covariance; predicted year profiles and percentile trend
// slopes.

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "disrupt/graph.hpp"
#include "disrupt/metrics.hpp"

namespace disrupt::stats {

enum class SeKind { classical, robust_hc0, robust_hc1, clustered };
const char* se_kind_name(SeKind k);
SeKind parse_se_kind(std::string_view name);

enum class Control {
  zero_bcite_dummy,
  n_cited,
  n_new_works_field_year,
  mean_cited_field_year,
  mean_authors_field_year,
  unlinked_refs,
  cd_random,
};
const char* control_name(Control c);
Control parse_control(std::string_view name);

struct DesignSpec {
  std::string response = "cd";
  /// Reference category for year dummies; no year dummies when absent.
  std::optional<Year> base_year;
  std::vector<Control> controls;
  /// "field" or "subfield".
  std::optional<std::string> fixed_effects;
  /// "id", "year", "field" or "subfield"; required iff se_kind is clustered.
  std::optional<std::string> cluster_key;
  SeKind se_kind = SeKind::robust_hc1;
  /// Fixed effects with more groups than this are absorbed by demeaning.
  std::size_t within_threshold = 1000;

  void check() const;  // throws DomainError
};

/// Model matrix and response. Column 0 is the intercept unless fixed effects
/// are absorbed, in which case `absorb` carries the group of each row.
struct Design {
  std::vector<std::string> names;
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<std::int64_t> absorb;   // empty unless fixed effects are absorbed
  std::vector<std::int64_t> cluster;  // empty unless clustered
  std::vector<Year> row_year;
  std::vector<std::string> row_id;
  std::optional<Year> base_year;
  std::vector<Year> year_levels;  // levels present after row deletion, ascending
  std::size_t dropped_rows = 0;

  std::size_t rows() const { return static_cast<std::size_t>(x.rows()); }
};

/// Per-work value of a control that the design cannot derive from the graph
/// (cd_random: mean CD of the work across rewired replicates).
using ExternalColumn = std::unordered_map<std::string, double>;

/// Builds the design. Field x year aggregates are computed over every work
/// in the graph. Rows with an undefined response or required value are
/// dropped and counted. Throws DomainError when a requested control has no
/// backing metadata and NotFoundError when the base year has no rows.
Design build_design(const MetricsTable& metrics, const CitationGraph& graph, const DesignSpec& spec,
                    const ExternalColumn* cd_random = nullptr);

/// Value of a named response on one record: cd, cd_nok, is_d, cyg,
/// mean_ref_age, n_i, n_j, n_k, bcite_count.
std::optional<double> response_value(const MetricsRecord& record, std::string_view response);

struct RegressionFit {
  std::vector<std::string> names;  // kept columns
  Eigen::VectorXd beta;
  Eigen::MatrixXd cov;
  Eigen::VectorXd se;
  Eigen::VectorXd t;
  Eigen::VectorXd p;
  Eigen::VectorXd ci_low;  // beta - 1.96 se
  Eigen::VectorXd ci_high;
  SeKind se_kind = SeKind::classical;
  double r2 = 0.0;
  double sigma = 0.0;  // residual standard error
  std::size_t n = 0;
  std::size_t k = 0;  // parameters incl. absorbed group effects
  std::size_t df_resid = 0;
  std::size_t clusters = 0;
  std::size_t absorbed_groups = 0;
  std::size_t dropped_rows = 0;
  std::vector<std::string> dropped_columns;
  Eigen::VectorXd x_mean;  // sample means of the kept columns (undemeaned)
  double y_mean = 0.0;
  Eigen::VectorXd residuals;

  std::optional<std::size_t> index_of(std::string_view name) const;
  double coef(std::string_view name) const;  // throws NotFoundError
};

inline constexpr double kCiMultiplier = 1.96;

/// Least squares via Householder QR. Collinear columns are dropped in
/// reverse column order (a column is kept only if it adds rank to the
/// columns before it). Throws DomainError when N < k or nothing is left;
/// with N == k the fit is exact and the covariance is NaN.
RegressionFit ols_fit(const Design& design, SeKind se_kind);

struct PredictionPoint {
  Year year = 0;
  double predicted = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct PredictionCurve {
  std::vector<PredictionPoint> points;
  std::string profile;  // how non-year covariates were held
};

/// Predicted response per year level: controls at sample means, fixed
/// effects averaged with group weights, delta-method 95% CI. Throws
/// NotFoundError for a requested year outside the fit.
PredictionCurve predict_years(const RegressionFit& fit, const Design& design,
                              std::span<const Year> years = {});

/// OLS of value on calendar year. Throws DomainError with fewer than three
/// distinct years.
RegressionFit trend_slope(std::span<const std::pair<Year, double>> series, SeKind se_kind = SeKind::robust_hc1);

/// Two-sided p-value of a t statistic; normal when df is 0.
double two_sided_p(double t, std::size_t df);

void write_fit_json(std::ostream& out, const RegressionFit& fit, int indent = 2);
void write_prediction_csv(std::ostream& out, const PredictionCurve& curve, char delimiter = ',');

}  // namespace disrupt::stats
