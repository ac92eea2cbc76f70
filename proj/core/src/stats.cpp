#include "disrupt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "disrupt/error.hpp"
#include "disrupt/table_io.hpp"

namespace disrupt::stats {

const char* se_kind_name(SeKind k) {
  switch (k) {
    case SeKind::classical: return "classical";
    case SeKind::robust_hc0: return "robust_hc0";
    case SeKind::robust_hc1: return "robust_hc1";
    case SeKind::clustered: return "clustered";
  }
  return "?";
}

SeKind parse_se_kind(std::string_view name) {
  for (SeKind k : {SeKind::classical, SeKind::robust_hc0, SeKind::robust_hc1, SeKind::clustered})
    if (name == se_kind_name(k)) return k;
  throw DomainError("unknown standard-error kind '" + std::string(name) + "'");
}

namespace {
constexpr Control kAllControls[] = {Control::zero_bcite_dummy,       Control::n_cited,
                                    Control::n_new_works_field_year, Control::mean_cited_field_year,
                                    Control::mean_authors_field_year, Control::unlinked_refs,
                                    Control::cd_random};
}

const char* control_name(Control c) {
  switch (c) {
    case Control::zero_bcite_dummy: return "zero_bcite_dummy";
    case Control::n_cited: return "n_cited";
    case Control::n_new_works_field_year: return "n_new_works_field_year";
    case Control::mean_cited_field_year: return "mean_cited_field_year";
    case Control::mean_authors_field_year: return "mean_authors_field_year";
    case Control::unlinked_refs: return "unlinked_refs";
    case Control::cd_random: return "cd_random";
  }
  return "?";
}

Control parse_control(std::string_view name) {
  for (Control c : kAllControls)
    if (name == control_name(c)) return c;
  throw DomainError("unknown control '" + std::string(name) + "'");
}

void DesignSpec::check() const {
  if ((se_kind == SeKind::clustered) != cluster_key.has_value())
    throw DomainError("cluster_key is required exactly when se_kind is clustered");
  if (fixed_effects && *fixed_effects != "field" && *fixed_effects != "subfield")
    throw DomainError("fixed effects key must be 'field' or 'subfield'");
  if (cluster_key && *cluster_key != "id" && *cluster_key != "year" && *cluster_key != "field" &&
      *cluster_key != "subfield")
    throw DomainError("cluster key must be one of id, year, field, subfield");
}

std::optional<double> response_value(const MetricsRecord& r, std::string_view response) {
  if (response == "cd") return r.cd;
  if (response == "cd_nok") return r.cd_nok;
  if (response == "is_d") return r.is_d ? std::optional<double>(*r.is_d ? 1.0 : 0.0) : std::nullopt;
  if (response == "cyg") return r.cyg;
  if (response == "mean_ref_age") return r.mean_ref_age;
  if (response == "n_i") return static_cast<double>(r.components.n_i);
  if (response == "n_j") return static_cast<double>(r.components.n_j);
  if (response == "n_k") return static_cast<double>(r.components.n_k);
  if (response == "bcite_count") return static_cast<double>(r.components.bcite_count);
  throw DomainError("unknown response '" + std::string(response) + "'");
}

// ---- Design -----------------------------------------------------------------

namespace {

struct FieldYearStats {
  std::size_t works = 0;
  double cited_sum = 0.0;
  double authors_sum = 0.0;
  std::size_t authors_known = 0;
};

std::optional<std::string> group_label(const WorkNode& node, std::string_view key) {
  if (key == "field") return node.field;
  if (key == "subfield") return node.subfield;
  if (key == "year") return std::to_string(node.year);
  if (key == "id") return node.id;
  return std::nullopt;
}

struct Row {
  std::string id;
  Year year;
  double y;
  std::vector<double> controls;
  std::string fe;
  std::string cluster;
};

}  // namespace

Design build_design(const MetricsTable& metrics, const CitationGraph& graph, const DesignSpec& spec,
                    const ExternalColumn* cd_random) {
  spec.check();
  const auto& controls = spec.controls;
  const bool wants_field_year = std::any_of(controls.begin(), controls.end(), [](Control c) {
    return c == Control::n_new_works_field_year || c == Control::mean_cited_field_year ||
           c == Control::mean_authors_field_year;
  });

  std::map<std::pair<std::string, Year>, FieldYearStats> field_year;
  bool any_field = false, any_authors = false;
  for (NodeIndex i = 0; i < graph.node_count(); ++i) {
    const WorkNode& n = graph.node(i);
    if (n.author_count) any_authors = true;
    if (!n.field) continue;
    any_field = true;
    if (!wants_field_year) continue;
    auto& s = field_year[{*n.field, n.year}];
    ++s.works;
    s.cited_sum += static_cast<double>(graph.out_degree(i));
    if (n.author_count) {
      s.authors_sum += static_cast<double>(*n.author_count);
      ++s.authors_known;
    }
  }
  for (Control c : controls) {
    if ((c == Control::n_new_works_field_year || c == Control::mean_cited_field_year ||
         c == Control::mean_authors_field_year) &&
        !any_field)
      throw DomainError(std::string("control ") + control_name(c) + " requires field metadata");
    if (c == Control::mean_authors_field_year && !any_authors)
      throw DomainError("control mean_authors_field_year requires author_count metadata");
    if (c == Control::cd_random && cd_random == nullptr)
      throw DomainError("control cd_random requires rewired-ensemble CD values");
  }

  Design d;
  std::vector<Row> rows;
  rows.reserve(metrics.size());
  for (const MetricsRecord& rec : metrics) {
    const NodeIndex idx = graph.index_of(rec.id);
    const WorkNode& node = graph.node(idx);
    Row row;
    row.id = rec.id;
    row.year = rec.year;
    auto y = response_value(rec, spec.response);
    if (!y) {
      ++d.dropped_rows;
      continue;
    }
    row.y = *y;
    bool ok = true;
    const FieldYearStats* fy = nullptr;
    if (wants_field_year && node.field) {
      auto it = field_year.find({*node.field, node.year});
      if (it != field_year.end()) fy = &it->second;
    }
    for (Control c : controls) {
      std::optional<double> v;
      switch (c) {
        case Control::zero_bcite_dummy: v = rec.zero_bcite ? 1.0 : 0.0; break;
        case Control::n_cited: v = static_cast<double>(rec.components.bcite_count); break;
        case Control::unlinked_refs: v = static_cast<double>(node.unlinked_ref_count); break;
        case Control::n_new_works_field_year:
          if (fy) v = static_cast<double>(fy->works);
          break;
        case Control::mean_cited_field_year:
          if (fy) v = fy->cited_sum / static_cast<double>(fy->works);
          break;
        case Control::mean_authors_field_year:
          if (fy && fy->authors_known > 0) v = fy->authors_sum / static_cast<double>(fy->authors_known);
          break;
        case Control::cd_random:
          if (auto it = cd_random->find(rec.id); it != cd_random->end()) v = it->second;
          break;
      }
      if (!v) {
        ok = false;
        break;
      }
      row.controls.push_back(*v);
    }
    if (ok && spec.fixed_effects) {
      auto label = group_label(node, *spec.fixed_effects);
      if (label) row.fe = *label; else ok = false;
    }
    if (ok && spec.cluster_key) {
      auto label = group_label(node, *spec.cluster_key);
      if (label) row.cluster = *label; else ok = false;
    }
    if (!ok) {
      ++d.dropped_rows;
      continue;
    }
    rows.push_back(std::move(row));
  }

  std::set<Year> year_set;
  for (const Row& r : rows) year_set.insert(r.year);
  d.year_levels.assign(year_set.begin(), year_set.end());
  d.base_year = spec.base_year;
  if (spec.base_year && !year_set.contains(*spec.base_year))
    throw NotFoundError("base year " + std::to_string(*spec.base_year) + " has no rows in the design");

  std::map<std::string, std::int64_t> fe_ids;
  if (spec.fixed_effects) {
    for (const Row& r : rows) fe_ids.emplace(r.fe, 0);
    std::int64_t next = 0;
    for (auto& [label, id] : fe_ids) id = next++;
  }
  const bool absorb = spec.fixed_effects && fe_ids.size() > spec.within_threshold;

  // Columns: intercept, year dummies, controls, fixed-effect dummies.
  if (!absorb) d.names.push_back("const");
  std::vector<Year> dummy_years;
  if (spec.base_year)
    for (Year y : d.year_levels)
      if (y != *spec.base_year) {
        dummy_years.push_back(y);
        d.names.push_back("year=" + std::to_string(y));
      }
  for (Control c : controls) d.names.push_back(control_name(c));
  std::vector<std::string> fe_levels;
  if (spec.fixed_effects && !absorb) {
    for (const auto& [label, id] : fe_ids)
      if (id > 0) {
        fe_levels.push_back(label);
        d.names.push_back(*spec.fixed_effects + "=" + label);
      }
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  d.x = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(d.names.size()));
  d.y.resize(n);
  std::map<std::string, std::int64_t> cluster_ids;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Row& r = rows[static_cast<std::size_t>(i)];
    Eigen::Index col = 0;
    if (!absorb) d.x(i, col++) = 1.0;
    for (Year y : dummy_years) d.x(i, col++) = r.year == y ? 1.0 : 0.0;
    for (double v : r.controls) d.x(i, col++) = v;
    if (!fe_levels.empty()) {
      const auto id = fe_ids.at(r.fe);
      if (id > 0) d.x(i, col + id - 1) = 1.0;
    }
    d.y(i) = r.y;
    d.row_year.push_back(r.year);
    d.row_id.push_back(r.id);
    if (absorb) d.absorb.push_back(fe_ids.at(r.fe));
    if (spec.cluster_key) {
      auto [it, inserted] = cluster_ids.emplace(r.cluster, static_cast<std::int64_t>(cluster_ids.size()));
      d.cluster.push_back(it->second);
    }
  }
  return d;
}

// ---- OLS --------------------------------------------------------------------

double two_sided_p(double t, std::size_t df) {
  if (!std::isfinite(t)) return std::isnan(t) ? std::nan("") : 0.0;
  if (df == 0) return std::erfc(std::abs(t) / std::sqrt(2.0));
  boost::math::students_t dist(static_cast<double>(df));
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

std::optional<std::size_t> RegressionFit::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  return std::nullopt;
}

double RegressionFit::coef(std::string_view name) const {
  if (auto i = index_of(name)) return beta(static_cast<Eigen::Index>(*i));
  throw NotFoundError("coefficient '" + std::string(name) + "' not in fit");
}

namespace {

Eigen::MatrixXd demean_by_group(const Eigen::MatrixXd& m, const std::vector<std::int64_t>& group,
                                std::size_t groups) {
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(groups), m.cols());
  std::vector<double> counts(groups, 0.0);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    sums.row(group[static_cast<std::size_t>(i)]) += m.row(i);
    counts[static_cast<std::size_t>(group[static_cast<std::size_t>(i)])] += 1.0;
  }
  for (std::size_t g = 0; g < groups; ++g)
    if (counts[g] > 0) sums.row(static_cast<Eigen::Index>(g)) /= counts[g];
  Eigen::MatrixXd out = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.row(i) -= sums.row(group[static_cast<std::size_t>(i)]);
  return out;
}

/// Greedy left-to-right rank selection by Gram-Schmidt with reorthogonalization.
std::vector<Eigen::Index> independent_columns(const Eigen::MatrixXd& x) {
  constexpr double kRelTol = 1e-9;
  std::vector<Eigen::Index> kept;
  std::vector<Eigen::VectorXd> basis;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    Eigen::VectorXd v = x.col(j);
    const double norm0 = v.norm();
    if (norm0 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) v -= q.dot(v) * q;
    const double norm = v.norm();
    if (norm <= kRelTol * norm0) continue;
    basis.push_back(v / norm);
    kept.push_back(j);
  }
  return kept;
}

}  // namespace

RegressionFit ols_fit(const Design& design, SeKind se_kind) {
  const auto n = static_cast<Eigen::Index>(design.rows());
  if (design.y.size() != n) throw DomainError("design and response lengths differ");
  if (se_kind == SeKind::clustered && design.cluster.size() != static_cast<std::size_t>(n))
    throw DomainError("clustered standard errors need a cluster id per row");

  RegressionFit fit;
  fit.se_kind = se_kind;
  fit.dropped_rows = design.dropped_rows;
  fit.n = static_cast<std::size_t>(n);
  fit.y_mean = n > 0 ? design.y.mean() : 0.0;

  const bool absorbing = !design.absorb.empty();
  Eigen::MatrixXd x = design.x;
  Eigen::VectorXd y = design.y;
  if (absorbing) {
    fit.absorbed_groups = static_cast<std::size_t>(*std::max_element(design.absorb.begin(), design.absorb.end()) + 1);
    x = demean_by_group(x, design.absorb, fit.absorbed_groups);
    y = demean_by_group(y, design.absorb, fit.absorbed_groups);
  }

  const auto kept = independent_columns(x);
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    if (std::find(kept.begin(), kept.end(), j) == kept.end())
      fit.dropped_columns.push_back(design.names[static_cast<std::size_t>(j)]);
  if (kept.empty()) throw DomainError("no estimable columns in design");

  const auto k = static_cast<Eigen::Index>(kept.size());
  Eigen::MatrixXd xk(n, k);
  Eigen::VectorXd mean_k(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    xk.col(c) = x.col(kept[static_cast<std::size_t>(c)]);
    mean_k(c) = n > 0 ? design.x.col(kept[static_cast<std::size_t>(c)]).mean() : 0.0;
    fit.names.push_back(design.names[static_cast<std::size_t>(kept[static_cast<std::size_t>(c)])]);
  }
  fit.x_mean = mean_k;
  fit.k = static_cast<std::size_t>(k) + fit.absorbed_groups;
  if (fit.n < fit.k)
    throw DomainError("too few rows: N = " + std::to_string(fit.n) + ", parameters = " + std::to_string(fit.k));
  fit.df_resid = fit.n - fit.k;

  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(xk);
  fit.beta = qr.solve(y);
  fit.residuals = y - xk * fit.beta;
  const Eigen::MatrixXd r = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd bread = r_inv * r_inv.transpose();  // (X'X)^-1

  const double ssr = fit.residuals.squaredNorm();
  const double dn = static_cast<double>(fit.n);
  const double dk = static_cast<double>(fit.k);
  // N == k interpolates the data: residuals vanish and the covariance is not estimable.
  const bool exact = fit.df_resid == 0;
  fit.sigma = exact ? 0.0 : std::sqrt(ssr / static_cast<double>(fit.df_resid));

  if (exact) {
    fit.cov = Eigen::MatrixXd::Constant(k, k, std::numeric_limits<double>::quiet_NaN());
  } else switch (se_kind) {
    case SeKind::classical: fit.cov = fit.sigma * fit.sigma * bread; break;
    case SeKind::robust_hc0:
    case SeKind::robust_hc1: {
      const Eigen::MatrixXd xe = xk.array().colwise() * fit.residuals.array();
      const Eigen::MatrixXd meat = xe.transpose() * xe;
      fit.cov = bread * meat * bread;
      if (se_kind == SeKind::robust_hc1) fit.cov *= dn / (dn - dk);
      break;
    }
    case SeKind::clustered: {
      const auto groups =
          static_cast<Eigen::Index>(*std::max_element(design.cluster.begin(), design.cluster.end()) + 1);
      Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(groups, k);
      for (Eigen::Index i = 0; i < n; ++i)
        scores.row(design.cluster[static_cast<std::size_t>(i)]) += xk.row(i) * fit.residuals(i);
      fit.clusters = static_cast<std::size_t>(groups);
      if (fit.clusters < 2) throw DomainError("clustered standard errors need at least two clusters");
      const double g = static_cast<double>(groups);
      fit.cov = bread * (scores.transpose() * scores) * bread;
      fit.cov *= (g / (g - 1.0)) * ((dn - 1.0) / (dn - dk));
      break;
    }
  }
  fit.cov = 0.5 * (fit.cov + fit.cov.transpose());

  fit.se = exact ? fit.cov.diagonal() : Eigen::VectorXd(fit.cov.diagonal().cwiseMax(0.0).cwiseSqrt());
  fit.t = fit.beta.cwiseQuotient(fit.se);
  fit.p.resize(k);
  const std::size_t p_df = se_kind == SeKind::clustered ? fit.clusters - 1 : fit.df_resid;
  for (Eigen::Index c = 0; c < k; ++c) fit.p(c) = two_sided_p(fit.t(c), p_df);
  fit.ci_low = fit.beta - kCiMultiplier * fit.se;
  fit.ci_high = fit.beta + kCiMultiplier * fit.se;

  const bool centered = absorbing || std::find(fit.names.begin(), fit.names.end(), "const") != fit.names.end();
  const double tss = centered ? (design.y.array() - fit.y_mean).square().sum() : design.y.squaredNorm();
  fit.r2 = tss > 0.0 ? 1.0 - ssr / tss : (ssr == 0.0 ? 1.0 : 0.0);
  return fit;
}

// ---- Predictions and trends -------------------------------------------------

PredictionCurve predict_years(const RegressionFit& fit, const Design& design, std::span<const Year> years) {
  std::vector<Year> targets(years.begin(), years.end());
  if (targets.empty()) targets = design.year_levels;
  for (Year y : targets)
    if (!std::binary_search(design.year_levels.begin(), design.year_levels.end(), y))
      throw NotFoundError("year " + std::to_string(y) + " is not a level of the fitted design");

  const bool absorbed = fit.absorbed_groups > 0;
  PredictionCurve curve;
  curve.profile = absorbed ? "controls at sample means; absorbed fixed effects at their sample-weighted average "
                             "(uncertainty of that average approximated by sigma^2/N)"
                           : "controls at sample means; fixed-effect dummies at sample shares (group-weighted average)";
  const auto k = fit.beta.size();
  for (Year year : targets) {
    Eigen::VectorXd g = fit.x_mean;
    for (Eigen::Index c = 0; c < k; ++c) {
      const auto& name = fit.names[static_cast<std::size_t>(c)];
      if (name.rfind("year=", 0) == 0) g(c) = name == "year=" + std::to_string(year) ? 1.0 : 0.0;
    }
    PredictionPoint pt;
    pt.year = year;
    double var = 0.0;
    if (absorbed) {
      const Eigen::VectorXd d = g - fit.x_mean;
      pt.predicted = fit.y_mean + d.dot(fit.beta);
      var = d.dot(fit.cov * d) + fit.sigma * fit.sigma / static_cast<double>(fit.n);
    } else {
      pt.predicted = g.dot(fit.beta);
      var = g.dot(fit.cov * g);
    }
    const double se = std::sqrt(std::max(var, 0.0));
    pt.ci_low = pt.predicted - kCiMultiplier * se;
    pt.ci_high = pt.predicted + kCiMultiplier * se;
    curve.points.push_back(pt);
  }
  return curve;
}

RegressionFit trend_slope(std::span<const std::pair<Year, double>> series, SeKind se_kind) {
  std::set<Year> distinct;
  for (const auto& [y, v] : series) distinct.insert(y);
  if (distinct.size() < 3) throw DomainError("trend slope needs at least three distinct years");
  if (se_kind == SeKind::clustered) throw DomainError("trend slope does not support clustered errors");
  Design d;
  d.names = {"const", "year"};
  d.x.resize(static_cast<Eigen::Index>(series.size()), 2);
  d.y.resize(static_cast<Eigen::Index>(series.size()));
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    d.x(r, 0) = 1.0;
    d.x(r, 1) = static_cast<double>(series[i].first);
    d.y(r) = series[i].second;
    d.row_year.push_back(series[i].first);
  }
  d.year_levels.assign(distinct.begin(), distinct.end());
  RegressionFit fit = ols_fit(d, se_kind);
  if (!fit.index_of("year")) throw DomainError("degenerate year variance");
  return fit;
}

// ---- Serialization ------------------------------------------------------------

void write_fit_json(std::ostream& out, const RegressionFit& fit, int indent) {
  nlohmann::ordered_json j;
  auto& coefs = j["coefficients"] = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < fit.names.size(); ++c) {
    const auto i = static_cast<Eigen::Index>(c);
    coefs.push_back({{"name", fit.names[c]},
                     {"b", fit.beta(i)},
                     {"se", fit.se(i)},
                     {"t", fit.t(i)},
                     {"p", fit.p(i)},
                     {"ci_low", fit.ci_low(i)},
                     {"ci_high", fit.ci_high(i)}});
  }
  j["se_kind"] = se_kind_name(fit.se_kind);
  j["ci_multiplier"] = kCiMultiplier;
  j["N"] = fit.n;
  j["R2"] = fit.r2;
  j["df_resid"] = fit.df_resid;
  j["parameters"] = fit.k;
  j["absorbed_groups"] = fit.absorbed_groups;
  j["clusters"] = fit.clusters;
  j["dropped_rows"] = fit.dropped_rows;
  j["dropped_columns"] = fit.dropped_columns.size();
  j["dropped_column_names"] = fit.dropped_columns;
  out << j.dump(indent) << '\n';
}

void write_prediction_csv(std::ostream& out, const PredictionCurve& curve, char delimiter) {
  const std::string header[] = {"year", "predicted", "ci_low", "ci_high"};
  io::write_row(out, header, delimiter);
  for (const auto& p : curve.points) {
    const std::string row[] = {std::to_string(p.year), io::format_double(p.predicted), io::format_double(p.ci_low),
                               io::format_double(p.ci_high)};
    io::write_row(out, row, delimiter);
  }
}

}  // namespace disrupt::stats
