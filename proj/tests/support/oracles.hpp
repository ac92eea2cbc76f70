#pragma once

// Brute-force reference implementations. Each works from a plain edge list
// or plain row-major arrays, written straight from the definitions.

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "fixtures.hpp"

namespace oracle {

using fixtures::RawGraph;

struct Components {
  long n_i = 0, n_j = 0, n_k = 0, bcite = 0;
};

/// I/J/K by enumerating every work w other than the focal work.
inline Components cd_components(const RawGraph& g, int f, int t, int l, bool same_year) {
  std::set<int> refs;
  for (auto [a, b] : g.edges)
    if (a == f) refs.insert(b);
  Components c;
  c.bcite = static_cast<long>(refs.size());
  const int lo = g.years[f] + (same_year ? 0 : 1);
  const int hi = g.years[f] + t;
  for (int w = 0; w < static_cast<int>(g.size()); ++w) {
    if (w == f || g.years[w] < lo || g.years[w] > hi) continue;
    const bool cites_f = g.has_edge(w, f);
    long shared = 0;
    for (int r : refs)
      if (g.has_edge(w, r)) ++shared;
    if (cites_f) {
      if (shared >= l) ++c.n_j;
      else ++c.n_i;
    } else if (shared >= 1) {
      ++c.n_k;
    }
  }
  return c;
}

/// Mean of year(r) - year(f) over (citer in window, reference of citer).
inline std::optional<double> cyg(const RawGraph& g, int f, int t, bool same_year) {
  const int lo = g.years[f] + (same_year ? 0 : 1);
  const int hi = g.years[f] + t;
  double sum = 0.0;
  long n = 0;
  for (auto [c, target] : g.edges) {
    if (target != f || g.years[c] < lo || g.years[c] > hi) continue;
    for (auto [a, r] : g.edges)
      if (a == c) {
        sum += g.years[r] - g.years[f];
        ++n;
      }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

inline std::optional<double> mean_reference_age(const RawGraph& g, int f) {
  double sum = 0.0;
  long n = 0;
  for (auto [a, r] : g.edges)
    if (a == f) {
      sum += g.years[f] - g.years[r];
      ++n;
    }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

/// 100 (rank - 0.5) / n with rank = #smaller + (#equal + 1) / 2.
inline std::vector<std::optional<double>> percentiles(const std::vector<std::optional<double>>& v) {
  long n = 0;
  for (const auto& x : v) n += x.has_value();
  std::vector<std::optional<double>> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i]) continue;
    long less = 0, equal = 0;
    for (const auto& x : v) {
      if (!x) continue;
      if (*x < *v[i]) ++less;
      else if (*x == *v[i]) ++equal;
    }
    const double rank = static_cast<double>(less) + (static_cast<double>(equal) + 1.0) / 2.0;
    out[i] = 100.0 * (rank - 0.5) / static_cast<double>(n);
  }
  return out;
}

// ---- OLS by explicit matrix formulas ------------------------------------------------

using Matrix = std::vector<std::vector<double>>;

inline Matrix transpose_times(const Matrix& a, const Matrix& b) {  // a' b
  const std::size_t n = a.size(), p = a[0].size(), q = b[0].size();
  Matrix out(p, std::vector<double>(q, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t r = 0; r < p; ++r)
      for (std::size_t c = 0; c < q; ++c) out[r][c] += a[i][r] * b[i][c];
  return out;
}

inline Matrix multiply(const Matrix& a, const Matrix& b) {
  Matrix out(a.size(), std::vector<double>(b[0].size(), 0.0));
  for (std::size_t r = 0; r < a.size(); ++r)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t c = 0; c < b[0].size(); ++c) out[r][c] += a[r][k] * b[k][c];
  return out;
}

/// Gauss-Jordan inverse with partial pivoting.
inline Matrix inverse(Matrix a) {
  const std::size_t n = a.size();
  Matrix inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (a[piv][col] == 0.0) throw std::runtime_error("singular matrix");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    const double d = a[col][col];
    for (std::size_t c = 0; c < n; ++c) {
      a[col][c] /= d;
      inv[col][c] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) {
        a[r][c] -= f * a[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

struct OlsResult {
  std::vector<double> beta;
  std::vector<double> se_classical, se_hc0, se_hc1, se_clustered;
  double r2 = 0.0;
};

/// beta = (X'X)^-1 X'y; classical sigma^2 (X'X)^-1; HC0 bread * sum e_i^2 x_i x_i' * bread;
/// HC1 = HC0 * N/(N-k); clustered bread * sum_g s_g s_g' * bread * G/(G-1) (N-1)/(N-k).
inline OlsResult ols(const Matrix& x, const std::vector<double>& y, const std::vector<int>& cluster = {}) {
  const std::size_t n = x.size(), k = x[0].size();
  Matrix ym(n, std::vector<double>(1));
  for (std::size_t i = 0; i < n; ++i) ym[i][0] = y[i];
  const Matrix bread = inverse(transpose_times(x, x));
  const Matrix b = multiply(bread, transpose_times(x, ym));
  OlsResult out;
  for (std::size_t c = 0; c < k; ++c) out.beta.push_back(b[c][0]);
  std::vector<double> e(n);
  double ssr = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double fit = 0.0;
    for (std::size_t c = 0; c < k; ++c) fit += x[i][c] * out.beta[c];
    e[i] = y[i] - fit;
    ssr += e[i] * e[i];
    ybar += y[i];
  }
  ybar /= static_cast<double>(n);
  double tss = 0.0;
  for (double v : y) tss += (v - ybar) * (v - ybar);
  out.r2 = 1.0 - ssr / tss;

  const double dn = static_cast<double>(n), dk = static_cast<double>(k);
  const double s2 = ssr / (dn - dk);
  Matrix meat(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t c = 0; c < k; ++c) meat[r][c] += e[i] * e[i] * x[i][r] * x[i][c];
  const Matrix hc0 = multiply(multiply(bread, meat), bread);
  for (std::size_t c = 0; c < k; ++c) {
    out.se_classical.push_back(std::sqrt(s2 * bread[c][c]));
    out.se_hc0.push_back(std::sqrt(hc0[c][c]));
    out.se_hc1.push_back(std::sqrt(hc0[c][c] * dn / (dn - dk)));
  }
  if (!cluster.empty()) {
    std::map<int, std::vector<double>> scores;
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = scores[cluster[i]];
      s.resize(k, 0.0);
      for (std::size_t c = 0; c < k; ++c) s[c] += x[i][c] * e[i];
    }
    Matrix cm(k, std::vector<double>(k, 0.0));
    for (const auto& [g, s] : scores)
      for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < k; ++c) cm[r][c] += s[r] * s[c];
    const Matrix v = multiply(multiply(bread, cm), bread);
    const double g = static_cast<double>(scores.size());
    const double scale = g / (g - 1.0) * (dn - 1.0) / (dn - dk);
    for (std::size_t c = 0; c < k; ++c) out.se_clustered.push_back(std::sqrt(v[c][c] * scale));
  }
  return out;
}

}  // namespace oracle
