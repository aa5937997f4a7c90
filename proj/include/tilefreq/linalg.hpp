#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "tilefreq/exactnum.hpp"

namespace tilefreq {

using IntMatrix = std::vector<std::vector<Integer>>;

inline std::vector<std::vector<Rational>> to_rational(const IntMatrix& a) {
  std::vector<std::vector<Rational>> r;
  for (const auto& row : a) r.emplace_back(row.begin(), row.end());
  return r;
}

inline IntMatrix mat_mul(const IntMatrix& a, const IntMatrix& b) {
  const std::size_t n = a.size(), m = b.empty() ? 0 : b[0].size();
  IntMatrix r(n, std::vector<Integer>(m, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < b.size(); ++l) {
      if (sgn(a[i][l]) == 0) continue;
      for (std::size_t j = 0; j < m; ++j) r[i][j] += a[i][l] * b[l][j];
    }
  return r;
}

inline IntMatrix mat_pow(const IntMatrix& a, int k) {
  IntMatrix r(a.size(), std::vector<Integer>(a.size(), 0));
  for (std::size_t i = 0; i < a.size(); ++i) r[i][i] = 1;
  for (int s = 0; s < k; ++s) r = mat_mul(r, a);
  return r;
}

/// Row vector times matrix.
inline std::vector<Integer> vec_mat(const std::vector<Integer>& v, const IntMatrix& a) {
  std::vector<Integer> r(a.empty() ? 0 : a[0].size(), 0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (sgn(v[i]) == 0) continue;
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += v[i] * a[i][j];
  }
  return r;
}

/// Smallest k <= (n-1)^2 + 1 with A^k > 0 (Wielandt's bound), if any.
inline std::optional<int> primitivity_index(const IntMatrix& a) {
  const std::size_t n = a.size();
  if (n == 0) return std::nullopt;
  std::vector<std::vector<char>> pat(n, std::vector<char>(n)), cur;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) pat[i][j] = sgn(a[i][j]) > 0;
  cur = pat;
  const int bound = static_cast<int>((n - 1) * (n - 1) + 1);
  for (int k = 1; k <= bound; ++k) {
    bool positive = true;
    for (const auto& row : cur)
      for (char c : row) positive = positive && c;
    if (positive) return k;
    std::vector<std::vector<char>> next(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < n; ++l) {
        if (!cur[i][l]) continue;
        for (std::size_t j = 0; j < n; ++j) next[i][j] |= pat[l][j];
      }
    if (next == cur && k > 1) return std::nullopt;
    cur = std::move(next);
  }
  return std::nullopt;
}

inline bool is_primitive(const IntMatrix& a) { return primitivity_index(a).has_value(); }

/// Basis of the null space of a matrix over Q(lambda), by exact Gaussian
/// elimination.
inline std::vector<std::vector<FieldElem>> null_space(std::vector<std::vector<FieldElem>> m) {
  const std::size_t rows = m.size(), cols = rows ? m[0].size() : 0;
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && m[p][c].is_zero()) ++p;
    if (p == rows) continue;
    std::swap(m[p], m[r]);
    FieldElem inv = m[r][c].inverse();
    for (std::size_t j = c; j < cols; ++j) m[r][j] = m[r][j] * inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || m[i][c].is_zero()) continue;
      FieldElem f = m[i][c];
      for (std::size_t j = c; j < cols; ++j)
        if (!m[r][j].is_zero()) m[i][j] = m[i][j] - f * m[r][j];
    }
    pivots.push_back(c);
    ++r;
  }
  std::vector<std::vector<FieldElem>> basis;
  std::vector<char> is_pivot(cols, 0);
  for (auto c : pivots) is_pivot[c] = 1;
  for (std::size_t free = 0; free < cols; ++free) {
    if (is_pivot[free]) continue;
    std::vector<FieldElem> v(cols);
    v[free] = FieldElem(1);
    for (std::size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = -m[i][free];
    basis.push_back(std::move(v));
  }
  return basis;
}

/// Exact Perron vector of a primitive integer matrix for the eigenvalue mu
/// (right: A v = mu v; left: v A = mu v). The eigenspace of a primitive
/// matrix at its Perron root is one-dimensional; the returned vector is
/// scaled to be positive.
inline std::vector<FieldElem> perron_vector(const IntMatrix& a, const FieldElem& mu, bool left) {
  const std::size_t n = a.size();
  std::vector<std::vector<FieldElem>> m(n, std::vector<FieldElem>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[i][j] = FieldElem(Rational(left ? a[j][i] : a[i][j]));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = m[i][i] - mu;
  auto basis = null_space(std::move(m));
  if (basis.size() != 1)
    throw Error(ErrorKind::EigenvalueMismatch,
                "eigenspace at " + mu.pretty() + " has dimension " + std::to_string(basis.size()));
  auto v = std::move(basis.front());
  int s = 0;
  for (const auto& x : v)
    if (!x.is_zero()) {
      s = x.sign();
      break;
    }
  if (s < 0)
    for (auto& x : v) x = -x;
  return v;
}

}  // namespace tilefreq
