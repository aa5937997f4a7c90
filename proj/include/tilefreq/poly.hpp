#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <vector>

#include "tilefreq/rational.hpp"

namespace tilefreq {

/// Dense univariate polynomial over Q, lowest degree first, no trailing zeros.
/// The zero polynomial is the empty vector.
using QPoly = std::vector<Rational>;

namespace poly {

inline QPoly& trim(QPoly& p) {
  while (!p.empty() && sgn(p.back()) == 0) p.pop_back();
  return p;
}

inline int degree(const QPoly& p) { return static_cast<int>(p.size()) - 1; }

inline QPoly from_integers(const std::vector<Integer>& c) {
  QPoly p(c.begin(), c.end());
  return trim(p);
}

inline QPoly add(const QPoly& a, const QPoly& b) {
  QPoly r(std::max(a.size(), b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
  return trim(r);
}

inline QPoly sub(const QPoly& a, const QPoly& b) {
  QPoly r(std::max(a.size(), b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
  return trim(r);
}

inline QPoly mul(const QPoly& a, const QPoly& b) {
  if (a.empty() || b.empty()) return {};
  QPoly r(a.size() + b.size() - 1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (sgn(a[i]) == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  }
  return trim(r);
}

inline QPoly scale(const QPoly& a, const Rational& c) {
  QPoly r(a);
  for (auto& x : r) x *= c;
  return trim(r);
}

/// Quotient and remainder; b must be nonzero.
inline std::pair<QPoly, QPoly> divmod(const QPoly& a, const QPoly& b) {
  QPoly r = a;
  trim(r);
  const int db = degree(b);
  if (degree(r) < db) return {{}, r};
  QPoly q(static_cast<std::size_t>(degree(r) - db + 1));
  const Rational lead = b.back();
  while (degree(r) >= db) {
    const int shift = degree(r) - db;
    Rational c = r.back() / lead;
    q[static_cast<std::size_t>(shift)] = c;
    for (int i = 0; i <= db; ++i) r[static_cast<std::size_t>(i + shift)] -= c * b[static_cast<std::size_t>(i)];
    r.pop_back();
    trim(r);
  }
  return {trim(q), r};
}

inline QPoly mod(const QPoly& a, const QPoly& b) { return divmod(a, b).second; }

inline QPoly monic(const QPoly& a) {
  if (a.empty()) return a;
  return scale(a, Rational(1) / a.back());
}

inline QPoly gcd(QPoly a, QPoly b) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    QPoly r = mod(a, b);
    a = std::move(b);
    b = std::move(r);
  }
  return monic(a);
}

inline QPoly derivative(const QPoly& a) {
  if (a.size() <= 1) return {};
  QPoly r(a.size() - 1);
  for (std::size_t i = 1; i < a.size(); ++i) r[i - 1] = a[i] * static_cast<long>(i);
  return trim(r);
}

inline Rational eval(const QPoly& p, const Rational& x) {
  Rational acc = 0;
  for (std::size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
  return acc;
}

/// Interval Horner evaluation; inclusion-isotone in x.
inline RInterval eval(const QPoly& p, const RInterval& x) {
  RInterval acc{0, 0};
  for (std::size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
  return acc;
}

/// Standard Sturm chain p, p', -rem(p, p'), ...
inline std::vector<QPoly> sturm_chain(const QPoly& p) {
  std::vector<QPoly> chain{p, derivative(p)};
  while (!chain.back().empty()) {
    QPoly r = mod(chain[chain.size() - 2], chain.back());
    if (r.empty()) break;
    chain.push_back(scale(r, Rational(-1)));
  }
  return chain;
}

inline int sign_variations(const std::vector<QPoly>& chain, const Rational& x) {
  int count = 0, last = 0;
  for (const auto& q : chain) {
    int s = sgn(eval(q, x));
    if (s == 0) continue;
    if (last != 0 && s != last) ++count;
    last = s;
  }
  return count;
}

/// Number of distinct real roots in the closed interval [lo, hi] (lo <= hi).
inline int count_real_roots(const QPoly& p, const Rational& lo, const Rational& hi) {
  const int at_lo = sgn(eval(p, lo)) == 0 ? 1 : 0;
  if (lo == hi) return at_lo;
  auto chain = sturm_chain(p);
  return sign_variations(chain, lo) - sign_variations(chain, hi) + at_lo;
}

inline QPoly squarefree_part(const QPoly& p) {
  QPoly g = gcd(p, derivative(p));
  return monic(divmod(p, g).first);
}

/// Characteristic polynomial det(xI - A) by Faddeev-LeVerrier, exact over Q.
inline QPoly charpoly(const std::vector<std::vector<Rational>>& a) {
  const std::size_t n = a.size();
  QPoly c(n + 1);
  c[n] = 1;
  std::vector<std::vector<Rational>> m(n, std::vector<Rational>(n, Rational(0)));
  for (std::size_t k = 1; k <= n; ++k) {
    // m <- A * m + c[n-k+1] I
    std::vector<std::vector<Rational>> next(n, std::vector<Rational>(n, Rational(0)));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        Rational s = 0;
        for (std::size_t l = 0; l < n; ++l) s += a[i][l] * m[l][j];
        next[i][j] = s;
      }
    for (std::size_t i = 0; i < n; ++i) next[i][i] += c[n - k + 1];
    m = std::move(next);
    Rational tr = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < n; ++l) tr += a[i][l] * m[l][i];
    c[n - k] = -tr / static_cast<long>(k);
  }
  return trim(c);
}

namespace detail {

inline std::vector<Integer> divisors(Integer v) {
  v = abs(v);
  std::vector<Integer> out;
  for (Integer d = 1; d * d <= v; ++d) {
    if (v % d == 0) {
      out.push_back(d);
      if (d * d != v) out.push_back(v / d);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Newton interpolation through (xs[i], ys[i]).
inline QPoly interpolate(const std::vector<Integer>& xs, const std::vector<Integer>& ys) {
  const std::size_t n = xs.size();
  std::vector<Rational> dd(ys.begin(), ys.end());
  for (std::size_t j = 1; j < n; ++j)
    for (std::size_t i = n - 1; i >= j; --i) {
      dd[i] = (dd[i] - dd[i - 1]) / Rational(xs[i] - xs[i - j]);
      if (i == j) break;
    }
  QPoly result{dd[n - 1]};
  for (std::size_t i = n - 1; i-- > 0;) {
    result = mul(result, QPoly{Rational(-xs[i]), Rational(1)});
    result = add(result, QPoly{dd[i]});
  }
  return trim(result);
}

}  // namespace detail

/// Kronecker's factor search for a monic integer polynomial. Returns true
/// when no factor of degree 1..deg/2 exists over Z (hence over Q, by Gauss).
inline bool is_irreducible(const std::vector<Integer>& coeffs) {
  QPoly f = from_integers(coeffs);
  const int n = degree(f);
  if (n <= 1) return n == 1;
  auto value_at = [&](long x) { return floor_rational(eval(f, Rational(x))); };
  for (long x = -64; x <= 64; ++x)
    if (sgn(value_at(x)) == 0) return false;

  // Points with the fewest divisors keep the combination count small.
  std::vector<std::pair<std::size_t, long>> ranked;
  for (long x = -16; x <= 16; ++x) ranked.emplace_back(detail::divisors(value_at(x)).size(), x);
  std::sort(ranked.begin(), ranked.end());

  for (int m = 1; m <= n / 2; ++m) {
    std::vector<Integer> xs;
    std::vector<std::vector<Integer>> choices;
    for (int i = 0; i <= m; ++i) {
      long x = ranked[static_cast<std::size_t>(i)].second;
      xs.emplace_back(x);
      auto ds = detail::divisors(value_at(x));
      std::vector<Integer> signed_ds;
      for (const auto& d : ds) {
        signed_ds.push_back(d);
        if (i > 0) signed_ds.push_back(-d);
      }
      choices.push_back(std::move(signed_ds));
    }
    std::vector<std::size_t> idx(choices.size(), 0);
    while (true) {
      std::vector<Integer> ys;
      for (std::size_t i = 0; i < idx.size(); ++i) ys.push_back(choices[i][idx[i]]);
      QPoly g = detail::interpolate(xs, ys);
      if (degree(g) == m) {
        bool integral = std::all_of(g.begin(), g.end(), [](const Rational& c) { return c.get_den() == 1; });
        if (integral && abs(g.back()) == 1 && mod(f, g).empty()) return false;
      }
      std::size_t pos = 0;
      while (pos < idx.size() && ++idx[pos] == choices[pos].size()) idx[pos++] = 0;
      if (pos == idx.size()) break;
    }
  }
  return true;
}

}  // namespace poly
}  // namespace tilefreq
