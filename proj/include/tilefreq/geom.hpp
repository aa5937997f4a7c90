#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "tilefreq/exactnum.hpp"

namespace tilefreq {

/// Point or vector of R^d (d = 1 or 2) with exact coordinates in Q(lambda).
struct Vec {
  std::array<FieldElem, 2> c{};
  int dim = 1;

  Vec() = default;
  explicit Vec(FieldElem x) : c{std::move(x), FieldElem()}, dim(1) {}
  Vec(FieldElem x, FieldElem y) : c{std::move(x), std::move(y)}, dim(2) {}
  static Vec zero(int dim) {
    Vec v;
    v.dim = dim;
    return v;
  }

  const FieldElem& operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
  FieldElem& operator[](int i) { return c[static_cast<std::size_t>(i)]; }

  bool is_zero() const { return c[0].is_zero() && c[1].is_zero(); }

  friend Vec operator+(const Vec& a, const Vec& b) {
    Vec r = a;
    for (int i = 0; i < a.dim; ++i) r[i] = a[i] + b[i];
    return r;
  }
  friend Vec operator-(const Vec& a, const Vec& b) {
    Vec r = a;
    for (int i = 0; i < a.dim; ++i) r[i] = a[i] - b[i];
    return r;
  }
  friend Vec operator-(const Vec& a) {
    Vec r = a;
    for (int i = 0; i < a.dim; ++i) r[i] = -a[i];
    return r;
  }
  friend Vec operator*(const FieldElem& s, const Vec& a) {
    Vec r = a;
    for (int i = 0; i < a.dim; ++i) r[i] = s * a[i];
    return r;
  }
  friend bool operator==(const Vec& a, const Vec& b) { return a.dim == b.dim && a.c == b.c; }
  friend bool operator!=(const Vec& a, const Vec& b) { return !(a == b); }

  /// Lexicographic order on the exact coefficient vectors of the coordinates.
  /// Compatible with translation: a < b implies a + v < b + v.
  static int lex_compare(const Vec& a, const Vec& b) {
    for (int i = 0; i < a.dim; ++i)
      if (int r = FieldElem::coeff_compare(a[i], b[i]); r != 0) return r;
    return 0;
  }

  std::size_t hash() const { return c[0].hash() * 31 + c[1].hash(); }

  std::string to_string(int field_degree) const {
    std::string s = "(";
    for (int i = 0; i < dim; ++i) {
      if (i) s += ",";
      s += c[static_cast<std::size_t>(i)].to_string(field_degree);
    }
    return s + ")";
  }

  std::array<double, 2> to_double() const { return {c[0].to_double(), dim > 1 ? c[1].to_double() : 0.0}; }
};

struct VecHash {
  std::size_t operator()(const Vec& v) const noexcept { return v.hash(); }
};

inline FieldElem dot(const Vec& a, const Vec& b) {
  FieldElem s;
  for (int i = 0; i < a.dim; ++i) s += a[i] * b[i];
  return s;
}

inline FieldElem norm2(const Vec& a) { return dot(a, a); }

inline FieldElem dist2(const Vec& a, const Vec& b) { return norm2(a - b); }

/// z-component of (b - a) x (c - a).
inline FieldElem orient(const Vec& a, const Vec& b, const Vec& c) {
  return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
}

/// Tile support: a closed interval (d = 1, verts = {lo, hi}) or a simple
/// polygon with counterclockwise vertices (d = 2).
struct Support {
  std::vector<Vec> verts;
  int dim = 1;

  static Support interval(FieldElem lo, FieldElem hi) { return {{Vec(std::move(lo)), Vec(std::move(hi))}, 1}; }
  static Support polygon(std::vector<Vec> pts) { return {std::move(pts), 2}; }

  const FieldElem& lo() const { return verts[0][0]; }
  const FieldElem& hi() const { return verts[1][0]; }
  std::size_t size() const { return verts.size(); }
  const Vec& vertex(std::size_t i) const { return verts[i % verts.size()]; }

  friend bool operator==(const Support& a, const Support& b) { return a.dim == b.dim && a.verts == b.verts; }
};

inline Support translate(const Support& s, const Vec& v) {
  Support r = s;
  for (auto& p : r.verts) p = p + v;
  return r;
}

/// Signed area (d = 2) or length (d = 1).
inline FieldElem signed_volume(const Support& s) {
  if (s.dim == 1) return s.hi() - s.lo();
  FieldElem twice;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Vec& a = s.vertex(i);
    const Vec& b = s.vertex(i + 1);
    twice += a[0] * b[1] - b[0] * a[1];
  }
  return twice * Rational(1, 2);
}

inline FieldElem volume(const Support& s) { return abs(signed_volume(s)); }

/// Linear similarity M = lambda * R with R exactly orthogonal.
struct SimilarityMap {
  FieldElem lambda;
  std::vector<std::vector<FieldElem>> rotation;  // dim x dim

  int dim() const { return static_cast<int>(rotation.size()); }

  static SimilarityMap scaling(FieldElem lambda, int dim) {
    SimilarityMap m{std::move(lambda), {}};
    m.rotation.assign(static_cast<std::size_t>(dim), std::vector<FieldElem>(static_cast<std::size_t>(dim)));
    for (int i = 0; i < dim; ++i) m.rotation[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = FieldElem(1);
    return m;
  }

  FieldElem rotation_det() const {
    if (dim() == 1) return rotation[0][0];
    return rotation[0][0] * rotation[1][1] - rotation[0][1] * rotation[1][0];
  }

  /// Checks R^T R = I exactly.
  bool is_orthogonal() const {
    const int d = dim();
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        FieldElem s;
        for (int k = 0; k < d; ++k)
          s += rotation[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] *
               rotation[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
        if (s != FieldElem(i == j ? 1 : 0)) return false;
      }
    return true;
  }

  Vec rotate(const Vec& x) const {
    Vec r = Vec::zero(x.dim);
    for (int i = 0; i < x.dim; ++i) {
      FieldElem s;
      for (int j = 0; j < x.dim; ++j) s += rotation[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * x[j];
      r[i] = s;
    }
    return r;
  }

  Vec apply(const Vec& x) const { return lambda * rotate(x); }

  /// M^k for k >= 0.
  SimilarityMap power(int k) const {
    SimilarityMap r = scaling(lambda.pow(k), dim());
    for (int step = 0; step < k; ++step) {
      auto next = r.rotation;
      for (int i = 0; i < dim(); ++i)
        for (int j = 0; j < dim(); ++j) {
          FieldElem s;
          for (int l = 0; l < dim(); ++l)
            s += rotation[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)] *
                 r.rotation[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)];
          next[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = s;
        }
      r.rotation = std::move(next);
    }
    return r;
  }

  /// Exact preimage M^{-1} x (R orthogonal, so R^{-1} = R^T).
  Vec apply_inverse(const Vec& x) const {
    Vec r = Vec::zero(x.dim);
    FieldElem inv = lambda.inverse();
    for (int i = 0; i < x.dim; ++i) {
      FieldElem s;
      for (int j = 0; j < x.dim; ++j) s += rotation[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] * x[j];
      r[i] = inv * s;
    }
    return r;
  }
};

inline Vec apply_map(const SimilarityMap& m, const Vec& x) { return m.apply(x); }

inline Support apply_map_support(const SimilarityMap& m, const Support& s) {
  Support r = s;
  for (auto& p : r.verts) p = m.apply(p);
  if (s.dim == 1) {
    if (r.hi() < r.lo()) std::swap(r.verts[0], r.verts[1]);
  } else if (m.rotation_det().sign() < 0) {
    std::reverse(r.verts.begin(), r.verts.end());
  }
  return r;
}

// ---------------------------------------------------------------------------
// Exact predicates

enum class Location { Outside, Boundary, Inside };

inline bool on_segment(const Vec& a, const Vec& b, const Vec& p) {
  if (orient(a, b, p).sign() != 0) return false;
  return dot(p - a, b - a).sign() >= 0 && dot(p - b, a - b).sign() >= 0;
}

inline Location locate(const Support& s, const Vec& p) {
  if (s.dim == 1) {
    int a = (p[0] - s.lo()).sign(), b = (s.hi() - p[0]).sign();
    if (a < 0 || b < 0) return Location::Outside;
    return (a == 0 || b == 0) ? Location::Boundary : Location::Inside;
  }
  // Winding number with exact orientation tests.
  int winding = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Vec& a = s.vertex(i);
    const Vec& b = s.vertex(i + 1);
    if (on_segment(a, b, p)) return Location::Boundary;
    int ay = (a[1] - p[1]).sign(), by = (b[1] - p[1]).sign();
    if (ay <= 0) {
      if (by > 0 && orient(a, b, p).sign() > 0) ++winding;
    } else if (by <= 0 && orient(a, b, p).sign() < 0) {
      --winding;
    }
  }
  return winding != 0 ? Location::Inside : Location::Outside;
}

/// True iff the squared distance from p to segment [a, b] is <= r2.
/// Division-free.
inline bool segment_within(const Vec& a, const Vec& b, const Vec& p, const FieldElem& r2) {
  Vec e = b - a;
  FieldElem t = dot(p - a, e);
  if (t.sign() <= 0) return (dist2(p, a) - r2).sign() <= 0;
  FieldElem len2 = norm2(e);
  if ((t - len2).sign() >= 0) return (dist2(p, b) - r2).sign() <= 0;
  FieldElem cr = orient(a, b, p);
  return (cr * cr - r2 * len2).sign() <= 0;
}

/// Exact squared distance from p to segment [a, b].
inline FieldElem segment_dist2(const Vec& a, const Vec& b, const Vec& p) {
  Vec e = b - a;
  FieldElem t = dot(p - a, e);
  if (t.sign() <= 0) return dist2(p, a);
  FieldElem len2 = norm2(e);
  if ((t - len2).sign() >= 0) return dist2(p, b);
  FieldElem cr = orient(a, b, p);
  return cr * cr / len2;
}

/// Exact squared Euclidean distance from p to the closed support s.
inline FieldElem support_dist2(const Support& s, const Vec& p) {
  if (s.dim == 1) {
    if ((p[0] - s.lo()).sign() < 0) return (s.lo() - p[0]) * (s.lo() - p[0]);
    if ((p[0] - s.hi()).sign() > 0) return (p[0] - s.hi()) * (p[0] - s.hi());
    return {};
  }
  if (locate(s, p) != Location::Outside) return {};
  FieldElem best = segment_dist2(s.vertex(0), s.vertex(1), p);
  for (std::size_t i = 1; i < s.size(); ++i) best = min(best, segment_dist2(s.vertex(i), s.vertex(i + 1), p));
  return best;
}

/// Closed support meets the closed ball of squared radius r2 around center.
inline bool meets_closed_ball(const Support& s, const Vec& center, const FieldElem& r2) {
  if (s.dim == 1) {
    const FieldElem& x = center[0];
    if ((x - s.lo()).sign() < 0) {
      FieldElem d = s.lo() - x;
      return (d * d - r2).sign() <= 0;
    }
    if ((x - s.hi()).sign() > 0) {
      FieldElem d = x - s.hi();
      return (d * d - r2).sign() <= 0;
    }
    return true;
  }
  if (locate(s, center) != Location::Outside) return true;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (segment_within(s.vertex(i), s.vertex(i + 1), center, r2)) return true;
  return false;
}

/// Closed segments [a,b] and [c,d] share a point.
inline bool segments_meet(const Vec& a, const Vec& b, const Vec& c, const Vec& d) {
  int o1 = orient(a, b, c).sign(), o2 = orient(a, b, d).sign();
  int o3 = orient(c, d, a).sign(), o4 = orient(c, d, b).sign();
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  return (o1 == 0 && on_segment(a, b, c)) || (o2 == 0 && on_segment(a, b, d)) ||
         (o3 == 0 && on_segment(c, d, a)) || (o4 == 0 && on_segment(c, d, b));
}

/// Closed supports intersect (touching counts).
inline bool supports_meet(const Support& a, const Support& b) {
  if (a.dim == 1) return (a.lo() - b.hi()).sign() <= 0 && (b.lo() - a.hi()).sign() <= 0;
  std::vector<std::array<double, 2>> da, db;
  for (const auto& v : a.verts) da.push_back(v.to_double());
  for (const auto& v : b.verts) db.push_back(v.to_double());
  // Edge pairs whose floating-point boxes are clearly apart cannot meet.
  auto apart = [](const std::array<double, 2>& p, const std::array<double, 2>& q, const std::array<double, 2>& r,
                  const std::array<double, 2>& s) {
    double tol = 1e-7 * (1 + std::fabs(p[0]) + std::fabs(p[1]) + std::fabs(r[0]) + std::fabs(r[1]));
    return std::max(p[0], q[0]) + tol < std::min(r[0], s[0]) || std::max(r[0], s[0]) + tol < std::min(p[0], q[0]) ||
           std::max(p[1], q[1]) + tol < std::min(r[1], s[1]) || std::max(r[1], s[1]) + tol < std::min(p[1], q[1]);
  };
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (apart(da[i], da[(i + 1) % a.size()], db[j], db[(j + 1) % b.size()])) continue;
      if (segments_meet(a.vertex(i), a.vertex(i + 1), b.vertex(j), b.vertex(j + 1))) return true;
    }
  return locate(b, a.vertex(0)) != Location::Outside || locate(a, b.vertex(0)) != Location::Outside;
}

namespace detail {

// Parameters t in (0,1) where edge [a,b] is cut by the boundary of `other`.
inline std::vector<FieldElem> cut_parameters(const Vec& a, const Vec& b, const Support& other) {
  std::vector<FieldElem> ts;
  Vec e = b - a;
  FieldElem len2 = norm2(e);
  auto add_point = [&](const Vec& p) {
    FieldElem t = dot(p - a, e) / len2;
    if (t.sign() > 0 && (t - FieldElem(1)).sign() < 0) ts.push_back(t);
  };
  for (std::size_t j = 0; j < other.size(); ++j) {
    const Vec& c = other.vertex(j);
    const Vec& d = other.vertex(j + 1);
    if (on_segment(a, b, c)) add_point(c);
    int o1 = orient(a, b, c).sign(), o2 = orient(a, b, d).sign();
    int o3 = orient(c, d, a).sign(), o4 = orient(c, d, b).sign();
    if (o1 * o2 < 0 && o3 * o4 < 0) {
      // Proper crossing: a + t e with t = cross(c - a, d - c) / cross(e, d - c).
      Vec f = d - c;
      FieldElem num = (c[0] - a[0]) * f[1] - (c[1] - a[1]) * f[0];
      FieldElem den = e[0] * f[1] - e[1] * f[0];
      ts.push_back(num / den);
    }
  }
  std::sort(ts.begin(), ts.end(), [](const FieldElem& x, const FieldElem& y) { return x < y; });
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

// Does some piece of a's boundary bound a region interior to both a and b?
inline bool boundary_enters(const Support& a, const Support& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Vec& p = a.vertex(i);
    const Vec& q = a.vertex(i + 1);
    std::vector<FieldElem> ts = cut_parameters(p, q, b);
    ts.insert(ts.begin(), FieldElem(0));
    ts.push_back(FieldElem(1));
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
      FieldElem tm = (ts[k] + ts[k + 1]) * Rational(1, 2);
      Vec m = p + tm * (q - p);
      Location loc = locate(b, m);
      if (loc == Location::Inside) return true;
      if (loc == Location::Boundary) {
        // Collinear overlap: same direction means both interiors lie on the
        // same side of the shared piece.
        for (std::size_t j = 0; j < b.size(); ++j) {
          const Vec& c = b.vertex(j);
          const Vec& d = b.vertex(j + 1);
          if (on_segment(c, d, m) && orient(c, d, p).sign() == 0 && orient(c, d, q).sign() == 0 &&
              dot(q - p, d - c).sign() > 0)
            return true;
        }
      }
    }
  }
  return false;
}

}  // namespace detail

inline bool interiors_disjoint(const Support& a, const Support& b) {
  if (a.dim == 1) return (a.hi() - b.lo()).sign() <= 0 || (b.hi() - a.lo()).sign() <= 0;
  return !detail::boundary_enters(a, b) && !detail::boundary_enters(b, a);
}

inline FieldElem diameter2(std::span<const Vec> points) {
  FieldElem best;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) best = max(best, dist2(points[i], points[j]));
  return best;
}

/// Squared distance between two closed segments that do not intersect.
inline FieldElem segment_segment_dist2(const Vec& a, const Vec& b, const Vec& c, const Vec& d) {
  if (segments_meet(a, b, c, d)) return {};
  FieldElem best = segment_dist2(a, b, c);
  best = min(best, segment_dist2(a, b, d));
  best = min(best, segment_dist2(c, d, a));
  best = min(best, segment_dist2(c, d, b));
  return best;
}

/// Boundary segments of the union of interior-disjoint polygons: edges are
/// split at every vertex of the other polygons, and pieces shared with an
/// opposite-direction piece are dropped.
inline std::vector<std::pair<Vec, Vec>> union_boundary(std::span<const Support> polys) {
  // Floating-point boxes only prune pairs that cannot touch.
  std::vector<std::array<double, 4>> box;
  std::vector<std::vector<std::array<double, 2>>> dverts;
  for (const auto& s : polys) {
    std::array<double, 4> b{1e300, -1e300, 1e300, -1e300};
    auto& dv = dverts.emplace_back();
    for (const auto& v : s.verts) {
      auto d = dv.emplace_back(v.to_double());
      b = {std::min(b[0], d[0]), std::max(b[1], d[0]), std::min(b[2], d[1]), std::max(b[3], d[1])};
    }
    double sl = 1e-7 * (1 + std::fabs(b[0]) + std::fabs(b[1]) + std::fabs(b[2]) + std::fabs(b[3]));
    box.push_back({b[0] - sl, b[1] + sl, b[2] - sl, b[3] + sl});
  }
  auto near = [&](std::size_t i, std::size_t j) {
    return !(box[i][1] < box[j][0] || box[j][1] < box[i][0] || box[i][3] < box[j][2] || box[j][3] < box[i][2]);
  };

  std::vector<std::pair<Vec, Vec>> pieces;
  for (std::size_t i = 0; i < polys.size(); ++i) {
    const Support& s = polys[i];
    std::vector<std::size_t> others;
    for (std::size_t j = 0; j < polys.size(); ++j)
      if (j != i && near(i, j)) others.push_back(j);
    for (std::size_t e = 0; e < s.size(); ++e) {
      const Vec& a = s.vertex(e);
      const Vec& b = s.vertex(e + 1);
      Vec dir = b - a;
      FieldElem len2 = norm2(dir);
      std::vector<FieldElem> ts{FieldElem(0), FieldElem(1)};
      auto ad = dverts[i][e], bd = dverts[i][(e + 1) % s.size()];
      const double ex = bd[0] - ad[0], ey = bd[1] - ad[1];
      const double tol = 1e-7 * (1 + std::fabs(ad[0]) + std::fabs(ad[1]) + std::fabs(ex) + std::fabs(ey));
      for (std::size_t j : others)
        for (std::size_t q = 0; q < polys[j].verts.size(); ++q) {
          const auto& vd = dverts[j][q];
          const double cr = ex * (vd[1] - ad[1]) - ey * (vd[0] - ad[0]);
          if (std::fabs(cr) > tol * (1 + std::hypot(ex, ey))) continue;
          const double t = ex * (vd[0] - ad[0]) + ey * (vd[1] - ad[1]);
          if (t < -tol * (1 + ex * ex + ey * ey) || t > (ex * ex + ey * ey) * (1 + 1e-9) + tol) continue;
          const Vec& v = polys[j].verts[q];
          if (on_segment(a, b, v)) ts.push_back(dot(v - a, dir) / len2);
        }
      std::sort(ts.begin(), ts.end(), [](const FieldElem& x, const FieldElem& y) { return x < y; });
      ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
      for (std::size_t k = 0; k + 1 < ts.size(); ++k) pieces.emplace_back(a + ts[k] * dir, a + ts[k + 1] * dir);
    }
  }
  struct PairHash {
    std::size_t operator()(const std::pair<Vec, Vec>& p) const noexcept { return p.first.hash() * 131 + p.second.hash(); }
  };
  std::unordered_set<std::pair<Vec, Vec>, PairHash> all(pieces.begin(), pieces.end());
  std::vector<std::pair<Vec, Vec>> out;
  for (const auto& p : pieces)
    if (!all.count({p.second, p.first})) out.push_back(p);
  return out;
}

/// Checks the Support invariants; returns a diagnostic or nullopt.
inline std::optional<std::string> check_support(const Support& s) {
  if (s.dim == 1) {
    if (s.verts.size() != 2) return "interval support needs two endpoints";
    if ((s.hi() - s.lo()).sign() <= 0) return "interval support has hi <= lo";
    return std::nullopt;
  }
  if (s.size() < 3) return "polygon needs at least three vertices";
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j)
      if (s.verts[i] == s.verts[j]) return "polygon has repeated vertices";
  const std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_meet(s.vertex(i), s.vertex(i + 1), s.vertex(j), s.vertex(j + 1)))
        return "polygon edges self-intersect";
    }
  if (signed_volume(s).sign() <= 0) return "polygon is not counterclockwise (signed area <= 0)";
  return std::nullopt;
}

}  // namespace tilefreq
