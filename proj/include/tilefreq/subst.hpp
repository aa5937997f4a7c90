#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tilefreq/linalg.hpp"
#include "tilefreq/tiling.hpp"

namespace tilefreq {

struct Child {
  int proto = 0;
  Vec offset;
};

/// Prototiles, expanding similarity M and the rule p -> S(p). S(p + v) is
/// S(p) + Mv.
struct SubstitutionSystem {
  std::string name;
  const Field* field = nullptr;
  int dim = 1;
  SimilarityMap map;
  Prototiles protos;
  std::vector<std::vector<Child>> rule;

  IntMatrix matrix;
  bool primitive = false;

  static SubstitutionSystem build(std::string name, const Field& field, int dim, SimilarityMap map,
                                  std::vector<Prototile> prototiles, std::vector<std::vector<Child>> rule) {
    SubstitutionSystem s;
    s.name = std::move(name);
    s.field = &field;
    s.dim = dim;
    s.map = std::move(map);
    s.protos.tiles = std::move(prototiles);
    s.protos.dim = dim;
    s.protos.field = &field;
    s.rule = std::move(rule);
    s.matrix = IntMatrix(s.protos.size(), std::vector<Integer>(s.protos.size(), 0));
    for (std::size_t p = 0; p < s.rule.size(); ++p)
      for (const auto& c : s.rule[p])
        if (c.proto >= 0 && static_cast<std::size_t>(c.proto) < s.protos.size())
          s.matrix[p][static_cast<std::size_t>(c.proto)] += 1;
    s.primitive = is_primitive(s.matrix);
    return s;
  }

  const FieldElem& lambda() const { return map.lambda; }
  FieldElem lambda_d() const { return map.lambda.pow(dim); }
  std::size_t size() const { return protos.size(); }
  int field_degree() const { return protos.field_degree(); }

  std::vector<Tile> substitute(const Tile& t) const {
    std::vector<Tile> out;
    Vec base = map.apply(t.offset);
    for (const auto& c : rule[static_cast<std::size_t>(t.proto)]) out.push_back({c.proto, base + c.offset});
    return out;
  }

  Patch substitute(const Patch& p) const {
    Patch r;
    for (const auto& t : p.tiles) {
      auto ch = substitute(t);
      r.tiles.insert(r.tiles.end(), ch.begin(), ch.end());
    }
    if (p.ref) r.ref = map.apply(*p.ref);
    return r.sort();
  }
};

inline IntMatrix substitution_matrix(const SubstitutionSystem& sys) { return sys.matrix; }

struct ValidationReport {
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

namespace detail {

// Closed polygon a lies inside closed polygon b.
inline bool polygon_inside(const Support& a, const Support& b) {
  for (const auto& v : a.verts)
    if (locate(b, v) == Location::Outside) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Vec& p = a.vertex(i);
    const Vec& q = a.vertex(i + 1);
    std::vector<FieldElem> ts = cut_parameters(p, q, b);
    ts.insert(ts.begin(), FieldElem(0));
    ts.push_back(FieldElem(1));
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
      FieldElem tm = (ts[k] + ts[k + 1]) * Rational(1, 2);
      if (locate(b, p + tm * (q - p)) == Location::Outside) return false;
    }
  }
  return true;
}

}  // namespace detail

/// Checks supports, the rule's coverage of M supp(p), orthogonality of the
/// rotation part and primitivity; each failure carries its witness.
inline ValidationReport validate(const SubstitutionSystem& sys) {
  ValidationReport rep;
  auto fail = [&](std::string s) { rep.failures.push_back(std::move(s)); };
  const int n = sys.field_degree();
  if (sys.protos.size() == 0) fail("no prototiles");
  if (sys.rule.size() != sys.protos.size()) fail("rule does not list every prototile");
  if (sys.map.dim() != sys.dim) fail("map dimension differs from system dimension");
  if (!sys.map.is_orthogonal()) fail("rotation part of the map is not orthogonal");
  if (sys.map.lambda.sign() <= 0 || (sys.map.lambda - FieldElem(1)).sign() <= 0) fail("lambda must exceed 1");
  for (std::size_t p = 0; p < sys.protos.size(); ++p) {
    const auto& proto = sys.protos.tiles[p];
    if (proto.support.dim != sys.dim) fail("prototile " + proto.label + " has wrong dimension");
    else if (auto msg = check_support(proto.support)) fail("prototile " + proto.label + ": " + *msg);
  }
  if (!rep.ok()) return rep;

  for (std::size_t p = 0; p < sys.protos.size(); ++p) {
    const auto& label = sys.protos.tiles[p].label;
    const Support target = apply_map_support(sys.map, sys.protos.tiles[p].support);
    std::vector<Support> kids;
    for (const auto& c : sys.rule[p]) {
      if (c.proto < 0 || static_cast<std::size_t>(c.proto) >= sys.protos.size()) {
        fail("S(" + label + ") references an unknown prototile");
        continue;
      }
      if (c.offset.dim != sys.dim) {
        fail("S(" + label + ") has an offset of wrong dimension");
        continue;
      }
      kids.push_back(tile_support(sys.protos, {c.proto, c.offset}));
    }
    if (kids.empty()) {
      fail("S(" + label + ") is empty");
      continue;
    }
    if (sys.dim == 1) {
      std::sort(kids.begin(), kids.end(), [](const Support& a, const Support& b) { return a.lo() < b.lo(); });
      if (kids.front().lo() != target.lo() || kids.back().hi() != target.hi())
        fail("S(" + label + ") does not span M supp(" + label + ")");
      for (std::size_t i = 0; i + 1 < kids.size(); ++i)
        if (kids[i].hi() != kids[i + 1].lo())
          fail("S(" + label + ") has a gap or overlap at " + kids[i].hi().pretty());
      continue;
    }
    FieldElem area;
    for (const auto& k : kids) area += volume(k);
    if (area != volume(target))
      fail("S(" + label + ") area " + area.pretty() + " differs from " + volume(target).pretty());
    for (std::size_t i = 0; i < kids.size(); ++i) {
      if (!detail::polygon_inside(kids[i], target))
        fail("S(" + label + ") child " + std::to_string(i) + " at " + sys.rule[p][i].offset.to_string(n) +
             " leaves M supp(" + label + ")");
      for (std::size_t j = i + 1; j < kids.size(); ++j)
        if (!interiors_disjoint(kids[i], kids[j]))
          fail("S(" + label + ") children " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
    }
  }
  if (!sys.primitive) fail("substitution matrix is not primitive");
  return rep;
}

struct PerronData {
  FieldElem eigenvalue;  // lambda^d
  CertInterval eigenvalue_interval;
  std::vector<FieldElem> right_eigenvector;  // exact, entries sum to 1
  std::vector<CertInterval> right_eigenvector_intervals;
  Rational residual_bound;  // of A v - lambda^d v, exact so 0
};

/// Perron data of A, with the eigenvalue pinned to lambda^d by exact
/// evaluation of the characteristic polynomial in Q(lambda).
inline PerronData perron(const SubstitutionSystem& sys, int bits = 64) {
  PerronData out;
  out.eigenvalue = sys.lambda_d();
  QPoly cp = poly::charpoly(to_rational(sys.matrix));
  FieldElem acc;
  for (std::size_t i = cp.size(); i-- > 0;) acc = acc * out.eigenvalue + FieldElem(cp[i]);
  if (!acc.is_zero())
    throw Error(ErrorKind::EigenvalueMismatch,
                "det(A - x I) at lambda^d is " + acc.pretty() + ", not 0");
  out.eigenvalue_interval = out.eigenvalue.approximate(bits);
  auto v = perron_vector(sys.matrix, out.eigenvalue, false);
  FieldElem total;
  for (const auto& x : v) total += x;
  for (auto& x : v) x = x / total;
  for (const auto& x : v) {
    if (x.sign() <= 0) throw Error(ErrorKind::EigenvalueMismatch, "Perron vector is not positive");
    out.right_eigenvector_intervals.push_back(x.approximate(bits));
  }
  out.right_eigenvector = std::move(v);
  out.residual_bound = 0;
  return out;
}

inline constexpr std::size_t kDefaultBudget = 1000000;

/// Number of tiles in S^k(p), exactly.
inline Integer supertile_size(const SubstitutionSystem& sys, int p, int k) {
  std::vector<Integer> row(sys.size(), 0);
  row[static_cast<std::size_t>(p)] = 1;
  for (int step = 0; step < k; ++step) row = vec_mat(row, sys.matrix);
  Integer total = 0;
  for (const auto& x : row) total += x;
  return total;
}

/// S^k(p) with p at the origin.
inline Patch supertile(const SubstitutionSystem& sys, int p, int k, std::size_t budget = kDefaultBudget) {
  if (k < 0) throw Error(ErrorKind::InvalidSystem, "negative supertile level");
  Integer n = supertile_size(sys, p, k);
  if (n > Integer(static_cast<unsigned long>(budget)))
    throw Error(ErrorKind::BudgetExceeded,
                "S^" + std::to_string(k) + "(" + sys.protos[p].label + ") has " + n.get_str() + " tiles, budget " +
                    std::to_string(budget));
  std::vector<Tile> tiles{{p, Vec::zero(sys.dim)}};
  for (int step = 0; step < k; ++step) {
    std::vector<Tile> next;
    next.reserve(tiles.size() * 4);
    for (const auto& t : tiles) {
      auto ch = sys.substitute(t);
      next.insert(next.end(), std::make_move_iterator(ch.begin()), std::make_move_iterator(ch.end()));
    }
    tiles = std::move(next);
  }
  Patch out;
  out.tiles = std::move(tiles);
  return out.sort();
}

/// S^m as a substitution in its own right (same tiles, map M^m).
inline SubstitutionSystem power(const SubstitutionSystem& sys, int m) {
  std::vector<std::vector<Child>> rule;
  for (std::size_t p = 0; p < sys.size(); ++p) {
    std::vector<Child> kids;
    for (const auto& t : supertile(sys, static_cast<int>(p), m).tiles) kids.push_back({t.proto, t.offset});
    rule.push_back(std::move(kids));
  }
  return SubstitutionSystem::build(sys.name + "^" + std::to_string(m), *sys.field, sys.dim, sys.map.power(m),
                                   sys.protos.tiles, std::move(rule));
}

struct Seed {
  Tile tile;  // 0 is interior to supp(tile) and tile is in S^period(tile)
  int period = 1;
};

namespace detail {

// Solves (I - M^m) v = w exactly.
inline Vec solve_fixed_offset(const SimilarityMap& mm, const Vec& w) {
  if (w.dim == 1) return Vec(w[0] / (FieldElem(1) - mm.lambda * mm.rotation[0][0]));
  FieldElem a = FieldElem(1) - mm.lambda * mm.rotation[0][0], b = -(mm.lambda * mm.rotation[0][1]);
  FieldElem c = -(mm.lambda * mm.rotation[1][0]), d = FieldElem(1) - mm.lambda * mm.rotation[1][1];
  FieldElem det = a * d - b * c;
  return Vec((d * w[0] - b * w[1]) / det, (a * w[1] - c * w[0]) / det);
}

}  // namespace detail

/// Searches m = 1..k_max (then prototiles, then tiles of S^m(p) in order) for
/// a tile t = p + v with t in S^m(t) and 0 interior to supp(t).
inline Seed find_fixed_seed(const SubstitutionSystem& sys, int k_max, std::size_t budget = kDefaultBudget) {
  for (int m = 1; m <= k_max; ++m) {
    SimilarityMap mm = sys.map.power(m);
    for (std::size_t p = 0; p < sys.size(); ++p) {
      Patch st = supertile(sys, static_cast<int>(p), m, budget);
      for (const auto& t : st.tiles) {
        if (t.proto != static_cast<int>(p)) continue;
        Vec v = detail::solve_fixed_offset(mm, t.offset);
        Tile seed{static_cast<int>(p), v};
        if (locate(tile_support(sys.protos, seed), Vec::zero(sys.dim)) == Location::Inside) return {seed, m};
      }
    }
  }
  throw Error(ErrorKind::NoSeedFound, "no interior fixed seed with period <= " + std::to_string(k_max));
}

/// S^(j*period)(seed): the j-th patch of the increasing sequence converging to
/// the fixed tiling.
inline Patch seed_patch(const SubstitutionSystem& sys, const Seed& seed, int j, std::size_t budget = kDefaultBudget) {
  const int k = j * seed.period;
  Patch st = supertile(sys, seed.tile.proto, k, budget);
  return st.translated(sys.map.power(k).apply(seed.tile.offset));
}

/// Squared distance from the origin to the boundary of supp(seed).
inline FieldElem seed_margin2(const SubstitutionSystem& sys, const Seed& seed) {
  Support s = tile_support(sys.protos, seed.tile);
  Vec o = Vec::zero(sys.dim);
  if (sys.dim == 1) return min(s.lo() * s.lo(), s.hi() * s.hi());
  FieldElem best = segment_dist2(s.vertex(0), s.vertex(1), o);
  for (std::size_t i = 1; i < s.size(); ++i) best = min(best, segment_dist2(s.vertex(i), s.vertex(i + 1), o));
  return best;
}

/// Smallest seed patch whose support contains the closed ball of squared
/// radius r2 around 0 with margin.
namespace detail {

// Bounding circle (center, radius) of each prototile support, in doubles.
inline std::vector<std::pair<std::array<double, 2>, double>> proto_circles(const Prototiles& protos) {
  std::vector<std::pair<std::array<double, 2>, double>> out;
  for (const auto& p : protos.tiles) {
    std::array<double, 2> c{0, 0};
    for (const auto& v : p.support.verts) {
      auto d = v.to_double();
      c[0] += d[0];
      c[1] += d[1];
    }
    c[0] /= static_cast<double>(p.support.verts.size());
    c[1] /= static_cast<double>(p.support.verts.size());
    double r = 0;
    for (const auto& v : p.support.verts) {
      auto d = v.to_double();
      r = std::max(r, std::hypot(d[0] - c[0], d[1] - c[1]));
    }
    out.emplace_back(c, r);
  }
  return out;
}

}  // namespace detail

/// The part of the fixed-point tiling around the origin that covers the
/// closed ball of squared radius r2: S^(jm)(t) for the smallest j whose seed
/// margin reaches r2, expanded from t with every sub-supertile whose image
/// misses the ball left out.
inline Patch seed_window(const SubstitutionSystem& sys, const Seed& seed, const FieldElem& r2,
                         std::size_t budget = kDefaultBudget) {
  FieldElem m2 = seed_margin2(sys, seed);
  FieldElem step = sys.lambda().pow(2 * seed.period);
  int j = 0;
  for (FieldElem reach = m2; (r2 - reach).sign() >= 0; reach *= step) ++j;
  const int k = j * seed.period;

  const double r = std::sqrt(std::max(0.0, r2.to_double()));
  const auto circles = detail::proto_circles(sys.protos);
  // M^L in doubles, for L = 0..k.
  std::vector<std::array<double, 4>> mpow;
  std::vector<double> lpow;
  for (int l = 0; l <= k; ++l) {
    SimilarityMap ml = sys.map.power(l);
    const double lam = ml.lambda.to_double();
    std::array<double, 4> m{lam, 0, 0, lam};
    if (sys.dim == 1) {
      m[0] = lam * ml.rotation[0][0].to_double();
    } else {
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          m[static_cast<std::size_t>(2 * a + b)] =
              lam * ml.rotation[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].to_double();
    }
    mpow.push_back(m);
    lpow.push_back(lam);
  }

  Patch out;
  std::function<void(const Tile&, int)> expand = [&](const Tile& t, int left) {
    if (left == 0) {
      if (out.tiles.size() >= budget) throw Error(ErrorKind::BudgetExceeded, "seed window exceeds the tile budget");
      out.tiles.push_back(t);
      return;
    }
    // S^left(t) covers M^left(supp t); keep it unless its bounding circle misses the ball.
    const auto& [c, rho] = circles[static_cast<std::size_t>(t.proto)];
    auto o = t.offset.to_double();
    const double x = o[0] + c[0], y = o[1] + c[1];
    const auto& m = mpow[static_cast<std::size_t>(left)];
    const double cx = m[0] * x + m[1] * y, cy = m[2] * x + m[3] * y;
    const double rad = lpow[static_cast<std::size_t>(left)] * rho;
    const double dist = std::hypot(cx, cy);
    if (dist - rad > r + 1e-9 * (dist + rad + 1)) return;
    for (const auto& child : sys.substitute(t)) expand(child, left - 1);
  };
  expand(seed.tile, k);
  return out.sort();
}

struct ConstantEstimate {
  CertInterval value;
  std::optional<FieldElem> exact;
  Rational rounded;  // value rounded up to a multiple of 1/1024
  Rational window_radius;
  std::size_t patches = 0;
};

namespace detail {

inline Rational round_up_1024(const Rational& x) {
  Rational y = x * 1024;
  Integer f = floor_rational(y);
  if (Rational(f) != y) f += 1;
  return Rational(f, 1024);
}

inline ConstantEstimate finish_estimate(const FieldElem& best, bool exact, double approx_best,
                                        const Rational& window, std::size_t patches) {
  ConstantEstimate e;
  e.window_radius = window;
  e.patches = patches;
  if (exact) {
    e.exact = best;
    e.value = best.approximate(64);
  } else {
    Rational q(approx_best);
    e.value = {q, q, 53};
  }
  e.rounded = round_up_1024(e.value.hi);
  return e;
}

// Ball patch sample set for the constants: all distinct ball patches with
// centers in the fixed central region of half-width `region`.
inline std::map<PatchKey, BallSample> central_patches(const Host& host, int dim, const Rational& region,
                                                      const FieldElem& r2) {
  if (dim == 1) return ball_patches_1d(host, FieldElem(-region), FieldElem(region), r2);
  return ball_patches_grid(host, Vec::zero(2), region, Rational(1, 2), r2);
}

inline FieldElem patch_diameter2(const Prototiles& protos, const Patch& p) {
  std::vector<Vec> pts;
  for (const auto& t : p.tiles)
    for (const auto& v : tile_support(protos, t).verts) pts.push_back(v);
  if (protos.dim == 1) {
    FieldElem lo = pts.front()[0], hi = pts.front()[0];
    for (const auto& v : pts) {
      lo = min(lo, v[0]);
      hi = max(hi, v[0]);
    }
    return (hi - lo) * (hi - lo);
  }
  return diameter2(pts);
}

}  // namespace detail

inline FieldElem patch_diameter2(const Prototiles& protos, const Patch& p) {
  return detail::patch_diameter2(protos, p);
}

namespace detail {

/// max over grid points x (spacing 1/4, |x| <= inner) of the smallest radius
/// of a ball around x containing some translate o + verts. That radius is
/// 1-Lipschitz in x, so blocks of grid points whose bound cannot beat the
/// running max are skipped, and a point stops searching once it is covered
/// within the running max.
inline double covering_need(const std::vector<std::array<double, 2>>& verts,
                            const std::vector<std::array<double, 2>>& occ, double inner) {
  if (occ.empty()) return std::numeric_limits<double>::infinity();
  double cx = 0, cy = 0;
  for (const auto& v : verts) {
    cx += v[0];
    cy += v[1];
  }
  cx /= static_cast<double>(verts.size());
  cy /= static_cast<double>(verts.size());
  double rho = 0;
  for (const auto& v : verts) rho = std::max(rho, std::hypot(v[0] - cx, v[1] - cy));
  const double h = 2;
  auto cell = [h](double t) { return static_cast<long>(std::floor(t / h)); };
  std::map<std::pair<long, long>, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < occ.size(); ++i) buckets[{cell(occ[i][0] + cx), cell(occ[i][1] + cy)}].push_back(i);
  const long max_ring = cell(4 * inner) + 2;

  // Smallest covering radius at (x, y), or any value <= stop once that is certain.
  auto need_at = [&](double x, double y, double stop) {
    double need = std::numeric_limits<double>::infinity();
    const long ix = cell(x), iy = cell(y);
    for (long r = 0; r <= max_ring; ++r) {
      if (static_cast<double>(r - 1) * h - rho >= need) break;
      for (long a = -r; a <= r; ++a)
        for (long b = -r; b <= r; ++b) {
          if (std::max(std::labs(a), std::labs(b)) != r) continue;
          auto it = buckets.find({ix + a, iy + b});
          if (it == buckets.end()) continue;
          for (std::size_t i : it->second) {
            const auto& o = occ[i];
            if (std::hypot(x - o[0] - cx, y - o[1] - cy) - rho >= need) continue;
            double far = 0;
            for (const auto& q : verts) far = std::max(far, std::hypot(x - o[0] - q[0], y - o[1] - q[1]));
            need = std::min(need, far);
            if (need <= stop) return need;
          }
        }
    }
    return need;
  };

  const double step = 0.25;
  const long n = static_cast<long>(std::floor(inner / step));
  const long block = 8;  // grid points per block side
  double worst = 0;
  for (long bx = -n; bx <= n; bx += block)
    for (long by = -n; by <= n; by += block) {
      const long mx = std::min(bx + block / 2, n), my = std::min(by + block / 2, n);
      const double half = std::hypot(static_cast<double>(block), static_cast<double>(block)) * step;
      const double gc = need_at(static_cast<double>(mx) * step, static_cast<double>(my) * step, -1);
      if (gc + half <= worst) continue;
      for (long i = bx; i < std::min(bx + block, n + 1); ++i)
        for (long j = by; j < std::min(by + block, n + 1); ++j) {
          const double x = static_cast<double>(i) * step, y = static_cast<double>(j) * step;
          if (x * x + y * y > inner * inner) continue;
          worst = std::max(worst, need_at(x, y, worst));
        }
    }
  return worst;
}

}  // namespace detail

/// Linear-recurrence constant on the window of radius `window` around the
/// seed: for each sampled ball patch P of radius r, the smallest L such that
/// every ball of radius L diam(P) between occurrences contains a translate.
/// In d = 1 this is exact: max over consecutive occurrences of
/// (gap + diam) / (2 diam). In d = 2 the covering radius is evaluated on a
/// grid of spacing 1/4 over the inner half of the window.
inline ConstantEstimate estimate_recurrence_constant(const SubstitutionSystem& sys, const std::vector<Rational>& r_list,
                                                     const Rational& window, std::size_t budget = kDefaultBudget) {
  Seed seed = find_fixed_seed(sys, 4, budget);
  FieldElem w2(window * window);
  Patch host_patch = seed_window(sys, seed, w2, budget);
  Host host(sys.protos, host_patch);
  Patch win = extract_ball_patch(host, Vec::zero(sys.dim), w2);
  Host wh(sys.protos, win);
  Rational region = 0;
  for (const auto& r : r_list) region = std::max(region, r);
  region *= 2;

  FieldElem best;
  double best_d = 0;
  std::size_t count = 0;
  for (const auto& r : r_list) {
    auto samples = detail::central_patches(host, sys.dim, region, FieldElem(r * r));
    for (const auto& [key, s] : samples) {
      ++count;
      FieldElem diam2 = detail::patch_diameter2(sys.protos, s.patch);
      auto occ = occurrences(s.patch, wh);
      if (sys.dim == 1) {
        FieldElem lo = tile_support(sys.protos, s.patch.tiles.front()).lo();
        FieldElem hi = lo;
        for (const auto& t : s.patch.tiles) {
          Support sp = tile_support(sys.protos, t);
          lo = min(lo, sp.lo());
          hi = max(hi, sp.hi());
        }
        FieldElem diam = hi - lo;
        for (std::size_t i = 0; i + 1 < occ.size(); ++i) {
          FieldElem l = (occ[i + 1][0] - occ[i][0] + diam) / (FieldElem(2) * diam);
          if (l > best) best = l;
        }
        continue;
      }
      // d = 2: covering radius of the occurrence set over a grid.
      std::vector<std::array<double, 2>> verts;
      for (const auto& t : s.patch.tiles)
        for (const auto& v : tile_support(sys.protos, t).verts) verts.push_back(v.to_double());
      std::vector<std::array<double, 2>> occ_d;
      for (const auto& v : occ) occ_d.push_back(v.to_double());
      const double diam = std::sqrt(diam2.to_double());
      best_d = std::max(best_d, detail::covering_need(verts, occ_d, window.get_d() / 2) / diam);
    }
  }
  return detail::finish_estimate(best, sys.dim == 1, best_d, window, count);
}

/// Separation constant: max over sampled ball patches of R / (smallest nonzero
/// distance between two occurrences in the window).
inline ConstantEstimate estimate_separation_constant(const SubstitutionSystem& sys, const std::vector<Rational>& r_list,
                                                     const Rational& window, std::size_t budget = kDefaultBudget) {
  Seed seed = find_fixed_seed(sys, 4, budget);
  FieldElem w2(window * window);
  Patch host_patch = seed_window(sys, seed, w2, budget);
  Host host(sys.protos, host_patch);
  Patch win = extract_ball_patch(host, Vec::zero(sys.dim), w2);
  Host wh(sys.protos, win);
  Rational region = 0;
  for (const auto& r : r_list) region = std::max(region, r);
  region *= 2;

  // Track the max of R^2 / dist^2 exactly.
  FieldElem best2;
  std::size_t count = 0;
  for (const auto& r : r_list) {
    auto samples = detail::central_patches(host, sys.dim, region, FieldElem(r * r));
    for (const auto& [key, s] : samples) {
      ++count;
      auto occ = occurrences(s.patch, wh);
      std::optional<FieldElem> dmin;
      if (sys.dim == 1) {
        for (std::size_t i = 0; i + 1 < occ.size(); ++i) {
          FieldElem d = occ[i + 1][0] - occ[i][0];
          if (!dmin || (d * d - *dmin).sign() < 0) dmin = d * d;
        }
      } else {
        std::vector<std::array<double, 2>> occ_d;
        for (const auto& v : occ) occ_d.push_back(v.to_double());
        for (std::size_t i = 0; i < occ.size(); ++i)
          for (std::size_t j = i + 1; j < occ.size(); ++j) {
            double dx = occ_d[i][0] - occ_d[j][0], dy = occ_d[i][1] - occ_d[j][1];
            if (dmin && dx * dx + dy * dy > dmin->to_double() * (1 + 1e-9) + 1e-9) continue;
            FieldElem d2 = dist2(occ[i], occ[j]);
            if (!dmin || (d2 - *dmin).sign() < 0) dmin = d2;
          }
      }
      if (!dmin) continue;
      FieldElem ratio = FieldElem(r * r) / *dmin;
      if (ratio > best2) best2 = ratio;
    }
  }
  ConstantEstimate e;
  e.window_radius = window;
  e.patches = count;
  RInterval sq = sqrt_enclosure(best2.approximate(96).range(), 96);
  e.value = {sq.lo, sq.hi, 96};
  if (best2.is_rational()) {
    Rational q = best2.rational_value();
    if (mpz_perfect_square_p(q.get_num_mpz_t()) && mpz_perfect_square_p(q.get_den_mpz_t()))
      e.exact = FieldElem(Rational(Integer(sqrt(q.get_num())), Integer(sqrt(q.get_den()))));
  }
  e.rounded = detail::round_up_1024(e.value.hi);
  return e;
}

}  // namespace tilefreq
