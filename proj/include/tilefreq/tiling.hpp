#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tilefreq/geom.hpp"

namespace tilefreq {

struct Prototile {
  std::string label;
  Support support;
};

/// Prototile table shared by every patch of one tiling system.
struct Prototiles {
  std::vector<Prototile> tiles;
  int dim = 1;
  const Field* field = nullptr;

  std::size_t size() const { return tiles.size(); }
  const Prototile& operator[](int id) const { return tiles.at(static_cast<std::size_t>(id)); }
  int field_degree() const { return field ? field->degree() : 1; }

  std::optional<int> id_of(const std::string& label) const {
    for (std::size_t i = 0; i < tiles.size(); ++i)
      if (tiles[i].label == label) return static_cast<int>(i);
    return std::nullopt;
  }

  /// Serialization of labels and supports; two tables with equal fingerprints
  /// describe the same patch universe.
  std::string fingerprint() const {
    std::string s = "d" + std::to_string(dim);
    for (const auto& p : tiles) {
      s += "|" + p.label + ":";
      for (const auto& v : p.support.verts) s += v.to_string(field_degree());
    }
    return s;
  }

  double max_diameter() const {
    double best = 0;
    for (const auto& p : tiles) best = std::max(best, std::sqrt(diameter2(p.support.verts).to_double()));
    return best;
  }
};

struct Tile {
  int proto = 0;
  Vec offset;

  friend bool operator==(const Tile& a, const Tile& b) { return a.proto == b.proto && a.offset == b.offset; }
};

inline int tile_compare(const Tile& a, const Tile& b) {
  if (a.proto != b.proto) return a.proto < b.proto ? -1 : 1;
  return Vec::lex_compare(a.offset, b.offset);
}

struct TileHash {
  std::size_t operator()(const Tile& t) const noexcept { return t.offset.hash() * 7919 + static_cast<std::size_t>(t.proto); }
};

inline Support tile_support(const Prototiles& protos, const Tile& t) {
  return translate(protos[t.proto].support, t.offset);
}

/// Finite set of tiles with an optional reference point (the ball center for
/// ball patches) and an optional marked center tile (coronas).
struct Patch {
  std::vector<Tile> tiles;
  std::optional<Vec> ref;
  std::optional<std::size_t> center;

  std::size_t size() const { return tiles.size(); }
  bool empty() const { return tiles.empty(); }

  /// Sorts tiles by (proto id, offset lex) and keeps `center` pointing at the
  /// same tile.
  Patch& sort() {
    std::optional<Tile> c;
    if (center) c = tiles[*center];
    std::sort(tiles.begin(), tiles.end(), [](const Tile& a, const Tile& b) { return tile_compare(a, b) < 0; });
    if (c) center = static_cast<std::size_t>(std::find(tiles.begin(), tiles.end(), *c) - tiles.begin());
    return *this;
  }

  Patch translated(const Vec& v) const {
    Patch r = *this;
    for (auto& t : r.tiles) t.offset = t.offset + v;
    if (r.ref) r.ref = *r.ref + v;
    return r;
  }

  /// The lexicographically minimal tile offset; used as canonical anchor and
  /// as the reference point of patches that carry none.
  Vec anchor() const {
    Vec best = tiles.front().offset;
    for (const auto& t : tiles)
      if (Vec::lex_compare(t.offset, best) < 0) best = t.offset;
    return best;
  }
};

using PatchKey = std::string;

/// Canonical form: translate the lex-minimal offset to 0, sort tiles.
inline Patch canonical(const Patch& p) {
  Patch r = p.translated(-p.anchor());
  r.sort();
  return r;
}

/// Translation-invariant key; equal keys iff the patches (with their ref
/// points and marked centers) differ by a translation.
inline PatchKey patch_key(const Prototiles& protos, const Patch& p, bool with_ref = true) {
  if (p.empty()) return "empty";
  Patch c = canonical(p);
  const int n = protos.field_degree();
  std::string key;
  if (c.ref && with_ref) key += "ref=" + c.ref->to_string(n) + "|";
  for (std::size_t i = 0; i < c.tiles.size(); ++i) {
    if (i) key += ";";
    if (c.center && *c.center == i) key += "*";
    key += protos[c.tiles[i].proto].label + "@" + c.tiles[i].offset.to_string(n);
  }
  return key;
}

/// Index over a finite host patch: exact tile lookup plus a coarse spatial
/// grid on floating-point bounding boxes (used only to prune exact tests).
class Host {
 public:
  Host(const Prototiles& protos, Patch patch) : protos_(&protos), patch_(std::move(patch)) {
    const std::size_t n = patch_.tiles.size();
    supports_.reserve(n);
    boxes_.reserve(n);
    by_proto_.assign(protos.size(), {});
    cell_ = std::max(protos.max_diameter(), 1e-6);
    for (std::size_t i = 0; i < n; ++i) {
      const Tile& t = patch_.tiles[i];
      supports_.push_back(tile_support(protos, t));
      boxes_.push_back(box_of(supports_.back()));
      lookup_.emplace(t, i);
      by_proto_[static_cast<std::size_t>(t.proto)].push_back(i);
      const auto& b = boxes_.back();
      for (auto cx = cell_index(b[0]); cx <= cell_index(b[1]); ++cx)
        for (auto cy = cell_index(b[2]); cy <= cell_index(b[3]); ++cy) grid_[grid_key(cx, cy)].push_back(i);
    }
  }

  const Prototiles& protos() const { return *protos_; }
  const Patch& patch() const { return patch_; }
  const std::vector<Tile>& tiles() const { return patch_.tiles; }
  const Tile& tile(std::size_t i) const { return patch_.tiles[i]; }
  const Support& support(std::size_t i) const { return supports_[i]; }
  std::size_t size() const { return patch_.tiles.size(); }
  const std::vector<std::size_t>& tiles_of(int proto) const { return by_proto_[static_cast<std::size_t>(proto)]; }

  std::optional<std::size_t> find(const Tile& t) const {
    if (auto it = lookup_.find(t); it != lookup_.end()) return it->second;
    return std::nullopt;
  }

  /// Candidate tiles whose (inflated) bounding box meets the given box.
  std::vector<std::size_t> candidates(double x0, double x1, double y0, double y1) const {
    std::vector<std::size_t> out;
    for (auto cx = cell_index(x0); cx <= cell_index(x1); ++cx)
      for (auto cy = cell_index(y0); cy <= cell_index(y1); ++cy) {
        auto it = grid_.find(grid_key(cx, cy));
        if (it == grid_.end()) continue;
        for (std::size_t i : it->second) {
          const auto& b = boxes_[i];
          if (b[1] < x0 || b[0] > x1 || b[3] < y0 || b[2] > y1) continue;
          out.push_back(i);
        }
      }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Indices of tiles meeting the closed ball, in host order.
  std::vector<std::size_t> meeting_ball(const Vec& y, const FieldElem& r2) const {
    auto c = y.to_double();
    double r = std::sqrt(std::max(0.0, r2.to_double())) * (1 + 1e-9) + slack(c);
    std::vector<std::size_t> out;
    for (std::size_t i : candidates(c[0] - r, c[0] + r, c[1] - r, c[1] + r))
      if (meets_closed_ball(supports_[i], y, r2)) out.push_back(i);
    return out;
  }

  /// Indices of tiles whose closed support meets s.
  std::vector<std::size_t> meeting_support(const Support& s) const {
    auto b = box_of(s);
    std::vector<std::size_t> out;
    for (std::size_t i : candidates(b[0], b[1], b[2], b[3]))
      if (supports_meet(supports_[i], s)) out.push_back(i);
    return out;
  }

  /// Boundary of the union of the host supports: segments in d = 2, points
  /// (as degenerate segments) in d = 1. Built on first use.
  const std::vector<std::pair<Vec, Vec>>& boundary() const {
    std::call_once(*boundary_once_, [this] { build_boundary(); });
    return boundary_;
  }

  /// Is some boundary point of the host within squared distance r2 of y?
  bool boundary_within(const Vec& y, const FieldElem& r2) const {
    const auto& bd = boundary();
    auto c = y.to_double();
    double r = std::sqrt(std::max(0.0, r2.to_double())) * (1 + 1e-9) + slack(c);
    for (std::size_t i : boundary_candidates(c[0] - r, c[0] + r, c[1] - r, c[1] + r)) {
      const auto& [a, b] = bd[i];
      if (protos_->dim == 1) {
        FieldElem d = a[0] - y[0];
        if ((d * d - r2).sign() <= 0) return true;
      } else if (segment_within(a, b, y, r2)) {
        return true;
      }
    }
    return false;
  }

  /// Does the closed support s meet the host boundary?
  bool touches_boundary(const Support& s) const {
    const auto& bd = boundary();
    auto b = box_of(s);
    for (std::size_t i : boundary_candidates(b[0], b[1], b[2], b[3])) {
      const auto& [p, q] = bd[i];
      if (protos_->dim == 1) {
        if (p[0] == s.lo() || p[0] == s.hi() || locate(s, p) != Location::Outside) return true;
        continue;
      }
      for (std::size_t e = 0; e < s.size(); ++e)
        if (segments_meet(p, q, s.vertex(e), s.vertex(e + 1))) return true;
      if (locate(s, p) != Location::Outside) return true;
    }
    return false;
  }

  /// Indices of tiles whose closed support contains x.
  std::vector<std::size_t> containing(const Vec& x) const {
    auto c = x.to_double();
    double s = slack(c);
    std::vector<std::size_t> out;
    for (std::size_t i : candidates(c[0] - s, c[0] + s, c[1] - s, c[1] + s))
      if (locate(supports_[i], x) != Location::Outside) out.push_back(i);
    return out;
  }

 private:
  static double slack(const std::array<double, 2>& c) {
    return 1e-7 * (1 + std::fabs(c[0]) + std::fabs(c[1]));
  }

  std::array<double, 4> box_of(const Support& s) const {
    std::array<double, 4> b{1e300, -1e300, 1e300, -1e300};
    for (const auto& v : s.verts) {
      auto d = v.to_double();
      b[0] = std::min(b[0], d[0]);
      b[1] = std::max(b[1], d[0]);
      b[2] = std::min(b[2], d[1]);
      b[3] = std::max(b[3], d[1]);
    }
    double sl = slack({b[1], b[3]}) + slack({b[0], b[2]});
    b[0] -= sl;
    b[1] += sl;
    b[2] -= sl;
    b[3] += sl;
    return b;
  }

  void build_boundary() const {
    if (protos_->dim == 1) {
      std::unordered_map<FieldElem, int> net;
      for (const auto& sp : supports_) {
        net[sp.lo()] += 1;
        net[sp.hi()] -= 1;
      }
      for (const auto& [x, n] : net)
        if (n != 0) boundary_.emplace_back(Vec(x), Vec(x));
      std::sort(boundary_.begin(), boundary_.end(),
                [](const auto& a, const auto& b) { return Vec::lex_compare(a.first, b.first) < 0; });
    } else {
      boundary_ = union_boundary(supports_);
    }
    for (std::size_t i = 0; i < boundary_.size(); ++i) {
      auto a = boundary_[i].first.to_double(), b = boundary_[i].second.to_double();
      double sl = slack(a) + slack(b);
      double x0 = std::min(a[0], b[0]) - sl, x1 = std::max(a[0], b[0]) + sl;
      double y0 = std::min(a[1], b[1]) - sl, y1 = std::max(a[1], b[1]) + sl;
      boundary_boxes_.push_back({x0, x1, y0, y1});
      for (auto cx = cell_index(x0); cx <= cell_index(x1); ++cx)
        for (auto cy = cell_index(y0); cy <= cell_index(y1); ++cy) boundary_grid_[grid_key(cx, cy)].push_back(i);
    }
  }

  std::vector<std::size_t> boundary_candidates(double x0, double x1, double y0, double y1) const {
    std::vector<std::size_t> out;
    for (auto cx = cell_index(x0); cx <= cell_index(x1); ++cx)
      for (auto cy = cell_index(y0); cy <= cell_index(y1); ++cy) {
        auto it = boundary_grid_.find(grid_key(cx, cy));
        if (it == boundary_grid_.end()) continue;
        for (std::size_t i : it->second) {
          const auto& b = boundary_boxes_[i];
          if (b[1] < x0 || b[0] > x1 || b[3] < y0 || b[2] > y1) continue;
          out.push_back(i);
        }
      }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::int64_t cell_index(double x) const { return static_cast<std::int64_t>(std::floor(x / cell_)); }
  static std::int64_t grid_key(std::int64_t cx, std::int64_t cy) { return cx * 1000003LL + cy; }

  const Prototiles* protos_;
  Patch patch_;
  std::vector<Support> supports_;
  std::vector<std::array<double, 4>> boxes_;
  std::unordered_map<Tile, std::size_t, TileHash> lookup_;
  std::vector<std::vector<std::size_t>> by_proto_;
  std::unordered_map<std::int64_t, std::vector<std::size_t>> grid_;
  double cell_ = 1;
  std::unique_ptr<std::once_flag> boundary_once_ = std::make_unique<std::once_flag>();
  mutable std::vector<std::pair<Vec, Vec>> boundary_;
  mutable std::vector<std::array<double, 4>> boundary_boxes_;
  mutable std::unordered_map<std::int64_t, std::vector<std::size_t>> boundary_grid_;
};

/// T[[B(y)]] - y: all host tiles meeting the closed ball, recentered so the
/// ball center is the origin (ref point 0).
inline Patch extract_ball_patch(const Host& host, const Vec& y, const FieldElem& r2) {
  auto idx = host.meeting_ball(y, r2);
  if (host.containing(y).empty() || host.boundary_within(y, r2))
    throw Error(ErrorKind::BallNotCovered, "ball around " + y.to_string(host.protos().field_degree()) +
                                               " is not covered by the host patch");
  Patch p;
  for (std::size_t i : idx) p.tiles.push_back({host.tile(i).proto, host.tile(i).offset - y});
  p.ref = Vec::zero(y.dim);
  return p.sort();
}

inline Patch extract_ball_patch(const Prototiles& protos, const Patch& host, const Vec& y, const FieldElem& r2) {
  return extract_ball_patch(Host(protos, host), y, r2);
}

/// A tile's corona lies in the host iff the tile stays off the host boundary.
inline bool corona_complete(const Host& host, std::size_t i) { return !host.touches_boundary(host.support(i)); }

/// Corona of host tile i, translated so that tile's offset is 0, center marked.
inline Patch corona_at(const Host& host, std::size_t i) {
  if (!corona_complete(host, i))
    throw Error(ErrorKind::BoundaryTile, "tile lies on the boundary of the host patch");
  Patch p;
  const Vec& o = host.tile(i).offset;
  for (std::size_t j : host.meeting_support(host.support(i))) {
    if (j == i) p.center = p.tiles.size();
    p.tiles.push_back({host.tile(j).proto, host.tile(j).offset - o});
  }
  return p.sort();
}

inline Patch corona_of(const Host& host, const Tile& t) {
  auto i = host.find(t);
  if (!i) throw Error(ErrorKind::TileNotInHost, "tile is not part of the host patch");
  return corona_at(host, *i);
}

/// All v with P + v contained in the host (tile-set inclusion), sorted.
inline std::vector<Vec> occurrences(const Patch& p, const Host& host) {
  std::vector<Vec> out;
  if (p.empty()) return out;
  const Tile& anchor = p.tiles.front();
  if (static_cast<std::size_t>(anchor.proto) >= host.protos().size()) return out;
  for (std::size_t hi : host.tiles_of(anchor.proto)) {
    Vec v = host.tile(hi).offset - anchor.offset;
    bool all = true;
    for (std::size_t k = 1; k < p.tiles.size() && all; ++k)
      all = host.find({p.tiles[k].proto, p.tiles[k].offset + v}).has_value();
    if (all) out.push_back(std::move(v));
  }
  std::sort(out.begin(), out.end(), [](const Vec& a, const Vec& b) { return Vec::lex_compare(a, b) < 0; });
  return out;
}

inline std::vector<Vec> occurrences(const Prototiles& protos, const Patch& p, const Patch& host) {
  return occurrences(p, Host(protos, host));
}

/// Do the two patches agree on the closed ball of squared radius r2 around
/// their ref points?
inline bool patch_equal_on_ball(const Prototiles& protos, const Patch& p1, const Patch& p2, const FieldElem& r2) {
  if (!p1.ref || !p2.ref) throw Error(ErrorKind::BallNotCovered, "patch_equal_on_ball needs ref points");
  Patch a = extract_ball_patch(Host(protos, p1), *p1.ref, r2);
  Patch b = extract_ball_patch(Host(protos, p2), *p2.ref, r2);
  return patch_key(protos, a) == patch_key(protos, b);
}

/// Owner of a point among the tiles containing it: the lex-minimal
/// (proto id, offset). Returns index into `host`.
inline std::optional<std::size_t> owner_of(const Host& host, const Vec& x) {
  auto idx = host.containing(x);
  if (idx.empty()) return std::nullopt;
  std::size_t best = idx.front();
  for (std::size_t i : idx)
    if (tile_compare(host.tile(i), host.tile(best)) < 0) best = i;
  return best;
}

/// Finite-window periodicity test: a nonzero v with |v|^2 <= search_r2 such
/// that the ball patches of twice that radius at ref and ref + v agree. The
/// larger ball keeps local repetitions (squares, cubes) from passing as periods.
inline std::optional<Vec> is_periodic_window(const Prototiles& protos, const Patch& p, const FieldElem& search_r2) {
  Host host(protos, p);
  Vec y = p.ref ? *p.ref : p.anchor();
  const FieldElem ball_r2 = search_r2 * FieldElem(4);
  try {
    (void)extract_ball_patch(host, y, search_r2 * FieldElem(9));
  } catch (const Error&) {
    throw Error(ErrorKind::WindowTooSmall, "patch does not cover a ball of radius 3*sqrt(search_r2)");
  }
  auto own = owner_of(host, y);
  if (!own) throw Error(ErrorKind::WindowTooSmall, "ref point not covered");
  const Tile& t0 = host.tile(*own);
  std::vector<Vec> cands;
  for (std::size_t i : host.tiles_of(t0.proto)) {
    Vec v = host.tile(i).offset - t0.offset;
    if (v.is_zero() || (norm2(v) - search_r2).sign() > 0) continue;
    cands.push_back(v);
  }
  // Shortest first; among equal lengths the lex-greatest (positive direction).
  std::sort(cands.begin(), cands.end(), [](const Vec& a, const Vec& b) {
    int c = (norm2(a) - norm2(b)).sign();
    if (c != 0) return c < 0;
    return Vec::lex_compare(a, b) > 0;
  });
  const PatchKey base = patch_key(protos, extract_ball_patch(host, y, ball_r2));
  for (const Vec& v : cands)
    if (patch_key(protos, extract_ball_patch(host, y + v, ball_r2)) == base) return v;
  return std::nullopt;
}

/// Sign of x + c*sqrt(r2) for a small integer c, exact.
inline int sign_plus_root(const FieldElem& x, int c, const FieldElem& r2) {
  if (c == 0 || r2.is_zero()) return x.sign();
  if (c < 0) return -sign_plus_root(-x, -c, r2);
  if (x.sign() >= 0) return 1;
  return (FieldElem(c * c) * r2 - x * x).sign();
}

struct BallSample {
  Patch patch;  // recentered, ref = 0
  Vec center;
};

/// Distinct ball patches (keyed by tile set, ref dropped) over all centers y
/// in [lo, hi]. The ball patch only changes when y +- r crosses a tile
/// endpoint, so sampling every breakpoint and one point strictly inside every
/// gap between breakpoints is exhaustive.
inline std::map<PatchKey, BallSample> ball_patches_1d(const Host& host, const FieldElem& lo, const FieldElem& hi,
                                                      const FieldElem& r2) {
  struct Break {
    FieldElem x;
    int s;  // value is x + s*r
  };
  const double rd = std::sqrt(std::max(0.0, r2.to_double()));
  const double dlo = lo.to_double() - rd - 1, dhi = hi.to_double() + rd + 1;
  std::vector<Break> bps{{lo, 0}, {hi, 0}};
  for (std::size_t i = 0; i < host.size(); ++i)
    for (const FieldElem& e : {host.support(i).lo(), host.support(i).hi()}) {
      double ed = e.to_double();
      if (ed < dlo || ed > dhi) continue;
      for (int s : {-1, 1}) {
        if (sign_plus_root(e - lo, s, r2) <= 0 || sign_plus_root(hi - e, -s, r2) <= 0) continue;
        bps.push_back({e, s});
      }
    }
  auto cmp = [&](const Break& a, const Break& b) { return sign_plus_root(a.x - b.x, a.s - b.s, r2); };
  std::sort(bps.begin(), bps.end(), [&](const Break& a, const Break& b) { return cmp(a, b) < 0; });
  std::vector<Break> uniq;
  for (auto& b : bps)
    if (uniq.empty() || cmp(uniq.back(), b) != 0) uniq.push_back(b);

  std::optional<FieldElem> r;
  if (r2.is_rational() && r2.sign() >= 0) {
    Rational q = r2.rational_value();
    Integer n = q.get_num(), d = q.get_den();
    if (mpz_perfect_square_p(n.get_mpz_t()) && mpz_perfect_square_p(d.get_mpz_t())) {
      Integer sn = sqrt(n), sd = sqrt(d);
      r = FieldElem(Rational(sn, sd));
    }
  }
  auto value = [&](const Break& b) -> std::optional<FieldElem> {
    if (b.s == 0) return b.x;
    if (!r) return std::nullopt;
    return b.x + FieldElem(b.s) * *r;
  };
  auto enclose = [&](const Break& b, int bits) {
    RInterval x = b.x.approximate(bits).range();
    if (b.s == 0) return x;
    RInterval rr = sqrt_enclosure(r2.approximate(bits).range(), bits);
    return b.s > 0 ? x + rr : x - rr;
  };

  std::vector<FieldElem> centers;
  for (std::size_t i = 0; i < uniq.size(); ++i) {
    auto v = value(uniq[i]);
    if (v) centers.push_back(*v);
    if (i + 1 == uniq.size()) break;
    auto w = value(uniq[i + 1]);
    if (v && w) {
      centers.push_back((*v + *w) * FieldElem(Rational(1, 2)));
      continue;
    }
    for (int bits = 64;; bits *= 2) {
      if (bits > 1 << 16) throw Error(ErrorKind::PrecisionExhausted, "cannot separate ball breakpoints");
      RInterval a = enclose(uniq[i], bits), b = enclose(uniq[i + 1], bits);
      if (!(a.hi < b.lo)) continue;
      FieldElem mid(Rational((a.hi + b.lo) / 2));
      if (sign_plus_root(mid - uniq[i].x, -uniq[i].s, r2) > 0 && sign_plus_root(uniq[i + 1].x - mid, uniq[i + 1].s, r2) > 0) {
        centers.push_back(mid);
        break;
      }
    }
  }

  std::map<PatchKey, BallSample> out;
  for (const FieldElem& y : centers) {
    Vec c(y);
    Patch p = extract_ball_patch(host, c, r2);
    PatchKey key = patch_key(host.protos(), p, false);
    out.try_emplace(std::move(key), BallSample{std::move(p), c});
  }
  return out;
}

/// Distinct ball patches over a rational grid of centers (spacing `step`)
/// inside the closed disk of radius `half_width` around `origin`.
inline std::map<PatchKey, BallSample> ball_patches_grid(const Host& host, const Vec& origin, const Rational& half_width,
                                                        const Rational& step, const FieldElem& r2) {
  std::map<PatchKey, BallSample> out;
  const Integer n = floor_rational(half_width / step);
  const long nl = n.get_si();
  for (long i = -nl; i <= nl; ++i)
    for (long j = -nl; j <= nl; ++j) {
      Rational dx = step * i, dy = step * j;
      if (dx * dx + dy * dy > half_width * half_width) continue;
      Vec c = origin + Vec(FieldElem(dx), FieldElem(dy));
      Patch p = extract_ball_patch(host, c, r2);
      PatchKey key = patch_key(host.protos(), p, false);
      out.try_emplace(std::move(key), BallSample{std::move(p), c});
    }
  return out;
}

}  // namespace tilefreq
