#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tilefreq/freq.hpp"

namespace tilefreq {

/// Monic minimal polynomial over Q of an element of Q(lambda): the
/// characteristic polynomial of multiplication by x is a power of it.
inline QPoly min_poly_of(const FieldElem& x) {
  if (x.is_rational()) return QPoly{-x.rational_value(), Rational(1)};
  const Field& f = *x.field();
  const int n = f.degree();
  if (n > 16) throw Error(ErrorKind::PrecisionExhausted, "minimal polynomial degree above 16");
  std::vector<std::vector<Rational>> m(static_cast<std::size_t>(n), std::vector<Rational>(static_cast<std::size_t>(n)));
  FieldElem basis = f.one();
  for (int j = 0; j < n; ++j) {
    FieldElem col = x * basis;
    for (int i = 0; i < n; ++i) m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = col.coeff(static_cast<std::size_t>(i));
    basis = basis * f.lambda();
  }
  return poly::squarefree_part(poly::charpoly(m));
}

struct EqualityCertificate {
  QPoly min_poly;        // shared minimal polynomial
  CertInterval root1;    // enclosures of the two values
  CertInterval root2;
  bool equal = false;
};

/// Exact equality of two real algebraic numbers from possibly different
/// fields: same minimal polynomial, and an interval around both values
/// isolating a single root of it.
inline EqualityCertificate certify_equal(const FieldElem& a, const FieldElem& b) {
  EqualityCertificate c;
  c.min_poly = min_poly_of(a);
  if (c.min_poly != min_poly_of(b)) {
    c.root1 = a.approximate(64);
    c.root2 = b.approximate(64);
    return c;
  }
  for (int bits = 64; bits <= 1 << 14; bits *= 2) {
    c.root1 = a.approximate(bits);
    c.root2 = b.approximate(bits);
    if (c.root1.hi < c.root2.lo || c.root2.hi < c.root1.lo) return c;
    Rational lo = std::min(c.root1.lo, c.root2.lo), hi = std::max(c.root1.hi, c.root2.hi);
    if (poly::count_real_roots(c.min_poly, lo, hi) == 1) {
      c.equal = true;
      return c;
    }
  }
  throw Error(ErrorKind::PrecisionExhausted, "could not separate the roots of the shared minimal polynomial");
}

struct DependenceVerdict {
  bool dependent = false;
  int p = 0;
  int q = 0;
  int bound = 0;
  EqualityCertificate certificate;  // for dependent verdicts
  std::vector<std::pair<int, int>> convergents;
};

namespace detail {

/// Enclosure of log(x) for x > 1.
inline RInterval log_of(const FieldElem& x, int bits) {
  CertInterval c = x.approximate(bits);
  if (c.lo <= 1) throw Error(ErrorKind::InvalidSystem, "mult_dependent needs values > 1, got " + x.pretty());
  return log_enclosure(c.range(), bits);
}

/// Continued-fraction convergents q/p of a ratio known to lie in [lo, hi],
/// for as long as the partial quotients are determined by the interval.
/// When they are not, both branches are proposed and `ambiguous` is set.
inline std::vector<std::pair<int, int>> convergents(RInterval r, int bound, bool& ambiguous) {
  std::vector<std::pair<int, int>> out;  // (p, q) with q/p the convergent
  Integer h0 = 1, h1 = 0, k0 = 0, k1 = 1;  // h/k convergent numerators/denominators
  ambiguous = false;
  auto push = [&](const Integer& h, const Integer& k) {
    if (sgn(h) > 0 && sgn(k) > 0 && k <= bound && h <= bound) out.emplace_back(static_cast<int>(k.get_si()), static_cast<int>(h.get_si()));
  };
  for (int step = 0; step < 64; ++step) {
    Integer a = floor_rational(r.lo), b = floor_rational(r.hi);
    if (a != b) {
      ambiguous = true;
      for (Integer t = a; t <= b && t <= a + 1; ++t) push(t * h0 + h1, t * k0 + k1);
      break;
    }
    Integer h = a * h0 + h1, k = a * k0 + k1;
    if (k > bound) break;
    push(h, k);
    h1 = h0;
    h0 = h;
    k1 = k0;
    k0 = k;
    Rational flo = r.lo - a, fhi = r.hi - a;
    if (sgn(flo) == 0 && sgn(fhi) == 0) break;
    if (sgn(flo) <= 0) {
      ambiguous = true;
      break;
    }
    r = {Rational(1) / fhi, Rational(1) / flo};
  }
  return out;
}

}  // namespace detail

/// Searches positive p, q <= bound with lambda1^p = lambda2^q. Candidates
/// come from the continued fraction of log lambda1 / log lambda2 and from an
/// exhaustive scan filtered by certified logarithms; each is checked exactly.
/// The accepted pair is the smallest by (p + q, p), always coprime.
inline DependenceVerdict mult_dependent(const FieldElem& l1, const FieldElem& l2, int bound) {
  if (bound < 1) throw Error(ErrorKind::InvalidSystem, "bound must be >= 1");
  DependenceVerdict v;
  v.bound = bound;
  std::map<std::pair<int, int>, bool> tried;
  std::optional<std::pair<int, int>> best;
  auto consider = [&](int p, int q) {
    if (std::gcd(p, q) != 1 || tried.count({p, q})) return;
    auto cert = certify_equal(l1.pow(p), l2.pow(q));
    tried[{p, q}] = cert.equal;
    if (!cert.equal) return;
    if (!best || std::make_pair(p + q, p) < std::make_pair(best->first + best->second, best->first)) {
      best = {p, q};
      v.certificate = cert;
    }
  };

  bool resolved = false;
  for (int bits = 64; bits <= 1 << 12; bits *= 2) {
    RInterval ratio = divide_positive(detail::log_of(l1, bits), detail::log_of(l2, bits));
    bool ambiguous = false;
    v.convergents = detail::convergents(ratio, bound, ambiguous);
    for (auto [p, q] : v.convergents) consider(p, q);
    if (!ambiguous || best) {
      resolved = true;
      break;
    }
  }
  if (!resolved) throw Error(ErrorKind::PrecisionExhausted, "log ratio convergents stayed ambiguous");

  const RInterval g1 = detail::log_of(l1, 128), g2 = detail::log_of(l2, 128);
  for (int p = 1; p <= bound; ++p)
    for (int q = 1; q <= bound; ++q)
      if (overlaps(g1 * Rational(p), g2 * Rational(q))) consider(p, q);

  if (best) {
    v.dependent = true;
    v.p = best->first;
    v.q = best->second;
  }
  return v;
}

inline std::string to_text(const DependenceVerdict& v) {
  std::ostringstream os;
  if (!v.dependent) {
    os << "IndependentUpTo(" << v.bound << ")\n";
    return os.str();
  }
  os << "Dependent(" << v.p << "," << v.q << ")\n";
  os << "min_poly";
  for (const auto& c : v.certificate.min_poly) os << " " << format_rational(c);
  os << "\n";
  os << "root1 [" << format_rational(v.certificate.root1.lo) << ", " << format_rational(v.certificate.root1.hi) << "]\n";
  os << "root2 [" << format_rational(v.certificate.root2.lo) << ", " << format_rational(v.certificate.root2.hi) << "]\n";
  return os.str();
}

struct ConsistencyWitness {
  PatchKey first;
  PatchKey second;
  int dk1 = 0;  // k1 - k1'
  int dk2 = 0;  // k2 - k2'
  bool holds = false;
};

struct ConsistencyReport {
  enum class Verdict { ConsistentWithDependence, NoWitnessFound, ContradictionWitness };
  Verdict verdict = Verdict::NoWitnessFound;
  int p = 0;
  int q = 0;
  std::size_t matched = 0;
  std::vector<ConsistencyWitness> witnesses;  // one per distinct exponent relation
};

/// Matches entries by key. Two patches with the same pair of f classes but
/// different levels force lambda1^(k1 - k1') = lambda2^(k2 - k2'), which is
/// checked exactly.
inline ConsistencyReport spectra_consistency(const SpectrumReport& s1, const SpectrumReport& s2) {
  if (s1.universe != s2.universe)
    throw Error(ErrorKind::EmptyIntersection, "reports are over different prototile tables");
  struct Row {
    PatchKey key;
    int k1, k2;
  };
  std::map<std::pair<std::size_t, std::size_t>, std::vector<Row>> groups;
  ConsistencyReport out;
  for (const auto& e1 : s1.entries) {
    auto j = s2.find(e1.key);
    if (!j) continue;
    const auto& e2 = s2.entries[*j];
    auto c1 = s1.f_class(e1), c2 = s2.f_class(e2);
    if (!c1 || !c2) continue;
    ++out.matched;
    groups[{*c1, *c2}].push_back({e1.key, e1.k, e2.k});
  }
  if (out.matched == 0) throw Error(ErrorKind::EmptyIntersection, "no common patch keys");

  std::map<std::pair<int, int>, std::size_t> seen;  // relation -> witness index
  for (const auto& [cls, rows] : groups) {
    for (std::size_t a = 0; a < rows.size(); ++a)
      for (std::size_t b = a + 1; b < rows.size(); ++b) {
        int d1 = rows[a].k1 - rows[b].k1, d2 = rows[a].k2 - rows[b].k2;
        if (d1 == 0 && d2 == 0) continue;
        if (d1 < 0 || (d1 == 0 && d2 < 0)) {
          d1 = -d1;
          d2 = -d2;
        }
        if (seen.count({d1, d2})) continue;
        ConsistencyWitness w{rows[a].key, rows[b].key, d1, d2, false};
        if (d1 > 0 && d2 > 0) w.holds = certify_equal(s1.lambda.pow(d1), s2.lambda.pow(d2)).equal;
        seen[{d1, d2}] = out.witnesses.size();
        out.witnesses.push_back(std::move(w));
      }
  }
  if (out.witnesses.empty()) return out;
  bool all = std::all_of(out.witnesses.begin(), out.witnesses.end(), [](const auto& w) { return w.holds; });
  if (!all) {
    out.verdict = ConsistencyReport::Verdict::ContradictionWitness;
    return out;
  }
  const auto& w = out.witnesses.front();
  const int g = std::gcd(w.dk1, w.dk2);
  out.verdict = ConsistencyReport::Verdict::ConsistentWithDependence;
  out.p = w.dk1 / g;
  out.q = w.dk2 / g;
  return out;
}

inline std::string to_text(const ConsistencyReport& r) {
  std::ostringstream os;
  switch (r.verdict) {
    case ConsistencyReport::Verdict::ConsistentWithDependence:
      os << "ConsistentWithDependence(" << r.p << "," << r.q << ")\n";
      break;
    case ConsistencyReport::Verdict::NoWitnessFound:
      os << "NoWitnessFound\n";
      break;
    case ConsistencyReport::Verdict::ContradictionWitness:
      os << "ContradictionWitness\n";
      break;
  }
  os << "matched " << r.matched << "\n";
  for (const auto& w : r.witnesses)
    os << "  lambda1^" << w.dk1 << " = lambda2^" << w.dk2 << (w.holds ? " holds" : " fails") << "\n    " << w.first
       << "\n    " << w.second << "\n";
  return os.str();
}

}  // namespace tilefreq
