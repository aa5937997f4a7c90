#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tilefreq/poly.hpp"

namespace tilefreq {

/// Defining data of a real number field Q(lambda): an irreducible monic
/// integer polynomial and a rational interval isolating the root lambda > 1.
struct FieldSpec {
  std::vector<Integer> min_poly;  // lowest degree first, monic
  Rational root_lo;
  Rational root_hi;
};

/// Closed interval certified to contain a real value.
struct CertInterval {
  Rational lo;
  Rational hi;
  int precision_bits = 0;

  bool contains(const Rational& x) const { return lo <= x && x <= hi; }
  bool contains(const CertInterval& o) const { return lo <= o.lo && o.hi <= hi; }
  Rational width() const { return hi - lo; }
  double mid_double() const { return Rational((lo + hi) / 2).get_d(); }
  RInterval range() const { return {lo, hi}; }
};

class FieldElem;

/// A real number field Q(lambda). Instances are interned and never destroyed,
/// so elements may hold a plain pointer to their field.
class Field {
 public:
  static constexpr int kMaxDegree = 8;

  /// Validates the spec and returns the interned field.
  static const Field& make(const FieldSpec& spec);

  /// The rational field Q with lambda = value (degree-1 field x - value).
  static const Field& rational(const Rational& value) {
    if (value.get_den() != 1) throw Error(ErrorKind::InvalidSystem, "rational stretching factor must be an integer");
    return make(FieldSpec{{Integer(-value.get_num()), Integer(1)}, value, value});
  }

  int degree() const { return static_cast<int>(min_poly_.size()) - 1; }
  const std::vector<Integer>& min_poly() const { return spec_.min_poly; }
  const QPoly& min_qpoly() const { return min_poly_; }
  const FieldSpec& spec() const { return spec_; }

  FieldElem lambda() const;
  FieldElem zero() const;
  FieldElem one() const;
  FieldElem from_rational(const Rational& q) const;
  FieldElem from_coeffs(std::vector<Rational> c) const;

  /// Enclosure of lambda obtained by `level` deterministic bisection steps
  /// from the isolating interval (exact for rational lambda).
  RInterval root_enclosure(int level) const;

  /// Sign of sum c_i lambda^i for a trimmed coefficient vector of size >= 2.
  int sign_of(const QPoly& c) const;

  /// Enclosure of sum c_i lambda^i of width <= 2^-bits; a pure function of
  /// (c, bits), and nested in bits.
  CertInterval approximate(const QPoly& c, int bits) const;

  double to_double(const QPoly& c) const {
    double s = 0;
    for (std::size_t i = c.size(); i-- > 0;) s = s * lambda_d_ + c[i].get_d();
    return s;
  }

  /// Reduces a polynomial in lambda modulo the minimal polynomial.
  QPoly reduce(const QPoly& c) const {
    if (poly::degree(c) < degree()) return c;
    return poly::mod(c, min_poly_);
  }

  /// Inverse of a nonzero element by extended Euclid against the min poly.
  QPoly inverse(const QPoly& c) const;

  bool operator==(const Field& o) const { return this == &o; }

 private:
  explicit Field(FieldSpec spec);

  FieldSpec spec_;
  QPoly min_poly_;
  double lambda_d_ = 0;
  std::vector<double> pow_d_;
  Rational exact_root_;  // meaningful only for degree 1
  mutable std::mutex mu_;
  mutable std::vector<RInterval> levels_;
};

/// Element of Q(lambda) in power-basis coordinates. The coefficient vector is
/// kept trimmed, so equality is coefficient-wise and rationals never need a
/// field pointer. Elements with two or more coefficients always carry one.
class FieldElem {
 public:
  FieldElem() = default;
  FieldElem(const Field* f, QPoly c) : f_(f), c_(std::move(c)) {
    poly::trim(c_);
    if (c_.size() >= 2 && f_ == nullptr) throw std::logic_error("irrational FieldElem without field");
  }
  // NOLINTNEXTLINE(google-explicit-constructor)
  FieldElem(const Rational& q) {
    if (sgn(q) == 0) return;
    c_.push_back(q);
    c_[0].canonicalize();  // mpq_class(a, b) does not reduce
  }
  // NOLINTNEXTLINE(google-explicit-constructor)
  FieldElem(long v) : FieldElem(Rational(v)) {}
  // NOLINTNEXTLINE(google-explicit-constructor)
  FieldElem(int v) : FieldElem(Rational(v)) {}

  const Field* field() const { return f_; }
  const QPoly& coeffs() const { return c_; }
  /// Coefficient i, zero beyond the trimmed length.
  Rational coeff(std::size_t i) const { return i < c_.size() ? c_[i] : Rational(0); }
  bool is_zero() const { return c_.empty(); }
  bool is_rational() const { return c_.size() <= 1; }
  Rational rational_value() const {
    if (!is_rational()) throw std::logic_error("element is not rational");
    return c_.empty() ? Rational(0) : c_[0];
  }

  int sign() const {
    if (c_.empty()) return 0;
    if (c_.size() == 1) return sgn(c_[0]);
    return f_->sign_of(c_);
  }

  CertInterval approximate(int bits) const {
    if (c_.size() <= 1) {
      Rational v = c_.empty() ? Rational(0) : c_[0];
      return {v, v, bits};
    }
    return f_->approximate(c_, bits);
  }

  double to_double() const {
    if (c_.empty()) return 0.0;
    if (c_.size() == 1) return c_[0].get_d();
    return f_->to_double(c_);
  }

  FieldElem operator-() const {
    QPoly r(c_);
    for (auto& x : r) x = -x;
    return FieldElem(f_, std::move(r));
  }

  friend FieldElem operator+(const FieldElem& a, const FieldElem& b) {
    return FieldElem(pick(a, b), poly::add(a.c_, b.c_));
  }
  friend FieldElem operator-(const FieldElem& a, const FieldElem& b) {
    return FieldElem(pick(a, b), poly::sub(a.c_, b.c_));
  }
  friend FieldElem operator*(const FieldElem& a, const FieldElem& b) {
    if (a.c_.empty() || b.c_.empty()) return {};
    if (a.c_.size() == 1 && b.c_.size() == 1) return FieldElem(pick(a, b), QPoly{a.c_[0] * b.c_[0]});
    const Field* f = pick(a, b);
    return FieldElem(f, f->reduce(poly::mul(a.c_, b.c_)));
  }
  friend FieldElem operator/(const FieldElem& a, const FieldElem& b) { return a * b.inverse(); }

  FieldElem& operator+=(const FieldElem& o) { return *this = *this + o; }
  FieldElem& operator-=(const FieldElem& o) { return *this = *this - o; }
  FieldElem& operator*=(const FieldElem& o) { return *this = *this * o; }

  FieldElem inverse() const {
    if (c_.empty()) throw std::domain_error("division by zero in Q(lambda)");
    if (c_.size() == 1) return FieldElem(f_, QPoly{Rational(1) / c_[0]});
    return FieldElem(f_, f_->inverse(c_));
  }

  FieldElem pow(long e) const {
    if (e < 0) return inverse().pow(-e);
    FieldElem result(f_, QPoly{Rational(1)});
    FieldElem base = *this;
    while (e > 0) {
      if (e & 1) result = result * base;
      e >>= 1;
      if (e) base = base * base;
    }
    return result;
  }

  friend bool operator==(const FieldElem& a, const FieldElem& b) { return a.c_ == b.c_; }
  friend bool operator!=(const FieldElem& a, const FieldElem& b) { return !(a == b); }

  /// Real-order comparisons (exact).
  friend bool operator<(const FieldElem& a, const FieldElem& b) { return (a - b).sign() < 0; }
  friend bool operator>(const FieldElem& a, const FieldElem& b) { return (a - b).sign() > 0; }
  friend bool operator<=(const FieldElem& a, const FieldElem& b) { return (a - b).sign() <= 0; }
  friend bool operator>=(const FieldElem& a, const FieldElem& b) { return (a - b).sign() >= 0; }

  /// Lexicographic order on coefficient vectors (not the real order); used
  /// only for canonical, translation-compatible orderings.
  static int coeff_compare(const FieldElem& a, const FieldElem& b) {
    const std::size_t n = std::max(a.c_.size(), b.c_.size());
    for (std::size_t i = 0; i < n; ++i) {
      int c = cmp(a.coeff(i), b.coeff(i));
      if (c != 0) return c < 0 ? -1 : 1;
    }
    return 0;
  }

  std::size_t hash() const {
    std::size_t h = c_.size();
    for (const auto& x : c_) h = h * 1000003ULL ^ hash_rational(x);
    return h;
  }

  /// Coefficient list padded to `n` entries, space separated.
  std::string to_string(int n) const {
    std::string s;
    for (int i = 0; i < std::max(n, 1); ++i) {
      if (i) s += ' ';
      s += format_rational(coeff(static_cast<std::size_t>(i)));
    }
    return s;
  }

  /// Human-readable form such as "-1 + 2*L".
  std::string pretty() const {
    if (c_.empty()) return "0";
    std::string s;
    for (std::size_t i = 0; i < c_.size(); ++i) {
      if (sgn(c_[i]) == 0) continue;
      std::string term = format_rational(c_[i]);
      if (i >= 1) term += i == 1 ? "*L" : "*L^" + std::to_string(i);
      if (!s.empty()) s += term[0] == '-' ? " - " + term.substr(1) : " + " + term;
      else s = term;
    }
    return s;
  }

 private:
  static const Field* pick(const FieldElem& a, const FieldElem& b) {
    if (a.c_.size() >= 2) return a.f_;
    if (b.c_.size() >= 2) return b.f_;
    return a.f_ ? a.f_ : b.f_;
  }

  const Field* f_ = nullptr;
  QPoly c_;
};

inline std::ostream& operator<<(std::ostream& os, const FieldElem& x) { return os << x.pretty(); }

// ---------------------------------------------------------------------------

inline Field::Field(FieldSpec spec) : spec_(std::move(spec)), min_poly_(poly::from_integers(spec_.min_poly)) {
  if (degree() == 1) {
    exact_root_ = -min_poly_[0];
    lambda_d_ = exact_root_.get_d();
  } else {
    lambda_d_ = root_enclosure(80).mid().get_d();
  }
  pow_d_.resize(static_cast<std::size_t>(degree()));
  double p = 1.0;
  for (auto& x : pow_d_) {
    x = p;
    p *= lambda_d_;
  }
}

inline const Field& Field::make(const FieldSpec& spec) {
  static std::mutex registry_mu;
  static std::map<std::string, std::unique_ptr<Field>> registry;

  const int n = static_cast<int>(spec.min_poly.size()) - 1;
  if (n < 1) throw Error(ErrorKind::InvalidSystem, "minimal polynomial must have degree >= 1");
  if (spec.min_poly.back() != 1) throw Error(ErrorKind::InvalidSystem, "minimal polynomial must be monic");
  if (n > kMaxDegree) throw Error(ErrorKind::DegreeTooLarge, "field degree " + std::to_string(n) + " exceeds 8");
  if (spec.root_lo > spec.root_hi) throw Error(ErrorKind::AmbiguousRootInterval, "root interval is empty");

  std::ostringstream key;
  for (const auto& c : spec.min_poly) key << c.get_str() << ',';
  key << '|' << spec.root_lo.get_str() << ',' << spec.root_hi.get_str();

  std::lock_guard<std::mutex> lock(registry_mu);
  if (auto it = registry.find(key.str()); it != registry.end()) return *it->second;

  if (!poly::is_irreducible(spec.min_poly))
    throw Error(ErrorKind::ReducibleMinPoly, "minimal polynomial factors over Q");
  QPoly f = poly::from_integers(spec.min_poly);
  if (poly::count_real_roots(f, spec.root_lo, spec.root_hi) != 1)
    throw Error(ErrorKind::AmbiguousRootInterval, "root interval must isolate exactly one real root");

  // Certify lambda > 1 by bisecting until the enclosure clears 1.
  Rational lo = spec.root_lo, hi = spec.root_hi;
  for (int it = 0; it < 4096 && lo <= 1 && hi > 1; ++it) {
    if (sgn(poly::eval(f, Rational(1))) == 0) break;
    Rational mid = (lo + hi) / 2;
    int sm = sgn(poly::eval(f, mid));
    if (sm == 0) {
      lo = hi = mid;
      break;
    }
    if (poly::count_real_roots(f, lo, mid) == 1) hi = mid;
    else lo = mid;
  }
  if (!(lo > 1)) throw Error(ErrorKind::RootNotGreaterThanOne, "isolated root is not greater than 1");

  auto field = std::unique_ptr<Field>(new Field(spec));
  const Field& ref = *field;
  registry.emplace(key.str(), std::move(field));
  return ref;
}

inline FieldElem Field::lambda() const {
  if (degree() == 1) return FieldElem(this, QPoly{exact_root_});
  return FieldElem(this, QPoly{Rational(0), Rational(1)});
}
inline FieldElem Field::zero() const { return FieldElem(this, {}); }
inline FieldElem Field::one() const { return FieldElem(this, QPoly{Rational(1)}); }
inline FieldElem Field::from_rational(const Rational& q) const { return from_coeffs({q}); }
inline FieldElem Field::from_coeffs(std::vector<Rational> c) const {
  if (static_cast<int>(c.size()) > degree())
    throw Error(ErrorKind::Parse, "coefficient vector longer than field degree");
  for (auto& x : c) x.canonicalize();
  return FieldElem(this, std::move(c));
}

inline RInterval Field::root_enclosure(int level) const {
  if (degree() == 1) return {exact_root_, exact_root_};
  std::lock_guard<std::mutex> lock(mu_);
  if (levels_.empty()) levels_.push_back({spec_.root_lo, spec_.root_hi});
  while (static_cast<int>(levels_.size()) <= level) {
    RInterval cur = levels_.back();
    if (cur.lo == cur.hi) {
      levels_.push_back(cur);
      continue;
    }
    Rational mid = cur.mid();
    int s_mid = sgn(poly::eval(min_poly_, mid));
    if (s_mid == 0) {
      levels_.push_back({mid, mid});
      continue;
    }
    int s_lo = sgn(poly::eval(min_poly_, cur.lo));
    if (s_lo == 0) {
      levels_.push_back({cur.lo, cur.lo});
      continue;
    }
    // Simple root: exactly one sign change inside the current enclosure.
    if (s_lo != s_mid) levels_.push_back({cur.lo, mid});
    else levels_.push_back({mid, cur.hi});
  }
  return levels_[static_cast<std::size_t>(level)];
}

inline int Field::sign_of(const QPoly& c) const {
  // Floating-point filter; falls through whenever cancellation is possible.
  double approx = 0, mag = 0;
  bool finite = true;
  for (std::size_t i = 0; i < c.size(); ++i) {
    double t = c[i].get_d() * pow_d_[i];
    if (!std::isfinite(t)) finite = false;
    approx += t;
    mag += std::fabs(t);
  }
  if (finite && std::isfinite(approx) && std::fabs(approx) > mag * 1e-9 && mag > 1e-280)
    return approx > 0 ? 1 : -1;
  for (int level = 64;; level *= 2) {
    RInterval v = poly::eval(c, root_enclosure(level));
    if (v.lo > 0) return 1;
    if (v.hi < 0) return -1;
    if (level > (1 << 16)) throw Error(ErrorKind::PrecisionExhausted, "sign refinement did not terminate");
  }
}

inline CertInterval Field::approximate(const QPoly& c, int bits) const {
  const Rational target = Rational(1) / (Rational(Integer(1) << bits));
  for (int level = 32;; level += 32) {
    RInterval v = poly::eval(c, root_enclosure(level));
    if (v.width() <= target) return {v.lo, v.hi, bits};
    if (level > (1 << 16)) throw Error(ErrorKind::PrecisionExhausted, "approximation did not converge");
  }
}

inline QPoly Field::inverse(const QPoly& c) const {
  // s*c + t*m = g with g a nonzero constant (m irreducible, c != 0 mod m).
  QPoly r0 = min_poly_, r1 = c;
  QPoly s0{}, s1{Rational(1)};
  while (poly::degree(r1) > 0) {
    auto [q, r] = poly::divmod(r0, r1);
    QPoly s = poly::sub(s0, poly::mul(q, s1));
    r0 = std::move(r1);
    r1 = std::move(r);
    s0 = std::move(s1);
    s1 = std::move(s);
  }
  if (r1.empty()) throw std::domain_error("element is not invertible");
  return reduce(poly::scale(s1, Rational(1) / r1[0]));
}

}  // namespace tilefreq

template <>
struct std::hash<tilefreq::FieldElem> {
  std::size_t operator()(const tilefreq::FieldElem& x) const noexcept { return x.hash(); }
};
