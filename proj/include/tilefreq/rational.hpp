#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <utility>

#include "tilefreq/error.hpp"

namespace tilefreq {

using Integer = mpz_class;
using Rational = mpq_class;

inline int sgn(const Rational& q) { return ::sgn(q); }
inline int sgn(const Integer& z) { return ::sgn(z); }

/// Parses "p/q", integers, and plain decimals such as "-1.25". Exponent
/// notation is rejected.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  if (s.empty()) throw Error(ErrorKind::Parse, "empty rational");
  try {
    if (auto dot = s.find('.'); dot != std::string::npos) {
      bool neg = s[0] == '-';
      std::string body = (s[0] == '-' || s[0] == '+') ? s.substr(1) : s;
      dot = body.find('.');
      std::string ip = body.substr(0, dot);
      std::string fp = body.substr(dot + 1);
      if (ip.empty()) ip = "0";
      for (char c : ip + fp)
        if (!std::isdigit(static_cast<unsigned char>(c))) throw Error(ErrorKind::Parse, "bad decimal '" + s + "'");
      Integer num(ip + fp, 10);
      Integer den;
      mpz_ui_pow_ui(den.get_mpz_t(), 10, fp.size());
      Rational q(num, den);
      q.canonicalize();
      return neg ? Rational(-q) : q;
    }
    for (char c : s)
      if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '/' || c == '-' || c == '+'))
        throw Error(ErrorKind::Parse, "bad rational '" + s + "'");
    if (s[0] == '+') s = s.substr(1);
    Rational q(s, 10);
    if (q.get_den() == 0) throw Error(ErrorKind::Parse, "zero denominator in '" + s + "'");
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument&) {
    throw Error(ErrorKind::Parse, "bad rational '" + s + "'");
  }
}

inline std::string format_rational(const Rational& q) { return q.get_str(10); }

inline std::size_t hash_integer(const Integer& z) {
  std::size_t h = static_cast<std::size_t>(mpz_size(z.get_mpz_t())) * 0x9e3779b97f4a7c15ULL;
  if (mpz_size(z.get_mpz_t()) > 0) h ^= static_cast<std::size_t>(mpz_getlimbn(z.get_mpz_t(), 0));
  if (sgn(z) < 0) h = ~h;
  return h;
}

inline std::size_t hash_rational(const Rational& q) {
  std::size_t h = hash_integer(q.get_num());
  h ^= hash_integer(q.get_den()) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

/// Floor of a rational as an integer.
inline Integer floor_rational(const Rational& q) {
  Integer r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

/// Closed interval with exact rational endpoints.
struct RInterval {
  Rational lo;
  Rational hi;

  bool contains(const Rational& x) const { return lo <= x && x <= hi; }
  bool contains(const RInterval& o) const { return lo <= o.lo && o.hi <= hi; }
  bool excludes_zero() const { return lo > 0 || hi < 0; }
  Rational width() const { return hi - lo; }
  Rational mid() const { return (lo + hi) / 2; }
};

inline RInterval operator+(const RInterval& a, const RInterval& b) { return {a.lo + b.lo, a.hi + b.hi}; }
inline RInterval operator-(const RInterval& a, const RInterval& b) { return {a.lo - b.hi, a.hi - b.lo}; }
inline RInterval operator+(const RInterval& a, const Rational& c) { return {a.lo + c, a.hi + c}; }

inline RInterval operator*(const RInterval& a, const RInterval& b) {
  Rational p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
  return {std::min({p1, p2, p3, p4}), std::max({p1, p2, p3, p4})};
}

inline RInterval operator*(const RInterval& a, const Rational& c) {
  if (c >= 0) return {a.lo * c, a.hi * c};
  return {a.hi * c, a.lo * c};
}

inline bool overlaps(const RInterval& a, const RInterval& b) { return !(a.hi < b.lo || b.hi < a.lo); }

// MPFR <-> exact rational conversions used for certified transcendental
// bounds (logarithms, square roots).
namespace detail {

class MpfrValue {
 public:
  explicit MpfrValue(long bits) { mpfr_init2(v_, bits); }
  ~MpfrValue() { mpfr_clear(v_); }
  MpfrValue(const MpfrValue&) = delete;
  MpfrValue& operator=(const MpfrValue&) = delete;
  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }

 private:
  mpfr_t v_;
};

inline Rational mpfr_to_rational(mpfr_srcptr x) {
  Integer m;
  mpfr_exp_t e = mpfr_get_z_2exp(m.get_mpz_t(), x);
  Rational q(m);
  if (e >= 0) {
    mpq_mul_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(e));
  } else {
    mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(-e));
  }
  return q;
}

inline void set_rational(mpfr_ptr x, const Rational& q, mpfr_rnd_t rnd) { mpfr_set_q(x, q.get_mpq_t(), rnd); }

}  // namespace detail

/// Certified enclosure of sqrt over a nonnegative rational interval.
inline RInterval sqrt_enclosure(const RInterval& x, long bits) {
  detail::MpfrValue lo(bits), hi(bits);
  Rational l = x.lo < 0 ? Rational(0) : x.lo;
  detail::set_rational(lo.get(), l, MPFR_RNDD);
  mpfr_sqrt(lo.get(), lo.get(), MPFR_RNDD);
  detail::set_rational(hi.get(), x.hi, MPFR_RNDU);
  mpfr_sqrt(hi.get(), hi.get(), MPFR_RNDU);
  return {detail::mpfr_to_rational(lo.get()), detail::mpfr_to_rational(hi.get())};
}

/// Certified enclosure of the natural logarithm over a positive interval.
inline RInterval log_enclosure(const RInterval& x, long bits) {
  detail::MpfrValue lo(bits), hi(bits);
  detail::set_rational(lo.get(), x.lo, MPFR_RNDD);
  mpfr_log(lo.get(), lo.get(), MPFR_RNDD);
  detail::set_rational(hi.get(), x.hi, MPFR_RNDU);
  mpfr_log(hi.get(), hi.get(), MPFR_RNDU);
  return {detail::mpfr_to_rational(lo.get()), detail::mpfr_to_rational(hi.get())};
}

/// Certified enclosure of a / b for intervals with b strictly positive.
inline RInterval divide_positive(const RInterval& a, const RInterval& b) {
  Rational q1 = a.lo / b.lo, q2 = a.lo / b.hi, q3 = a.hi / b.lo, q4 = a.hi / b.hi;
  return {std::min({q1, q2, q3, q4}), std::max({q1, q2, q3, q4})};
}

inline std::string format_decimal(const Rational& q, int digits = 12) {
  detail::MpfrValue v(static_cast<long>(digits * 4 + 64));
  detail::set_rational(v.get(), q, MPFR_RNDN);
  char* buf = nullptr;
  mpfr_asprintf(&buf, "%.*Rg", digits, v.get());
  std::string out(buf);
  mpfr_free_str(buf);
  return out;
}

}  // namespace tilefreq
