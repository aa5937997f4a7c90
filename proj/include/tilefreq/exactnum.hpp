#pragma once

// Exact arithmetic in a real number field Q(lambda) with certified signs and
// interval embeddings.

#include "tilefreq/field.hpp"
#include "tilefreq/poly.hpp"
#include "tilefreq/rational.hpp"

namespace tilefreq {

inline Field const& make_field(const FieldSpec& spec) { return Field::make(spec); }

inline int sign(const FieldElem& x) { return x.sign(); }

inline CertInterval approximate(const FieldElem& x, int bits) {
  if (bits < 8) bits = 8;
  return x.approximate(bits);
}

/// Certified enclosure of sqrt(x) for x >= 0.
inline CertInterval approximate_sqrt(const FieldElem& x, int bits) {
  CertInterval a = approximate(x, bits + 4);
  RInterval r = sqrt_enclosure(a.range(), bits + 16);
  return {r.lo, r.hi, bits};
}

inline FieldElem abs(const FieldElem& x) { return x.sign() < 0 ? -x : x; }
inline const FieldElem& min(const FieldElem& a, const FieldElem& b) { return b < a ? b : a; }
inline const FieldElem& max(const FieldElem& a, const FieldElem& b) { return a < b ? b : a; }

}  // namespace tilefreq
