#include <numeric>

#include <gtest/gtest.h>

#include "common.hpp"

using namespace tilefreq;
using namespace tilefreq::test;

namespace {

std::map<int, int> factorize(int n) {
  std::map<int, int> f;
  for (int p = 2; p * p <= n; ++p)
    while (n % p == 0) {
      ++f[p];
      n /= p;
    }
  if (n > 1) ++f[n];
  return f;
}

// Smallest (p, q) with a^p = b^q, from exponent vectors.
std::optional<std::pair<int, int>> oracle(int a, int b) {
  auto fa = factorize(a), fb = factorize(b);
  if (fa.size() != fb.size()) return std::nullopt;
  std::optional<std::pair<int, int>> r;
  for (auto [prime, ea] : fa) {
    auto it = fb.find(prime);
    if (it == fb.end()) return std::nullopt;
    int eb = it->second, g = std::gcd(ea, eb);
    std::pair<int, int> pq{eb / g, ea / g};
    if (r && *r != pq) return std::nullopt;
    r = pq;
  }
  return r;
}

SpectrumReport spectrum_of(const FrequencyEngine& eng, int levels) {
  FieldElem e2 = eng.eta().squared;
  return spectrum(eng, {e2, e2 * eng.system().lambda().pow(2 * levels)});
}

}  // namespace

TEST(Cobham, Examples) {
  auto v = mult_dependent(q(2), q(8), 16);
  EXPECT_TRUE(v.dependent);
  EXPECT_EQ(std::make_pair(v.p, v.q), std::make_pair(3, 1));
  EXPECT_TRUE(v.certificate.equal);

  v = mult_dependent(phi(), phi() * phi(), 16);
  EXPECT_EQ(std::make_pair(v.p, v.q), std::make_pair(2, 1));
  v = mult_dependent(phi(), phi(), 16);
  EXPECT_EQ(std::make_pair(v.p, v.q), std::make_pair(1, 1));
  EXPECT_EQ(v.certificate.min_poly, (QPoly{-1, -1, 1}));

  EXPECT_FALSE(mult_dependent(q(2), q(3), 16).dependent);
  EXPECT_FALSE(mult_dependent(q(2), phi(), 16).dependent);
  EXPECT_EQ(to_text(mult_dependent(q(2), q(3), 16)), "IndependentUpTo(16)\n");
  EXPECT_THROW(mult_dependent(q(1, 2), q(2), 16), Error);
}

TEST(Cobham, CertifyEqualAcrossFields) {
  // phi^2 = phi + 1 in the golden field, equal to (3 + sqrt 5) / 2 written in Q(sqrt 5).
  const Field& s5 = make_field(FieldSpec{{-5, 0, 1}, 2, 3});
  FieldElem x = s5.from_coeffs({Rational(3, 2), Rational(1, 2)});
  EXPECT_TRUE(certify_equal(phi() * phi(), x).equal);
  EXPECT_FALSE(certify_equal(phi(), x).equal);
  FieldElem conj = s5.from_coeffs({Rational(3, 2), Rational(-1, 2)});
  EXPECT_FALSE(certify_equal(phi() * phi(), conj).equal);
}

TEST(CobhamProperty, Symmetric) {
  std::vector<FieldElem> xs{q(2), q(4), q(8), q(3), phi(), phi().pow(3), q(9, 4)};
  for (const auto& a : xs)
    for (const auto& b : xs) {
      auto ab = mult_dependent(a, b, 16), ba = mult_dependent(b, a, 16);
      EXPECT_EQ(ab.dependent, ba.dependent);
      EXPECT_EQ(ab.p, ba.q);
      EXPECT_EQ(ab.q, ba.p);
    }
}

TEST(CobhamProperty, IntegerPairsMatchFactorization) {
  for (int a = 2; a <= 64; ++a)
    for (int b = a; b <= 64; ++b) {
      auto v = mult_dependent(q(a), q(b), 16);
      auto want = oracle(a, b);
      ASSERT_EQ(v.dependent, want.has_value()) << a << " " << b;
      if (want) {
        EXPECT_EQ(std::make_pair(v.p, v.q), *want) << a << " " << b;
      }
    }
}

TEST(Consistency, FibonacciWithItself) {
  auto rep = spectrum_of(*prepared("fibonacci").engine, 4);
  auto c = spectra_consistency(rep, rep);
  EXPECT_EQ(c.verdict, ConsistencyReport::Verdict::ConsistentWithDependence);
  EXPECT_EQ(std::make_pair(c.p, c.q), std::make_pair(1, 1));
  EXPECT_EQ(c.matched, rep.entries.size());
}

TEST(Consistency, ThueMorseAndItsSquare) {
  static const SubstitutionSystem t2 = power(corpus("thue_morse"), 2);
  static const CoronaSet cs = enumerate_coronas(t2);
  static const FrequencyEngine eng(t2, cs);
  auto r1 = spectrum_of(*prepared("thue_morse").engine, 4);
  auto r2 = spectrum_of(eng, 2);
  for (const auto& e : r2.entries) {
    if (auto i = r1.find(e.key)) {
      EXPECT_EQ(*r1.entries[*i].freq.exact, *e.freq.exact) << e.key;
    }
  }
  auto c = spectra_consistency(r1, r2);
  EXPECT_EQ(c.verdict, ConsistencyReport::Verdict::ConsistentWithDependence) << to_text(c);
  EXPECT_EQ(std::make_pair(c.p, c.q), std::make_pair(2, 1));
}

TEST(Consistency, DifferentUniverses) {
  auto a = spectrum_of(*prepared("fibonacci").engine, 2);
  auto b = spectrum_of(*prepared("thue_morse").engine, 2);
  try {
    spectra_consistency(a, b);
    FAIL() << "expected EmptyIntersection";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyIntersection);
  }
}
