#include <algorithm>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "common.hpp"

using namespace tilefreq;
using namespace tilefreq::test;

namespace {

// Fixed-point word by plain string rewriting of the 1D rule.
std::string word(const SubstitutionSystem& s, int k) {
  std::vector<std::string> img(s.size());
  for (std::size_t p = 0; p < s.size(); ++p) {
    auto ch = s.rule[p];
    std::sort(ch.begin(), ch.end(), [](const Child& a, const Child& b) { return a.offset[0] < b.offset[0]; });
    for (const auto& c : ch) img[p] += s.protos[c.proto].label;
  }
  std::string w = s.protos[0].label;
  for (int i = 0; i < k; ++i) {
    std::string next;
    for (char c : w)
      for (std::size_t p = 0; p < s.size(); ++p)
        if (s.protos[static_cast<int>(p)].label == std::string(1, c)) next += img[p];
    w = next;
  }
  return w;
}

// Patch of consecutive tiles spelled by `w`, left end at 0.
Patch spell(const SubstitutionSystem& s, const std::string& w) {
  Patch p;
  FieldElem x;
  for (char c : w) {
    int id = s.protos.id_of(std::string(1, c)).value();
    p.tiles.push_back({id, Vec(x)});
    x += s.protos[id].support.hi() - s.protos[id].support.lo();
  }
  p.ref = Vec(FieldElem());
  return p.sort();
}

// Left Perron vector of a 2x2 matrix for eigenvalue mu, normalized to unit density.
std::vector<FieldElem> density_oracle(const SubstitutionSystem& s) {
  const auto& a = s.matrix;
  FieldElem mu = s.lambda_d();
  FieldElem l1(1), l2 = (mu - FieldElem(Rational(a[0][0]))) / FieldElem(Rational(a[1][0]));
  FieldElem total = l1 * volume(s.protos[0].support) + l2 * volume(s.protos[1].support);
  return {l1 / total, l2 / total};
}

}  // namespace

TEST(Freq, CoronaCountsMatchWordFactors) {
  for (const char* name : {"fibonacci", "thue_morse", "period_doubling"}) {
    const auto& s = corpus(name);
    std::string w = word(s, 14);
    std::set<std::string> f3;
    for (std::size_t i = 0; i + 3 <= w.size(); ++i) f3.insert(w.substr(i, 3));
    EXPECT_EQ(prepared(name).coronas.size(), f3.size()) << name;
  }
  EXPECT_EQ(prepared("thue_morse").coronas.size(), 6u);
  EXPECT_EQ(prepared("fibonacci").coronas.size(), 4u);
}

TEST(Freq, TileFrequencies) {
  auto tf = [](const char* name) { return tile_frequencies(prepared(name).coronas, prepared(name).engine->corona_freqs()); };
  EXPECT_EQ(*tf("fibonacci")[0].exact, gq(-1, 2, 5));
  EXPECT_EQ(*tf("fibonacci")[1].exact, gq(3, -1, 5));
  EXPECT_EQ(*tf("period_doubling")[0].exact, q(2, 3));
  EXPECT_EQ(*tf("period_doubling")[1].exact, q(1, 3));
  for (const auto& f : tf("thue_morse")) EXPECT_EQ(*f.exact, q(1, 2));
  for (const auto& f : tf("chair")) EXPECT_EQ(*f.exact, q(1, 12));
}

TEST(Freq, TileFrequenciesMatchPerronOracle) {
  for (const char* name : {"fibonacci", "thue_morse", "period_doubling", "oct8"}) {
    auto want = density_oracle(corpus(name));
    auto got = tile_frequencies(prepared(name).coronas, prepared(name).engine->corona_freqs());
    for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(*got[i].exact, want[i]) << name;
  }
}

TEST(Freq, TileFrequenciesMatchCounting) {
  // Counting oracle: tile counts in S^20(a) from the word, per unit length.
  for (const char* name : {"fibonacci", "period_doubling"}) {
    const auto& s = corpus(name);
    std::string w = word(s, 20);
    auto got = tile_frequencies(prepared(name).coronas, prepared(name).engine->corona_freqs());
    double len = 0;
    for (char c : w) len += volume(s.protos[s.protos.id_of(std::string(1, c)).value()].support).to_double();
    for (std::size_t p = 0; p < s.size(); ++p) {
      double n = static_cast<double>(std::count(w.begin(), w.end(), s.protos[static_cast<int>(p)].label[0]));
      EXPECT_NEAR(n / len, got[p].exact->to_double(), 1e-3) << name;
    }
  }
}

TEST(Freq, DensityNormalization) {
  for (const char* name : {"fibonacci", "thue_morse", "period_doubling", "chair", "periodic1d"}) {
    const auto& pr = prepared(name);
    FieldElem total;
    for (std::size_t i = 0; i < pr.coronas.size(); ++i)
      total += *pr.engine->corona_freqs()[i].exact * volume(pr.sys->protos[pr.coronas.coronas[i].center_proto].support);
    EXPECT_EQ(total, q(1)) << name;
  }
}

TEST(Freq, Eta) {
  EXPECT_EQ(*prepared("fibonacci").engine->eta().exact, q(1));
  EXPECT_EQ(prepared("chair").engine->eta().squared, q(1));
  EXPECT_GT(prepared("thue_morse").engine->eta().squared.sign(), 0);
}

TEST(Freq, EmpiricalExamples) {
  const auto& s = corpus("fibonacci");
  auto e = empirical_frequency(spell(s, "b"), s, 0, 10);
  EXPECT_EQ(e.count, 55);
  EXPECT_EQ(e.volume, phi().pow(11));
  CertInterval want = (q(55) / phi().pow(11)).approximate(64);
  EXPECT_TRUE(overlaps(e.quotient.range(), want.range()));
  EXPECT_EQ(empirical_frequency(spell(s, "bb"), s, 0, 10).count, 0);
}

TEST(Freq, ExactFrequencyExamples) {
  const auto& eng = *prepared("fibonacci").engine;
  const auto& s = corpus("fibonacci");
  EXPECT_EQ(*eng.exact_frequency(spell(s, "a")).freq.exact, gq(-1, 2, 5));
  EXPECT_EQ(*eng.exact_frequency(spell(s, "bb")).freq.exact, q(0));
  // Every occurrence of "b" is followed by "a", so "ba" has the frequency of "b".
  EXPECT_EQ(*eng.exact_frequency(spell(s, "ba")).freq.exact, *eng.exact_frequency(spell(s, "b")).freq.exact);
  // "aa" + "ab" = "a".
  EXPECT_EQ(*eng.exact_frequency(spell(s, "aa")).freq.exact + *eng.exact_frequency(spell(s, "ab")).freq.exact,
            gq(-1, 2, 5));
}

TEST(FreqProperty, ExactMatchesEmpirical) {
  for (const char* name : {"fibonacci", "thue_morse", "period_doubling"}) {
    const auto& s = corpus(name);
    const auto& eng = *prepared(name).engine;
    std::string w = word(s, 10);
    std::set<std::string> factors;
    for (int len = 1; len <= 4; ++len)
      for (std::size_t i = 0; i + len <= w.size(); ++i) factors.insert(w.substr(i, static_cast<std::size_t>(len)));
    for (const auto& f : factors) {
      Patch p = spell(s, f);
      double exact = eng.exact_frequency(p).freq.exact->to_double();
      double emp = empirical_frequency(p, s, 0, 14).quotient.mid_double();
      EXPECT_NEAR(exact, emp, 5e-3) << name << " " << f;
    }
  }
}

TEST(FreqProperty, ExactIsTranslationInvariant) {
  const auto& s = corpus("thue_morse");
  const auto& eng = *prepared("thue_morse").engine;
  Patch p = spell(s, "abb");
  FieldElem f = *eng.exact_frequency(p).freq.exact;
  for (long t : {-3L, 5L, 17L}) {
    Patch moved = p;
    for (auto& tile : moved.tiles) tile.offset = tile.offset + Vec(q(t));
    moved.ref = Vec(q(t));
    EXPECT_EQ(*eng.exact_frequency(moved).freq.exact, f);
  }
}

TEST(FreqProperty, CertifiedIntervalsNest) {
  for (const auto& f : prepared("fibonacci").engine->corona_freqs()) {
    CertInterval a = f.exact->approximate(64), b = f.exact->approximate(256);
    EXPECT_LE(a.lo, b.lo);
    EXPECT_GE(a.hi, b.hi);
    EXPECT_LE(b.width(), a.width());
  }
}

TEST(Spectrum, PeriodicBandsShareOneFrequency) {
  const auto& eng = *prepared("periodic1d").engine;
  FieldElem eta2 = eng.eta().squared;
  auto rep = spectrum(eng, {eta2, eta2 * q(16)});
  std::map<int, std::set<std::string>> per_band;
  for (const auto& e : rep.entries) per_band[e.k].insert(e.freq.exact->pretty());
  ASSERT_FALSE(per_band.empty());
  for (const auto& [k, fs] : per_band) EXPECT_EQ(fs.size(), 1u) << "k=" << k;
}

TEST(Spectrum, FibonacciFiniteAndStable) {
  const auto& eng = *prepared("fibonacci").engine;
  FieldElem eta2 = eng.eta().squared, l2 = phi() * phi();
  auto a = spectrum(eng, {eta2, eta2 * l2.pow(3)});
  auto b = spectrum(eng, {eta2, eta2 * l2.pow(4), default_window(eta2 * l2.pow(4)) * 2});
  EXPECT_TRUE(same_f_set(a, b));
  for (const auto& e : a.entries) {
    EXPECT_EQ(*e.f.exact, *e.freq.exact * phi().pow(e.k));
    EXPECT_TRUE(a.f_class(e).has_value());
  }
}
