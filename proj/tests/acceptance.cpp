// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>

#include "tilefreq/cobham.hpp"
#include "tilefreq/io.hpp"

using namespace tilefreq;

namespace {

std::string data(const std::string& rel) { return std::string(TILEFREQ_DATA_DIR) + "/" + rel; }

const SubstitutionSystem& sys(const std::string& name) {
  static std::map<std::string, std::unique_ptr<SubstitutionSystem>> cache;
  auto& s = cache[name];
  if (!s) s = std::make_unique<SubstitutionSystem>(io::load_system(data("systems/" + name + ".json")));
  return *s;
}

struct Engine {
  CoronaSet cs;
  std::unique_ptr<FrequencyEngine> eng;
};

const FrequencyEngine& engine(const SubstitutionSystem& s) {
  static std::map<const SubstitutionSystem*, std::unique_ptr<Engine>> cache;
  auto& e = cache[&s];
  if (!e) {
    e = std::make_unique<Engine>(Engine{enumerate_coronas(s), nullptr});
    e->eng = std::make_unique<FrequencyEngine>(s, e->cs);
  }
  return *e->eng;
}

FieldElem q(long a, long b = 1) { return FieldElem(Rational(a, b)); }

// Horner evaluation of a rational polynomial at a field element.
FieldElem eval_at(const QPoly& p, const FieldElem& x) {
  FieldElem r;
  for (auto it = p.rbegin(); it != p.rend(); ++it) r = r * x + FieldElem(*it);
  return r;
}

std::vector<std::vector<Rational>> rational(const IntMatrix& a) {
  std::vector<std::vector<Rational>> m;
  for (const auto& row : a) {
    m.emplace_back();
    for (const auto& x : row) m.back().emplace_back(x);
  }
  return m;
}

// Single-tile patches and the distinct 3-tile ball patches around the seed.
std::vector<Patch> small_patches(const SubstitutionSystem& s) {
  std::vector<Patch> out;
  for (std::size_t p = 0; p < s.size(); ++p) {
    Patch one;
    one.tiles.push_back({static_cast<int>(p), Vec::zero(s.dim)});
    one.ref = Vec::zero(s.dim);
    out.push_back(one);
  }
  std::vector<FieldElem> radii;
  for (int i = 1; i <= 8; ++i) radii.push_back(q(i * i, 16));
  for (const auto& [key, sample] : sample_ball_patches(s, radii, 8, Rational(1, 4), kDefaultBudget))
    if (sample.first.patch.size() == 3) out.push_back(sample.first.patch);
  return out;
}

double exact_of(const FrequencyEngine& eng, const Patch& p) {
  if (p.size() == 1) {
    auto tf = tile_frequencies(eng.coronas(), eng.corona_freqs());
    return tf[static_cast<std::size_t>(p.tiles[0].proto)].exact->to_double();
  }
  return eng.exact_frequency(p).freq.exact->to_double();
}

double empirical(const SubstitutionSystem& s, const Patch& p, int base, int k) {
  return empirical_frequency(p, s, base, k).quotient.mid_double();
}

// Leaf counts of the rule tree, no geometry and no matrix arithmetic.
void count_leaves(const SubstitutionSystem& s, int p, int k, std::vector<long>& acc) {
  if (k == 0) {
    ++acc[static_cast<std::size_t>(p)];
    return;
  }
  for (const auto& c : s.rule[static_cast<std::size_t>(p)]) count_leaves(s, c.proto, k - 1, acc);
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

}  // namespace

int main() {
  const std::vector<std::string> one_d{"fibonacci", "thue_morse", "period_doubling"};
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria;

  criteria.emplace_back("Perron eigenvalue is lambda^d (exact, < 1 s)", [] {
    auto t0 = Clock::now();
    bool ok = true;
    std::ostringstream d;
    for (const char* name : {"fibonacci", "thue_morse", "period_doubling", "chair"}) {
      const auto& s = sys(name);
      bool zero = eval_at(poly::charpoly(rational(s.matrix)), s.lambda_d()).is_zero();
      ok &= zero;
      d << name << (zero ? " ok " : " NONZERO ");
    }
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    d << "(" << secs << " s)";
    return Outcome{ok && secs < 1, d.str()};
  });

  criteria.emplace_back("exact vs empirical frequencies (< 2 min)", [&] {
    auto t0 = Clock::now();
    bool ok = true;
    std::ostringstream d;
    auto check = [&](const std::string& name, int k, double tol, bool monotone) {
      const auto& s = sys(name);
      const auto& eng = engine(s);
      double worst = 0, sum10 = 0, sum14 = 0;
      auto patches = small_patches(s);
      for (const auto& p : patches) {
        double ex = exact_of(eng, p);
        worst = std::max(worst, std::abs(empirical(s, p, 0, k) - ex));
        if (monotone) {
          sum10 += std::abs(empirical(s, p, 0, 10) - ex);
          sum14 += std::abs(empirical(s, p, 0, 14) - ex);
        }
      }
      bool pass = worst <= tol && (!monotone || sum14 < sum10);
      ok &= pass;
      d << name << " patches=" << patches.size() << " max_err=" << worst;
      if (monotone) d << " err10=" << sum10 << " err14=" << sum14;
      d << (pass ? "; " : " FAIL; ");
    };
    for (const auto& n : one_d) check(n, 12, 1e-2, true);
    check("chair", 6, 5e-2, false);
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    d << "(" << secs << " s)";
    return Outcome{ok && secs < 120, d.str()};
  });

  criteria.emplace_back("tile frequencies equal the Perron and counting oracles", [] {
    bool ok = true;
    std::ostringstream d;
    auto tf = [](const std::string& n) { return tile_frequencies(engine(sys(n)).coronas(), engine(sys(n)).corona_freqs()); };
    // Perron oracle for two letters: l A = mu l gives l2 / l1 = (mu - a11) / a21.
    for (const char* n : {"fibonacci", "thue_morse", "period_doubling"}) {
      const auto& s = sys(n);
      FieldElem mu = s.lambda_d();
      FieldElem l1(1), l2 = (mu - FieldElem(Rational(s.matrix[0][0]))) / FieldElem(Rational(s.matrix[1][0]));
      FieldElem tot = l1 * volume(s.protos[0].support) + l2 * volume(s.protos[1].support);
      auto got = tf(n);
      bool pass = *got[0].exact == l1 / tot && *got[1].exact == l2 / tot;
      // Counting oracle: tile shares in A^20.
      std::vector<long> c(2, 0);
      count_leaves(s, 0, 20, c);
      double len = c[0] * volume(s.protos[0].support).to_double() + c[1] * volume(s.protos[1].support).to_double();
      pass &= std::abs(c[0] / len - got[0].exact->to_double()) < 1e-6;
      ok &= pass;
      d << n << " (" << got[0].exact->pretty() << ", " << got[1].exact->pretty() << ")" << (pass ? "; " : " FAIL; ");
    }
    const Field& gold = *sys("fibonacci").field;
    ok &= *tf("fibonacci")[0].exact == gold.from_coeffs({Rational(-1, 5), Rational(2, 5)});
    ok &= *tf("period_doubling")[0].exact == q(2, 3) && *tf("period_doubling")[1].exact == q(1, 3);
    ok &= *tf("thue_morse")[0].exact == q(1, 2) && *tf("thue_morse")[1].exact == q(1, 2);
    // Chair: every column of A sums to 4 as well, so the uniform vector is the
    // left Perron vector and each orientation has density 1/4 / area 3.
    const auto& chair = sys("chair");
    bool uniform = true;
    for (std::size_t j = 0; j < chair.size(); ++j) {
      Integer col = 0;
      for (std::size_t i = 0; i < chair.size(); ++i) col += chair.matrix[i][j];
      uniform &= col == 4;
    }
    bool chair_ok = uniform;
    for (const auto& f : tf("chair")) chair_ok &= *f.exact == q(1, 12);
    ok &= chair_ok;
    d << "chair 1/12 " << (chair_ok ? "ok" : "FAIL");
    return Outcome{ok, d.str()};
  });

  criteria.emplace_back("spectrum F_est finite and stable (< 5 min)", [&] {
    auto t0 = Clock::now();
    bool ok = true;
    std::ostringstream d;
    for (const char* n : {"fibonacci", "thue_morse"}) {
      const auto& eng = engine(sys(n));
      FieldElem e2 = eng.eta().squared, l = sys(n).lambda();
      auto a = spectrum(eng, {e2, e2 * l.pow(10)});
      auto b = spectrum(eng, {e2, e2 * l.pow(12), default_window(e2 * l.pow(10)) * 2});
      bool pass = same_f_set(a, b);
      for (const auto* rep : {&a, &b})
        for (const auto& e : rep->entries)
          pass &= rep->f_class(e).has_value() && *e.f.exact == *e.freq.exact * l.pow(e.k * rep->dim);
      ok &= pass;
      d << n << " |F|=" << a.F.size() << " entries " << a.entries.size() << "/" << b.entries.size()
        << (pass ? "; " : " FAIL; ");
    }
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    d << "(" << secs << " s)";
    return Outcome{ok && secs < 300, d.str()};
  });

  criteria.emplace_back("frequencies do not depend on the base prototile", [&] {
    bool ok = true;
    std::ostringstream d;
    auto check = [&](const std::string& n, int k) {
      const auto& s = sys(n);
      double worst = 0;
      for (const auto& p : small_patches(s))
        for (std::size_t b = 1; b < s.size(); ++b)
          worst = std::max(worst, std::abs(empirical(s, p, 0, k) - empirical(s, p, static_cast<int>(b), k)));
      ok &= worst <= 1e-2;
      d << n << " k=" << k << " max_diff=" << worst << (worst <= 1e-2 ? "; " : " FAIL; ");
    };
    for (const auto& n : one_d) check(n, 12);
    check("chair", 7);
    return Outcome{ok, d.str()};
  });

  criteria.emplace_back("powering invariance S vs S^2", [] {
    static const SubstitutionSystem t2 = power(sys("thue_morse"), 2);
    const auto& e1 = engine(sys("thue_morse"));
    const auto& e2 = engine(t2);
    auto r1 = spectrum(e1, {e1.eta().squared, e1.eta().squared * q(4).pow(4)});
    auto r2 = spectrum(e2, {e2.eta().squared, e2.eta().squared * q(16).pow(2)});
    bool ok = true;
    std::size_t matched = 0;
    for (const auto& e : r2.entries)
      if (auto i = r1.find(e.key)) {
        ++matched;
        ok &= *r1.entries[*i].freq.exact == *e.freq.exact;
      }
    auto c = spectra_consistency(r1, r2);
    ok &= matched > 0 && c.verdict == ConsistencyReport::Verdict::ConsistentWithDependence && c.p == 2 && c.q == 1;
    std::ostringstream d;
    d << "matched " << matched << ", " << to_text(c).substr(0, to_text(c).find('\n'));
    return Outcome{ok, d.str()};
  });

  criteria.emplace_back("factor law on Thue-Morse -> period doubling (< 1 min)", [] {
    auto t0 = Clock::now();
    const auto& tm = sys("thue_morse");
    const auto& eng = engine(tm);
    auto ld = io::load_derivation(data("derivations/tm_to_pd.json"), tm);
    auto derived = derived_tile_frequencies(eng, ld);
    auto direct = tile_frequencies(engine(sys("period_doubling")).coronas(), engine(sys("period_doubling")).corona_freqs());
    bool freq_ok = *derived[0].exact == q(2, 3) && *derived[1].exact == q(1, 3) && *derived[0].exact == *direct[0].exact &&
                   *derived[1].exact == *direct[1].exact;
    FieldElem e2 = eng.eta().squared;
    auto rep = factor_spectrum(eng, ld, {e2 * q(1, 4), e2 * q(2).pow(6)});
    auto law = check_prop34_law(rep, q(2), 1);
    auto cld = io::load_derivation(data("derivations/tm_const.json"), tm);
    auto crep = factor_spectrum(eng, cld, {e2 * q(1, 4), e2 * q(2).pow(4)});
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::ostringstream d;
    d << "derived (" << derived[0].exact->pretty() << ", " << derived[1].exact->pretty() << "), law "
      << (law.all_pass() ? "holds" : "fails") << " on " << rep.entries.size() << " entries, constant code "
      << (crep.period ? "periodic" : "NOT flagged") << " (" << secs << " s)";
    return Outcome{freq_ok && law.all_pass() && crep.period.has_value() && secs < 60, d.str()};
  });

  criteria.emplace_back("multiplicative dependence (< 10 s)", [] {
    auto t0 = Clock::now();
    const FieldElem phi = sys("fibonacci").lambda();
    auto is = [](const DependenceVerdict& v, int p, int qq) { return v.dependent && v.p == p && v.q == qq; };
    bool ok = is(mult_dependent(q(2), q(8), 16), 3, 1) && is(mult_dependent(phi, phi * phi, 16), 2, 1) &&
              is(mult_dependent(phi, phi, 16), 1, 1) && is(mult_dependent(q(5), q(5), 16), 1, 1) &&
              !mult_dependent(q(2), q(3), 16).dependent && !mult_dependent(q(2), phi, 16).dependent;
    std::size_t mismatches = 0;
    for (int a = 2; a <= 64; ++a)
      for (int b = 2; b <= 64; ++b) {
        // Oracle: a^p = b^q iff the exponent vectors are proportional.
        std::map<int, int> fa, fb;
        for (int n = a, p = 2; n > 1; ++p)
          while (n % p == 0) ++fa[p], n /= p;
        for (int n = b, p = 2; n > 1; ++p)
          while (n % p == 0) ++fb[p], n /= p;
        std::optional<std::pair<int, int>> want;
        bool dep = fa.size() == fb.size();
        for (auto [p, e] : fa) {
          if (!dep) break;
          auto it = fb.find(p);
          if (it == fb.end()) {
            dep = false;
            break;
          }
          int g = std::gcd(e, it->second);
          std::pair<int, int> pq{it->second / g, e / g};
          if (want && *want != pq) dep = false;
          want = pq;
        }
        auto v = mult_dependent(q(a), q(b), 16);
        if (v.dependent != dep || (dep && std::make_pair(v.p, v.q) != *want)) ++mismatches;
      }
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::ostringstream d;
    d << "examples " << (ok ? "ok" : "FAIL") << ", integer mismatches " << mismatches << " (" << secs << " s)";
    return Outcome{ok && mismatches == 0 && secs < 10, d.str()};
  });

  criteria.emplace_back("volume scaling and tile counts", [] {
    bool ok = true;
    std::ostringstream d;
    for (const char* n : {"fibonacci", "thue_morse", "period_doubling", "oct8", "chair", "square", "periodic1d"}) {
      const auto& s = sys(n);
      bool vol = true, counts = true;
      for (const auto& p : s.protos.tiles)
        vol &= volume(apply_map_support(s.map, p.support)) == s.lambda_d() * volume(p.support);
      std::vector<std::vector<Integer>> ak(s.size(), std::vector<Integer>(s.size(), 0));
      for (std::size_t i = 0; i < s.size(); ++i) ak[i][i] = 1;
      for (int k = 0; k <= 10; ++k) {
        for (std::size_t p = 0; p < s.size(); ++p) {
          std::vector<long> c(s.size(), 0);
          if (supertile_size(s, static_cast<int>(p), k) <= 300000) {
            for (const auto& t : supertile(s, static_cast<int>(p), k).tiles) ++c[static_cast<std::size_t>(t.proto)];
          } else {
            count_leaves(s, static_cast<int>(p), k, c);
          }
          for (std::size_t j = 0; j < s.size(); ++j) counts &= Integer(c[j]) == ak[p][j];
        }
        auto next = ak;
        for (std::size_t i = 0; i < s.size(); ++i)
          for (std::size_t j = 0; j < s.size(); ++j) {
            next[i][j] = 0;
            for (std::size_t l = 0; l < s.size(); ++l) next[i][j] += ak[i][l] * s.matrix[l][j];
          }
        ak = next;
      }
      ok &= vol && counts;
      d << n << (vol && counts ? " ok; " : " FAIL; ");
    }
    return Outcome{ok, d.str()};
  });

  criteria.emplace_back("eta and stable recurrence/separation constants", [] {
    const auto& fib = sys("fibonacci");
    const auto& chair = sys("chair");
    bool eta_ok = engine(fib).eta().exact && *engine(fib).eta().exact == q(1);
    std::ostringstream d;
    d << "eta(fibonacci) " << (eta_ok ? "= 1" : "!= 1");
    bool ok = eta_ok;
    auto stable = [&](const char* what, const SubstitutionSystem& s, auto est, std::vector<Rational> rs, long w) {
      auto a = est(s, rs, Rational(w), kDefaultBudget), b = est(s, rs, Rational(2 * w), kDefaultBudget),
           c = est(s, rs, Rational(4 * w), kDefaultBudget);
      bool same = a.rounded == b.rounded && b.rounded == c.rounded;
      ok &= same;
      d << "; " << s.name << " " << what << " " << a.value.mid_double() << "/" << b.value.mid_double() << "/"
        << c.value.mid_double() << (same ? "" : " FAIL");
    };
    auto rec = [](const SubstitutionSystem& s, const std::vector<Rational>& r, const Rational& w, std::size_t b) {
      return estimate_recurrence_constant(s, r, w, b);
    };
    auto sep = [](const SubstitutionSystem& s, const std::vector<Rational>& r, const Rational& w, std::size_t b) {
      return estimate_separation_constant(s, r, w, b);
    };
    stable("L", fib, rec, {1, 2, 4}, 60);
    stable("R", fib, sep, {2, 4, 8}, 60);
    stable("L", chair, rec, {1, 2}, 96);
    stable("R", chair, sep, {2, 4}, 12);
    return Outcome{ok, d.str()};
  });

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << "criterion " << i + 1 << " " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << ": "
              << o.detail << std::endl;
  }
  return failed ? 1 : 0;
}
