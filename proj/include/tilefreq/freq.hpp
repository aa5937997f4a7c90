#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tilefreq/subst.hpp"

namespace tilefreq {

struct Corona {
  PatchKey key;
  Patch patch;  // center tile at offset 0, marked
  int center_proto = 0;

  const Tile& center() const { return patch.tiles[*patch.center]; }
};

struct CoronaSet {
  const SubstitutionSystem* sys = nullptr;
  std::vector<Corona> coronas;  // sorted by key
  IntMatrix collared;
  int level = 1;           // m: S^m used for the collared matrix
  int stabilized_at = 0;   // supertile level where the key set settled

  std::size_t size() const { return coronas.size(); }

  std::optional<std::size_t> find(const PatchKey& key) const {
    auto it = std::lower_bound(coronas.begin(), coronas.end(), key,
                               [](const Corona& c, const PatchKey& k) { return c.key < k; });
    if (it == coronas.end() || it->key != key) return std::nullopt;
    return static_cast<std::size_t>(it - coronas.begin());
  }
};

namespace detail {

inline void collect_coronas(const SubstitutionSystem& sys, const Patch& host_patch, std::map<PatchKey, Corona>& out) {
  Host host(sys.protos, host_patch);
  for (std::size_t i = 0; i < host.size(); ++i) {
    if (!corona_complete(host, i)) continue;
    Patch c = corona_at(host, i);
    PatchKey key = patch_key(sys.protos, c);
    if (out.count(key)) continue;
    int proto = host.tile(i).proto;
    out.emplace(key, Corona{key, std::move(c), proto});
  }
}

// Collared matrix at level m; nullopt if some induced corona is not
// determined inside S^m(C).
inline std::optional<IntMatrix> collared_matrix(const SubstitutionSystem& sys, const std::vector<Corona>& cs,
                                                const std::map<PatchKey, std::size_t>& index, int m,
                                                std::size_t budget) {
  IntMatrix b(cs.size(), std::vector<Integer>(cs.size(), 0));
  for (std::size_t i = 0; i < cs.size(); ++i) {
    Patch big = cs[i].patch;
    for (int s = 0; s < m; ++s) big = sys.substitute(big);
    if (big.size() > budget) throw Error(ErrorKind::BudgetExceeded, "collared expansion exceeds budget");
    Host host(sys.protos, big);
    for (const auto& t : supertile(sys, cs[i].center_proto, m, budget).tiles) {
      auto j = host.find(t);
      if (!j || !corona_complete(host, *j)) return std::nullopt;
      PatchKey key = patch_key(sys.protos, corona_at(host, *j));
      auto it = index.find(key);
      if (it == index.end())
        throw Error(ErrorKind::DeterminismFailure, "induced corona missing from the enumerated set: " + key);
      b[i][it->second] += 1;
    }
  }
  return b;
}

}  // namespace detail

/// Coronas of interior tiles of S^k(p), all p, for k = 1, 2, ... until the key
/// set is unchanged over `stab_window` consecutive levels; then the collared
/// matrix at the smallest level m <= m_max that determines every induced
/// corona.
inline CoronaSet enumerate_coronas(const SubstitutionSystem& sys, int stab_window = 2,
                                   std::size_t budget = kDefaultBudget, int m_max = 4) {
  if (stab_window < 2) throw Error(ErrorKind::InvalidSystem, "stab_window must be >= 2");
  std::map<PatchKey, Corona> all;
  std::set<PatchKey> prev;
  int same = 0;
  int level = 0;
  for (int k = 1;; ++k) {
    std::map<PatchKey, Corona> cur;
    try {
      for (std::size_t p = 0; p < sys.size(); ++p)
        detail::collect_coronas(sys, supertile(sys, static_cast<int>(p), k, budget), cur);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::BudgetExceeded) throw;
      throw Error(ErrorKind::NotStabilized, "corona set did not stabilize within the budget at level " +
                                                std::to_string(k));
    }
    std::set<PatchKey> keys;
    for (const auto& [key, c] : cur) keys.insert(key);
    for (auto& [key, c] : cur) all.try_emplace(key, std::move(c));
    if (!keys.empty() && keys == prev) {
      if (++same + 1 >= stab_window) {
        level = k;
        break;
      }
    } else {
      same = 0;
    }
    prev = std::move(keys);
  }

  CoronaSet cs;
  cs.sys = &sys;
  cs.stabilized_at = level;
  for (auto& [key, c] : all)
    if (prev.count(key)) cs.coronas.push_back(std::move(c));
  std::map<PatchKey, std::size_t> index;
  for (std::size_t i = 0; i < cs.coronas.size(); ++i) index[cs.coronas[i].key] = i;
  for (int m = 1; m <= m_max; ++m) {
    if (auto b = detail::collared_matrix(sys, cs.coronas, index, m, budget)) {
      cs.collared = std::move(*b);
      cs.level = m;
      return cs;
    }
  }
  throw Error(ErrorKind::DeterminismFailure, "collared matrix not determined for m <= " + std::to_string(m_max));
}

struct FreqValue {
  std::optional<FieldElem> exact;
  CertInterval certified;

  static FreqValue of(const FieldElem& x, int bits = 64) { return {x, x.approximate(bits)}; }
};

/// Density (per unit volume) of every corona: the Perron vector u of the
/// collared matrix B with u B = lambda^(dm) u, normalized so that
/// sum_C u_C vol(center(C)) = 1.
inline std::vector<FreqValue> corona_frequencies(const CoronaSet& cs, int bits = 64) {
  const auto& sys = *cs.sys;
  if (!is_primitive(cs.collared)) throw Error(ErrorKind::NonPrimitiveCollared, "collared matrix is not primitive");
  FieldElem mu = sys.lambda_d().pow(cs.level);
  auto u = perron_vector(cs.collared, mu, true);
  FieldElem total;
  for (std::size_t i = 0; i < u.size(); ++i) total += u[i] * volume(sys.protos[cs.coronas[i].center_proto].support);
  std::vector<FreqValue> out;
  for (auto& x : u) {
    x = x / total;
    if (x.sign() <= 0) throw Error(ErrorKind::NonPrimitiveCollared, "corona frequency is not positive");
    out.push_back(FreqValue::of(x, bits));
  }
  return out;
}

inline std::vector<FreqValue> tile_frequencies(const CoronaSet& cs, const std::vector<FreqValue>& corona_freqs,
                                               int bits = 64) {
  std::vector<FieldElem> acc(cs.sys->size());
  for (std::size_t i = 0; i < cs.size(); ++i)
    acc[static_cast<std::size_t>(cs.coronas[i].center_proto)] += *corona_freqs[i].exact;
  std::vector<FreqValue> out;
  for (const auto& x : acc) out.push_back(FreqValue::of(x, bits));
  return out;
}

struct Eta {
  FieldElem squared;              // exact eta^2
  std::optional<FieldElem> exact;  // eta itself when it lies in the field
  CertInterval certified;
};

namespace detail {

inline std::optional<FieldElem> exact_sqrt(const FieldElem& x) {
  if (!x.is_rational() || x.sign() < 0) return std::nullopt;
  Rational q = x.rational_value();
  if (!mpz_perfect_square_p(q.get_num_mpz_t()) || !mpz_perfect_square_p(q.get_den_mpz_t())) return std::nullopt;
  return FieldElem(Rational(Integer(sqrt(q.get_num())), Integer(sqrt(q.get_den()))));
}

inline CertInterval sqrt_cert(const FieldElem& x2, int bits) {
  RInterval r = sqrt_enclosure(x2.approximate(bits + 8).range(), bits + 8);
  return {r.lo, r.hi, bits};
}

}  // namespace detail

/// eta = min over coronas of the distance from the center support to the
/// boundary of the corona's union.
inline Eta compute_eta(const CoronaSet& cs, int bits = 64) {
  const auto& sys = *cs.sys;
  std::optional<FieldElem> best;
  std::optional<FieldElem> best_linear;  // d = 1 keeps eta itself exact
  for (const auto& c : cs.coronas) {
    Support center = tile_support(sys.protos, c.center());
    if (sys.dim == 1) {
      for (std::size_t i = 0; i < c.patch.size(); ++i) {
        if (i == *c.patch.center) continue;
        Support s = tile_support(sys.protos, c.patch.tiles[i]);
        if (s.hi() != center.lo() && s.lo() != center.hi()) continue;
        FieldElem len = s.hi() - s.lo();
        if (!best_linear || len < *best_linear) best_linear = len;
      }
      continue;
    }
    std::vector<Support> sup;
    for (const auto& t : c.patch.tiles) sup.push_back(tile_support(sys.protos, t));
    for (const auto& [a, b] : union_boundary(sup))
      for (std::size_t e = 0; e < center.size(); ++e) {
        FieldElem d2 = segment_segment_dist2(a, b, center.vertex(e), center.vertex(e + 1));
        if (!best || (d2 - *best).sign() < 0) best = d2;
      }
  }
  Eta eta;
  if (sys.dim == 1) {
    if (!best_linear) throw Error(ErrorKind::DeterminismFailure, "no corona neighbors");
    eta.exact = *best_linear;
    eta.squared = *best_linear * *best_linear;
    eta.certified = best_linear->approximate(bits);
  } else {
    if (!best) throw Error(ErrorKind::DeterminismFailure, "no corona boundary");
    eta.squared = *best;
    eta.exact = detail::exact_sqrt(*best);
    eta.certified = eta.exact ? eta.exact->approximate(bits) : detail::sqrt_cert(*best, bits);
  }
  if (eta.squared.sign() <= 0) throw Error(ErrorKind::DeterminismFailure, "eta is not positive");
  return eta;
}

struct EmpiricalFrequency {
  Integer count;
  FieldElem volume;
  CertInterval quotient;
};

/// L_P(S^k(p)) / vol(S^k(p)).
inline EmpiricalFrequency empirical_frequency(const Patch& p, const SubstitutionSystem& sys, int proto, int k,
                                              std::size_t budget = kDefaultBudget, int bits = 64) {
  Host host(sys.protos, supertile(sys, proto, k, budget));
  EmpiricalFrequency e;
  e.count = Integer(static_cast<unsigned long>(occurrences(p, host).size()));
  e.volume = sys.lambda_d().pow(k) * volume(sys.protos[proto].support);
  e.quotient = (FieldElem(Rational(e.count)) / e.volume).approximate(bits);
  return e;
}

/// Exact patch frequencies through the corona decomposition. Caches the
/// expanded coronas S^k(B) per level.
class FrequencyEngine {
 public:
  FrequencyEngine(const SubstitutionSystem& sys, const CoronaSet& cs, std::size_t budget = kDefaultBudget)
      : sys_(&sys), cs_(&cs), budget_(budget), freqs_(corona_frequencies(cs)), eta_(compute_eta(cs)) {}

  const SubstitutionSystem& system() const { return *sys_; }
  const CoronaSet& coronas() const { return *cs_; }
  const std::vector<FreqValue>& corona_freqs() const { return freqs_; }
  const Eta& eta() const { return eta_; }
  std::size_t budget() const { return budget_; }

  /// Smallest k with diam^2 < lambda^(2k) eta^2, i.e. the k of the half-open
  /// band lambda^(k-1) eta <= diam < lambda^k eta.
  int band_level(const FieldElem& diam2) const {
    FieldElem l2 = sys_->lambda() * sys_->lambda();
    FieldElem bound = eta_.squared;
    int k = 0;
    while ((diam2 - bound).sign() >= 0) {
      bound *= l2;
      ++k;
    }
    return k;
  }

  struct Result {
    FreqValue freq;
    int k = 0;
    FieldElem diam2;
    std::vector<std::size_t> counts;  // N(P, B) per corona
  };

  Result exact_frequency(const Patch& p) const {
    Result r;
    r.diam2 = patch_diameter2(sys_->protos, p);
    r.k = band_level(r.diam2);
    if (r.k < 1)
      throw Error(ErrorKind::RadiusTooSmall, "patch diameter is below eta; the band level would be " +
                                                 std::to_string(r.k));
    const Vec ref = p.ref ? *p.ref : p.anchor();
    const SimilarityMap mk = sys_->map.power(r.k);
    const auto& hosts = expanded(r.k);
    FieldElem sum;
    r.counts.assign(cs_->size(), 0);
    for (std::size_t b = 0; b < cs_->size(); ++b) {
      const Corona& c = cs_->coronas[b];
      const Host& base = *hosts[b].first;
      const Host& big = *hosts[b].second;
      std::size_t n = 0;
      for (const Vec& v : occurrences(p, big)) {
        Vec z = mk.apply_inverse(v + ref);
        auto own = owner_of(base, z);
        if (!own) throw Error(ErrorKind::DeterminismFailure, "occurrence preimage lies outside the corona");
        if (*own == *c.patch.center) ++n;
      }
      r.counts[b] = n;
      if (n) sum += FieldElem(static_cast<long>(n)) * *freqs_[b].exact;
    }
    r.freq = FreqValue::of(sum / sys_->lambda_d().pow(r.k));
    return r;
  }

 private:
  using HostPair = std::pair<std::unique_ptr<Host>, std::unique_ptr<Host>>;

  const std::vector<HostPair>& expanded(int k) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(k);
    if (it != cache_.end()) return it->second;
    std::vector<HostPair> v;
    for (const auto& c : cs_->coronas) {
      Patch big = c.patch;
      for (int s = 0; s < k; ++s) {
        big = sys_->substitute(big);
        if (big.size() > budget_) throw Error(ErrorKind::BudgetExceeded, "S^k(B) exceeds the tile budget");
      }
      v.emplace_back(std::make_unique<Host>(sys_->protos, c.patch), std::make_unique<Host>(sys_->protos, big));
    }
    return cache_.emplace(k, std::move(v)).first->second;
  }

  const SubstitutionSystem* sys_;
  const CoronaSet* cs_;
  std::size_t budget_;
  std::vector<FreqValue> freqs_;
  Eta eta_;
  mutable std::mutex mu_;
  mutable std::map<int, std::vector<HostPair>> cache_;
};

struct SpectrumEntry {
  PatchKey key;
  Patch patch;  // recentered at a sample center (ref 0)
  FieldElem diam2;
  CertInterval diam;
  int k = 0;
  FreqValue freq;
  FreqValue f;  // freq * lambda^(dk)
};

struct FClass {
  FreqValue value;
  std::size_t multiplicity = 0;
};

struct SpectrumReport {
  std::string system;
  std::string universe;  // prototile fingerprint
  FieldElem lambda;
  int dim = 1;
  int field_degree = 1;
  int band_offset = 0;  // 0: lambda^(k-1) eta <= diam < lambda^k eta; 1: shifted by one level
  int band_width = 1;   // number of admissible k per entry
  Eta eta;
  Rational window;
  std::vector<FieldElem> radii2;
  std::vector<SpectrumEntry> entries;  // sorted by (k, key)
  std::vector<FClass> F;               // sorted by value
  std::vector<std::string> notes;
  std::optional<Vec> period;  // set when the sampled tiling repeats on the window
  std::optional<bool> stable;  // F_est unchanged on a wider run, when checked

  std::optional<std::size_t> find(const PatchKey& key) const {
    for (std::size_t i = 0; i < entries.size(); ++i)
      if (entries[i].key == key) return i;
    return std::nullopt;
  }

  /// Index into F of the class containing the entry's f value.
  std::optional<std::size_t> f_class(const SpectrumEntry& e) const {
    for (std::size_t i = 0; i < F.size(); ++i)
      if (*F[i].value.exact == *e.f.exact) return i;
    return std::nullopt;
  }
};

/// Clusters f values by exact equality and sorts entries and classes.
inline void finalize_spectrum(SpectrumReport& rep) {
  std::sort(rep.entries.begin(), rep.entries.end(), [](const SpectrumEntry& a, const SpectrumEntry& b) {
    return a.k != b.k ? a.k < b.k : a.key < b.key;
  });
  rep.F.clear();
  for (const auto& e : rep.entries) {
    auto it = std::find_if(rep.F.begin(), rep.F.end(), [&](const FClass& c) { return *c.value.exact == *e.f.exact; });
    if (it == rep.F.end()) rep.F.push_back({e.f, 1});
    else ++it->multiplicity;
  }
  std::sort(rep.F.begin(), rep.F.end(), [](const FClass& a, const FClass& b) {
    int s = (*a.value.exact - *b.value.exact).sign();
    return s != 0 ? s < 0 : FieldElem::coeff_compare(*a.value.exact, *b.value.exact) < 0;
  });
}

/// Same F values (as exact field elements), multiplicities ignored.
inline bool same_f_set(const SpectrumReport& a, const SpectrumReport& b) {
  if (a.F.size() != b.F.size()) return false;
  for (std::size_t i = 0; i < a.F.size(); ++i)
    if (*a.F[i].value.exact != *b.F[i].value.exact) return false;
  return true;
}

struct SpectrumParams {
  FieldElem r_min2;
  FieldElem r_max2;
  Rational window = 0;          // half-width of the center region; 0 picks 2 r_max + 8
  Rational grid_step{1, 2};     // d = 2 center spacing
};

/// Radii r_j^2 = r_min^2 lambda^j (ratio lambda^(1/2) in r) up to r_max^2.
inline std::vector<FieldElem> spectrum_radii(const SubstitutionSystem& sys, const FieldElem& r_min2,
                                             const FieldElem& r_max2) {
  std::vector<FieldElem> out;
  for (FieldElem r2 = r_min2; (r2 - r_max2).sign() <= 0; r2 *= sys.lambda()) out.push_back(r2);
  return out;
}

inline Rational default_window(const FieldElem& r_max2) {
  double r = std::sqrt(std::max(0.0, r_max2.to_double()));
  return Rational(static_cast<long>(std::ceil(2 * r)) + 8);
}

/// Distinct ball patches (keyed by tile set) with centers in the central
/// region of half-width `window` of the fixed-point tiling, over all radii.
inline std::map<PatchKey, std::pair<BallSample, FieldElem>> sample_ball_patches(
    const SubstitutionSystem& sys, const std::vector<FieldElem>& radii2, const Rational& window,
    const Rational& grid_step, std::size_t budget) {
  Seed seed = find_fixed_seed(sys, 4, budget);
  FieldElem rmax2 = radii2.empty() ? FieldElem() : radii2.back();
  // Cover the region plus one ball radius (and a unit margin).
  double reach = window.get_d() * (sys.dim == 2 ? std::sqrt(2.0) : 1.0) + std::sqrt(rmax2.to_double()) + 1;
  Rational rr(static_cast<long>(std::ceil(reach)));
  Host host(sys.protos, seed_window(sys, seed, FieldElem(rr * rr), budget));
  std::map<PatchKey, std::pair<BallSample, FieldElem>> out;
  for (const auto& r2 : radii2) {
    auto samples = sys.dim == 1 ? ball_patches_1d(host, FieldElem(-window), FieldElem(window), r2)
                                : ball_patches_grid(host, Vec::zero(2), window, grid_step, r2);
    for (auto& [key, s] : samples) out.try_emplace(key, std::move(s), r2);
  }
  return out;
}

/// Frequency spectrum: every distinct sampled ball patch with its band level
/// k, exact frequency and f = freq lambda^(dk), plus the clustered set F_est.
inline SpectrumReport spectrum(const FrequencyEngine& eng, const SpectrumParams& params) {
  const auto& sys = eng.system();
  SpectrumReport rep;
  rep.system = sys.name;
  rep.universe = sys.protos.fingerprint();
  rep.lambda = sys.lambda();
  rep.dim = sys.dim;
  rep.field_degree = sys.field_degree();
  rep.eta = eng.eta();
  rep.window = params.window > 0 ? params.window : default_window(params.r_max2);
  rep.radii2 = spectrum_radii(sys, params.r_min2, params.r_max2);
  FieldElem eta_half2 = eng.eta().squared * FieldElem(Rational(1, 4));
  if ((params.r_min2 - eta_half2).sign() < 0)
    throw Error(ErrorKind::RadiusTooSmall, "r_min must be at least eta / 2");
  auto samples = sample_ball_patches(sys, rep.radii2, rep.window, params.grid_step, eng.budget());
  const FieldElem ld = sys.lambda_d();
  for (auto& [key, sr] : samples) {
    auto& s = sr.first;
    auto res = eng.exact_frequency(s.patch);
    SpectrumEntry e;
    e.key = key;
    e.patch = std::move(s.patch);
    e.diam2 = res.diam2;
    e.diam = detail::sqrt_cert(res.diam2, 64);
    e.k = res.k;
    e.freq = res.freq;
    e.f = FreqValue::of(*res.freq.exact * ld.pow(res.k));
    rep.entries.push_back(std::move(e));
  }
  finalize_spectrum(rep);
  return rep;
}

inline std::string format_freq(const FreqValue& f, int degree) {
  std::string s = f.exact ? "[" + f.exact->to_string(degree) + "]" : "[?]";
  return s + " ~ [" + format_decimal(f.certified.lo, 15) + ", " + format_decimal(f.certified.hi, 15) + "]";
}

/// Structured text: header, F_est, then entries sorted by (k, key).
inline std::string to_text(const SpectrumReport& rep) {
  std::ostringstream os;
  const int n = rep.field_degree;
  os << "system " << rep.system << "\n";
  os << "lambda " << rep.lambda.pretty() << "\n";
  os << "dimension " << rep.dim << "\n";
  os << "eta^2 " << rep.eta.squared.pretty() << " eta ~ " << format_decimal(rep.eta.certified.lo, 15) << "\n";
  os << "window " << format_rational(rep.window) << "\n";
  os << "band offset " << rep.band_offset << " width " << rep.band_width << "\n";
  for (const auto& note : rep.notes) os << "note " << note << "\n";
  if (rep.period) os << "periodic " << rep.period->to_string(n) << "\n";
  if (rep.stable) os << "stable " << (*rep.stable ? "yes" : "no") << "\n";
  os << "radii2";
  for (const auto& r : rep.radii2) os << " " << r.pretty();
  os << "\n";
  os << "F_est " << rep.F.size() << "\n";
  for (const auto& c : rep.F) os << "  f " << format_freq(c.value, n) << " x" << c.multiplicity << "\n";
  os << "entries " << rep.entries.size() << "\n";
  for (const auto& e : rep.entries) {
    os << "  k=" << e.k << " diam~" << format_decimal(e.diam.lo, 10) << " freq " << format_freq(e.freq, n) << " f "
       << format_freq(e.f, n) << "\n";
    os << "    key " << e.key << "\n";
  }
  return os.str();
}

}  // namespace tilefreq
