#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tilefreq/freq.hpp"

namespace tilefreq {

/// Block code: each tile is relabeled by the ball patch of squared radius r2
/// around its prototile's anchor point (center tile marked). Outputs live in
/// a target prototile table whose supports match the coded tiles.
struct LocalDerivation {
  std::string name;
  FieldElem r2;
  std::vector<Vec> anchors;  // per source prototile, relative to the tile offset
  Prototiles target;
  std::map<PatchKey, int> code;
};

struct DerivedPatch {
  Patch patch;                       // over ld.target
  std::vector<std::size_t> source;   // host index of each derived tile
};

/// Coding patch of host tile i: the ball patch around its anchor with the
/// tile itself marked.
inline Patch coding_patch(const LocalDerivation& ld, const Host& host, std::size_t i) {
  const Tile& t = host.tile(i);
  Vec y = t.offset + ld.anchors.at(static_cast<std::size_t>(t.proto));
  Patch p = extract_ball_patch(host, y, ld.r2);
  Tile self{t.proto, t.offset - y};
  for (std::size_t j = 0; j < p.tiles.size(); ++j)
    if (p.tiles[j] == self) p.center = j;
  if (!p.center) throw Error(ErrorKind::DeterminismFailure, "coding ball misses its own tile");
  return p;
}

inline PatchKey coding_key(const LocalDerivation& ld, const Host& host, std::size_t i) {
  return patch_key(host.protos(), coding_patch(ld, host, i));
}

/// Relabels every tile whose coding ball lies inside the host; tiles near
/// the host boundary are dropped.
inline DerivedPatch derive(const LocalDerivation& ld, const Host& host) {
  DerivedPatch out;
  std::map<std::pair<int, int>, bool> support_ok;
  for (std::size_t i = 0; i < host.size(); ++i) {
    Patch cp;
    try {
      cp = coding_patch(ld, host, i);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::BallNotCovered) continue;
      throw;
    }
    PatchKey key = patch_key(host.protos(), cp);
    auto it = ld.code.find(key);
    if (it == ld.code.end()) throw Error(ErrorKind::IncompleteCode, "no output for coding key " + key);
    const Tile& t = host.tile(i);
    auto [pos, fresh] = support_ok.try_emplace({t.proto, it->second}, false);
    if (fresh)
      pos->second = it->second >= 0 && static_cast<std::size_t>(it->second) < ld.target.size() &&
                    ld.target[it->second].support.verts == host.protos()[t.proto].support.verts;
    if (!pos->second)
      throw Error(ErrorKind::InvalidSystem, "output prototile " + std::to_string(it->second) +
                                                " does not preserve the support of " + host.protos()[t.proto].label);
    out.patch.tiles.push_back({it->second, t.offset});
    out.source.push_back(i);
  }
  if (out.patch.empty()) throw Error(ErrorKind::MarginTooSmall, "no host tile has its coding ball inside the host");
  // Keep `source` aligned with the sorted tiles.
  std::vector<std::size_t> order(out.patch.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return tile_compare(out.patch.tiles[a], out.patch.tiles[b]) < 0; });
  DerivedPatch sorted;
  for (std::size_t i : order) {
    sorted.patch.tiles.push_back(out.patch.tiles[i]);
    sorted.source.push_back(out.source[i]);
  }
  return sorted;
}

inline DerivedPatch derive(const LocalDerivation& ld, const Prototiles& source, const Patch& host) {
  return derive(ld, Host(source, host));
}

/// Coding patches (center marked) seen on a seed window of the source.
inline std::map<PatchKey, Patch> coding_patches(const LocalDerivation& ld, const SubstitutionSystem& sys,
                                                const Rational& window, std::size_t budget = kDefaultBudget) {
  Seed seed = find_fixed_seed(sys, 4, budget);
  Host host(sys.protos, seed_window(sys, seed, FieldElem(window * window), budget));
  std::map<PatchKey, Patch> out;
  for (std::size_t i = 0; i < host.size(); ++i) {
    try {
      Patch p = coding_patch(ld, host, i);
      PatchKey k = patch_key(sys.protos, p);
      out.try_emplace(std::move(k), std::move(p));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::BallNotCovered) throw;
    }
  }
  return out;
}

/// Totality check on a validation window; IncompleteCode names the first
/// missing key.
inline std::vector<PatchKey> check_code_total(const LocalDerivation& ld, const SubstitutionSystem& sys,
                                              const Rational& window, std::size_t budget = kDefaultBudget) {
  std::vector<PatchKey> keys;
  for (const auto& [k, p] : coding_patches(ld, sys, window, budget)) {
    if (!ld.code.count(k)) throw Error(ErrorKind::IncompleteCode, "no output for coding key " + k);
    keys.push_back(k);
  }
  return keys;
}

/// Exact density of each target prototile: the sum of the source
/// frequencies of the coding patches mapped to it.
inline std::vector<FreqValue> derived_tile_frequencies(const FrequencyEngine& eng, const LocalDerivation& ld,
                                                       const Rational& window = 64) {
  const auto& sys = eng.system();
  auto tiles = tile_frequencies(eng.coronas(), eng.corona_freqs());
  std::vector<FieldElem> sum(ld.target.size());
  for (const auto& [k, p] : coding_patches(ld, sys, window, eng.budget())) {
    auto it = ld.code.find(k);
    if (it == ld.code.end()) throw Error(ErrorKind::IncompleteCode, "no output for coding key " + k);
    const int proto = p.tiles[*p.center].proto;
    // A lone tile is below the band of exact_frequency; use the tile density.
    FieldElem f = p.size() == 1 ? *tiles[static_cast<std::size_t>(proto)].exact : *eng.exact_frequency(p).freq.exact;
    sum[static_cast<std::size_t>(it->second)] += f;
  }
  std::vector<FreqValue> out;
  for (auto& x : sum) out.push_back(FreqValue::of(x));
  return out;
}

struct FactorParams {
  FieldElem r_min2;
  FieldElem r_max2;
  Rational window = 0;
  Rational grid_step{1, 2};
  bool check_stability = true;
};

namespace detail {

inline SpectrumReport factor_spectrum_once(const FrequencyEngine& eng, const LocalDerivation& ld, const FactorParams& params,
                                      const Rational& window) {
  const auto& sys = eng.system();
  SpectrumReport rep;
  rep.system = sys.name + "->" + ld.name;
  rep.universe = ld.target.fingerprint();
  rep.lambda = sys.lambda();
  rep.dim = sys.dim;
  rep.field_degree = sys.field_degree();
  rep.band_offset = 1;
  rep.band_width = 2;
  rep.eta = eng.eta();
  rep.window = window;
  rep.radii2 = spectrum_radii(sys, params.r_min2, params.r_max2);
  rep.notes.push_back("factor maps are block codes (local derivations) only");

  // Source window: sample region + ball radius + coding reach + one tile of slack.
  const double coding = std::sqrt(std::max(0.0, ld.r2.to_double())) + 2 * sys.protos.max_diameter();
  const double rmax = rep.radii2.empty() ? 0 : std::sqrt(rep.radii2.back().to_double());
  const double region = window.get_d() * (sys.dim == 2 ? std::sqrt(2.0) : 1.0);
  // Occurrences are scanned over the whole derived host, which is twice the
  // sample reach so rare preimages are still seen.
  Rational reach(static_cast<long>(std::ceil(2 * (region + rmax + coding) + 4)));
  Seed seed = find_fixed_seed(sys, 4, eng.budget());
  Host src(sys.protos, seed_window(sys, seed, FieldElem(reach * reach), eng.budget()));
  DerivedPatch der = derive(ld, src);
  Host dh(ld.target, der.patch);

  if (auto v = is_periodic_window(ld.target, Patch{der.patch.tiles, Vec::zero(sys.dim), std::nullopt},
                                  FieldElem(Rational(sys.dim == 1 ? 16 : 4)))) {
    rep.period = *v;
    rep.notes.push_back("derived tiling is periodic on the window (v = " + v->to_string(rep.field_degree) +
                        "); the non-periodic hypothesis fails");
  }

  std::map<PatchKey, BallSample> samples;
  for (const auto& r2 : rep.radii2) {
    auto s = sys.dim == 1 ? ball_patches_1d(dh, FieldElem(-window), FieldElem(window), r2)
                          : ball_patches_grid(dh, Vec::zero(2), window, params.grid_step, r2);
    for (auto& [k, b] : s) samples.try_emplace(k, std::move(b));
  }

  const FieldElem ld_pow = sys.lambda_d();
  for (auto& [key, s] : samples) {
    // Preimage classes: the source tiles of all coding balls of the
    // occurrence, translated back by the occurrence vector.
    std::map<PatchKey, Patch> preimages;
    auto occ = occurrences(s.patch, dh);
    for (const Vec& v : occ) {
      Patch q;
      std::set<std::size_t> idx;
      for (const auto& t : s.patch.tiles) {
        auto di = dh.find({t.proto, t.offset + v});
        const std::size_t si = der.source[*di];
        Vec y = src.tile(si).offset + ld.anchors[static_cast<std::size_t>(src.tile(si).proto)];
        for (std::size_t j : src.meeting_ball(y, ld.r2)) idx.insert(j);
      }
      for (std::size_t j : idx) q.tiles.push_back({src.tile(j).proto, src.tile(j).offset - v});
      q.ref = Vec::zero(sys.dim);  // the sample center, inside supp(P)
      q.sort();
      PatchKey qk = patch_key(sys.protos, q, false);
      preimages.try_emplace(std::move(qk), std::move(q));
    }
    FieldElem freq;
    for (const auto& [qk, q] : preimages) freq += *eng.exact_frequency(q).freq.exact;

    SpectrumEntry e;
    e.key = key;
    e.patch = s.patch;
    e.diam2 = tilefreq::patch_diameter2(ld.target, s.patch);
    e.diam = detail::sqrt_cert(e.diam2, 64);
    e.k = eng.band_level(e.diam2) + 1;
    e.freq = FreqValue::of(freq);
    e.f = FreqValue::of(freq * ld_pow.pow(e.k));
    rep.entries.push_back(std::move(e));
  }
  finalize_spectrum(rep);
  return rep;
}

}  // namespace detail

/// Spectrum of the derived tiling. Frequencies are exact: the occurrences of
/// a derived patch P are partitioned by their source preimage patch Q (all
/// source tiles in the coding balls of P's tiles), so freq(P) is the sum of
/// the exact source frequencies of the distinct Q. k comes from the shifted
/// band eta lambda^(k-3) <= diam < eta lambda^(k-1) (smallest admissible k).
inline SpectrumReport factor_spectrum(const FrequencyEngine& eng, const LocalDerivation& ld,
                                      const FactorParams& params) {
  Rational window = params.window > 0 ? params.window : default_window(params.r_max2);
  auto rep = detail::factor_spectrum_once(eng, ld, params, window);
  if (params.check_stability) {
    FactorParams wider = params;
    wider.r_max2 = params.r_max2 * eng.system().lambda() * eng.system().lambda();
    rep.stable = same_f_set(rep, detail::factor_spectrum_once(eng, ld, wider, window * 2));
  }
  return rep;
}

struct LawCheck {
  std::vector<bool> entry_pass;
  std::vector<std::string> failures;
  std::optional<bool> stable;
  bool all_pass() const {
    return failures.empty() && (!stable || *stable);
  }
};

/// For each entry: f = freq lambda^(dk) exactly, f lies in F_est, and diam is
/// inside the band eta lambda^(k-3) <= diam < eta lambda^(k-1).
inline LawCheck check_prop34_law(const SpectrumReport& rep, const FieldElem& lambda, int d) {
  LawCheck out;
  out.stable = rep.stable;
  const FieldElem l2 = lambda * lambda;
  for (const auto& e : rep.entries) {
    bool ok = true;
    std::string why;
    if (*e.f.exact != *e.freq.exact * lambda.pow(d).pow(e.k)) {
      ok = false;
      why = "f != freq * lambda^(dk)";
    } else if (!rep.f_class(e)) {
      ok = false;
      why = "f not in F_est";
    } else if (e.k < 3) {
      ok = false;
      why = "k below 3";
    } else {
      FieldElem lo = rep.eta.squared * l2.pow(e.k - 3), hi = rep.eta.squared * l2.pow(e.k - 1);
      if ((e.diam2 - lo).sign() < 0 || (e.diam2 - hi).sign() >= 0) {
        ok = false;
        why = "diameter outside the band";
      }
    }
    out.entry_pass.push_back(ok);
    if (!ok) out.failures.push_back(e.key + ": " + why);
  }
  return out;
}

}  // namespace tilefreq
