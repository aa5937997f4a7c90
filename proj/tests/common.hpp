#pragma once

#include <map>
#include <memory>
#include <string>

#include "tilefreq/cobham.hpp"
#include "tilefreq/io.hpp"
#include "tilefreq/svg.hpp"

namespace tilefreq::test {

inline std::string data_path(const std::string& rel) { return std::string(TILEFREQ_DATA_DIR) + "/" + rel; }

/// Corpus system by file stem; loaded once per process.
inline const SubstitutionSystem& corpus(const std::string& name) {
  static std::map<std::string, std::unique_ptr<SubstitutionSystem>> cache;
  auto& slot = cache[name];
  if (!slot) slot = std::make_unique<SubstitutionSystem>(io::load_system(data_path("systems/" + name + ".json")));
  return *slot;
}

/// Coronas and frequency engine for a corpus system, built once.
struct Prepared {
  const SubstitutionSystem* sys;
  CoronaSet coronas;
  std::unique_ptr<FrequencyEngine> engine;
};

inline const Prepared& prepared(const std::string& name) {
  static std::map<std::string, std::unique_ptr<Prepared>> cache;
  auto& slot = cache[name];
  if (!slot) {
    const auto& sys = corpus(name);
    slot = std::make_unique<Prepared>(Prepared{&sys, enumerate_coronas(sys), nullptr});
    slot->engine = std::make_unique<FrequencyEngine>(sys, slot->coronas);
  }
  return *slot;
}

inline const Field& golden() { return make_field(FieldSpec{{-1, -1, 1}, 1, 2}); }
inline FieldElem phi() { return golden().lambda(); }
inline FieldElem q(long num, long den = 1) { return FieldElem(Rational(num, den)); }
inline FieldElem gq(long a, long b, long den = 1) {  // (a + b phi) / den
  return golden().from_coeffs({Rational(a, den), Rational(b, den)});
}

}  // namespace tilefreq::test
