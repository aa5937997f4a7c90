// tilefreq: command-line front end for the substitution tiling library.

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tilefreq/cobham.hpp"
#include "tilefreq/factor.hpp"
#include "tilefreq/io.hpp"
#include "tilefreq/svg.hpp"

using namespace tilefreq;

namespace {

enum Exit { kOk = 0, kFailed = 1, kUsage = 2, kExhausted = 3 };

struct Options {
  std::string system, system2, derivation, proto, r_min, r_max, center, svg, json;
  int k = -1;
  int bound = 16;
  int precision = 64;
  int seed_window = 0;
  std::size_t budget = kDefaultBudget;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string decimal(const CertInterval& c) { return format_decimal(c.lo, 15); }

std::string matrix_text(const IntMatrix& a) {
  std::string s = "[";
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += i ? ",[" : "[";
    for (std::size_t j = 0; j < a[i].size(); ++j) s += (j ? "," : "") + a[i][j].get_str();
    s += "]";
  }
  return s + "]";
}

int proto_id(const SubstitutionSystem& sys, const std::string& label) {
  if (label.empty()) return 0;
  auto id = sys.protos.id_of(label);
  if (!id) throw UsageError("unknown prototile '" + label + "'");
  return *id;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

SubstitutionSystem need_system(const Options& o) {
  if (o.system.empty()) throw UsageError("--system is required");
  return io::load_system(o.system);
}

Rational need_rational(const std::string& text, const char* flag) {
  try {
    return parse_rational(text);
  } catch (const Error&) {
    throw UsageError(std::string(flag) + " expects a rational, got '" + text + "'");
  }
}

Vec parse_center(const SubstitutionSystem& sys, const std::string& text) {
  std::vector<FieldElem> c;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) c.emplace_back(need_rational(part, "--center"));
  if (static_cast<int>(c.size()) != sys.dim) throw UsageError("--center needs " + std::to_string(sys.dim) + " coordinates");
  return sys.dim == 1 ? Vec(c[0]) : Vec(c[0], c[1]);
}

// Radii come in as r; the library works with r^2.
std::pair<FieldElem, FieldElem> radii2(const Options& o, const FrequencyEngine& eng, int default_levels) {
  const auto& sys = eng.system();
  FieldElem lo = o.r_min.empty() ? eng.eta().squared : FieldElem(need_rational(o.r_min, "--r-min")).pow(2);
  FieldElem hi = o.r_max.empty() ? eng.eta().squared * sys.lambda().pow(2 * default_levels)
                                 : FieldElem(need_rational(o.r_max, "--r-max")).pow(2);
  if ((hi - lo).sign() < 0) throw UsageError("--r-max must be at least --r-min");
  return {lo, hi};
}

int cmd_validate(const Options& o) {
  auto sys = need_system(o);
  std::cout << "system " << sys.name << "\n";
  std::cout << "dimension " << sys.dim << "\n";
  std::cout << "lambda " << sys.lambda().pretty() << " ~ " << decimal(sys.lambda().approximate(o.precision)) << "\n";
  std::cout << "matrix " << matrix_text(sys.matrix) << "\n";
  auto report = validate(sys);
  if (report.ok()) {
    auto pd = perron(sys, o.precision);
    std::cout << "eigenvalue " << pd.eigenvalue.pretty() << " ~ " << decimal(pd.eigenvalue_interval) << "\n";
  }
  for (const auto& f : report.failures) std::cout << "failure " << f << "\n";
  std::cout << (report.ok() ? "valid" : "invalid") << "\n";
  if (!o.json.empty()) write_file(o.json, io::write_system(sys).dump(2) + "\n");
  return report.ok() ? kOk : kFailed;
}

int cmd_matrix(const Options& o) {
  auto sys = need_system(o);
  std::cout << "matrix " << matrix_text(sys.matrix) << "\n";
  auto idx = primitivity_index(sys.matrix);
  std::cout << "primitive " << (idx ? "yes (A^" + std::to_string(*idx) + " > 0)" : std::string("no")) << "\n";
  if (!idx) return kFailed;
  auto pd = perron(sys, o.precision);
  std::cout << "eigenvalue " << pd.eigenvalue.pretty() << " ~ " << decimal(pd.eigenvalue_interval) << "\n";
  std::cout << "eigenvector\n";
  for (std::size_t i = 0; i < sys.size(); ++i)
    std::cout << "  " << sys.protos.tiles[i].label << " " << pd.right_eigenvector[i].pretty() << " ~ "
              << decimal(pd.right_eigenvector_intervals[i]) << "\n";
  std::cout << "residual " << format_rational(pd.residual_bound) << "\n";
  return kOk;
}

int cmd_supertile(const Options& o) {
  auto sys = need_system(o);
  const int p = proto_id(sys, o.proto);
  const int k = o.k < 0 ? 3 : o.k;
  Patch st = supertile(sys, p, k, o.budget);
  std::cout << "supertile " << sys.protos[p].label << " level " << k << "\n";
  std::cout << "tiles " << st.size() << "\n";
  std::vector<std::size_t> counts(sys.size(), 0);
  for (const auto& t : st.tiles) ++counts[static_cast<std::size_t>(t.proto)];
  for (std::size_t i = 0; i < sys.size(); ++i) std::cout << "  " << sys.protos.tiles[i].label << " " << counts[i] << "\n";
  if (sys.dim == 1) {
    std::vector<Tile> order = st.tiles;
    std::sort(order.begin(), order.end(), [](const Tile& a, const Tile& b) { return a.offset[0] < b.offset[0]; });
    std::string word;
    for (const auto& t : order) word += sys.protos[t.proto].label;
    if (word.size() <= 4096) std::cout << "word " << word << "\n";
  }
  if (!o.svg.empty()) write_file(o.svg, render_svg(sys.protos, st));
  return kOk;
}

int cmd_coronas(const Options& o) {
  auto sys = need_system(o);
  auto cs = enumerate_coronas(sys, 2, o.budget);
  auto freqs = corona_frequencies(cs, o.precision);
  std::cout << "coronas " << cs.size() << " (collared level " << cs.level << ", stable from level " << cs.stabilized_at
            << ")\n";
  for (std::size_t i = 0; i < cs.size(); ++i)
    std::cout << "  " << cs.coronas[i].key << "\n    freq " << format_freq(freqs[i], sys.field_degree()) << "\n";
  return kOk;
}

int cmd_eta(const Options& o) {
  auto sys = need_system(o);
  auto cs = enumerate_coronas(sys, 2, o.budget);
  auto eta = compute_eta(cs, o.precision);
  std::cout << "eta^2 " << eta.squared.pretty() << "\n";
  if (eta.exact) std::cout << "eta " << eta.exact->pretty() << "\n";
  std::cout << "eta ~ [" << format_decimal(eta.certified.lo, 15) << ", " << format_decimal(eta.certified.hi, 15) << "]\n";
  return kOk;
}

int cmd_freq(const Options& o) {
  auto sys = need_system(o);
  auto cs = enumerate_coronas(sys, 2, o.budget);
  FrequencyEngine eng(sys, cs, o.budget);
  const int n = sys.field_degree();
  auto tiles = tile_frequencies(cs, eng.corona_freqs(), o.precision);
  for (std::size_t i = 0; i < sys.size(); ++i)
    std::cout << "tile " << sys.protos.tiles[i].label << " " << format_freq(tiles[i], n) << "\n";
  if (o.center.empty()) return kOk;
  if (o.r_min.empty()) throw UsageError("--center needs --r-min (the ball radius)");
  Vec c = parse_center(sys, o.center);
  Rational r = need_rational(o.r_min, "--r-min");
  FieldElem r2 = FieldElem(r * r);
  double reach = std::sqrt(norm2(c).to_double()) + r.get_d() + 2;
  Rational rr(static_cast<long>(std::ceil(reach)));
  Host host(sys.protos, seed_window(sys, find_fixed_seed(sys, 4, o.budget), FieldElem(rr * rr), o.budget));
  Patch p = extract_ball_patch(host, c, r2);
  auto res = eng.exact_frequency(p);
  std::cout << "patch " << patch_key(sys.protos, p, false) << "\n";
  std::cout << "tiles " << p.size() << " k " << res.k << "\n";
  std::cout << "freq " << format_freq(res.freq, n) << "\n";
  if (o.k >= 0) {
    auto e = empirical_frequency(p, sys, proto_id(sys, o.proto), o.k, o.budget);
    std::cout << "empirical k=" << o.k << " count " << e.count.get_str() << " ~ " << format_decimal(e.quotient.lo, 15)
              << "\n";
  }
  return kOk;
}

int cmd_spectrum(const Options& o) {
  auto sys = need_system(o);
  auto cs = enumerate_coronas(sys, 2, o.budget);
  FrequencyEngine eng(sys, cs, o.budget);
  auto [lo, hi] = radii2(o, eng, 4);
  SpectrumParams params{lo, hi, Rational(o.seed_window)};
  auto rep = spectrum(eng, params);
  std::cout << to_text(rep);
  if (!o.json.empty()) write_file(o.json, io::write_report(rep).dump(2) + "\n");
  return kOk;
}

LocalDerivation need_derivation(const Options& o, const SubstitutionSystem& sys) {
  if (o.derivation.empty()) throw UsageError("--derivation is required");
  auto ld = io::load_derivation(o.derivation, sys);
  check_code_total(ld, sys, Rational(o.seed_window > 0 ? o.seed_window : 32), o.budget);
  return ld;
}

int cmd_derive(const Options& o) {
  auto sys = need_system(o);
  auto ld = need_derivation(o, sys);
  const int p = proto_id(sys, o.proto);
  const int k = o.k < 0 ? 6 : o.k;
  DerivedPatch d = derive(ld, sys.protos, supertile(sys, p, k, o.budget));
  std::cout << "derivation " << ld.name << " on " << sys.protos[p].label << " level " << k << "\n";
  std::cout << "tiles " << d.patch.size() << "\n";
  std::vector<std::size_t> counts(ld.target.size(), 0);
  for (const auto& t : d.patch.tiles) ++counts[static_cast<std::size_t>(t.proto)];
  for (std::size_t i = 0; i < counts.size(); ++i) std::cout << "  " << ld.target.tiles[i].label << " " << counts[i] << "\n";
  if (sys.dim == 1) {
    std::vector<Tile> order = d.patch.tiles;
    std::sort(order.begin(), order.end(), [](const Tile& a, const Tile& b) { return a.offset[0] < b.offset[0]; });
    std::string word;
    for (const auto& t : order) word += ld.target[t.proto].label;
    if (word.size() <= 4096) std::cout << "word " << word << "\n";
  }
  if (!o.svg.empty()) write_file(o.svg, render_svg(ld.target, d.patch));
  return kOk;
}

int cmd_factor_spectrum(const Options& o) {
  auto sys = need_system(o);
  auto ld = need_derivation(o, sys);
  auto cs = enumerate_coronas(sys, 2, o.budget);
  FrequencyEngine eng(sys, cs, o.budget);
  auto [lo, hi] = radii2(o, eng, 3);
  FactorParams params{lo, hi, Rational(o.seed_window)};
  auto rep = factor_spectrum(eng, ld, params);
  const int n = sys.field_degree();
  auto tiles = derived_tile_frequencies(eng, ld);
  for (std::size_t i = 0; i < tiles.size(); ++i)
    std::cout << "derived tile " << ld.target.tiles[i].label << " " << format_freq(tiles[i], n) << "\n";
  std::cout << to_text(rep);
  auto law = check_prop34_law(rep, sys.lambda(), sys.dim);
  std::cout << "law " << (law.all_pass() ? "pass" : "fail") << " (" << law.failures.size() << " entry failures)\n";
  for (const auto& f : law.failures) std::cout << "  " << f << "\n";
  if (!o.json.empty()) write_file(o.json, io::write_report(rep).dump(2) + "\n");
  return law.all_pass() ? kOk : kFailed;
}

int cmd_cobham(const Options& o) {
  auto s1 = need_system(o);
  if (o.system2.empty()) throw UsageError("--system2 is required");
  auto s2 = io::load_system(o.system2);
  std::cout << "lambda1 " << s1.lambda().pretty() << " ~ " << decimal(s1.lambda().approximate(o.precision)) << "\n";
  std::cout << "lambda2 " << s2.lambda().pretty() << " ~ " << decimal(s2.lambda().approximate(o.precision)) << "\n";
  std::cout << to_text(mult_dependent(s1.lambda(), s2.lambda(), o.bound));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Substitution tilings: supertiles, exact patch frequencies, spectra, factors"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* c) {
    c->add_option("--system", o.system, "system file (JSON)");
    c->add_option("--budget", o.budget, "tile budget for supertiles");
    c->add_option("--precision", o.precision, "bits for certified intervals")->check(CLI::Range(16, 4096));
  };
  std::map<std::string, int (*)(const Options&)> handlers = {
      {"validate", cmd_validate}, {"matrix", cmd_matrix},   {"supertile", cmd_supertile},
      {"coronas", cmd_coronas},   {"eta", cmd_eta},         {"freq", cmd_freq},
      {"spectrum", cmd_spectrum}, {"derive", cmd_derive},   {"factor-spectrum", cmd_factor_spectrum},
      {"cobham", cmd_cobham}};
  std::map<std::string, CLI::App*> subs;
  subs["validate"] = app.add_subcommand("validate", "check a system and print its matrix and Perron root");
  subs["matrix"] = app.add_subcommand("matrix", "substitution matrix, primitivity and Perron vector");
  subs["supertile"] = app.add_subcommand("supertile", "build S^k(p), optionally as SVG");
  subs["coronas"] = app.add_subcommand("coronas", "collared tiles and their frequencies");
  subs["eta"] = app.add_subcommand("eta", "the corona radius eta");
  subs["freq"] = app.add_subcommand("freq", "tile frequencies, or the frequency of one ball patch");
  subs["spectrum"] = app.add_subcommand("spectrum", "frequency spectrum over a radius range");
  subs["derive"] = app.add_subcommand("derive", "apply a local derivation to a supertile");
  subs["factor-spectrum"] = app.add_subcommand("factor-spectrum", "spectrum of a derived tiling");
  subs["cobham"] = app.add_subcommand("cobham", "multiplicative dependence of two stretching factors");
  for (auto& [name, c] : subs) common(c);
  subs["validate"]->add_option("--json", o.json, "write the parsed system back as JSON");
  for (const char* n : {"supertile", "derive", "freq"}) {
    subs[n]->add_option("-p", o.proto, "prototile label");
    subs[n]->add_option("-k", o.k, "substitution level")->check(CLI::NonNegativeNumber);
  }
  for (const char* n : {"supertile", "derive"}) subs[n]->add_option("--svg", o.svg, "SVG output path");
  for (const char* n : {"freq", "spectrum", "factor-spectrum"}) subs[n]->add_option("--r-min", o.r_min, "radius (rational)");
  for (const char* n : {"spectrum", "factor-spectrum"}) {
    subs[n]->add_option("--r-max", o.r_max, "radius (rational)");
    subs[n]->add_option("--json", o.json, "JSON report path");
  }
  for (const char* n : {"spectrum", "factor-spectrum", "derive"})
    subs[n]->add_option("--seed-window", o.seed_window, "half-width of the sampling window")->check(CLI::NonNegativeNumber);
  for (const char* n : {"derive", "factor-spectrum"}) subs[n]->add_option("--derivation", o.derivation, "derivation file");
  subs["freq"]->add_option("--center", o.center, "ball center \"x\" or \"x,y\"");
  subs["cobham"]->add_option("--system2", o.system2, "second system file");
  subs["cobham"]->add_option("--bound", o.bound, "largest exponent searched")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  for (auto& [name, c] : subs) {
    if (!c->parsed()) continue;
    try {
      return handlers.at(name)(o);
    } catch (const UsageError& e) {
      std::cerr << "usage: " << e.what() << "\n";
      return kUsage;
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return e.kind() == ErrorKind::BudgetExceeded || e.kind() == ErrorKind::PrecisionExhausted ? kExhausted
                                                                                                   : kFailed;
    }
  }
  return kUsage;
}
