#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tilefreq/factor.hpp"

namespace tilefreq::io {

using json = nlohmann::json;

namespace detail {

inline Rational read_rational(const json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long>());
  throw Error(ErrorKind::Parse, "expected a rational string, got " + j.dump());
}

inline FieldElem read_elem(const json& j, const Field& f) {
  if (!j.is_array()) throw Error(ErrorKind::Parse, "expected a coefficient array, got " + j.dump());
  if (static_cast<int>(j.size()) != f.degree())
    throw Error(ErrorKind::Parse, "coefficient array " + j.dump() + " must have " + std::to_string(f.degree()) +
                                      " entries");
  std::vector<Rational> c;
  for (const auto& x : j) c.push_back(read_rational(x));
  return f.from_coeffs(std::move(c));
}

inline Vec read_vec(const json& j, const Field& f, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    throw Error(ErrorKind::Parse, "expected a point with " + std::to_string(dim) + " coordinates, got " + j.dump());
  if (dim == 1) return Vec(read_elem(j[0], f));
  return Vec(read_elem(j[0], f), read_elem(j[1], f));
}

inline json write_elem(const FieldElem& x, int degree) {
  json a = json::array();
  for (int i = 0; i < degree; ++i) a.push_back(format_rational(x.coeff(static_cast<std::size_t>(i))));
  return a;
}

inline json write_vec(const Vec& v, int degree) {
  json a = json::array();
  for (int i = 0; i < v.dim; ++i) a.push_back(write_elem(v[i], degree));
  return a;
}

inline const json& at(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorKind::Parse, std::string("missing field '") + key + "'");
  return j.at(key);
}

}  // namespace detail

inline const Field& read_field(const json& j) {
  FieldSpec spec;
  for (const auto& c : detail::at(j, "min_poly")) {
    Rational q = detail::read_rational(c);
    if (q.get_den() != 1) throw Error(ErrorKind::Parse, "minimal polynomial coefficients must be integers");
    spec.min_poly.push_back(q.get_num());
  }
  const auto& iv = detail::at(j, "root_interval");
  if (!iv.is_array() || iv.size() != 2) throw Error(ErrorKind::Parse, "root_interval needs two endpoints");
  spec.root_lo = detail::read_rational(iv[0]);
  spec.root_hi = detail::read_rational(iv[1]);
  return make_field(spec);
}

inline json write_field(const Field& f) {
  json j;
  j["min_poly"] = json::array();
  for (const auto& c : f.min_poly()) j["min_poly"].push_back(c.get_str());
  j["root_interval"] = {format_rational(f.spec().root_lo), format_rational(f.spec().root_hi)};
  return j;
}

/// Parses a system document. Structural problems raise Parse; geometric ones
/// are left to validate().
inline SubstitutionSystem read_system(const json& j) {
  try {
    const Field& f = read_field(detail::at(j, "field"));
    const int dim = detail::at(j, "dimension").get<int>();
    if (dim != 1 && dim != 2) throw Error(ErrorKind::Parse, "dimension must be 1 or 2");
    const auto& jm = detail::at(j, "map");
    SimilarityMap map = SimilarityMap::scaling(detail::read_elem(detail::at(jm, "lambda"), f), dim);
    if (jm.contains("rotation")) {
      const auto& rot = jm.at("rotation");
      if (!rot.is_array() || static_cast<int>(rot.size()) != dim)
        throw Error(ErrorKind::Parse, "rotation must be a " + std::to_string(dim) + "x" + std::to_string(dim) +
                                          " matrix");
      for (int r = 0; r < dim; ++r) {
        if (!rot[r].is_array() || static_cast<int>(rot[r].size()) != dim)
          throw Error(ErrorKind::Parse, "rotation row has wrong length");
        for (int c = 0; c < dim; ++c)
          map.rotation[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = detail::read_elem(rot[r][c], f);
      }
    }
    std::vector<Prototile> protos;
    for (const auto& p : detail::at(j, "prototiles")) {
      Prototile t;
      t.label = detail::at(p, "label").get<std::string>();
      std::vector<Vec> pts;
      for (const auto& v : detail::at(p, "support")) pts.push_back(detail::read_vec(v, f, dim));
      t.support = dim == 1 ? (pts.size() == 2 ? Support::interval(pts[0][0], pts[1][0])
                                              : throw Error(ErrorKind::Parse, "interval support needs 2 points"))
                           : Support::polygon(std::move(pts));
      for (const auto& q : protos)
        if (q.label == t.label) throw Error(ErrorKind::Parse, "duplicate prototile label " + t.label);
      protos.push_back(std::move(t));
    }
    auto id = [&](const std::string& label) {
      for (std::size_t i = 0; i < protos.size(); ++i)
        if (protos[i].label == label) return static_cast<int>(i);
      throw Error(ErrorKind::Parse, "unknown prototile label '" + label + "'");
    };
    std::vector<std::vector<Child>> rule(protos.size());
    std::vector<char> seen(protos.size(), 0);
    for (const auto& r : detail::at(j, "rule")) {
      int p = id(detail::at(r, "parent").get<std::string>());
      if (seen[static_cast<std::size_t>(p)]) throw Error(ErrorKind::Parse, "prototile has two rules");
      seen[static_cast<std::size_t>(p)] = 1;
      for (const auto& c : detail::at(r, "children"))
        rule[static_cast<std::size_t>(p)].push_back(
            {id(detail::at(c, "child").get<std::string>()), detail::read_vec(detail::at(c, "offset"), f, dim)});
    }
    std::string name = j.value("name", std::string("system"));
    return SubstitutionSystem::build(std::move(name), f, dim, std::move(map), std::move(protos), std::move(rule));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
}

inline json write_system(const SubstitutionSystem& sys) {
  const int n = sys.field_degree();
  json j;
  j["name"] = sys.name;
  j["field"] = write_field(*sys.field);
  j["dimension"] = sys.dim;
  json rot = json::array();
  for (const auto& row : sys.map.rotation) {
    json r = json::array();
    for (const auto& x : row) r.push_back(detail::write_elem(x, n));
    rot.push_back(r);
  }
  j["map"] = {{"lambda", detail::write_elem(sys.map.lambda, n)}, {"rotation", rot}};
  j["prototiles"] = json::array();
  for (const auto& p : sys.protos.tiles) {
    json pts = json::array();
    for (const auto& v : p.support.verts) pts.push_back(detail::write_vec(v, n));
    j["prototiles"].push_back({{"label", p.label}, {"support", pts}});
  }
  j["rule"] = json::array();
  for (std::size_t p = 0; p < sys.size(); ++p) {
    json kids = json::array();
    for (const auto& c : sys.rule[p])
      kids.push_back({{"child", sys.protos[c.proto].label}, {"offset", detail::write_vec(c.offset, n)}});
    j["rule"].push_back({{"parent", sys.protos.tiles[p].label}, {"children", kids}});
  }
  return j;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, path + ": " + e.what());
  }
}

inline SubstitutionSystem load_system(const std::string& path) { return read_system(read_json_file(path)); }

namespace detail {

inline Prototiles read_prototiles(const json& arr, const Field& f, int dim) {
  Prototiles out;
  out.dim = dim;
  out.field = &f;
  for (const auto& p : arr) {
    Prototile t;
    t.label = at(p, "label").get<std::string>();
    std::vector<Vec> pts;
    for (const auto& v : at(p, "support")) pts.push_back(read_vec(v, f, dim));
    if (dim == 1 && pts.size() != 2) throw Error(ErrorKind::Parse, "interval support needs 2 points");
    t.support = dim == 1 ? Support::interval(pts[0][0], pts[1][0]) : Support::polygon(std::move(pts));
    if (out.id_of(t.label)) throw Error(ErrorKind::Parse, "duplicate prototile label " + t.label);
    out.tiles.push_back(std::move(t));
  }
  return out;
}

}  // namespace detail

/// Derivation document:
///   {name, radius2: coeffs, anchors: {label: point}, target: [prototile],
///    code: [{key, output}]}
/// Keys are canonical patch keys over the source prototiles.
inline LocalDerivation read_derivation(const json& j, const SubstitutionSystem& source) {
  try {
    const Field& f = *source.field;
    LocalDerivation ld;
    ld.name = j.value("name", std::string("derivation"));
    ld.r2 = detail::read_elem(detail::at(j, "radius2"), f);
    if (ld.r2.sign() < 0) throw Error(ErrorKind::Parse, "radius2 must be nonnegative");
    const auto& an = detail::at(j, "anchors");
    for (const auto& p : source.protos.tiles) {
      if (!an.contains(p.label)) throw Error(ErrorKind::Parse, "no anchor for prototile " + p.label);
      ld.anchors.push_back(detail::read_vec(an.at(p.label), f, source.dim));
    }
    ld.target = detail::read_prototiles(detail::at(j, "target"), f, source.dim);
    for (const auto& c : detail::at(j, "code")) {
      const std::string out = detail::at(c, "output").get<std::string>();
      auto id = ld.target.id_of(out);
      if (!id) throw Error(ErrorKind::Parse, "unknown output label '" + out + "'");
      if (!ld.code.emplace(detail::at(c, "key").get<std::string>(), *id).second)
        throw Error(ErrorKind::Parse, "duplicate coding key");
    }
    return ld;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
}

inline json write_derivation(const LocalDerivation& ld, const SubstitutionSystem& source) {
  const int n = source.field_degree();
  json j;
  j["name"] = ld.name;
  j["source"] = source.name;
  j["radius2"] = detail::write_elem(ld.r2, n);
  j["anchors"] = json::object();
  for (std::size_t i = 0; i < source.size(); ++i)
    j["anchors"][source.protos.tiles[i].label] = detail::write_vec(ld.anchors[i], n);
  j["target"] = json::array();
  for (const auto& p : ld.target.tiles) {
    json pts = json::array();
    for (const auto& v : p.support.verts) pts.push_back(detail::write_vec(v, n));
    j["target"].push_back({{"label", p.label}, {"support", pts}});
  }
  j["code"] = json::array();
  for (const auto& [key, id] : ld.code) j["code"].push_back({{"key", key}, {"output", ld.target[id].label}});
  return j;
}

inline json write_freq(const FreqValue& f, int degree) {
  json j;
  if (f.exact) j["exact"] = detail::write_elem(*f.exact, degree);
  j["interval"] = {format_rational(f.certified.lo), format_rational(f.certified.hi)};
  j["approx"] = f.certified.mid_double();
  return j;
}

/// Spectrum report as JSON; the layout mirrors to_text.
inline json write_report(const SpectrumReport& rep) {
  const int n = rep.field_degree;
  json j;
  j["system"] = rep.system;
  j["universe"] = rep.universe;
  j["lambda"] = detail::write_elem(rep.lambda, n);
  j["dimension"] = rep.dim;
  j["eta2"] = detail::write_elem(rep.eta.squared, n);
  j["window"] = format_rational(rep.window);
  j["band_offset"] = rep.band_offset;
  j["band_width"] = rep.band_width;
  j["radii2"] = json::array();
  for (const auto& r : rep.radii2) j["radii2"].push_back(detail::write_elem(r, n));
  j["notes"] = rep.notes;
  if (rep.period) j["period"] = detail::write_vec(*rep.period, n);
  if (rep.stable) j["stable"] = *rep.stable;
  j["F"] = json::array();
  for (const auto& c : rep.F) j["F"].push_back({{"f", write_freq(c.value, n)}, {"multiplicity", c.multiplicity}});
  j["entries"] = json::array();
  for (const auto& e : rep.entries)
    j["entries"].push_back({{"key", e.key},
                            {"k", e.k},
                            {"diam2", detail::write_elem(e.diam2, n)},
                            {"freq", write_freq(e.freq, n)},
                            {"f", write_freq(e.f, n)}});
  return j;
}

inline LocalDerivation load_derivation(const std::string& path, const SubstitutionSystem& source) {
  return read_derivation(read_json_file(path), source);
}

}  // namespace tilefreq::io
