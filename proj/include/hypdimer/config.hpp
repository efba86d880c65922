#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hypdimer/error.hpp"
#include "hypdimer/heights.hpp"
#include "hypdimer/lattice.hpp"
#include "json.hpp"

namespace hypdimer {

struct FamilySpec {
  Family family = Family::grid;
  int p = 4;
  int q = 4;
  std::vector<int> radii;

  std::string name() const {
    return family == Family::grid ? "grid" : "pq_" + std::to_string(p) + "_" + std::to_string(q);
  }
};

struct WeightSpec {
  enum class Mode { unit, random, file };
  Mode mode = Mode::unit;
  double low = 0.5;
  double high = 2.0;
  std::string path;
  std::vector<double> nu;  // file contents
  std::vector<double> nu_dual;
};

struct Tolerances {
  double kasteleyn = 1e-9;
  double green = 1e-8;
  double face_sign = 1e-7;
  double packing_euclidean = 1e-10;
  double packing_hyperbolic = 1e-8;
  double entry_table = 1e-10;

  void override_all(double t) { kasteleyn = green = face_sign = packing_euclidean = packing_hyperbolic = entry_table = t; }
};

struct RenderSpec {
  int family = 0;
  int radius = -1;  // first radius of the family when negative
  bool equal_pair = false;
};

struct RunConfig {
  std::vector<FamilySpec> families;
  BoundarySpec boundary;
  WeightSpec weights;
  Tolerances tol;
  std::uint64_t seed = 1;
  int samples = 200;
  int jobs = 1;
  std::string out = "hypdimer-out";
  std::vector<std::string> experiments{"variance", "green_decay", "correlation"};
  bool exact_variance = false;
  RenderSpec render;

  // Fields that determine results; the output directory and worker count are
  // left out so they never change a provenance hash.
  nlohmann::json identity_json() const {
    auto j = to_json();
    j.erase("out");
    j.erase("jobs");
    return j;
  }

  // Every field, defaults included.
  nlohmann::json to_json() const {
    nlohmann::json fams = nlohmann::json::array();
    for (const auto& f : families) {
      nlohmann::json j{{"type", f.family == Family::grid ? "grid" : "pq"}, {"radii", f.radii}};
      if (f.family == Family::pq) {
        j["p"] = f.p;
        j["q"] = f.q;
      }
      fams.push_back(j);
    }
    nlohmann::json b{{"mode", boundary.mode == RegionKind::two_corner ? "two-corner" : "temperley"}};
    if (boundary.mode == RegionKind::two_corner) b["arc"] = {boundary.first, boundary.second};
    nlohmann::json w{{"mode", weights.mode == WeightSpec::Mode::unit     ? "unit"
                              : weights.mode == WeightSpec::Mode::random ? "random"
                                                                         : "file"}};
    if (weights.mode == WeightSpec::Mode::random) {
      w["low"] = weights.low;
      w["high"] = weights.high;
    }
    if (weights.mode == WeightSpec::Mode::file) w["path"] = weights.path;
    return {{"families", fams},
            {"boundary", b},
            {"weights", w},
            {"tolerances",
             {{"kasteleyn", tol.kasteleyn},
              {"green", tol.green},
              {"face_sign", tol.face_sign},
              {"packing_euclidean", tol.packing_euclidean},
              {"packing_hyperbolic", tol.packing_hyperbolic},
              {"entry_table", tol.entry_table}}},
            {"seed", seed},
            {"samples", samples},
            {"jobs", jobs},
            {"out", out},
            {"experiments", experiments},
            {"exact_variance", exact_variance},
            {"render", {{"family", render.family}, {"radius", render.radius}, {"equal_pair", render.equal_pair}}}};
  }
};

namespace detail {

inline void only_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <class T>
T get_as(const nlohmann::json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

inline int positive_int(const nlohmann::json& j, const std::string& key, const std::string& where) {
  if (!j.at(key).is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
  int v = j.at(key).get<int>();
  if (v <= 0) throw ConfigError(where + "." + key + " must be positive");
  return v;
}

inline std::vector<double> positive_array(const nlohmann::json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_array()) throw ConfigError(where + " needs an array '" + key + "'");
  std::vector<double> out;
  for (const auto& x : j.at(key)) {
    if (!x.is_number()) throw ConfigError(where + "." + key + " holds a non-number");
    double v = x.get<double>();
    if (!std::isfinite(v) || v <= 0.0) throw ConfigError(where + "." + key + " holds a non-positive weight");
    out.push_back(v);
  }
  return out;
}

}  // namespace detail

// Weight file: {"nu": [...], "nu_dual": [...]}, one positive entry per edge.
inline void load_weight_file(WeightSpec& w) {
  std::ifstream f(w.path);
  if (!f) throw MissingInputError("weight file not found: " + w.path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("weight file " + w.path + " is not valid JSON: " + e.what());
  }
  detail::only_keys(j, {"nu", "nu_dual"}, "weight file");
  w.nu = detail::positive_array(j, "nu", "weight file");
  w.nu_dual = detail::positive_array(j, "nu_dual", "weight file");
  if (w.nu.size() != w.nu_dual.size()) throw ConfigError("weight file arrays differ in length");
}

inline RunConfig parse_config(const nlohmann::json& j) {
  using detail::get_as;
  RunConfig c;
  detail::only_keys(j, {"families", "boundary", "weights", "tolerances", "seed", "samples", "jobs", "out", "experiments",
                        "exact_variance", "render"},
                    "config");
  if (j.contains("families")) {
    if (!j["families"].is_array() || j["families"].empty()) throw ConfigError("families must be a non-empty array");
    for (const auto& fj : j["families"]) {
      detail::only_keys(fj, {"type", "p", "q", "radii"}, "family");
      FamilySpec f;
      std::string type = get_as<std::string>(fj, "type", "family");
      if (type == "grid") {
        f.family = Family::grid;
      } else if (type == "pq") {
        f.family = Family::pq;
        f.p = detail::positive_int(fj, "p", "family");
        f.q = detail::positive_int(fj, "q", "family");
        if (f.p < 3 || f.q < 3 || f.p * f.q < 2 * (f.p + f.q))
          throw ConfigError("family {" + std::to_string(f.p) + "," + std::to_string(f.q) + "} is spherical");
      } else {
        throw ConfigError("family type must be 'grid' or 'pq'");
      }
      if (!fj.contains("radii") || !fj["radii"].is_array() || fj["radii"].empty())
        throw ConfigError("family needs a non-empty radii array");
      for (const auto& r : fj["radii"]) {
        if (!r.is_number_integer() || r.get<int>() < (f.family == Family::grid ? 1 : 0))
          throw ConfigError("radii must be non-negative integers (positive for grids)");
        if (!f.radii.empty() && r.get<int>() <= f.radii.back()) throw ConfigError("radii must increase");
        f.radii.push_back(r.get<int>());
      }
      c.families.push_back(f);
    }
  } else {
    c.families = {{Family::grid, 4, 4, {2, 4}}, {Family::pq, 3, 7, {1, 2}}};
  }
  if (j.contains("boundary")) {
    const auto& b = j["boundary"];
    detail::only_keys(b, {"mode", "arc"}, "boundary");
    std::string mode = get_as<std::string>(b, "mode", "boundary");
    if (mode == "temperley") {
      c.boundary.mode = RegionKind::temperley;
    } else if (mode == "two-corner") {
      c.boundary.mode = RegionKind::two_corner;
      if (b.contains("arc")) {
        if (!b["arc"].is_array() || b["arc"].size() != 2 || !b["arc"][0].is_number_integer() ||
            !b["arc"][1].is_number_integer())
          throw ConfigError("boundary.arc must be two integers");
        c.boundary.first = b["arc"][0].get<int>();
        c.boundary.second = b["arc"][1].get<int>();
      }
    } else {
      throw ConfigError("boundary.mode must be 'temperley' or 'two-corner'");
    }
  }
  if (j.contains("weights")) {
    const auto& w = j["weights"];
    detail::only_keys(w, {"mode", "low", "high", "path"}, "weights");
    std::string mode = get_as<std::string>(w, "mode", "weights");
    if (mode == "unit") {
      c.weights.mode = WeightSpec::Mode::unit;
    } else if (mode == "random") {
      c.weights.mode = WeightSpec::Mode::random;
      if (w.contains("low")) c.weights.low = get_as<double>(w, "low", "weights");
      if (w.contains("high")) c.weights.high = get_as<double>(w, "high", "weights");
      if (!(c.weights.low > 0.0) || !(c.weights.high >= c.weights.low))
        throw ConfigError("weights need 0 < low <= high");
    } else if (mode == "file") {
      c.weights.mode = WeightSpec::Mode::file;
      c.weights.path = get_as<std::string>(w, "path", "weights");
      load_weight_file(c.weights);
    } else {
      throw ConfigError("weights.mode must be 'unit', 'random' or 'file'");
    }
  }
  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    detail::only_keys(t, {"kasteleyn", "green", "face_sign", "packing_euclidean", "packing_hyperbolic", "entry_table"},
                      "tolerances");
    auto set = [&](const char* k, double& dst) {
      if (!t.contains(k)) return;
      dst = get_as<double>(t, k, "tolerances");
      if (!(dst > 0.0)) throw ConfigError(std::string("tolerances.") + k + " must be positive");
    };
    set("kasteleyn", c.tol.kasteleyn);
    set("green", c.tol.green);
    set("face_sign", c.tol.face_sign);
    set("packing_euclidean", c.tol.packing_euclidean);
    set("packing_hyperbolic", c.tol.packing_hyperbolic);
    set("entry_table", c.tol.entry_table);
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("samples")) c.samples = detail::positive_int(j, "samples", "config");
  if (c.samples < 2) throw ConfigError("samples must be at least 2");
  if (j.contains("jobs")) c.jobs = detail::positive_int(j, "jobs", "config");
  if (j.contains("out")) c.out = get_as<std::string>(j, "out", "config");
  if (j.contains("experiments")) {
    c.experiments.clear();
    if (!j["experiments"].is_array()) throw ConfigError("experiments must be an array");
    for (const auto& e : j["experiments"]) {
      if (!e.is_string()) throw ConfigError("experiments must be strings");
      std::string name = e.get<std::string>();
      if (name != "variance" && name != "green_decay" && name != "correlation")
        throw ConfigError("unknown experiment '" + name + "'");
      c.experiments.push_back(name);
    }
  }
  if (j.contains("exact_variance")) c.exact_variance = get_as<bool>(j, "exact_variance", "config");
  if (j.contains("render")) {
    const auto& r = j["render"];
    detail::only_keys(r, {"family", "radius", "equal_pair"}, "render");
    if (r.contains("family")) c.render.family = get_as<int>(r, "family", "render");
    if (r.contains("radius")) c.render.radius = get_as<int>(r, "radius", "render");
    if (r.contains("equal_pair")) c.render.equal_pair = get_as<bool>(r, "equal_pair", "render");
    if (c.render.family < 0 || c.render.family >= static_cast<int>(c.families.size()))
      throw ConfigError("render.family is out of range");
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw MissingInputError("config file not found: " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

// Applies the configured weights to a graph; random weights come from a stream
// named after the graph size so every consumer sees the same values.
inline void apply_weights(PlanarGraph& g, const WeightSpec& w, std::uint64_t seed) {
  switch (w.mode) {
    case WeightSpec::Mode::unit:
      return;
    case WeightSpec::Mode::random: {
      Rng rng = make_rng(seed, "weights", static_cast<std::uint64_t>(g.num_edges()));
      for (int e = 0; e < g.num_edges(); ++e) {
        g.nu[e] = w.low + (w.high - w.low) * uniform01(rng);
        g.nu_dual[e] = w.low + (w.high - w.low) * uniform01(rng);
      }
      return;
    }
    case WeightSpec::Mode::file:
      if (static_cast<int>(w.nu.size()) != g.num_edges())
        throw ConfigError("weight file has " + std::to_string(w.nu.size()) + " entries but the graph has " +
                          std::to_string(g.num_edges()) + " edges");
      g.nu = w.nu;
      g.nu_dual = w.nu_dual;
      return;
  }
}

}  // namespace hypdimer
