#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "hypdimer/error.hpp"
#include "hypdimer/heights.hpp"
#include "hypdimer/packing.hpp"
#include "hypdimer/temperley.hpp"
#include "json.hpp"

namespace hypdimer {

inline constexpr const char* kVersion = "0.1.0";

inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Stamp carried by every artifact.
struct Provenance {
  std::string version = kVersion;
  std::string config_hash;
  nlohmann::json config;

  nlohmann::json to_json() const { return {{"version", version}, {"config_hash", config_hash}, {"config", config}}; }
  std::string csv_comment() const { return "# hypdimer " + version + " config " + config_hash + "\n"; }
  std::string xml_comment() const { return "<!-- hypdimer " + version + " config " + config_hash + " -->\n"; }
};

inline Provenance make_provenance(const nlohmann::json& config) {
  return {kVersion, fnv1a_hex(config.dump()), config};
}

inline nlohmann::json to_json(const Matching& m) { return m.edge_ids(); }

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path + " for writing");
  f << text;
  if (!f) throw Error("write to " + path + " failed");
}

inline std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw MissingInputError("cannot read " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

namespace svg {

// Maps chart coordinates into a square canvas with y pointing up.
struct Canvas {
  double xmin = 0, ymin = 0, scale = 1, size = 800, pad = 20;
  std::ostringstream body;

  Canvas(double x0, double y0, double x1, double y1, double px = 800) : xmin(x0), ymin(y0), size(px) {
    double span = std::max({x1 - x0, y1 - y0, 1e-12});
    scale = (size - 2 * pad) / span;
    body.precision(6);
  }
  double X(Point p) const { return pad + (p.real() - xmin) * scale; }
  double Y(Point p) const { return size - pad - (p.imag() - ymin) * scale; }

  void circle(Point c, double r, const char* stroke, const char* cls) {
    body << "<circle class=\"" << cls << "\" cx=\"" << X(c) << "\" cy=\"" << Y(c) << "\" r=\"" << r * scale
         << "\" fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1\"/>\n";
  }
  void line(Point a, Point b, const char* stroke, double width, const char* cls) {
    body << "<line class=\"" << cls << "\" x1=\"" << X(a) << "\" y1=\"" << Y(a) << "\" x2=\"" << X(b) << "\" y2=\"" << Y(b)
         << "\" stroke=\"" << stroke << "\" stroke-width=\"" << width << "\"/>\n";
  }
  void dot(Point c, double r, const char* fill, const char* cls) {
    body << "<circle class=\"" << cls << "\" cx=\"" << X(c) << "\" cy=\"" << Y(c) << "\" r=\"" << r << "\" fill=\"" << fill
         << "\"/>\n";
  }
  std::string finish(const Provenance& prov) const {
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n" << prov.xml_comment();
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\" viewBox=\"0 0 "
       << size << ' ' << size << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << body.str() << "</svg>\n";
    return os.str();
  }
};

inline Canvas canvas_for(const DoubleCirclePacking& P) {
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (std::size_t v = 0; v < P.vertex_center.size(); ++v) {
    Point c = P.vertex_center[v];
    double r = P.vertex_radius[v];
    x0 = std::min(x0, c.real() - r);
    x1 = std::max(x1, c.real() + r);
    y0 = std::min(y0, c.imag() - r);
    y1 = std::max(y1, c.imag() + r);
  }
  return Canvas(x0, y0, x1, y1);
}

}  // namespace svg

// Primal circles in red, dual circles in blue, primal edges black, dual edges gray.
inline std::string render_packing(const PlanarGraph& g, const DoubleCirclePacking& P, const Provenance& prov) {
  auto cv = svg::canvas_for(P);
  for (int e = 0; e < g.num_edges(); ++e) {
    int l = g.left_face(e), r = g.right_face(e);
    if (l != g.outer_face && r != g.outer_face) cv.line(P.face_center[l], P.face_center[r], "gray", 0.8, "dual-edge");
  }
  for (int e = 0; e < g.num_edges(); ++e)
    cv.line(P.vertex_center[g.tail_of_edge(e)], P.vertex_center[g.head_of_edge(e)], "black", 1.0, "primal-edge");
  for (int v = 0; v < g.num_vertices; ++v) cv.circle(P.vertex_center[v], P.vertex_radius[v], "red", "primal");
  for (int f = 0; f < g.num_faces(); ++f)
    if (f != g.outer_face) cv.circle(P.face_center[f], P.face_radius[f], "blue", "dual");
  return cv.finish(prov);
}

// Superposition edges of a region; primal blacks dark, dual blacks blue, whites hollow.
inline std::string render_superposition(const Region& r, const DoubleCirclePacking& P, const Provenance& prov) {
  const auto& sg = *r.sg;
  auto cv = svg::canvas_for(P);
  for (const auto& e : sg.edges)
    if (r.white_active[e.white] && r.black_active[e.black])
      cv.line(sg.white_pos[e.white], sg.black_pos[e.black], e.primal ? "black" : "steelblue", 0.8, "sg-edge");
  for (int b : r.blacks) cv.dot(sg.black_pos[b], 2.5, sg.is_primal(b) ? "black" : "steelblue", "black-vertex");
  for (int w : r.whites) cv.dot(sg.white_pos[w], 2.0, "orange", "white-vertex");
  return cv.finish(prov);
}

// Loops of M1 △ M2 over a faint superposition; counterclockwise loops in
// crimson, clockwise ones in teal.
inline std::string render_loops(const Region& r, const DoubleCirclePacking& P, const CycleDecomposition& d,
                                const Provenance& prov) {
  const auto& sg = *r.sg;
  auto cv = svg::canvas_for(P);
  for (const auto& e : sg.edges)
    if (r.white_active[e.white] && r.black_active[e.black])
      cv.line(sg.white_pos[e.white], sg.black_pos[e.black], "#dddddd", 0.5, "sg-edge");
  for (const auto& c : d.components) {
    const char* color = c.orientation > 0 ? "crimson" : "teal";
    cv.body << "<polygon class=\"loop\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (Point p : c.polygon) cv.body << cv.X(p) << ',' << cv.Y(p) << ' ';
    cv.body << "\"/>\n";
  }
  return cv.finish(prov);
}

}  // namespace hypdimer
