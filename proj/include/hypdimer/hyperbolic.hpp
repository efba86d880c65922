#pragma once

#include <cmath>
#include <complex>

namespace hypdimer {

using Point = std::complex<double>;

// Möbius map z -> (a z + b) / (c z + d).
struct Mobius {
  Point a{1.0}, b{0.0}, c{0.0}, d{1.0};

  Point operator()(Point z) const { return (a * z + b) / (c * z + d); }

  Mobius operator*(const Mobius& o) const {
    Mobius m{a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    // keep the determinant near 1 so long products stay well scaled
    Point s = std::sqrt(m.a * m.d - m.b * m.c);
    m.a /= s;
    m.b /= s;
    m.c /= s;
    m.d /= s;
    return m;
  }
};

namespace disk {

// Disk automorphism sending a to the origin; its derivative at a is a positive
// real, so directions at a are preserved.
inline Point to_origin(Point a, Point z) { return (z - a) / (1.0 - std::conj(a) * z); }

inline Point from_origin(Point a, Point u) { return (u + a) / (1.0 + std::conj(a) * u); }

inline double distance(Point a, Point b) {
  double s = std::abs(to_origin(a, b));
  return 2.0 * std::atanh(s);
}

// Reflection in the geodesic through a and b.
inline Point reflect(Point a, Point b, Point z) {
  Point w = to_origin(a, b);
  Point rot = w / std::abs(w);
  return from_origin(a, rot * rot * std::conj(to_origin(a, z)));
}

// Point at hyperbolic distance d from a, leaving a at Euclidean angle phi.
inline Point shoot(Point a, double phi, double d) {
  return from_origin(a, std::tanh(0.5 * d) * std::polar(1.0, phi));
}

// Direction (Euclidean angle at a) of the geodesic from a towards z.
inline double direction(Point a, Point z) { return std::arg(to_origin(a, z)); }

// Half-turn of the disk about m.
inline Mobius half_turn(Point m) {
  Mobius from{1.0, m, std::conj(m), 1.0}, negate{-1.0, 0.0, 0.0, 1.0}, to{1.0, -m, -std::conj(m), 1.0};
  return from * negate * to;
}

// Hyperbolic midpoint of the geodesic segment ab.
inline Point midpoint(Point a, Point b) {
  Point w = to_origin(a, b);
  double s = std::abs(w);
  if (s == 0.0) return a;
  return from_origin(a, std::tanh(0.5 * std::atanh(s)) * (w / s));
}

struct EuclideanCircle {
  Point center;
  double radius;
};

// The hyperbolic circle of radius rho around c is a Euclidean circle in the disk.
inline EuclideanCircle circle(Point c, double rho) {
  double s = std::tanh(0.5 * rho);
  double a = std::abs(c);
  if (a < 1e-300) return {Point(0.0, 0.0), s};
  double outer = (a + s) / (1.0 + a * s);
  double inner = (a - s) / (1.0 - a * s);
  Point unit = c / a;
  return {0.5 * (outer + inner) * unit, 0.5 * (outer - inner)};
}

}  // namespace disk

namespace plane {

inline Mobius half_turn(Point m) { return Mobius{-1.0, 2.0 * m, 0.0, 1.0}; }

inline Point reflect(Point a, Point b, Point z) {
  Point d = b - a;
  return a + d / std::conj(d) * std::conj(z - a);
}

}  // namespace plane

}  // namespace hypdimer
