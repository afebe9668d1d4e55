#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

namespace eddy {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend Vec3 operator*(Vec3 a, double s) { return s * a; }
  Vec3& operator+=(Vec3 b) {
    x += b.x;
    y += b.y;
    z += b.z;
    return *this;
  }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) { return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x}; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline double distance(Vec3 a, Vec3 b) { return norm(a - b); }

/// Straight segment from `a` to `b`; direction matters for current flow.
struct Segment {
  Vec3 a;
  Vec3 b;

  Vec3 direction() const { return b - a; }
  double length() const { return norm(b - a); }
  Vec3 midpoint() const { return 0.5 * (a + b); }
  Vec3 at(double u) const { return a + u * (b - a); }
};

/// Distance from point p to the closed segment s.
inline double point_segment_distance(Vec3 p, const Segment& s) {
  const Vec3 d = s.direction();
  const double len2 = dot(d, d);
  double u = len2 > 0.0 ? dot(p - s.a, d) / len2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  return distance(p, s.at(u));
}

/// Minimum distance between two closed segments.
inline double segment_distance(const Segment& s1, const Segment& s2) {
  const Vec3 d1 = s1.direction();
  const Vec3 d2 = s2.direction();
  const Vec3 r = s1.a - s2.a;
  const double a = dot(d1, d1);
  const double e = dot(d2, d2);
  const double f = dot(d2, r);
  double s = 0.0;
  double t = 0.0;
  if (a <= 0.0 && e <= 0.0) return norm(r);
  if (a <= 0.0) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = dot(d1, r);
    if (e <= 0.0) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = dot(d1, d2);
      const double denom = a * e - b * b;
      s = denom > 1e-15 * a * e ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return distance(s1.at(s), s2.at(t));
}

/// Angle reduced to [0, 2π).
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a < 0.0) a += two_pi;
  return a;
}

}  // namespace eddy
