#ifndef KSGFLOW_GEOMETRY_HPP
#define KSGFLOW_GEOMETRY_HPP

#include <array>
#include <cmath>

namespace ksgflow {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

// Axis-aligned computational box [lo.x,hi.x] x [lo.y,hi.y] x [lo.z,hi.z].
struct Box {
  Vec3 lo{-10.0, -10.0, -10.0};
  Vec3 hi{10.0, 10.0, 10.0};

  Vec3 center() const { return 0.5 * (lo + hi); }
  bool contains(Vec3 p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y &&
           p.z >= lo.z && p.z <= hi.z;
  }
  bool strictly_inside(Vec3 p) const {
    return p.x > lo.x && p.x < hi.x && p.y > lo.y && p.y < hi.y &&
           p.z > lo.z && p.z < hi.z;
  }
};

}  // namespace ksgflow

#endif
