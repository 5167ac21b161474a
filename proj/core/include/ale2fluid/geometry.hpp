#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ale2fluid {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr double operator[](int i) const { return i == 0 ? x : y; }
  constexpr double& operator[](int i) { return i == 0 ? x : y; }

  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }

/// Rotation by +90 degrees (the left normal of a tangent).
constexpr Vec2 rotate_left(const Vec2& t) { return {-t.y, t.x}; }

/// 2x2 matrix stored row-major: m[i][j].
struct Mat2 {
  std::array<std::array<double, 2>, 2> m{};

  constexpr double operator()(int i, int j) const { return m[i][j]; }
  constexpr double& operator()(int i, int j) { return m[i][j]; }
  constexpr double det() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }
  constexpr double trace() const { return m[0][0] + m[1][1]; }
};

/// Direction of the single nonzero mesh-velocity component.
enum class MotionDirection { Vertical, Horizontal };

constexpr int component(MotionDirection d) { return d == MotionDirection::Vertical ? 1 : 0; }
constexpr Vec2 unit_vector(MotionDirection d) {
  return d == MotionDirection::Vertical ? Vec2{0.0, 1.0} : Vec2{1.0, 0.0};
}

std::string to_string(MotionDirection d);
MotionDirection parse_motion_direction(const std::string& s);

}  // namespace ale2fluid
