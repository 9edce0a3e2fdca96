#pragma once

// Frame conventions used everywhere in the engine: right-handed, Y up,
// meters. Local forward is +Z. Euler triples are (yaw, pitch, roll) in
// degrees about (Y, X, Z) and compose as R = Ry(yaw) * Rx(pitch) * Rz(roll).

#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace scenewright {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg_to_rad(double deg) noexcept { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) noexcept { return rad * 180.0 / kPi; }

/// Wraps an angle in degrees into [-180, 180).
double normalize_degrees(double deg) noexcept;

struct Euler {
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;

  [[nodiscard]] Euler normalized() const noexcept {
    return {normalize_degrees(yaw), normalize_degrees(pitch), normalize_degrees(roll)};
  }
  friend bool operator==(const Euler&, const Euler&) = default;
};

Mat3 rotation_matrix(const Euler& e);
Quat to_quat(const Euler& e);
/// Inverse of rotation_matrix; at gimbal lock (|pitch| = 90) roll is folded
/// into yaw.
Euler to_euler(const Mat3& r);
Euler to_euler(const Quat& q);

/// Orientation whose +Z axis points along `direction` with zero roll.
/// Returns nullopt for a zero-length direction.
std::optional<Euler> look_rotation(const Vec3& direction);

inline Vec3 forward_axis(const Quat& q) { return q * Vec3::UnitZ(); }

struct Color {
  double r = 0.8;
  double g = 0.8;
  double b = 0.8;
  double a = 1.0;

  static Color light_gray() { return {0.8, 0.8, 0.8, 1.0}; }
  [[nodiscard]] std::array<double, 4> channels() const { return {r, g, b, a}; }
  [[nodiscard]] Color lerp(const Color& to, double t) const {
    return {r + (to.r - r) * t, g + (to.g - g) * t, b + (to.b - b) * t, a + (to.a - a) * t};
  }
  friend bool operator==(const Color&, const Color&) = default;
};

/// Accepts a CSS-style name ("red"), "#rrggbb"/"#rrggbbaa", or a 3/4-element
/// array of channels in [0,1]. Returns nullopt on anything else.
std::optional<Color> parse_color(const nlohmann::json& value);
std::optional<Color> named_color(std::string_view name);

/// [x, y, z] arrays only.
std::optional<Vec3> parse_vec3(const nlohmann::json& value);
/// Scalar (uniform) or [x, y, z].
std::optional<Vec3> parse_scale(const nlohmann::json& value);

nlohmann::json to_json(const Vec3& v);
nlohmann::json to_json(const Euler& e);
nlohmann::json to_json(const Color& c);

}  // namespace scenewright
