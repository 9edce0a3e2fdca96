#include "scenewright/math.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

namespace scenewright {

double normalize_degrees(double deg) noexcept {
  double wrapped = std::fmod(deg + 180.0, 360.0);
  if (wrapped < 0.0) wrapped += 360.0;
  double out = wrapped - 180.0;
  if (out >= 180.0) out -= 360.0;
  // -0.0 would serialize differently from 0.0
  return out == 0.0 ? 0.0 : out;
}

Mat3 rotation_matrix(const Euler& e) {
  const Mat3 ry = Eigen::AngleAxisd(deg_to_rad(e.yaw), Vec3::UnitY()).toRotationMatrix();
  const Mat3 rx = Eigen::AngleAxisd(deg_to_rad(e.pitch), Vec3::UnitX()).toRotationMatrix();
  const Mat3 rz = Eigen::AngleAxisd(deg_to_rad(e.roll), Vec3::UnitZ()).toRotationMatrix();
  return ry * rx * rz;
}

Quat to_quat(const Euler& e) { return Quat(rotation_matrix(e)).normalized(); }

Euler to_euler(const Mat3& r) {
  // R = Ry(a) Rx(b) Rz(c):
  //   r(1,2) = -sin b, r(0,2) = sin a cos b, r(2,2) = cos a cos b,
  //   r(1,0) = cos b sin c, r(1,1) = cos b cos c.
  const double sb = std::clamp(-r(1, 2), -1.0, 1.0);
  Euler out;
  out.pitch = rad_to_deg(std::asin(sb));
  if (std::abs(sb) < 1.0 - 1e-12) {
    out.yaw = rad_to_deg(std::atan2(r(0, 2), r(2, 2)));
    out.roll = rad_to_deg(std::atan2(r(1, 0), r(1, 1)));
  } else {
    out.yaw = rad_to_deg(std::atan2(-r(2, 0), r(0, 0)));
    out.roll = 0.0;
  }
  return out.normalized();
}

Euler to_euler(const Quat& q) { return to_euler(q.normalized().toRotationMatrix()); }

std::optional<Euler> look_rotation(const Vec3& direction) {
  const double len = direction.norm();
  if (!(len > 1e-12)) return std::nullopt;
  const Vec3 d = direction / len;
  // Forward of Ry(a)Rx(b) is (cos b sin a, -sin b, cos b cos a).
  Euler e;
  e.yaw = rad_to_deg(std::atan2(d.x(), d.z()));
  e.pitch = rad_to_deg(std::atan2(-d.y(), std::hypot(d.x(), d.z())));
  e.roll = 0.0;
  return e.normalized();
}

std::optional<Color> named_color(std::string_view name) {
  static const std::map<std::string, Color, std::less<>> kNames = {
      {"red", {1.0, 0.0, 0.0, 1.0}},       {"green", {0.0, 0.5, 0.0, 1.0}},
      {"lime", {0.0, 1.0, 0.0, 1.0}},      {"blue", {0.0, 0.0, 1.0, 1.0}},
      {"yellow", {1.0, 1.0, 0.0, 1.0}},    {"orange", {1.0, 0.647059, 0.0, 1.0}},
      {"purple", {0.501961, 0.0, 0.501961, 1.0}},
      {"pink", {1.0, 0.752941, 0.796078, 1.0}},
      {"white", {1.0, 1.0, 1.0, 1.0}},     {"black", {0.0, 0.0, 0.0, 1.0}},
      {"gray", {0.501961, 0.501961, 0.501961, 1.0}},
      {"grey", {0.501961, 0.501961, 0.501961, 1.0}},
      {"lightgray", {0.8, 0.8, 0.8, 1.0}}, {"cyan", {0.0, 1.0, 1.0, 1.0}},
      {"magenta", {1.0, 0.0, 1.0, 1.0}},   {"brown", {0.647059, 0.164706, 0.164706, 1.0}},
      {"gold", {1.0, 0.843137, 0.0, 1.0}},  {"silver", {0.752941, 0.752941, 0.752941, 1.0}},
      {"navy", {0.0, 0.0, 0.501961, 1.0}}, {"teal", {0.0, 0.501961, 0.501961, 1.0}},
      {"olive", {0.501961, 0.501961, 0.0, 1.0}}, {"maroon", {0.501961, 0.0, 0.0, 1.0}},
      {"violet", {0.933333, 0.509804, 0.933333, 1.0}}, {"indigo", {0.294118, 0.0, 0.509804, 1.0}},
      {"beige", {0.960784, 0.960784, 0.862745, 1.0}},
  };
  std::string key;
  for (char c : name) {
    if (c == ' ' || c == '_' || c == '-') continue;
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (auto it = kNames.find(key); it != kNames.end()) return it->second;
  return std::nullopt;
}

namespace {

std::optional<Color> parse_hex(std::string_view s) {
  if (s.size() != 7 && s.size() != 9) return std::nullopt;
  std::array<double, 4> ch{0, 0, 0, 1.0};
  for (std::size_t i = 0; i * 2 + 1 < s.size(); ++i) {
    unsigned v = 0;
    for (std::size_t k = 0; k < 2; ++k) {
      const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(s[1 + i * 2 + k])));
      unsigned digit;
      if (c >= '0' && c <= '9') digit = static_cast<unsigned>(c - '0');
      else if (c >= 'a' && c <= 'f') digit = static_cast<unsigned>(c - 'a' + 10);
      else return std::nullopt;
      v = v * 16 + digit;
    }
    ch[i] = v / 255.0;
  }
  return Color{ch[0], ch[1], ch[2], ch[3]};
}

bool unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

std::optional<Color> parse_color(const nlohmann::json& value) {
  if (value.is_string()) {
    const auto& s = value.get_ref<const std::string&>();
    if (!s.empty() && s.front() == '#') return parse_hex(s);
    return named_color(s);
  }
  if (value.is_array() && (value.size() == 3 || value.size() == 4)) {
    std::array<double, 4> ch{0, 0, 0, 1.0};
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (!value[i].is_number()) return std::nullopt;
      ch[i] = value[i].get<double>();
      if (!unit_interval(ch[i])) return std::nullopt;
    }
    return Color{ch[0], ch[1], ch[2], ch[3]};
  }
  return std::nullopt;
}

std::optional<Vec3> parse_vec3(const nlohmann::json& value) {
  if (!value.is_array() || value.size() != 3) return std::nullopt;
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!value[static_cast<std::size_t>(i)].is_number()) return std::nullopt;
    out[i] = value[static_cast<std::size_t>(i)].get<double>();
    if (!std::isfinite(out[i])) return std::nullopt;
  }
  return out;
}

std::optional<Vec3> parse_scale(const nlohmann::json& value) {
  if (value.is_number()) {
    const double s = value.get<double>();
    if (!(s > 0.0) || !std::isfinite(s)) return std::nullopt;
    return Vec3(s, s, s);
  }
  auto v = parse_vec3(value);
  if (!v || !((*v).array() > 0.0).all()) return std::nullopt;
  return v;
}

nlohmann::json to_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }
nlohmann::json to_json(const Euler& e) { return nlohmann::json::array({e.yaw, e.pitch, e.roll}); }
nlohmann::json to_json(const Color& c) { return nlohmann::json::array({c.r, c.g, c.b, c.a}); }

}  // namespace scenewright
