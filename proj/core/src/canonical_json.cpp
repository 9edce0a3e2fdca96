#include "scenewright/canonical_json.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace scenewright {

namespace {

void format_float(double v, std::string& out) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  std::string_view s(buf);
  if (s == "-0.000000") s = "0.000000";
  out.append(s);
}

void dump_into(const nlohmann::json& v, std::string& out) {
  using value_t = nlohmann::json::value_t;
  switch (v.type()) {
    case value_t::object: {
      out.push_back('{');
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out.push_back(',');
        first = false;
        out += nlohmann::json(it.key()).dump();
        out.push_back(':');
        dump_into(it.value(), out);
      }
      out.push_back('}');
      break;
    }
    case value_t::array: {
      out.push_back('[');
      bool first = true;
      for (const auto& item : v) {
        if (!first) out.push_back(',');
        first = false;
        dump_into(item, out);
      }
      out.push_back(']');
      break;
    }
    case value_t::number_float:
      format_float(v.get<double>(), out);
      break;
    default:
      out += v.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
      break;
  }
}

}  // namespace

std::string canonical_dump(const nlohmann::json& value) {
  std::string out;
  dump_into(value, out);
  return out;
}

nlohmann::json canonicalize(const nlohmann::json& value) {
  using value_t = nlohmann::json::value_t;
  switch (value.type()) {
    case value_t::object: {
      nlohmann::json out = nlohmann::json::object();
      for (auto it = value.begin(); it != value.end(); ++it) out[it.key()] = canonicalize(it.value());
      return out;
    }
    case value_t::array: {
      nlohmann::json out = nlohmann::json::array();
      for (const auto& item : value) out.push_back(canonicalize(item));
      return out;
    }
    case value_t::number_float: {
      const double v = value.get<double>();
      if (!std::isfinite(v)) return nullptr;
      std::string text;
      format_float(v, text);
      return std::strtod(text.c_str(), nullptr);
    }
    default:
      return value;
  }
}

}  // namespace scenewright
