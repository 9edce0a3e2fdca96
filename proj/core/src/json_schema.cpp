#include "scenewright/json_schema.hpp"

#include "scenewright/error.hpp"

namespace scenewright {

namespace {

using nlohmann::json;

std::string child_path(const std::string& base, const std::string& key) {
  std::string escaped;
  for (char c : key) {
    if (c == '~') escaped += "~0";
    else if (c == '/') escaped += "~1";
    else escaped.push_back(c);
  }
  return base + "/" + escaped;
}

bool has_type(const json& instance, const std::string& type) {
  if (type == "object") return instance.is_object();
  if (type == "array") return instance.is_array();
  if (type == "string") return instance.is_string();
  if (type == "boolean") return instance.is_boolean();
  if (type == "null") return instance.is_null();
  if (type == "number") return instance.is_number();
  if (type == "integer") {
    if (instance.is_number_integer()) return true;
    if (instance.is_number_float()) {
      const double v = instance.get<double>();
      return v == static_cast<double>(static_cast<long long>(v));
    }
    return false;
  }
  return false;
}

std::optional<SchemaIssue> check(const json& schema, const json& instance, const std::string& path);

std::optional<SchemaIssue> check_type(const json& schema, const json& instance, const std::string& path) {
  auto it = schema.find("type");
  if (it == schema.end()) return std::nullopt;
  if (it->is_string()) {
    if (!has_type(instance, it->get<std::string>()))
      return SchemaIssue{path, "expected " + it->get<std::string>()};
    return std::nullopt;
  }
  if (it->is_array()) {
    std::string names;
    for (const auto& t : *it) {
      if (t.is_string() && has_type(instance, t.get<std::string>())) return std::nullopt;
      if (!names.empty()) names += " or ";
      names += t.is_string() ? t.get<std::string>() : "?";
    }
    return SchemaIssue{path, "expected " + names};
  }
  return std::nullopt;
}

std::optional<SchemaIssue> check_numeric(const json& schema, const json& instance, const std::string& path) {
  if (!instance.is_number()) return std::nullopt;
  const double v = instance.get<double>();
  if (auto it = schema.find("minimum"); it != schema.end() && v < it->get<double>())
    return SchemaIssue{path, "must be >= " + it->dump()};
  if (auto it = schema.find("maximum"); it != schema.end() && v > it->get<double>())
    return SchemaIssue{path, "must be <= " + it->dump()};
  if (auto it = schema.find("exclusiveMinimum"); it != schema.end() && it->is_number() && v <= it->get<double>())
    return SchemaIssue{path, "must be > " + it->dump()};
  if (auto it = schema.find("exclusiveMaximum"); it != schema.end() && it->is_number() && v >= it->get<double>())
    return SchemaIssue{path, "must be < " + it->dump()};
  return std::nullopt;
}

std::optional<SchemaIssue> check_string(const json& schema, const json& instance, const std::string& path) {
  if (!instance.is_string()) return std::nullopt;
  const auto len = instance.get_ref<const std::string&>().size();
  if (auto it = schema.find("minLength"); it != schema.end() && len < it->get<std::size_t>())
    return SchemaIssue{path, "string shorter than " + it->dump()};
  if (auto it = schema.find("maxLength"); it != schema.end() && len > it->get<std::size_t>())
    return SchemaIssue{path, "string longer than " + it->dump()};
  return std::nullopt;
}

std::optional<SchemaIssue> check_array(const json& schema, const json& instance, const std::string& path) {
  if (!instance.is_array()) return std::nullopt;
  if (auto it = schema.find("minItems"); it != schema.end() && instance.size() < it->get<std::size_t>())
    return SchemaIssue{path, "expected at least " + it->dump() + " item(s)"};
  if (auto it = schema.find("maxItems"); it != schema.end() && instance.size() > it->get<std::size_t>())
    return SchemaIssue{path, "expected at most " + it->dump() + " item(s)"};
  if (auto it = schema.find("items"); it != schema.end() && it->is_object()) {
    for (std::size_t i = 0; i < instance.size(); ++i)
      if (auto issue = check(*it, instance[i], child_path(path, std::to_string(i)))) return issue;
  }
  return std::nullopt;
}

std::optional<SchemaIssue> check_object(const json& schema, const json& instance, const std::string& path) {
  if (!instance.is_object()) return std::nullopt;
  if (auto it = schema.find("required"); it != schema.end()) {
    for (const auto& key : *it) {
      if (!instance.contains(key.get<std::string>()))
        return SchemaIssue{child_path(path, key.get<std::string>()), "missing required property"};
    }
  }
  const json* props = nullptr;
  if (auto it = schema.find("properties"); it != schema.end() && it->is_object()) props = &*it;
  for (auto field = instance.begin(); field != instance.end(); ++field) {
    const std::string fpath = child_path(path, field.key());
    if (props && props->contains(field.key())) {
      if (auto issue = check(props->at(field.key()), field.value(), fpath)) return issue;
      continue;
    }
    if (auto ap = schema.find("additionalProperties"); ap != schema.end()) {
      if (ap->is_boolean() && !ap->get<bool>()) return SchemaIssue{fpath, "unexpected property"};
      if (ap->is_object()) {
        if (auto issue = check(*ap, field.value(), fpath)) return issue;
      }
    }
  }
  return std::nullopt;
}

std::optional<SchemaIssue> check(const json& schema, const json& instance, const std::string& path) {
  if (schema.is_boolean()) {
    if (schema.get<bool>()) return std::nullopt;
    return SchemaIssue{path, "no value allowed"};
  }
  if (!schema.is_object()) return std::nullopt;

  if (auto issue = check_type(schema, instance, path)) return issue;

  if (auto it = schema.find("enum"); it != schema.end()) {
    bool found = false;
    for (const auto& candidate : *it) found = found || candidate == instance;
    if (!found) return SchemaIssue{path, "value not in " + it->dump()};
  }
  if (auto it = schema.find("const"); it != schema.end() && *it != instance)
    return SchemaIssue{path, "expected " + it->dump()};

  if (auto issue = check_numeric(schema, instance, path)) return issue;
  if (auto issue = check_string(schema, instance, path)) return issue;
  if (auto issue = check_array(schema, instance, path)) return issue;
  if (auto issue = check_object(schema, instance, path)) return issue;

  if (auto it = schema.find("allOf"); it != schema.end()) {
    for (const auto& sub : *it)
      if (auto issue = check(sub, instance, path)) return issue;
  }
  if (auto it = schema.find("anyOf"); it != schema.end()) {
    std::optional<SchemaIssue> first;
    for (const auto& sub : *it) {
      auto issue = check(sub, instance, path);
      if (!issue) {
        first.reset();
        break;
      }
      if (!first) first = issue;
    }
    if (first) return SchemaIssue{path, "matches no allowed form (" + first->path + ": " + first->message + ")"};
  }
  if (auto it = schema.find("oneOf"); it != schema.end()) {
    int matches = 0;
    for (const auto& sub : *it)
      if (!check(sub, instance, path)) ++matches;
    if (matches != 1)
      return SchemaIssue{path, matches == 0 ? "matches no allowed form" : "matches more than one form"};
  }
  return std::nullopt;
}

}  // namespace

std::optional<SchemaIssue> validate_schema(const json& schema, const json& instance) {
  return check(schema, instance, "");
}

void require_schema(const json& schema, const json& instance) {
  if (auto issue = validate_schema(schema, instance)) {
    throw Error(ErrorCode::SchemaViolation, (issue->path.empty() ? "/" : issue->path) + ": " + issue->message);
  }
}

}  // namespace scenewright
