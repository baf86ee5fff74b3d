#include "twoclass/json_schema.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "scenario_schema_text.hpp"

namespace twoclass {

namespace {

using nlohmann::json;

const std::set<std::string>& known_keywords() {
  static const std::set<std::string> k{
      "$schema", "$defs", "$ref", "title", "description", "type", "enum",
      "const", "required", "properties", "additionalProperties", "items",
      "minItems", "maxItems", "minLength", "minimum", "maximum",
      "exclusiveMinimum", "exclusiveMaximum", "oneOf", "anyOf"};
  return k;
}

bool is_integer(const json& v) {
  if (v.is_number_integer()) return true;
  if (!v.is_number_float()) return false;
  const double d = v.get<double>();
  return std::isfinite(d) && std::floor(d) == d;
}

bool has_type(const json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  if (type == "number") return v.is_number();
  if (type == "integer") return is_integer(v);
  return false;
}

std::string child(const std::string& path, const std::string& key) {
  return path + "/" + key;
}

std::string at(const std::string& path) { return path.empty() ? "/" : path; }

}  // namespace

JsonSchema::JsonSchema(json schema) : root_(std::move(schema)) {
  if (!root_.is_object())
    throw std::invalid_argument("schema root must be an object");
  check_keywords(root_, "");
}

void JsonSchema::check_keywords(const json& node, const std::string& where) const {
  if (!node.is_object()) throw std::invalid_argument("schema at " + at(where) + " is not an object");
  for (const auto& [key, sub] : node.items()) {
    if (!known_keywords().count(key))
      throw std::invalid_argument("unsupported schema keyword '" + key + "' at " + at(where));
    if (key == "properties" || key == "$defs") {
      for (const auto& [name, s] : sub.items()) check_keywords(s, child(child(where, key), name));
    } else if (key == "items") {
      check_keywords(sub, child(where, key));
    } else if (key == "oneOf" || key == "anyOf") {
      for (std::size_t i = 0; i < sub.size(); ++i)
        check_keywords(sub[i], child(child(where, key), std::to_string(i)));
    } else if (key == "additionalProperties" && !sub.is_boolean()) {
      throw std::invalid_argument("additionalProperties must be boolean at " + at(where));
    } else if (key == "$ref") {
      resolve(sub.get<std::string>());
    }
  }
}

const json& JsonSchema::resolve(const std::string& ref) const {
  if (ref.rfind("#", 0) != 0)
    throw std::invalid_argument("only local $ref is supported: " + ref);
  const json::json_pointer ptr(ref.substr(1));
  if (!root_.contains(ptr)) throw std::invalid_argument("unresolved $ref: " + ref);
  return root_.at(ptr);
}

std::vector<std::string> JsonSchema::validate(const json& instance) const {
  std::vector<std::string> errors;
  validate_node(root_, instance, "", errors);
  return errors;
}

void JsonSchema::validate_node(const json& s, const json& v,
                               const std::string& path,
                               std::vector<std::string>& errors) const {
  if (s.contains("$ref")) validate_node(resolve(s["$ref"]), v, path, errors);

  if (s.contains("type")) {
    bool ok = false;
    if (s["type"].is_array()) {
      for (const auto& t : s["type"]) ok = ok || has_type(v, t);
    } else {
      ok = has_type(v, s["type"]);
    }
    if (!ok) {
      errors.push_back(at(path) + ": expected type " + s["type"].dump());
      return;
    }
  }
  if (s.contains("const") && v != s["const"])
    errors.push_back(at(path) + ": must equal " + s["const"].dump());
  if (s.contains("enum")) {
    bool found = false;
    for (const auto& e : s["enum"]) found = found || e == v;
    if (!found) errors.push_back(at(path) + ": must be one of " + s["enum"].dump());
  }

  if (v.is_number()) {
    const double x = v.get<double>();
    if (s.contains("minimum") && !(x >= s["minimum"].get<double>()))
      errors.push_back(at(path) + ": must be >= " + s["minimum"].dump());
    if (s.contains("maximum") && !(x <= s["maximum"].get<double>()))
      errors.push_back(at(path) + ": must be <= " + s["maximum"].dump());
    if (s.contains("exclusiveMinimum") && !(x > s["exclusiveMinimum"].get<double>()))
      errors.push_back(at(path) + ": must be > " + s["exclusiveMinimum"].dump());
    if (s.contains("exclusiveMaximum") && !(x < s["exclusiveMaximum"].get<double>()))
      errors.push_back(at(path) + ": must be < " + s["exclusiveMaximum"].dump());
  }
  if (v.is_string() && s.contains("minLength") &&
      v.get<std::string>().size() < s["minLength"].get<std::size_t>())
    errors.push_back(at(path) + ": string too short");

  if (v.is_array()) {
    if (s.contains("minItems") && v.size() < s["minItems"].get<std::size_t>())
      errors.push_back(at(path) + ": needs at least " + s["minItems"].dump() + " items");
    if (s.contains("maxItems") && v.size() > s["maxItems"].get<std::size_t>())
      errors.push_back(at(path) + ": allows at most " + s["maxItems"].dump() + " items");
    if (s.contains("items")) {
      for (std::size_t i = 0; i < v.size(); ++i)
        validate_node(s["items"], v[i], child(path, std::to_string(i)), errors);
    }
  }

  if (v.is_object()) {
    if (s.contains("required")) {
      for (const auto& r : s["required"]) {
        if (!v.contains(r.get<std::string>()))
          errors.push_back(at(path) + ": missing required key '" + r.get<std::string>() + "'");
      }
    }
    const json* props = s.contains("properties") ? &s["properties"] : nullptr;
    for (const auto& [key, sub] : v.items()) {
      if (props && props->contains(key)) {
        validate_node((*props)[key], sub, child(path, key), errors);
      } else if (s.contains("additionalProperties") && !s["additionalProperties"].get<bool>()) {
        errors.push_back(at(path) + ": unexpected key '" + key + "'");
      }
    }
  }

  if (s.contains("anyOf")) {
    bool any = false;
    for (const auto& alt : s["anyOf"]) {
      std::vector<std::string> sub;
      validate_node(alt, v, path, sub);
      if (sub.empty()) { any = true; break; }
    }
    if (!any) errors.push_back(at(path) + ": matches none of the allowed forms");
  }
  if (s.contains("oneOf")) {
    int matches = 0;
    std::vector<std::string> closest;
    for (const auto& alt : s["oneOf"]) {
      std::vector<std::string> sub;
      validate_node(alt, v, path, sub);
      if (sub.empty()) {
        ++matches;
      } else if (closest.empty() || sub.size() < closest.size()) {
        closest = std::move(sub);
      }
    }
    if (matches == 0) {
      errors.push_back(at(path) + ": matches none of the allowed forms");
      for (auto& e : closest) errors.push_back("  " + e);
    } else if (matches > 1) {
      errors.push_back(at(path) + ": matches more than one allowed form");
    }
  }
}

const JsonSchema& scenario_schema() {
  static const JsonSchema schema(json::parse(kScenarioSchemaText));
  return schema;
}

}  // namespace twoclass
