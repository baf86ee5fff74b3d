#pragma once

// Validator for the subset of JSON Schema (2020-12) used by the scenario
// schema: type, enum, const, required, properties, additionalProperties
// (boolean), items, minItems, maxItems, minLength, minimum, maximum,
// exclusiveMinimum, exclusiveMaximum, oneOf, anyOf and local $ref.
// Unsupported keywords are rejected when the schema is loaded.

#include <string>
#include <vector>

#include "json.hpp"

namespace twoclass {

class JsonSchema {
 public:
  /// Throws std::invalid_argument if the schema uses unsupported keywords.
  explicit JsonSchema(nlohmann::json schema);

  /// Empty when the instance conforms; otherwise one message per violation,
  /// each prefixed with the JSON pointer of the offending value.
  std::vector<std::string> validate(const nlohmann::json& instance) const;

 private:
  void check_keywords(const nlohmann::json& node, const std::string& where) const;
  const nlohmann::json& resolve(const std::string& ref) const;
  void validate_node(const nlohmann::json& schema, const nlohmann::json& value,
                     const std::string& path,
                     std::vector<std::string>& errors) const;

  nlohmann::json root_;
};

/// The scenario schema shipped in docs/scenario.schema.json.
const JsonSchema& scenario_schema();

}  // namespace twoclass
