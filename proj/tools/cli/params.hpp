#pragma once

// Per-subcommand parameter schemas. Values live in a JSON object; the same
// schema validates config files, command-line flags and replayed manifests.

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace walkrg::cli {

using json = nlohmann::json;

enum class ParamType { Int, UInt, Double, Bool, String, IntList, DoubleList };

const char* type_name(ParamType t);

struct ParamSpec {
  std::string key;
  ParamType type;
  json fallback;
  std::string help;
};

struct Schema {
  std::string subcommand;
  std::string module;
  std::string summary;
  std::vector<ParamSpec> params;

  const ParamSpec* find(const std::string& key) const;
  json defaults() const;
  std::vector<std::string> keys() const;
};

/// Raised for anything the user typed wrong; `field` names the key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Checks one value against its type; converts strings from the command line.
json coerce(const ParamSpec& spec, const json& value);
json parse_flag(const ParamSpec& spec, const std::string& text);

/// Overlays `layer` onto `base`, rejecting unknown keys and ill-typed values.
void overlay(const Schema& schema, json& base, const json& layer, const std::string& origin);

const std::vector<Schema>& schemas();
const Schema& schema_for(const std::string& subcommand);

}  // namespace walkrg::cli
