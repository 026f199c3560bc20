#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace tgen {

using Rng = std::mt19937_64;
using json = nlohmann::json;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class HttpMethod { Get, Head, Post, Put, Patch, Delete };

std::string to_string(HttpMethod m);
std::optional<HttpMethod> method_from_string(const std::string& s);

enum class ParamKind { Path, Query, Header, BodyField };
enum class ValueType { String, Integer, Number, Boolean, Date };

std::string to_string(ParamKind k);
std::string to_string(ValueType t);
std::optional<ParamKind> param_kind_from_string(const std::string& s);
std::optional<ValueType> value_type_from_string(const std::string& s);

struct ParamSchema {
  std::string name;
  ParamKind kind = ParamKind::Query;
  ValueType type = ValueType::String;
  bool required = true;
};

struct ActionSpec {
  int index = 0;
  HttpMethod method = HttpMethod::Get;
  std::string endpoint_template;
  std::vector<ParamSchema> param_schemas;
};

struct ActionCatalog {
  std::vector<ActionSpec> actions;
  int size() const { return static_cast<int>(actions.size()); }
  const ActionSpec& at(int i) const { return actions.at(static_cast<size_t>(i)); }
};

// Calendar date stored as days since 1970-01-01.
struct Date {
  int serial = 0;
  std::string iso() const;
  static Date from_iso(const std::string& s);
  static int days_from_civil(int y, int m, int d);
  bool operator==(const Date&) const = default;
};

// Reference to the auth token produced by an earlier statement.
struct TokenRef {
  int statement = 0;
  bool operator==(const TokenRef&) const = default;
};

using Value = std::variant<std::string, std::int64_t, double, bool, Date, TokenRef>;

struct InputGene {
  std::string param_name;
  Value value;
};

struct ActionInstance {
  int action_index = 0;
  std::vector<InputGene> inputs;
};

struct TestCase {
  std::vector<ActionInstance> statements;
  int length() const { return static_cast<int>(statements.size()); }
};

struct LiteralPools {
  std::vector<std::string> strings;
};

inline constexpr int kDefaultMaxTestLength = 40;

// Parses the service-description JSON ({"endpoints": [...]}) into a catalog.
ActionCatalog parse_service_description(const json& doc);
ActionCatalog parse_service_description_text(const std::string& text);

Value sample_value(ValueType type, const LiteralPools& pools, Rng& rng);
InputGene sample_input(const ParamSchema& schema, int statement_pos, const LiteralPools& pools, Rng& rng);
ActionInstance random_action_instance(const ActionSpec& spec, int statement_pos, const LiteralPools& pools, Rng& rng);
TestCase random_test(const ActionCatalog& catalog, Rng& rng, int max_len, const LiteralPools& pools);

json value_to_json(const Value& v);
Value value_from_json(const json& j);
json test_to_json(const TestCase& test, const ActionCatalog& catalog);
TestCase test_from_json(const json& j);

}  // namespace tgen
