#include "tgen/api_model.hpp"

#include <algorithm>
#include <set>
#include <utility>

namespace tgen {

std::string to_string(HttpMethod m) {
  switch (m) {
    case HttpMethod::Get: return "GET";
    case HttpMethod::Head: return "HEAD";
    case HttpMethod::Post: return "POST";
    case HttpMethod::Put: return "PUT";
    case HttpMethod::Patch: return "PATCH";
    case HttpMethod::Delete: return "DELETE";
  }
  return "GET";
}

std::optional<HttpMethod> method_from_string(const std::string& s) {
  if (s == "GET") return HttpMethod::Get;
  if (s == "HEAD") return HttpMethod::Head;
  if (s == "POST") return HttpMethod::Post;
  if (s == "PUT") return HttpMethod::Put;
  if (s == "PATCH") return HttpMethod::Patch;
  if (s == "DELETE") return HttpMethod::Delete;
  return std::nullopt;
}

std::string to_string(ParamKind k) {
  switch (k) {
    case ParamKind::Path: return "path";
    case ParamKind::Query: return "query";
    case ParamKind::Header: return "header";
    case ParamKind::BodyField: return "body-field";
  }
  return "query";
}

std::string to_string(ValueType t) {
  switch (t) {
    case ValueType::String: return "string";
    case ValueType::Integer: return "integer";
    case ValueType::Number: return "number";
    case ValueType::Boolean: return "boolean";
    case ValueType::Date: return "date";
  }
  return "string";
}

std::optional<ParamKind> param_kind_from_string(const std::string& s) {
  if (s == "path") return ParamKind::Path;
  if (s == "query") return ParamKind::Query;
  if (s == "header") return ParamKind::Header;
  if (s == "body-field") return ParamKind::BodyField;
  return std::nullopt;
}

std::optional<ValueType> value_type_from_string(const std::string& s) {
  if (s == "string") return ValueType::String;
  if (s == "integer") return ValueType::Integer;
  if (s == "number") return ValueType::Number;
  if (s == "boolean") return ValueType::Boolean;
  if (s == "date") return ValueType::Date;
  return std::nullopt;
}

// Howard Hinnant's civil-date algorithms.
int Date::days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 + static_cast<unsigned>(d) - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int>(doe) - 719468;
}

static void civil_from_days(int z, int& y, int& m, int& d) {
  z += 719468;
  const int era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<int>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y += m <= 2;
}

std::string Date::iso() const {
  int y, m, d;
  civil_from_days(serial, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
  return buf;
}

Date Date::from_iso(const std::string& s) {
  int y = 0, m = 0, d = 0;
  if (std::sscanf(s.c_str(), "%d-%d-%d", &y, &m, &d) != 3)
    throw ParseError("invalid date literal: " + s);
  return Date{days_from_civil(y, m, d)};
}

static std::vector<std::string> path_param_names(const std::string& path) {
  std::vector<std::string> names;
  size_t pos = 0;
  while ((pos = path.find('{', pos)) != std::string::npos) {
    size_t end = path.find('}', pos);
    if (end == std::string::npos) throw ParseError("unterminated path parameter in '" + path + "'");
    names.push_back(path.substr(pos + 1, end - pos - 1));
    pos = end + 1;
  }
  return names;
}

ActionCatalog parse_service_description(const json& doc) {
  if (!doc.is_object() || !doc.contains("endpoints"))
    throw ParseError("service description: missing 'endpoints' array");
  const json& eps = doc.at("endpoints");
  if (!eps.is_array()) throw ParseError("service description: 'endpoints' must be an array");
  if (eps.empty()) throw ParseError("service description: zero operations (empty catalog)");

  ActionCatalog catalog;
  std::set<std::pair<std::string, std::string>> seen;
  int index = 0;
  for (const json& ep : eps) {
    const std::string where = "endpoints[" + std::to_string(index) + "]";
    if (!ep.is_object() || !ep.contains("method") || !ep.contains("path"))
      throw ParseError(where + ": need 'method' and 'path'");
    ActionSpec spec;
    spec.index = index;
    auto m = method_from_string(ep.at("method").get<std::string>());
    if (!m) throw ParseError(where + ": unknown method '" + ep.at("method").get<std::string>() + "'");
    spec.method = *m;
    spec.endpoint_template = ep.at("path").get<std::string>();
    if (!seen.insert({ep.at("method").get<std::string>(), spec.endpoint_template}).second)
      throw ParseError(where + ": duplicate (method, path) operation " + ep.at("method").get<std::string>() +
                       " " + spec.endpoint_template);
    if (ep.contains("params")) {
      for (const json& p : ep.at("params")) {
        ParamSchema ps;
        ps.name = p.at("name").get<std::string>();
        auto kind = param_kind_from_string(p.at("in").get<std::string>());
        if (!kind) throw ParseError(where + ": param '" + ps.name + "' has unknown 'in'");
        ps.kind = *kind;
        auto type = value_type_from_string(p.at("type").get<std::string>());
        if (!type) throw ParseError(where + ": param '" + ps.name + "' has unknown 'type'");
        ps.type = *type;
        ps.required = p.value("required", true);
        spec.param_schemas.push_back(std::move(ps));
      }
    }
    // Path-parameter names must appear exactly once each as kind=path schemas.
    auto in_path = path_param_names(spec.endpoint_template);
    for (const auto& name : in_path) {
      int count = 0;
      for (const auto& ps : spec.param_schemas)
        if (ps.kind == ParamKind::Path && ps.name == name) ++count;
      if (count != 1)
        throw ParseError(where + ": path parameter '{" + name + "}' must have exactly one path param schema");
    }
    for (const auto& ps : spec.param_schemas) {
      if (ps.kind == ParamKind::Path &&
          std::find(in_path.begin(), in_path.end(), ps.name) == in_path.end())
        throw ParseError(where + ": path param schema '" + ps.name + "' not present in path template");
    }
    catalog.actions.push_back(std::move(spec));
    ++index;
  }
  return catalog;
}

ActionCatalog parse_service_description_text(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ParseError("service description: malformed JSON");
  return parse_service_description(doc);
}

static std::string random_alnum(Rng& rng) {
  static const char* alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
  std::uniform_int_distribution<int> len_dist(1, 16);
  std::uniform_int_distribution<int> char_dist(0, 61);
  int len = len_dist(rng);
  std::string s;
  s.reserve(static_cast<size_t>(len));
  for (int i = 0; i < len; ++i) s.push_back(alphabet[char_dist(rng)]);
  return s;
}

Value sample_value(ValueType type, const LiteralPools& pools, Rng& rng) {
  switch (type) {
    case ValueType::String: {
      std::bernoulli_distribution use_pool(0.5);
      if (!pools.strings.empty() && use_pool(rng)) {
        std::uniform_int_distribution<size_t> pick(0, pools.strings.size() - 1);
        return pools.strings[pick(rng)];
      }
      return random_alnum(rng);
    }
    case ValueType::Integer: {
      std::uniform_int_distribution<std::int64_t> dist(-1000, 1000);
      return dist(rng);
    }
    case ValueType::Number: {
      std::uniform_int_distribution<std::int64_t> cents(-100000, 100000);
      return static_cast<double>(cents(rng)) / 100.0;
    }
    case ValueType::Boolean: {
      std::bernoulli_distribution coin(0.5);
      return coin(rng);
    }
    case ValueType::Date: {
      static const int lo = Date::days_from_civil(2015, 1, 1);
      static const int hi = Date::days_from_civil(2024, 12, 31);
      std::uniform_int_distribution<int> dist(lo, hi);
      return Date{dist(rng)};
    }
  }
  return std::string{};
}

InputGene sample_input(const ParamSchema& schema, int statement_pos, const LiteralPools& pools, Rng& rng) {
  if (schema.type == ValueType::String && statement_pos > 0) {
    std::bernoulli_distribution use_ref(0.3);
    if (use_ref(rng)) {
      std::uniform_int_distribution<int> pick(0, statement_pos - 1);
      return InputGene{schema.name, TokenRef{pick(rng)}};
    }
  }
  return InputGene{schema.name, sample_value(schema.type, pools, rng)};
}

ActionInstance random_action_instance(const ActionSpec& spec, int statement_pos, const LiteralPools& pools, Rng& rng) {
  ActionInstance inst;
  inst.action_index = spec.index;
  std::bernoulli_distribution include_optional(0.5);
  for (const auto& ps : spec.param_schemas) {
    if (!ps.required && !include_optional(rng)) continue;
    inst.inputs.push_back(sample_input(ps, statement_pos, pools, rng));
  }
  return inst;
}

TestCase random_test(const ActionCatalog& catalog, Rng& rng, int max_len, const LiteralPools& pools) {
  if (max_len < 1) throw std::invalid_argument("random_test: max_len must be >= 1");
  std::uniform_int_distribution<int> len_dist(1, max_len);
  std::uniform_int_distribution<int> action_dist(0, catalog.size() - 1);
  TestCase test;
  int len = len_dist(rng);
  for (int pos = 0; pos < len; ++pos)
    test.statements.push_back(random_action_instance(catalog.at(action_dist(rng)), pos, pools, rng));
  return test;
}

json value_to_json(const Value& v) {
  json j;
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::string>) j = json{{"string", x}};
        else if constexpr (std::is_same_v<T, std::int64_t>) j = json{{"integer", x}};
        else if constexpr (std::is_same_v<T, double>) j = json{{"number", x}};
        else if constexpr (std::is_same_v<T, bool>) j = json{{"boolean", x}};
        else if constexpr (std::is_same_v<T, Date>) j = json{{"date", x.iso()}};
        else j = json{{"token_ref", x.statement}};
      },
      v);
  return j;
}

Value value_from_json(const json& j) {
  if (j.contains("string")) return j.at("string").get<std::string>();
  if (j.contains("integer")) return j.at("integer").get<std::int64_t>();
  if (j.contains("number")) return j.at("number").get<double>();
  if (j.contains("boolean")) return j.at("boolean").get<bool>();
  if (j.contains("date")) return Date::from_iso(j.at("date").get<std::string>());
  if (j.contains("token_ref")) return TokenRef{j.at("token_ref").get<int>()};
  throw ParseError("value: unknown tag");
}

json test_to_json(const TestCase& test, const ActionCatalog& catalog) {
  json stmts = json::array();
  for (const auto& st : test.statements) {
    const ActionSpec& spec = catalog.at(st.action_index);
    json inputs = json::array();
    for (const auto& g : st.inputs)
      inputs.push_back(json{{"name", g.param_name}, {"value", value_to_json(g.value)}});
    stmts.push_back(json{{"action", st.action_index},
                         {"method", to_string(spec.method)},
                         {"path", spec.endpoint_template},
                         {"inputs", inputs}});
  }
  return json{{"statements", stmts}};
}

TestCase test_from_json(const json& j) {
  TestCase test;
  for (const json& s : j.at("statements")) {
    ActionInstance inst;
    inst.action_index = s.at("action").get<int>();
    for (const json& g : s.at("inputs"))
      inst.inputs.push_back(InputGene{g.at("name").get<std::string>(), value_from_json(g.at("value"))});
    test.statements.push_back(std::move(inst));
  }
  return test;
}

}  // namespace tgen
