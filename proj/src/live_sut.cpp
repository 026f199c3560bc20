#include "tgen/live_sut.hpp"

#include <cstdio>

#include <httplib.h>

namespace tgen {

namespace {

std::string value_to_wire(const Value& v) {
  std::string out;
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::string>) out = x;
        else if constexpr (std::is_same_v<T, std::int64_t>) out = std::to_string(x);
        else if constexpr (std::is_same_v<T, double>) {
          char buf[32];
          std::snprintf(buf, sizeof(buf), "%.6g", x);
          out = buf;
        } else if constexpr (std::is_same_v<T, bool>) out = x ? "true" : "false";
        else if constexpr (std::is_same_v<T, Date>) out = x.iso();
        else out = "";
      },
      v);
  return out;
}

// Response token: the `token` field of a JSON body, else the trimmed body.
std::string extract_token(const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_object() && j.contains("token") && j.at("token").is_string())
    return j.at("token").get<std::string>();
  std::string t = body;
  while (!t.empty() && (t.back() == '\n' || t.back() == '\r' || t.back() == ' ')) t.pop_back();
  return t;
}

}  // namespace

struct LiveSut::Impl {
  httplib::Client client;
  explicit Impl(const std::string& base, int timeout_ms) : client(base) {
    client.set_connection_timeout(0, timeout_ms * 1000);
    client.set_read_timeout(0, timeout_ms * 1000);
  }
};

LiveSut::LiveSut(ActionCatalog catalog, LiveConfig config, LiteralPools pools)
    : catalog_(std::move(catalog)), config_(std::move(config)), pools_(std::move(pools)),
      impl_(std::make_unique<Impl>(config_.base_url, config_.timeout_ms)) {
  // Four status-class targets per action: 2xx, 3xx, 4xx, 5xx.
  int id = 0;
  for (int a = 0; a < catalog_.size(); ++a)
    for (int cls = 2; cls <= 5; ++cls) targets_.push_back({id++, TargetKind::Line, a * 10 + cls});
}

LiveSut::~LiveSut() = default;

void LiveSut::reset() {
  if (config_.reset_url.empty()) {
    static bool warned = false;
    if (!warned) {
      std::fprintf(stderr, "warning: live SUT has no reset hook; state carries over between tests\n");
      warned = true;
    }
    return;
  }
  impl_->client.Post(config_.reset_url);
}

ExecutionResult LiveSut::execute(const TestCase& test) {
  ExecutionResult result;
  result.objectives.assign(targets_.size(), 1.0);
  std::vector<std::string> tokens(test.statements.size());

  for (size_t pos = 0; pos < test.statements.size(); ++pos) {
    const ActionInstance& inst = test.statements[pos];
    const ActionSpec& spec = catalog_.at(inst.action_index);

    std::string path = spec.endpoint_template;
    httplib::Params query;
    httplib::Headers headers;
    json body = json::object();

    auto resolve = [&](const Value& v) -> std::string {
      if (const auto* ref = std::get_if<TokenRef>(&v)) {
        if (ref->statement >= 0 && ref->statement < static_cast<int>(pos))
          return tokens[static_cast<size_t>(ref->statement)];
        return "";
      }
      return value_to_wire(v);
    };

    for (const auto& g : inst.inputs) {
      const ParamSchema* schema = nullptr;
      for (const auto& ps : spec.param_schemas)
        if (ps.name == g.param_name) schema = &ps;
      std::string wire = resolve(g.value);
      ParamKind kind = schema ? schema->kind : ParamKind::Query;
      switch (kind) {
        case ParamKind::Path: {
          std::string needle = "{" + g.param_name + "}";
          auto at = path.find(needle);
          if (at != std::string::npos) path.replace(at, needle.size(), wire);
          break;
        }
        case ParamKind::Query: query.emplace(g.param_name, wire); break;
        case ParamKind::Header: headers.emplace(g.param_name, wire); break;
        case ParamKind::BodyField: body[g.param_name] = wire; break;
      }
    }

    std::string full = httplib::append_query_params(path, query);
    httplib::Result res;
    switch (spec.method) {
      case HttpMethod::Get: res = impl_->client.Get(full, headers); break;
      case HttpMethod::Head: res = impl_->client.Head(full, headers); break;
      case HttpMethod::Post: res = impl_->client.Post(full, headers, body.dump(), "application/json"); break;
      case HttpMethod::Put: res = impl_->client.Put(full, headers, body.dump(), "application/json"); break;
      case HttpMethod::Patch: res = impl_->client.Patch(full, headers, body.dump(), "application/json"); break;
      case HttpMethod::Delete: res = impl_->client.Delete(full, headers); break;
    }

    if (!res) {  // network failure: synthetic status 0, no distance contribution
      result.per_statement_status.push_back(0);
      continue;
    }
    int status = res->status;
    result.per_statement_status.push_back(status);
    tokens[pos] = extract_token(res->body);

    int cls = status / 100;
    for (size_t t = 0; t < targets_.size(); ++t) {
      int action = targets_[t].statement_id / 10;
      int want_cls = targets_[t].statement_id % 10;
      if (action != inst.action_index) continue;
      double d = cls == want_cls ? 0.0 : 0.5;  // called-but-wrong-class gets partial credit
      result.objectives[t] = std::min(result.objectives[t], d);
    }
    if (status >= 500 && status <= 599)
      result.faults.insert({spec.endpoint_template, spec.method, -1});
  }
  return result;
}

}  // namespace tgen
