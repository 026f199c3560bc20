#include "tgen/sut.hpp"

#include <cmath>
#include <fstream>

namespace tgen {

std::optional<CompareOp> compare_op_from_string(const std::string& s) {
  if (s == "==") return CompareOp::Eq;
  if (s == "!=") return CompareOp::Ne;
  if (s == "<") return CompareOp::Lt;
  if (s == "<=") return CompareOp::Le;
  if (s == ">") return CompareOp::Gt;
  if (s == ">=") return CompareOp::Ge;
  return std::nullopt;
}

namespace {

// Distance assigned to structurally incomparable operands (type mismatch,
// missing parameter); normalizes to ~1.
constexpr double kMismatch = 1e9;

std::optional<double> as_numeric(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* b = std::get_if<bool>(&v)) return *b ? 1.0 : 0.0;
  if (const auto* dt = std::get_if<Date>(&v)) return static_cast<double>(dt->serial);
  return std::nullopt;
}

double numeric_distance(CompareOp op, double a, double b) {
  switch (op) {
    case CompareOp::Eq: return std::fabs(a - b);
    case CompareOp::Ne: return a != b ? 0.0 : 1.0;
    case CompareOp::Lt: return a < b ? 0.0 : a - b + 1.0;
    case CompareOp::Le: return a <= b ? 0.0 : a - b;
    case CompareOp::Gt: return a > b ? 0.0 : b - a + 1.0;
    case CompareOp::Ge: return a >= b ? 0.0 : b - a;
  }
  return kMismatch;
}

// Character-wise surrogate for string equality: sum of absolute char-code
// differences, padded to the longer length.
double string_eq_distance(const std::string& a, const std::string& b) {
  double d = 0.0;
  size_t n = std::max(a.size(), b.size());
  for (size_t i = 0; i < n; ++i) {
    int ca = i < a.size() ? static_cast<unsigned char>(a[i]) : 0;
    int cb = i < b.size() ? static_cast<unsigned char>(b[i]) : 0;
    d += std::abs(ca - cb);
  }
  return d;
}

}  // namespace

double korel_distance(CompareOp op, const Value& lhs, const Value& rhs) {
  const auto* sa = std::get_if<std::string>(&lhs);
  const auto* sb = std::get_if<std::string>(&rhs);
  if (sa && sb) {
    if (op == CompareOp::Eq) return string_eq_distance(*sa, *sb);
    if (op == CompareOp::Ne) return *sa != *sb ? 0.0 : 1.0;
    return kMismatch;  // no ordering heuristic for strings
  }
  auto a = as_numeric(lhs);
  auto b = as_numeric(rhs);
  if (!a || !b) return op == CompareOp::Ne ? 0.0 : kMismatch;
  return numeric_distance(op, *a, *b);
}

double normalize_distance(double d) { return d / (d + 1.0); }

namespace {

CompareOp negate(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return CompareOp::Ne;
    case CompareOp::Ne: return CompareOp::Eq;
    case CompareOp::Lt: return CompareOp::Ge;
    case CompareOp::Le: return CompareOp::Gt;
    case CompareOp::Gt: return CompareOp::Le;
    case CompareOp::Ge: return CompareOp::Lt;
  }
  return CompareOp::Eq;
}

Operand parse_operand(const json& j) {
  Operand op;
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    auto after = [&](const char* prefix) { return s.substr(std::string(prefix).size()); };
    if (s.rfind("param:", 0) == 0) {
      op.kind = Operand::Kind::Param;
      op.param = after("param:");
      return op;
    }
    if (s.rfind("exists:", 0) == 0) {
      std::string rest = after("exists:");
      auto colon = rest.find(':');
      if (colon == std::string::npos) throw ParseError("exists operand needs resource:param");
      op.kind = Operand::Kind::Exists;
      op.resource = rest.substr(0, colon);
      op.param = rest.substr(colon + 1);
      return op;
    }
    if (s.rfind("count:", 0) == 0) {
      op.kind = Operand::Kind::Count;
      op.resource = after("count:");
      return op;
    }
    if (s.rfind("token:", 0) == 0) {
      op.kind = Operand::Kind::Token;
      op.param = after("token:");
      return op;
    }
    op.literal = s;
    return op;
  }
  if (j.is_boolean()) op.literal = j.get<bool>();
  else if (j.is_number_integer()) op.literal = j.get<std::int64_t>();
  else if (j.is_number_float()) op.literal = j.get<double>();
  else throw ParseError("unsupported predicate operand: " + j.dump());
  return op;
}

Predicate parse_predicate(const json& j) {
  Predicate p;
  p.lhs = parse_operand(j.at("lhs"));
  auto op = compare_op_from_string(j.at("op").get<std::string>());
  if (!op) throw ParseError("unknown predicate op '" + j.at("op").get<std::string>() + "'");
  p.op = *op;
  p.rhs = parse_operand(j.at("rhs"));
  return p;
}

Effect parse_effect(const json& j) {
  Effect e;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "respond") {
    e.kind = Effect::Kind::Respond;
    e.status = j.at("status").get<int>();
    e.issue_token = j.value("issue_token", false);
  } else if (kind == "create" || kind == "read" || kind == "update" || kind == "delete") {
    e.kind = kind == "create" ? Effect::Kind::Create
             : kind == "read" ? Effect::Kind::Read
             : kind == "update" ? Effect::Kind::Update
                                : Effect::Kind::Delete;
    e.resource = j.at("resource").get<std::string>();
    e.key_param = j.at("key").get<std::string>();
  } else {
    throw ParseError("unknown effect kind '" + kind + "'");
  }
  return e;
}

std::string to_key(const Value& v) {
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

}  // namespace

SimulatedSut SimulatedSut::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file: " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ParseError("scenario file is not valid JSON: " + path);
  return from_json(doc);
}

SimulatedSut SimulatedSut::from_json(const json& scenario) {
  SimulatedSut sut;
  sut.name_ = scenario.value("name", "unnamed");
  sut.catalog_ = parse_service_description(scenario);
  if (scenario.contains("literals")) {
    for (const json& s : scenario.at("literals").value("strings", json::array()))
      sut.pools_.strings.push_back(s.get<std::string>());
  }
  if (scenario.contains("expected_targets"))
    sut.expected_targets_ = scenario.at("expected_targets").get<int>();

  if (scenario.contains("resources")) {
    for (auto it = scenario.at("resources").begin(); it != scenario.at("resources").end(); ++it) {
      auto& res = sut.initial_store_[it.key()];
      for (auto rec = it.value().begin(); rec != it.value().end(); ++rec) {
        Record record;
        for (auto f = rec.value().begin(); f != rec.value().end(); ++f)
          record[f.key()] = f.value().is_string() ? f.value().get<std::string>() : f.value().dump();
        res[rec.key()] = std::move(record);
      }
    }
  }

  auto action_of = [&](const json& ref, const std::string& where) -> int {
    if (ref.is_number_integer()) {
      int idx = ref.get<int>();
      if (idx < 0 || idx >= sut.catalog_.size()) throw ParseError(where + ": action index out of range");
      return idx;
    }
    auto m = method_from_string(ref.at("method").get<std::string>());
    const std::string path = ref.at("path").get<std::string>();
    for (const auto& a : sut.catalog_.actions)
      if (m && a.method == *m && a.endpoint_template == path) return a.index;
    throw ParseError(where + ": no endpoint matches " + ref.dump());
  };

  sut.handlers_.resize(static_cast<size_t>(sut.catalog_.size()));
  for (int i = 0; i < sut.catalog_.size(); ++i) sut.handlers_[static_cast<size_t>(i)].action_index = i;

  std::set<int> stmt_ids;
  auto check_id = [&](int id) {
    if (!stmt_ids.insert(id).second)
      throw ParseError("duplicate statement id " + std::to_string(id));
  };

  if (scenario.contains("handlers")) {
    for (const json& h : scenario.at("handlers")) {
      int action = action_of(h.at("action"), "handler");
      auto& handler = sut.handlers_[static_cast<size_t>(action)];
      for (const json& s : h.value("statements", json::array())) {
        Statement st;
        st.id = s.at("id").get<int>();
        check_id(st.id);
        if (s.contains("when")) st.when = parse_predicate(s.at("when"));
        st.effect = parse_effect(s.at("effect"));
        handler.statements.push_back(std::move(st));
      }
    }
  }
  // Injected faults preempt the handler body: guarded 500s checked at entry.
  if (scenario.contains("faults")) {
    std::map<int, std::vector<Statement>> per_handler;
    for (const json& f : scenario.at("faults")) {
      int action = action_of(f.at("action"), "fault");
      Statement st;
      st.id = f.at("id").get<int>();
      check_id(st.id);
      st.when = parse_predicate(f.at("when"));
      st.effect.kind = Effect::Kind::Respond;
      st.effect.status = f.value("status", 500);
      per_handler[action].push_back(std::move(st));
    }
    for (auto& [action, stmts] : per_handler) {
      auto& body = sut.handlers_[static_cast<size_t>(action)].statements;
      body.insert(body.begin(), stmts.begin(), stmts.end());
    }
  }

  // Deterministic target enumeration: handlers in action order, statements in
  // order; one line target each, plus true/false branch targets per predicate.
  int next = 0;
  for (const auto& handler : sut.handlers_) {
    for (const auto& st : handler.statements) {
      sut.line_target_of_stmt_[st.id] = next;
      sut.targets_.push_back({next, TargetKind::Line, st.id});
      ++next;
      if (st.when) {
        sut.branch_targets_of_stmt_[st.id] = {next, next + 1};
        sut.targets_.push_back({next, TargetKind::BranchTrue, st.id});
        sut.targets_.push_back({next + 1, TargetKind::BranchFalse, st.id});
        next += 2;
      }
    }
  }

  sut.reset();
  return sut;
}

void SimulatedSut::reset() {
  store_ = initial_store_;
  valid_tokens_.clear();
  token_counter_ = 0;
}

std::optional<Value> SimulatedSut::eval_operand(const Operand& op,
                                                const std::map<std::string, Value>& params) const {
  switch (op.kind) {
    case Operand::Kind::Literal:
      return op.literal;
    case Operand::Kind::Param: {
      auto it = params.find(op.param);
      if (it == params.end()) return std::nullopt;
      return it->second;
    }
    case Operand::Kind::Exists: {
      auto it = params.find(op.param);
      if (it == params.end()) return Value{false};
      auto res = store_.find(op.resource);
      bool found = res != store_.end() && res->second.count(to_key(it->second)) > 0;
      return Value{found};
    }
    case Operand::Kind::Count: {
      auto res = store_.find(op.resource);
      return Value{static_cast<std::int64_t>(res == store_.end() ? 0 : res->second.size())};
    }
    case Operand::Kind::Token: {
      auto it = params.find(op.param);
      if (it == params.end()) return Value{false};
      const auto* s = std::get_if<std::string>(&it->second);
      return Value{s != nullptr && valid_tokens_.count(*s) > 0};
    }
  }
  return std::nullopt;
}

ExecutionResult SimulatedSut::execute(const TestCase& test) {
  ExecutionResult result;
  result.objectives.assign(targets_.size(), 1.0);

  // Token issued by each executed statement, if any.
  std::vector<std::optional<std::string>> issued(test.statements.size());

  for (size_t pos = 0; pos < test.statements.size(); ++pos) {
    const ActionInstance& inst = test.statements[pos];
    if (inst.action_index < 0 || inst.action_index >= catalog_.size())
      throw std::logic_error("simulated SUT: action index out of range (engine bug)");
    const ActionSpec& spec = catalog_.at(inst.action_index);

    // Resolve input genes; dangling token references resolve to "".
    std::map<std::string, Value> params;
    for (const auto& g : inst.inputs) {
      if (const auto* ref = std::get_if<TokenRef>(&g.value)) {
        std::string tok;
        if (ref->statement >= 0 && ref->statement < static_cast<int>(pos) &&
            issued[static_cast<size_t>(ref->statement)])
          tok = *issued[static_cast<size_t>(ref->statement)];
        params[g.param_name] = tok;
      } else {
        params[g.param_name] = g.value;
      }
    }

    const Handler& handler = handlers_[static_cast<size_t>(inst.action_index)];
    int status = 200;
    int last_stmt = -1;
    bool terminal = false;

    for (const auto& st : handler.statements) {
      last_stmt = st.id;
      result.objectives[static_cast<size_t>(line_target_of_stmt_.at(st.id))] = 0.0;
      bool holds = true;
      if (st.when) {
        auto lhs = eval_operand(st.when->lhs, params);
        auto rhs = eval_operand(st.when->rhs, params);
        double d_true, d_false;
        if (lhs && rhs) {
          d_true = korel_distance(st.when->op, *lhs, *rhs);
          d_false = korel_distance(negate(st.when->op), *lhs, *rhs);
        } else {
          d_true = kMismatch;
          d_false = 0.0;
        }
        holds = d_true == 0.0;
        auto [t_id, f_id] = branch_targets_of_stmt_.at(st.id);
        auto& t = result.objectives[static_cast<size_t>(t_id)];
        auto& f = result.objectives[static_cast<size_t>(f_id)];
        t = std::min(t, normalize_distance(d_true));
        f = std::min(f, normalize_distance(d_false));
      }
      if (!holds) continue;

      const Effect& e = st.effect;
      switch (e.kind) {
        case Effect::Kind::Respond:
          status = e.status;
          if (e.issue_token) {
            std::string tok = "tok" + std::to_string(token_counter_++);
            valid_tokens_.insert(tok);
            issued[pos] = tok;
          }
          terminal = true;
          break;
        case Effect::Kind::Create: {
          auto it = params.find(e.key_param);
          Record record;
          for (const auto& [k, v] : params) record[k] = to_key(v);
          store_[e.resource][it != params.end() ? to_key(it->second) : ""] = std::move(record);
          status = 201;
          terminal = true;
          break;
        }
        case Effect::Kind::Read:
        case Effect::Kind::Update:
        case Effect::Kind::Delete: {
          auto it = params.find(e.key_param);
          auto& res = store_[e.resource];
          std::string key = it != params.end() ? to_key(it->second) : "";
          auto rec = res.find(key);
          if (rec == res.end()) {
            status = 404;
          } else if (e.kind == Effect::Kind::Read) {
            status = 200;
          } else if (e.kind == Effect::Kind::Update) {
            for (const auto& [k, v] : params) rec->second[k] = to_key(v);
            status = 200;
          } else {
            res.erase(rec);
            status = 204;
          }
          terminal = true;
          break;
        }
      }
      if (terminal) break;
    }

    result.per_statement_status.push_back(status);
    if (status >= 500 && status <= 599)
      result.faults.insert({spec.endpoint_template, spec.method, last_stmt});
  }
  return result;
}

}  // namespace tgen
