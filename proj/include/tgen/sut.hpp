#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tgen/api_model.hpp"

namespace tgen {

enum class TargetKind { Line, BranchTrue, BranchFalse };

struct CoverageTarget {
  int id = 0;
  TargetKind kind = TargetKind::Line;
  int statement_id = 0;
};

struct FaultSignature {
  std::string endpoint_template;
  HttpMethod method = HttpMethod::Get;
  int last_statement_id = 0;
  auto operator<=>(const FaultSignature&) const = default;
};

struct ExecutionResult {
  std::vector<double> objectives;          // one distance in [0,1] per target
  std::vector<int> per_statement_status;   // HTTP status per executed statement (0 = network failure)
  std::set<FaultSignature> faults;
  std::vector<int> covered() const {
    std::vector<int> out;
    for (size_t i = 0; i < objectives.size(); ++i)
      if (objectives[i] == 0.0) out.push_back(static_cast<int>(i));
    return out;
  }
};

class Sut {
 public:
  virtual ~Sut() = default;
  virtual void reset() = 0;
  virtual const ActionCatalog& catalog() const = 0;
  virtual const std::vector<CoverageTarget>& targets() const = 0;
  virtual ExecutionResult execute(const TestCase& test) = 0;
  virtual const LiteralPools& pools() const = 0;
};

// ---- branch-distance heuristic ---------------------------------------------

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

std::optional<CompareOp> compare_op_from_string(const std::string& s);

// Raw distance to make `lhs op rhs` true; 0 iff it already holds.
double korel_distance(CompareOp op, const Value& lhs, const Value& rhs);
// d / (d + 1), mapping [0, inf) into [0, 1).
double normalize_distance(double d);

// ---- simulated SUT ----------------------------------------------------------

struct Operand {
  enum class Kind { Literal, Param, Exists, Count, Token } kind = Kind::Literal;
  Value literal;          // Literal
  std::string param;      // Param / Exists / Token: parameter name
  std::string resource;   // Exists / Count
};

struct Predicate {
  Operand lhs;
  CompareOp op = CompareOp::Eq;
  Operand rhs;
};

struct Effect {
  enum class Kind { Create, Read, Update, Delete, Respond } kind = Kind::Respond;
  std::string resource;
  std::string key_param;
  int status = 200;        // Respond
  bool issue_token = false;
};

struct Statement {
  int id = 0;
  std::optional<Predicate> when;
  Effect effect;
};

struct Handler {
  int action_index = 0;
  std::vector<Statement> statements;  // injected faults are prepended as guarded respond-500 statements
};

class SimulatedSut : public Sut {
 public:
  static SimulatedSut from_file(const std::string& path);
  static SimulatedSut from_json(const json& scenario);

  void reset() override;
  const ActionCatalog& catalog() const override { return catalog_; }
  const std::vector<CoverageTarget>& targets() const override { return targets_; }
  ExecutionResult execute(const TestCase& test) override;
  const LiteralPools& pools() const override { return pools_; }

  const std::string& name() const { return name_; }
  std::optional<int> expected_targets() const { return expected_targets_; }

 private:
  using Record = std::map<std::string, std::string>;
  using Store = std::map<std::string, std::map<std::string, Record>>;

  std::string name_;
  ActionCatalog catalog_;
  LiteralPools pools_;
  std::vector<Handler> handlers_;  // indexed by action
  std::vector<CoverageTarget> targets_;
  std::map<int, int> line_target_of_stmt_;
  std::map<int, std::pair<int, int>> branch_targets_of_stmt_;  // stmt id -> (true id, false id)
  std::optional<int> expected_targets_;
  Store initial_store_;

  Store store_;
  std::set<std::string> valid_tokens_;
  int token_counter_ = 0;

  std::optional<Value> eval_operand(const Operand& op,
                                    const std::map<std::string, Value>& params) const;
};

}  // namespace tgen
