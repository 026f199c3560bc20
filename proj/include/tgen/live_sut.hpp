#pragma once

#include <memory>
#include <string>

#include "tgen/sut.hpp"

namespace tgen {

struct LiveConfig {
  std::string base_url;
  std::string reset_url;       // optional POST hook; empty -> reset is a warning no-op
  int timeout_ms = 2000;
};

// Black-box adapter for a live HTTP endpoint. Coverage degrades to
// (action x status-class) targets: 2xx..5xx per catalog action. A statement
// whose request fails on the network is recorded with status 0 and contributes
// no distances. Fault signatures use last_statement_id = -1 (no white-box
// statement tracking).
class LiveSut : public Sut {
 public:
  LiveSut(ActionCatalog catalog, LiveConfig config, LiteralPools pools = {});
  ~LiveSut() override;

  void reset() override;
  const ActionCatalog& catalog() const override { return catalog_; }
  const std::vector<CoverageTarget>& targets() const override { return targets_; }
  ExecutionResult execute(const TestCase& test) override;
  const LiteralPools& pools() const override { return pools_; }

 private:
  ActionCatalog catalog_;
  LiveConfig config_;
  LiteralPools pools_;
  std::vector<CoverageTarget> targets_;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tgen
