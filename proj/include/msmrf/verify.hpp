#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace msmrf {

enum class VerifyLevel { quick, full };

VerifyLevel parse_level(const std::string& name);

struct CheckResult {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  std::string detail;

  bool passed() const { return residual <= tolerance; }
};

struct VerifyOptions {
  VerifyLevel level = VerifyLevel::quick;
  std::uint64_t seed = 1;
  int threads = 1;
  /// Negative control: perturbs one site's pair coefficient in its conditional
  /// specification so the pair-symmetry check must fail.
  bool inject_beta_asymmetry = false;
  std::function<void(const CheckResult&)> on_check;
};

/// Oracle and property battery; every check reports its worst residual.
std::vector<CheckResult> run_verification(const VerifyOptions& options);

std::string format_check(const CheckResult& c);

}  // namespace msmrf
