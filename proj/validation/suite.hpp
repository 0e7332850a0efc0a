#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace zzb::validation {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Property suites. Each returns one aggregated result.
CheckResult covariance_derivative_property(std::uint64_t seed = 11, int instances = 100);
CheckResult fisher_property(std::uint64_t seed = 12, int instances = 100);
CheckResult chernoff_sign_property(std::uint64_t seed = 13, int draws = 500);
CheckResult special_function_property();
CheckResult alpha_scalar_property();

std::vector<CheckResult> property_suite();

// Acceptance criteria, numbered as in the acceptance list.
CheckResult zero_snr_collapse();         // 1
CheckResult high_snr_collapse();         // 2
CheckResult threshold_compression();     // 3
CheckResult apb_monotonic_in_k();        // 4
CheckResult closed_form_vs_exact();      // 5
CheckResult simulation_bound_validity(); // 6
CheckResult numerical_properties();      // 7
CheckResult thread_determinism();        // 8

/// Criteria 1–8 in order; `include_slow` = false skips 3, 6 and 8.
std::vector<CheckResult> acceptance_suite(bool include_slow = true);

}  // namespace zzb::validation
