// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>

#include "suite.hpp"

int main() {
  int failures = 0;
  const auto start = std::chrono::steady_clock::now();
  for (const auto& r : zzb::validation::acceptance_suite(true)) {
    std::printf("%s %s : %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    std::fflush(stdout);
    if (!r.passed) ++failures;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d failure(s), %.1f s\n", failures, secs);
  return failures == 0 ? 0 : 1;
}
