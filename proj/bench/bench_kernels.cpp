// Wall-clock comparison of the OpenMP kernels against their serial references.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>

#include "zzb/fisher.hpp"
#include "zzb/parallel.hpp"
#include "zzb/reference.hpp"
#include "zzb/simulator.hpp"
#include "zzb/zzb.hpp"

namespace {

double seconds(const std::function<void()>& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const char* name, double serial, double parallel, bool identical) {
  std::printf("%-28s serial %8.3f s   openmp %8.3f s   speedup %5.2fx   identical %s\n", name, serial, parallel,
              serial / parallel, identical ? "yes" : "NO");
}

}  // namespace

int main() {
  constexpr double deg = std::numbers::pi / 180.0;
  std::printf("OpenMP threads: %d\n", zzb::max_threads());

  {
    const zzb::Scenario s = zzb::make_ula_scenario(20, 32, 5, -60 * deg, 60 * deg, 1.0);
    const zzb::PriorSamples samples = zzb::draw_prior_samples(s, 4000, 1);
    zzb::CrbAverage a, b;
    const double ts = seconds([&] { a = zzb::reference::average_crb(s, samples); });
    const double tp = seconds([&] { b = zzb::average_crb(s, samples); });
    report("average_crb K=5 (4000)", ts, tp, a.mean_trace_inv == b.mean_trace_inv);
  }
  {
    const zzb::Scenario s = zzb::make_ula_scenario(8, 4, 1, -60 * deg, 60 * deg);
    zzb::MseEstimate a, b;
    const double ts = seconds([&] { a = zzb::reference::simulate_mse(s, 10.0, 400, zzb::kDefaultGridStep, 3); });
    const double tp = seconds([&] { b = zzb::simulate_mse(s, 10.0, 400, zzb::kDefaultGridStep, 3); });
    report("simulate_mse K=1 (400)", ts, tp, a.mse == b.mse);
  }
  {
    const zzb::Scenario s = zzb::make_ula_scenario(8, 1, 1, -60 * deg, 60 * deg, 1.0);
    zzb::ExactZzb a, b;
    const double ts = seconds([&] { a = zzb::reference::zzb_exact_1d(s); });
    const double tp = seconds([&] { b = zzb::zzb_exact_1d(s); });
    report("zzb_exact_1d 0 dB", ts, tp, a.value == b.value);
  }
  return 0;
}
