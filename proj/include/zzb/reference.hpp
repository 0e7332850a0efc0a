#pragma once

#include <cstddef>
#include <cstdint>

#include "zzb/fisher.hpp"
#include "zzb/radar_model.hpp"
#include "zzb/simulator.hpp"
#include "zzb/zzb.hpp"

/// Single-threaded counterparts of the OpenMP kernels. They share the per-item
/// code paths with the parallel versions and exist for equivalence tests and
/// benchmarking.
namespace zzb::reference {

CrbAverage average_crb(const Scenario& scenario, const PriorSamples& samples);

MseEstimate simulate_mse(const Scenario& scenario, double snr, std::size_t trials, double grid_step,
                         std::uint64_t seed);

ExactZzb zzb_exact_1d(const Scenario& scenario, std::size_t quadrature_points = 64);

}  // namespace zzb::reference
