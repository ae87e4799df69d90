#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "memshard/dataset.hpp"
#include "memshard/denoiser.hpp"
#include "memshard/schedule.hpp"

namespace memshard {

/// Draws x_{t-1} from the learned reverse posterior at step t, using the
/// caller-supplied unit noise z (ignored at t == 1 where the posterior
/// variance is zero). No clipping here.
std::vector<double> reverse_step(const DenoiserParams& params,
                                 const NoiseSchedule& sched,
                                 std::span<const double> x_t, int t,
                                 std::span<const double> z,
                                 DenoiserWorkspace& ws);
std::vector<double> reverse_step(const DenoiserParams& params,
                                 const NoiseSchedule& sched,
                                 std::span<const double> x_t, int t,
                                 std::span<const double> z);

/// Full ancestral sampling chain for n images. Each image's noise stream is
/// derived from (seed, image index), so results are identical for any worker
/// count. Pixels are clipped to [0,1] only after the final step.
std::vector<Sample> sample_images(const DenoiserParams& params,
                                  const NoiseSchedule& sched, int n,
                                  std::uint64_t seed, int workers = 1);

}  // namespace memshard
