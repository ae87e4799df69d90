#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace memshard {

enum class ScheduleKind { LinearBeta, Cosine };

const char* to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(std::string_view name);

/// Forward-process variance table. alpha_bar[t] is the cumulative product
/// of (1 - beta) up to step t, with alpha_bar[0] == 1 and
/// alpha_bar[T] clamped to at most 1e-4 (kept nonzero so the sampler can
/// divide by sqrt terms).
struct NoiseSchedule {
    int timesteps = 0;              // T
    std::vector<double> alpha_bar;  // size T+1
    std::vector<double> beta;       // size T, beta[i] belongs to step t = i+1
};

inline constexpr double kTerminalAlphaBar = 1e-4;

/// Default beta range: start 1e-4, end 20/T, matching the usual 1000-step
/// table rescaled so the terminal signal level is T-independent.
NoiseSchedule build_schedule(int timesteps, ScheduleKind kind);
NoiseSchedule build_schedule(int timesteps, ScheduleKind kind,
                             double beta_start, double beta_end);

/// Throws ConfigError if the schedule invariants do not hold.
void validate_schedule(const NoiseSchedule& sched);

/// x_t = sqrt(abar_t) * x + sqrt(1 - abar_t) * eps, elementwise.
std::vector<double> forward_noise(std::span<const double> x, int t,
                                  std::span<const double> eps,
                                  const NoiseSchedule& sched);

}  // namespace memshard
