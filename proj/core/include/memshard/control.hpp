#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "memshard/augment.hpp"
#include "memshard/bank.hpp"
#include "memshard/dataset.hpp"
#include "memshard/denoiser.hpp"
#include "memshard/optimizer.hpp"
#include "memshard/rng.hpp"
#include "memshard/schedule.hpp"

namespace memshard {

struct ControlConfig {
    double lambda = 0.5;        // skipping threshold
    double aug_range = 1.7;     // R; +infinity allowed (augment all non-skipped)
    double decay = 5.0;         // A in the strength falloff
    std::int64_t warmup_steps = 500;  // optimizer steps with everything forced Keep
};

void validate_control_config(const ControlConfig& cfg);

enum class Verdict { Skip, Augment, Keep };

const char* to_string(Verdict v);

struct SampleDecision {
    Verdict verdict = Verdict::Keep;
    std::optional<double> ratio;     // nullopt while the bank slot is uncalibrated
    std::optional<double> strength;  // set only for Augment
};

/// rho = exp(-decay * |(ratio - lambda) / lambda|), in (0, 1].
double aug_strength(double ratio, double lambda, double decay);

/// Piecewise rule: ratio < lambda -> Skip; lambda <= ratio < R*lambda ->
/// Augment with strength; otherwise (or uncalibrated) -> Keep.
SampleDecision classify(std::optional<double> ratio, const ControlConfig& cfg);

struct TreatmentToggles {
    bool agc = true;  // loss-ratio skipping
    bool taa = true;  // threshold-aware augmentation
};

struct BatchOutcome {
    std::vector<SampleDecision> decisions;  // batch order
    bool stepped = false;                   // false when every sample skipped
    double mean_raw_loss = 0.0;
};

/// One treated optimizer step. For each sample in batch order: draw (t, eps)
/// from rng, compute the raw loss, classify against the bank value *before*
/// this sample's update, then feed the raw loss into the bank. Skipped
/// samples contribute nothing; augmented ones are recomputed on augmented
/// pixels with the same (t, eps). The mean gradient over non-skipped samples
/// is applied via optimizer_step; a fully skipped batch leaves params and
/// optimizer state untouched.
BatchOutcome controlled_batch_step(std::span<const Sample* const> batch,
                                   DenoiserParams& params,
                                   const NoiseSchedule& sched, MemoryBank& bank,
                                   const ControlConfig& cfg,
                                   const TreatmentToggles& toggles,
                                   const AugmentConfig& aug,
                                   const AdamConfig& opt, int image_side,
                                   std::int64_t steps_elapsed, Rng& rng,
                                   DenoiserWorkspace& ws);

}  // namespace memshard
