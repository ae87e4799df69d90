#include "memshard/control.hpp"

#include <cmath>
#include <stdexcept>

#include "memshard/errors.hpp"

namespace memshard {

void validate_control_config(const ControlConfig& cfg) {
    if (!(cfg.lambda > 0.0)) {
        throw ConfigError("control: lambda must be > 0");
    }
    if (!(cfg.aug_range > 1.0)) {  // +infinity passes
        throw ConfigError("control: R must be > 1");
    }
    if (!(cfg.decay > 0.0)) {
        throw ConfigError("control: decay constant must be > 0");
    }
    if (cfg.warmup_steps < 0) {
        throw ConfigError("control: warmup_steps must be >= 0");
    }
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Skip: return "skip";
        case Verdict::Augment: return "augment";
        case Verdict::Keep: return "keep";
    }
    return "unknown";
}

double aug_strength(double ratio, double lambda, double decay) {
    const double distance = std::abs((ratio - lambda) / lambda);
    return std::exp(-decay * distance);
}

SampleDecision classify(std::optional<double> ratio, const ControlConfig& cfg) {
    SampleDecision decision;
    decision.ratio = ratio;
    if (!ratio.has_value()) {
        decision.verdict = Verdict::Keep;
        return decision;
    }
    const double r = *ratio;
    if (r < cfg.lambda) {
        decision.verdict = Verdict::Skip;
    } else if (r < cfg.aug_range * cfg.lambda) {
        decision.verdict = Verdict::Augment;
        decision.strength = aug_strength(r, cfg.lambda, cfg.decay);
    } else {
        decision.verdict = Verdict::Keep;
    }
    return decision;
}

BatchOutcome controlled_batch_step(std::span<const Sample* const> batch,
                                   DenoiserParams& params,
                                   const NoiseSchedule& sched, MemoryBank& bank,
                                   const ControlConfig& cfg,
                                   const TreatmentToggles& toggles,
                                   const AugmentConfig& aug,
                                   const AdamConfig& opt, int image_side,
                                   std::int64_t steps_elapsed, Rng& rng,
                                   DenoiserWorkspace& ws) {
    if (batch.empty()) {
        throw std::invalid_argument("controlled_batch_step: empty batch");
    }
    validate_control_config(cfg);

    const bool in_warmup = steps_elapsed < cfg.warmup_steps;
    const std::size_t dim = static_cast<std::size_t>(params.arch.data_dim);

    BatchOutcome outcome;
    outcome.decisions.reserve(batch.size());

    std::vector<double> grad_sum(params.values.size(), 0.0);
    std::vector<double> eps(dim);
    std::int64_t contributors = 0;
    double raw_loss_sum = 0.0;

    for (const Sample* sample : batch) {
        const int t = static_cast<int>(rng.uniform_int(1, sched.timesteps));
        rng.fill_normal(eps);

        const double raw_loss =
            per_sample_loss(sample->pixels, t, eps, params, sched, ws);
        raw_loss_sum += raw_loss;

        // classify against the pre-update bank value, then bank the raw loss
        SampleDecision decision = classify(loss_ratio(bank, t - 1, raw_loss), cfg);
        bank_update(bank, t - 1, raw_loss);

        if (in_warmup || (decision.verdict == Verdict::Skip && !toggles.agc) ||
            (decision.verdict == Verdict::Augment && !toggles.taa)) {
            decision.verdict = Verdict::Keep;
            decision.strength.reset();
        }

        switch (decision.verdict) {
            case Verdict::Skip:
                break;
            case Verdict::Augment: {
                const std::vector<double> treated =
                    augment(sample->pixels, image_side, *decision.strength, aug, rng);
                loss_gradient_accumulate(treated, t, eps, params, sched, grad_sum, ws);
                ++contributors;
                break;
            }
            case Verdict::Keep:
                loss_gradient_accumulate(sample->pixels, t, eps, params, sched,
                                         grad_sum, ws);
                ++contributors;
                break;
        }
        outcome.decisions.push_back(std::move(decision));
    }

    outcome.mean_raw_loss = raw_loss_sum / static_cast<double>(batch.size());

    if (contributors > 0) {
        const double inv = 1.0 / static_cast<double>(contributors);
        for (double& g : grad_sum) {
            g *= inv;
        }
        optimizer_step(params, grad_sum, opt);
        outcome.stepped = true;
    }
    return outcome;
}

}  // namespace memshard
