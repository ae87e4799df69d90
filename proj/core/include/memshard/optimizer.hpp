#pragma once

#include <span>

#include "memshard/denoiser.hpp"

namespace memshard {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// One bias-corrected Adam update of the flat parameter vector; increments
/// the step counter. Throws NumericError on a non-finite gradient.
void optimizer_step(DenoiserParams& params, std::span<const double> mean_gradient,
                    const AdamConfig& hyper);

}  // namespace memshard
