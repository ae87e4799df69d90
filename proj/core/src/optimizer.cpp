#include "memshard/optimizer.hpp"

#include <cmath>
#include <stdexcept>

#include "memshard/errors.hpp"

namespace memshard {

void optimizer_step(DenoiserParams& params, std::span<const double> mean_gradient,
                    const AdamConfig& hyper) {
    if (mean_gradient.size() != params.values.size()) {
        throw std::invalid_argument("optimizer_step: gradient shape mismatch");
    }
    for (double g : mean_gradient) {
        if (!std::isfinite(g)) {
            throw NumericError("optimizer_step: non-finite gradient");
        }
    }

    params.step += 1;
    const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(params.step));
    const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(params.step));

    for (std::size_t i = 0; i < params.values.size(); ++i) {
        const double g = mean_gradient[i];
        params.opt_m[i] = hyper.beta1 * params.opt_m[i] + (1.0 - hyper.beta1) * g;
        params.opt_v[i] = hyper.beta2 * params.opt_v[i] + (1.0 - hyper.beta2) * g * g;
        const double m_hat = params.opt_m[i] / bc1;
        const double v_hat = params.opt_v[i] / bc2;
        params.values[i] -= hyper.lr * m_hat / (std::sqrt(v_hat) + hyper.eps);
    }
}

}  // namespace memshard
