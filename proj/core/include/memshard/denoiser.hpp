#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "memshard/schedule.hpp"

namespace memshard {

/// Geometry of the MLP noise predictor: flattened image concatenated with a
/// sinusoidal time embedding, SiLU hidden layers, linear output back to the
/// image dimension.
struct DenoiserArch {
    int data_dim = 64;              // D
    int time_embed_width = 32;      // E_t, must be even
    std::vector<int> hidden = {128, 128};

    int input_dim() const { return data_dim + time_embed_width; }
    bool operator==(const DenoiserArch&) const = default;
};

void validate_arch(const DenoiserArch& arch);

/// (in, out) per weight layer, input to output order.
std::vector<std::pair<int, int>> layer_shapes(const DenoiserArch& arch);

/// Total length of the flat parameter vector; a pure function of the arch.
int param_count(const DenoiserArch& arch);

/// Flat parameters plus Adam state. Layout per layer: weights row-major
/// [out][in], then biases [out].
struct DenoiserParams {
    DenoiserArch arch;
    std::vector<double> values;
    std::vector<double> opt_m;
    std::vector<double> opt_v;
    std::int64_t step = 0;
};

/// Glorot-uniform weights, zero biases, zero moments. Deterministic in seed.
DenoiserParams init_params(const DenoiserArch& arch, std::uint64_t seed);

void time_embedding(int t, int width, std::span<double> out);

/// Reusable scratch buffers so the training loop does not allocate per sample.
struct DenoiserWorkspace {
    std::vector<double> input;
    std::vector<std::vector<double>> pre;
    std::vector<std::vector<double>> act;
    std::vector<double> delta;
    std::vector<double> delta_prev;
    std::vector<double> x_t;

    void resize(const DenoiserArch& arch);
};

/// eps_theta(x_t, t). Throws NumericError naming the first layer whose
/// output is non-finite.
void predict_noise(const DenoiserParams& params, std::span<const double> x_t, int t,
                   std::span<double> eps_out, DenoiserWorkspace& ws);
std::vector<double> predict_noise(const DenoiserParams& params,
                                  std::span<const double> x_t, int t);

/// Squared error between the true and predicted noise, summed over
/// components.
double per_sample_loss(std::span<const double> x, int t, std::span<const double> eps,
                       const DenoiserParams& params, const NoiseSchedule& sched,
                       DenoiserWorkspace& ws);
double per_sample_loss(std::span<const double> x, int t, std::span<const double> eps,
                       const DenoiserParams& params, const NoiseSchedule& sched);

/// Exact gradient of per_sample_loss with respect to every parameter, added
/// into grad_accum. Returns the loss.
double loss_gradient_accumulate(std::span<const double> x, int t,
                                std::span<const double> eps,
                                const DenoiserParams& params, const NoiseSchedule& sched,
                                std::span<double> grad_accum, DenoiserWorkspace& ws);
std::vector<double> loss_gradient(std::span<const double> x, int t,
                                  std::span<const double> eps,
                                  const DenoiserParams& params,
                                  const NoiseSchedule& sched);

}  // namespace memshard
