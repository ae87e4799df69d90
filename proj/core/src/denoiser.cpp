#include "memshard/denoiser.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "memshard/errors.hpp"
#include "memshard/rng.hpp"

namespace memshard {

namespace {

double stable_sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double silu(double z) {
    return z * stable_sigmoid(z);
}

double silu_derivative(double z) {
    const double s = stable_sigmoid(z);
    return s * (1.0 + z * (1.0 - s));
}

void check_finite_layer(std::span<const double> v, std::size_t layer) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw NumericError("denoiser: non-finite output in layer " +
                               std::to_string(layer));
        }
    }
}

}  // namespace

void validate_arch(const DenoiserArch& arch) {
    if (arch.data_dim < 1) {
        throw ConfigError("arch: data_dim must be >= 1");
    }
    if (arch.time_embed_width < 2 || arch.time_embed_width % 2 != 0) {
        throw ConfigError("arch: time_embed_width must be even and >= 2");
    }
    if (arch.hidden.empty()) {
        throw ConfigError("arch: at least one hidden layer required");
    }
    for (int h : arch.hidden) {
        if (h < 1) {
            throw ConfigError("arch: hidden width must be >= 1");
        }
    }
}

std::vector<std::pair<int, int>> layer_shapes(const DenoiserArch& arch) {
    std::vector<std::pair<int, int>> shapes;
    int in = arch.input_dim();
    for (int h : arch.hidden) {
        shapes.emplace_back(in, h);
        in = h;
    }
    shapes.emplace_back(in, arch.data_dim);
    return shapes;
}

int param_count(const DenoiserArch& arch) {
    int total = 0;
    for (auto [in, out] : layer_shapes(arch)) {
        total += in * out + out;
    }
    return total;
}

DenoiserParams init_params(const DenoiserArch& arch, std::uint64_t seed) {
    validate_arch(arch);
    DenoiserParams params;
    params.arch = arch;
    const std::size_t n = static_cast<std::size_t>(param_count(arch));
    params.values.resize(n);
    params.opt_m.assign(n, 0.0);
    params.opt_v.assign(n, 0.0);
    params.step = 0;

    Rng rng(derive_seed(seed, {streams::kInit}));
    std::size_t offset = 0;
    for (auto [in, out] : layer_shapes(arch)) {
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        for (int i = 0; i < in * out; ++i) {
            params.values[offset++] = (2.0 * rng.uniform01() - 1.0) * limit;
        }
        for (int i = 0; i < out; ++i) {
            params.values[offset++] = 0.0;
        }
    }
    return params;
}

void time_embedding(int t, int width, std::span<double> out) {
    const int half = width / 2;
    for (int i = 0; i < half; ++i) {
        const double exponent = (half > 1)
            ? static_cast<double>(i) / static_cast<double>(half - 1)
            : 0.0;
        const double freq = std::exp(-std::log(10000.0) * exponent);
        const double angle = static_cast<double>(t) * freq;
        out[static_cast<std::size_t>(2 * i)] = std::sin(angle);
        out[static_cast<std::size_t>(2 * i + 1)] = std::cos(angle);
    }
}

void DenoiserWorkspace::resize(const DenoiserArch& arch) {
    const auto shapes = layer_shapes(arch);
    input.resize(static_cast<std::size_t>(arch.input_dim()));
    pre.resize(shapes.size());
    act.resize(shapes.size());
    std::size_t widest = 0;
    for (std::size_t l = 0; l < shapes.size(); ++l) {
        pre[l].resize(static_cast<std::size_t>(shapes[l].second));
        act[l].resize(static_cast<std::size_t>(shapes[l].second));
        widest = std::max(widest, static_cast<std::size_t>(
                                      std::max(shapes[l].first, shapes[l].second)));
    }
    delta.resize(widest);
    delta_prev.resize(widest);
    x_t.resize(static_cast<std::size_t>(arch.data_dim));
}

namespace {

// Forward pass into ws.pre / ws.act; ws.act.back() holds the prediction.
void forward(const DenoiserParams& params, std::span<const double> x_t, int t,
             DenoiserWorkspace& ws) {
    const DenoiserArch& arch = params.arch;
    if (x_t.size() != static_cast<std::size_t>(arch.data_dim)) {
        throw std::invalid_argument("denoiser: input dimension mismatch");
    }
    for (int i = 0; i < arch.data_dim; ++i) {
        ws.input[static_cast<std::size_t>(i)] = x_t[static_cast<std::size_t>(i)];
    }
    time_embedding(t, arch.time_embed_width,
                   std::span<double>(ws.input).subspan(
                       static_cast<std::size_t>(arch.data_dim)));

    const auto shapes = layer_shapes(arch);
    const double* w = params.values.data();
    const double* a_in = ws.input.data();
    for (std::size_t l = 0; l < shapes.size(); ++l) {
        const auto [in, out] = shapes[l];
        const double* bias = w + static_cast<std::ptrdiff_t>(in) * out;
        double* z = ws.pre[l].data();
        for (int i = 0; i < out; ++i) {
            const double* row = w + static_cast<std::ptrdiff_t>(i) * in;
            double acc = bias[i];
            for (int j = 0; j < in; ++j) {
                acc += row[j] * a_in[j];
            }
            z[i] = acc;
        }
        const bool last = (l + 1 == shapes.size());
        double* a = ws.act[l].data();
        if (last) {
            for (int i = 0; i < out; ++i) {
                a[i] = z[i];
            }
        } else {
            for (int i = 0; i < out; ++i) {
                a[i] = silu(z[i]);
            }
        }
        check_finite_layer(ws.act[l], l);
        w = bias + out;
        a_in = a;
    }
}

}  // namespace

void predict_noise(const DenoiserParams& params, std::span<const double> x_t, int t,
                   std::span<double> eps_out, DenoiserWorkspace& ws) {
    ws.resize(params.arch);
    forward(params, x_t, t, ws);
    const auto& out = ws.act.back();
    for (std::size_t i = 0; i < out.size(); ++i) {
        eps_out[i] = out[i];
    }
}

std::vector<double> predict_noise(const DenoiserParams& params,
                                  std::span<const double> x_t, int t) {
    std::vector<double> out(static_cast<std::size_t>(params.arch.data_dim));
    DenoiserWorkspace ws;
    predict_noise(params, x_t, t, out, ws);
    return out;
}

double per_sample_loss(std::span<const double> x, int t, std::span<const double> eps,
                       const DenoiserParams& params, const NoiseSchedule& sched,
                       DenoiserWorkspace& ws) {
    ws.resize(params.arch);
    if (t < 0 || t > sched.timesteps) {
        throw std::out_of_range("per_sample_loss: timestep out of range");
    }
    const double abar = sched.alpha_bar[static_cast<std::size_t>(t)];
    const double signal = std::sqrt(abar);
    const double noise = std::sqrt(1.0 - abar);
    for (std::size_t i = 0; i < x.size(); ++i) {
        ws.x_t[i] = signal * x[i] + noise * eps[i];
    }
    forward(params, ws.x_t, t, ws);
    const auto& out = ws.act.back();
    double loss = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double diff = eps[i] - out[i];
        loss += diff * diff;
    }
    return loss;
}

double per_sample_loss(std::span<const double> x, int t, std::span<const double> eps,
                       const DenoiserParams& params, const NoiseSchedule& sched) {
    DenoiserWorkspace ws;
    return per_sample_loss(x, t, eps, params, sched, ws);
}

double loss_gradient_accumulate(std::span<const double> x, int t,
                                std::span<const double> eps,
                                const DenoiserParams& params, const NoiseSchedule& sched,
                                std::span<double> grad_accum, DenoiserWorkspace& ws) {
    const double loss = per_sample_loss(x, t, eps, params, sched, ws);
    if (grad_accum.size() != params.values.size()) {
        throw std::invalid_argument("loss_gradient: gradient buffer size mismatch");
    }

    const auto shapes = layer_shapes(params.arch);
    const std::size_t n_layers = shapes.size();

    // dL/d(output) for L = sum (eps - out)^2, output layer is linear.
    {
        const auto& out = ws.act.back();
        for (std::size_t i = 0; i < out.size(); ++i) {
            ws.delta[i] = 2.0 * (out[i] - eps[i]);
        }
    }

    // Offset of each layer's weight block in the flat vector.
    std::vector<std::size_t> offsets(n_layers);
    std::size_t off = 0;
    for (std::size_t l = 0; l < n_layers; ++l) {
        offsets[l] = off;
        off += static_cast<std::size_t>(shapes[l].first) * shapes[l].second +
               shapes[l].second;
    }

    for (std::size_t l = n_layers; l-- > 0;) {
        const auto [in, out] = shapes[l];
        const double* a_in = (l == 0) ? ws.input.data() : ws.act[l - 1].data();
        double* gw = grad_accum.data() + offsets[l];
        double* gb = gw + static_cast<std::ptrdiff_t>(in) * out;
        const double* w = params.values.data() + offsets[l];

        for (int i = 0; i < out; ++i) {
            const double d = ws.delta[static_cast<std::size_t>(i)];
            double* grow = gw + static_cast<std::ptrdiff_t>(i) * in;
            for (int j = 0; j < in; ++j) {
                grow[j] += d * a_in[j];
            }
            gb[i] += d;
        }

        if (l > 0) {
            const auto& z_prev = ws.pre[l - 1];
            for (int j = 0; j < in; ++j) {
                double acc = 0.0;
                for (int i = 0; i < out; ++i) {
                    acc += ws.delta[static_cast<std::size_t>(i)] *
                           w[static_cast<std::ptrdiff_t>(i) * in + j];
                }
                ws.delta_prev[static_cast<std::size_t>(j)] =
                    acc * silu_derivative(z_prev[static_cast<std::size_t>(j)]);
            }
            std::swap(ws.delta, ws.delta_prev);
        }
    }
    return loss;
}

std::vector<double> loss_gradient(std::span<const double> x, int t,
                                  std::span<const double> eps,
                                  const DenoiserParams& params,
                                  const NoiseSchedule& sched) {
    std::vector<double> grad(params.values.size(), 0.0);
    DenoiserWorkspace ws;
    loss_gradient_accumulate(x, t, eps, params, sched, grad, ws);
    return grad;
}

}  // namespace memshard
