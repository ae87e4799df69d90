#include "memshard/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "memshard/parallel.hpp"
#include "memshard/rng.hpp"

namespace memshard {

void parallel_stripes(std::size_t n, int workers,
                      const std::function<void(int, std::size_t)>& fn) {
    const int w = std::max(1, std::min<int>(workers, static_cast<int>(n)));
    if (w == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(0, i);
        }
        return;
    }
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(w));
    for (int worker = 0; worker < w; ++worker) {
        threads.emplace_back([&, worker] {
            try {
                for (std::size_t i = static_cast<std::size_t>(worker); i < n;
                     i += static_cast<std::size_t>(w)) {
                    fn(worker, i);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : threads) {
        t.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

std::vector<double> reverse_step(const DenoiserParams& params,
                                 const NoiseSchedule& sched,
                                 std::span<const double> x_t, int t,
                                 std::span<const double> z,
                                 DenoiserWorkspace& ws) {
    if (t < 1 || t > sched.timesteps) {
        throw std::out_of_range("reverse_step: timestep out of range");
    }
    const std::size_t dim = x_t.size();
    const double beta = sched.beta[static_cast<std::size_t>(t - 1)];
    const double alpha = 1.0 - beta;
    const double abar = sched.alpha_bar[static_cast<std::size_t>(t)];
    const double abar_prev = sched.alpha_bar[static_cast<std::size_t>(t - 1)];

    std::vector<double> eps_hat(dim);
    predict_noise(params, x_t, t, eps_hat, ws);

    const double eps_coef = beta / std::sqrt(1.0 - abar);
    const double inv_sqrt_alpha = 1.0 / std::sqrt(alpha);
    // posterior variance; exactly zero at t = 1 since abar_prev == 1
    const double sigma = std::sqrt(beta * (1.0 - abar_prev) / (1.0 - abar));

    std::vector<double> out(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        const double mean = inv_sqrt_alpha * (x_t[i] - eps_coef * eps_hat[i]);
        out[i] = (t > 1) ? mean + sigma * z[i] : mean;
    }
    return out;
}

std::vector<double> reverse_step(const DenoiserParams& params,
                                 const NoiseSchedule& sched,
                                 std::span<const double> x_t, int t,
                                 std::span<const double> z) {
    DenoiserWorkspace ws;
    return reverse_step(params, sched, x_t, t, z, ws);
}

std::vector<Sample> sample_images(const DenoiserParams& params,
                                  const NoiseSchedule& sched, int n,
                                  std::uint64_t seed, int workers) {
    if (n < 0) {
        throw std::invalid_argument("sample_images: n must be >= 0");
    }
    const std::size_t dim = static_cast<std::size_t>(params.arch.data_dim);
    std::vector<Sample> out(static_cast<std::size_t>(n));

    const int w = std::max(1, workers);
    std::vector<DenoiserWorkspace> workspaces(static_cast<std::size_t>(w));

    parallel_stripes(static_cast<std::size_t>(n), w, [&](int worker, std::size_t i) {
        DenoiserWorkspace& ws = workspaces[static_cast<std::size_t>(worker)];
        Rng rng(derive_seed(seed, {streams::kGen, i}));
        std::vector<double> x(dim);
        rng.fill_normal(x);
        std::vector<double> z(dim);
        for (int t = sched.timesteps; t >= 1; --t) {
            if (t > 1) {
                rng.fill_normal(z);
            }
            x = reverse_step(params, sched, x, t, z, ws);
        }
        for (double& p : x) {
            p = std::clamp(p, 0.0, 1.0);
        }
        out[i].id = static_cast<std::int64_t>(i);
        out[i].pixels = std::move(x);
    });
    return out;
}

}  // namespace memshard
