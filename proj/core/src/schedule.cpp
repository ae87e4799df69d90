#include "memshard/schedule.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "memshard/errors.hpp"

namespace memshard {

namespace {

constexpr double kMaxBeta = 0.999;
constexpr double kPi = 3.14159265358979323846;

std::vector<double> linear_betas(int T, double beta_start, double beta_end) {
    std::vector<double> betas(static_cast<std::size_t>(T));
    for (int i = 0; i < T; ++i) {
        const double frac = (T == 1) ? 1.0
                                     : static_cast<double>(i) / static_cast<double>(T - 1);
        betas[static_cast<std::size_t>(i)] = beta_start + frac * (beta_end - beta_start);
    }
    return betas;
}

// Nichol & Dhariwal style squared-cosine alpha_bar, converted to per-step
// betas so the stored table stays exactly a cumulative product.
std::vector<double> cosine_betas(int T) {
    constexpr double s = 0.008;
    auto f = [&](double step) {
        const double inner = ((step / T) + s) / (1.0 + s) * (kPi / 2.0);
        const double c = std::cos(inner);
        return c * c;
    };
    const double f0 = f(0.0);
    std::vector<double> betas(static_cast<std::size_t>(T));
    double prev = 1.0;
    for (int t = 1; t <= T; ++t) {
        const double abar = f(static_cast<double>(t)) / f0;
        betas[static_cast<std::size_t>(t - 1)] = 1.0 - abar / prev;
        prev = abar;
    }
    return betas;
}

}  // namespace

const char* to_string(ScheduleKind kind) {
    switch (kind) {
        case ScheduleKind::LinearBeta: return "linear-beta";
        case ScheduleKind::Cosine: return "cosine";
    }
    return "unknown";
}

ScheduleKind schedule_kind_from_string(std::string_view name) {
    if (name == "linear-beta") return ScheduleKind::LinearBeta;
    if (name == "cosine") return ScheduleKind::Cosine;
    throw ConfigError("unknown schedule kind: " + std::string(name));
}

NoiseSchedule build_schedule(int timesteps, ScheduleKind kind) {
    const double beta_end = 20.0 / static_cast<double>(timesteps == 0 ? 1 : timesteps);
    return build_schedule(timesteps, kind, 1e-4, beta_end);
}

NoiseSchedule build_schedule(int timesteps, ScheduleKind kind,
                             double beta_start, double beta_end) {
    if (timesteps < 1) {
        throw ConfigError("build_schedule: timestep count must be >= 1");
    }
    if (!(beta_start > 0.0) || beta_end < beta_start) {
        throw ConfigError("build_schedule: need 0 < beta_start <= beta_end");
    }

    NoiseSchedule sched;
    sched.timesteps = timesteps;
    sched.beta = (kind == ScheduleKind::LinearBeta)
                     ? linear_betas(timesteps, beta_start, beta_end)
                     : cosine_betas(timesteps);
    for (double& b : sched.beta) {
        b = std::min(b, kMaxBeta);
    }

    sched.alpha_bar.resize(static_cast<std::size_t>(timesteps) + 1);
    sched.alpha_bar[0] = 1.0;
    for (int t = 1; t <= timesteps; ++t) {
        sched.alpha_bar[static_cast<std::size_t>(t)] =
            sched.alpha_bar[static_cast<std::size_t>(t - 1)] *
            (1.0 - sched.beta[static_cast<std::size_t>(t - 1)]);
    }

    // Force the terminal signal level down to the pure-noise regime; small T
    // or gentle beta ranges would otherwise leave too much signal at t = T.
    auto& abar_T = sched.alpha_bar[static_cast<std::size_t>(timesteps)];
    if (abar_T > kTerminalAlphaBar) {
        abar_T = kTerminalAlphaBar;
        sched.beta[static_cast<std::size_t>(timesteps - 1)] =
            1.0 - abar_T / sched.alpha_bar[static_cast<std::size_t>(timesteps - 1)];
    }

    validate_schedule(sched);
    return sched;
}

void validate_schedule(const NoiseSchedule& sched) {
    const int T = sched.timesteps;
    if (T < 1 || sched.alpha_bar.size() != static_cast<std::size_t>(T) + 1 ||
        sched.beta.size() != static_cast<std::size_t>(T)) {
        throw ConfigError("schedule: inconsistent table sizes");
    }
    if (sched.alpha_bar[0] != 1.0) {
        throw ConfigError("schedule: alpha_bar[0] must be 1");
    }
    if (sched.alpha_bar[static_cast<std::size_t>(T)] > kTerminalAlphaBar) {
        throw ConfigError("schedule: alpha_bar[T] above terminal level");
    }
    double product = 1.0;
    for (int t = 1; t <= T; ++t) {
        const double b = sched.beta[static_cast<std::size_t>(t - 1)];
        if (!(b > 0.0) || !(b < 1.0)) {
            throw ConfigError("schedule: beta out of (0,1) at step " + std::to_string(t));
        }
        const double abar = sched.alpha_bar[static_cast<std::size_t>(t)];
        if (!(abar < sched.alpha_bar[static_cast<std::size_t>(t - 1)]) || !(abar > 0.0)) {
            throw ConfigError("schedule: alpha_bar not strictly decreasing at step " +
                              std::to_string(t));
        }
        product *= 1.0 - b;
        if (std::abs(product - abar) > 1e-12) {
            throw ConfigError("schedule: alpha_bar does not match beta product at step " +
                              std::to_string(t));
        }
    }
}

std::vector<double> forward_noise(std::span<const double> x, int t,
                                  std::span<const double> eps,
                                  const NoiseSchedule& sched) {
    if (t < 0 || t > sched.timesteps) {
        throw std::out_of_range("forward_noise: timestep out of range");
    }
    if (eps.size() != x.size()) {
        throw std::invalid_argument("forward_noise: eps length mismatch");
    }
    const double abar = sched.alpha_bar[static_cast<std::size_t>(t)];
    const double signal = std::sqrt(abar);
    const double noise = std::sqrt(1.0 - abar);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = signal * x[i] + noise * eps[i];
    }
    return out;
}

}  // namespace memshard
