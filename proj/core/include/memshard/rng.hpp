#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace memshard {

// Deterministic xoshiro256++ generator. The standard <random> engines would
// do, but libstdc++'s distributions are implementation-defined; reproducing
// runs bit-for-bit across toolchains needs the draw algorithms pinned here.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform01();

    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t uniform_below(std::uint64_t bound);

    /// Uniform integer in [lo, hi], inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    /// Standard normal via Box-Muller (second deviate cached).
    double normal();

    void fill_normal(std::span<double> out);

    /// Gamma(alpha, 1) by Marsaglia-Tsang squeeze.
    double gamma(double alpha);

    /// Dirichlet(alpha, ..., alpha) of dimension k.
    std::vector<double> dirichlet_symmetric(double alpha, std::size_t k);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Stable stream derivation: hashes (base, tags...) into a child seed so
/// shard/round/image streams are independent of scheduling order.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags);

std::uint64_t splitmix64(std::uint64_t x);

/// Fixed purpose tags for derive_seed. Part of the reproducibility contract:
/// a given (seed, purpose, indices...) always names the same stream.
namespace streams {
inline constexpr std::uint64_t kInit = 1;      // parameter initialization
inline constexpr std::uint64_t kSplit = 2;     // shard splitting
inline constexpr std::uint64_t kTrain = 3;     // per (shard, round) training
inline constexpr std::uint64_t kGen = 4;       // per-image ancestral sampling
inline constexpr std::uint64_t kImage = 5;     // per-image synthesis
inline constexpr std::uint64_t kJitter = 6;    // per-copy duplicate jitter
inline constexpr std::uint64_t kProjection = 7;  // sliced-Wasserstein directions
inline constexpr std::uint64_t kLossGap = 8;   // loss-curve noise draws
}  // namespace streams

}  // namespace memshard
