#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "memshard/control.hpp"
#include "memshard/shard.hpp"

namespace memshard {

enum class TrainerKind { Default, DpSgd, IetAgcPlus };

const char* to_string(TrainerKind kind);
TrainerKind trainer_kind_from_string(std::string_view name);

struct ExperimentToggles {
    bool agc = false;
    bool iet = false;
    bool taa = false;
    bool msr = false;
};

struct DpConfig {
    double tau = 0.0005;  // noise multiplier
    double clip_norm = 1.0;
};

struct ExperimentConfig {
    int shard_count = 8;              // K
    int rounds = 12;                  // M
    int epochs_per_round = 5;         // E
    double redistribute_proportion = 0.25;  // P
    SplitKind split_kind = SplitKind::IidStratified;
    double dirichlet_alpha = 0.5;
    ControlConfig control;
    double bank_eta = 0.8;
    AugmentConfig aug;
    int batch_size = 32;
    std::uint64_t seed = 0;
    TrainerKind trainer_kind = TrainerKind::IetAgcPlus;
    ExperimentToggles toggles;
    DpConfig dp;
    std::vector<int> hidden = {128, 128};
    int time_embed_width = 32;
    int sched_timesteps = 100;
    ScheduleKind sched_kind = ScheduleKind::LinearBeta;
    AdamConfig optim;
    int workers = 1;
};

/// Normalizes trainer presets (default and dp-sgd clear the toggles; a
/// disabled iet forces K to 1) and validates the whole config against the
/// dataset. Throws ConfigError before any training happens.
ExperimentConfig resolve_config(const ExperimentConfig& cfg, const Dataset& dataset);

/// Elementwise mean of parameter vectors and optimizer moments; step counter
/// becomes the max. Each coordinate is accumulated in value-sorted order, so
/// the result is bit-identical under any permutation of the inputs and
/// identical inputs average to themselves exactly.
DenoiserParams aggregate(std::span<const DenoiserParams> models);

/// Circular move of each shard's top-ceil(P*|D_i|) most-skipped samples
/// (ties to the smaller id) to the next shard, selections taken
/// simultaneously from the pre-move state. All skip counters reset to zero
/// afterwards. No-op for a single shard.
void msr_redistribute(std::vector<ShardState>& shards, double proportion);

/// Differentially-private batch step: per-sample gradients clipped to
/// clip_norm, averaged, then perturbed per coordinate with Gaussian noise of
/// std tau * clip_norm before the optimizer update.
void dp_sgd_step(std::span<const Sample* const> batch, DenoiserParams& params,
                 const NoiseSchedule& sched, double tau, double clip_norm,
                 const AdamConfig& opt, Rng& rng, DenoiserWorkspace& ws);

enum class InteractionKind { Aggregate, Redistribute };

const char* to_string(InteractionKind kind);

struct RoundShardMetrics {
    int round = 0;
    int shard_id = 0;
    double mean_loss = 0.0;
    std::int64_t n_skipped = 0;
    std::int64_t n_augmented = 0;
    std::int64_t n_kept = 0;
    std::int64_t shard_size = 0;
    std::int64_t n_batches = 0;
};

struct RoundRecord {
    int round = 0;
    InteractionKind interaction = InteractionKind::Aggregate;
    // post-interaction membership and the skips accumulated this round,
    // captured before any MSR counter reset
    std::vector<std::vector<std::int64_t>> shard_members;
    std::vector<std::map<std::int64_t, std::int64_t>> round_skips;
};

struct RunResult {
    DenoiserParams final_params;
    std::vector<RoundShardMetrics> metrics;
    std::vector<RoundRecord> history;
    std::map<std::int64_t, std::int64_t> cumulative_skips;  // never reset
    std::vector<ShardState> final_shards;
};

/// Interaction-time hook: fires after each round's aggregate/redistribute
/// phase on the orchestrator thread. global_params is null on odd
/// (redistribute) rounds.
struct InteractionEvent {
    int round = 0;
    InteractionKind kind = InteractionKind::Aggregate;
    const std::vector<ShardState>* shards = nullptr;
    const DenoiserParams* global_params = nullptr;
};
using InteractionObserver = std::function<void(const InteractionEvent&)>;

/// The full training loop: split into shards, train each for E epochs per
/// round, aggregate on even rounds and redistribute on odd ones. Shards run
/// on up to cfg.workers threads; every random stream is derived from
/// (seed, shard, round), so the result does not depend on the worker count.
RunResult run_experiment(const ExperimentConfig& cfg, const Dataset& dataset,
                         const InteractionObserver& observer = nullptr);

}  // namespace memshard
