#include "memshard/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "memshard/errors.hpp"
#include "memshard/parallel.hpp"

namespace memshard {

const char* to_string(TrainerKind kind) {
    switch (kind) {
        case TrainerKind::Default: return "default";
        case TrainerKind::DpSgd: return "dp-sgd";
        case TrainerKind::IetAgcPlus: return "iet-agc-plus";
    }
    return "unknown";
}

TrainerKind trainer_kind_from_string(std::string_view name) {
    if (name == "default") return TrainerKind::Default;
    if (name == "dp-sgd") return TrainerKind::DpSgd;
    if (name == "iet-agc-plus") return TrainerKind::IetAgcPlus;
    throw ConfigError("unknown trainer kind: " + std::string(name));
}

const char* to_string(InteractionKind kind) {
    switch (kind) {
        case InteractionKind::Aggregate: return "aggregate";
        case InteractionKind::Redistribute: return "redistribute";
    }
    return "unknown";
}

ExperimentConfig resolve_config(const ExperimentConfig& cfg_in, const Dataset& dataset) {
    ExperimentConfig cfg = cfg_in;

    if (cfg.trainer_kind != TrainerKind::IetAgcPlus) {
        cfg.toggles = ExperimentToggles{};  // baselines run untreated
    }
    if (!cfg.toggles.iet) {
        cfg.shard_count = 1;
    }

    if (cfg.toggles.taa && !cfg.toggles.agc) {
        throw ConfigError("config: taa requires agc");
    }
    if (cfg.toggles.msr && !cfg.toggles.agc) {
        throw ConfigError("config: msr requires agc");
    }
    if (cfg.toggles.msr && !cfg.toggles.iet) {
        throw ConfigError("config: msr requires iet");
    }
    if (cfg.shard_count < 1) {
        throw ConfigError("config: K must be >= 1");
    }
    if (static_cast<std::size_t>(cfg.shard_count) > dataset.size()) {
        throw ConfigError("config: K exceeds dataset size");
    }
    if (cfg.rounds < 0) {
        throw ConfigError("config: M must be >= 0");
    }
    if (cfg.epochs_per_round < 1) {
        throw ConfigError("config: E must be >= 1");
    }
    if (!(cfg.redistribute_proportion >= 0.0) || cfg.redistribute_proportion >= 1.0) {
        throw ConfigError("config: P must be in [0, 1)");
    }
    if (cfg.batch_size < 1) {
        throw ConfigError("config: batch_size must be >= 1");
    }
    if (!(cfg.bank_eta > 0.0) || cfg.bank_eta > 1.0) {
        throw ConfigError("config: eta must be in (0, 1]");
    }
    if (cfg.trainer_kind == TrainerKind::DpSgd && !(cfg.dp.clip_norm > 0.0)) {
        throw ConfigError("config: dp clip_norm must be > 0");
    }
    if (cfg.workers < 1) {
        throw ConfigError("config: workers must be >= 1");
    }
    validate_control_config(cfg.control);
    validate_augment_config(cfg.aug);

    DenoiserArch arch;
    arch.data_dim = dataset.dim();
    arch.time_embed_width = cfg.time_embed_width;
    arch.hidden = cfg.hidden;
    validate_arch(arch);
    if (cfg.sched_timesteps < 1) {
        throw ConfigError("config: schedule timesteps must be >= 1");
    }
    return cfg;
}

DenoiserParams aggregate(std::span<const DenoiserParams> models) {
    if (models.empty()) {
        throw std::invalid_argument("aggregate: no models given");
    }
    const std::size_t n = models[0].values.size();
    for (const DenoiserParams& m : models) {
        if (m.values.size() != n || m.opt_m.size() != n || m.opt_v.size() != n ||
            !(m.arch == models[0].arch)) {
            throw std::invalid_argument("aggregate: model shape mismatch");
        }
    }

    DenoiserParams out = models[0];
    const std::size_t k = models.size();
    std::vector<double> column(k);

    auto combine = [&](auto accessor, std::vector<double>& dst) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                column[j] = accessor(models[j])[i];
            }
            // value-sorted accumulation: permutation invariant, and identical
            // inputs short-circuit to the exact common value
            std::sort(column.begin(), column.end());
            if (column.front() == column.back()) {
                dst[i] = column.front();
                continue;
            }
            double sum = 0.0;
            for (double v : column) {
                sum += v;
            }
            dst[i] = sum / static_cast<double>(k);
        }
    };

    combine([](const DenoiserParams& m) -> const std::vector<double>& { return m.values; },
            out.values);
    combine([](const DenoiserParams& m) -> const std::vector<double>& { return m.opt_m; },
            out.opt_m);
    combine([](const DenoiserParams& m) -> const std::vector<double>& { return m.opt_v; },
            out.opt_v);

    std::int64_t step = models[0].step;
    for (const DenoiserParams& m : models) {
        step = std::max(step, m.step);
    }
    out.step = step;
    return out;
}

void msr_redistribute(std::vector<ShardState>& shards, double proportion) {
    const std::size_t k = shards.size();
    if (k < 2) {
        return;
    }
    if (!(proportion >= 0.0) || proportion >= 1.0) {
        throw ConfigError("msr_redistribute: proportion must be in [0, 1)");
    }

    // simultaneous top-P selection from the pre-move snapshot
    std::vector<std::vector<std::int64_t>> moving(k);
    for (std::size_t i = 0; i < k; ++i) {
        const ShardState& shard = shards[i];
        const std::size_t size = shard.sample_ids.size();
        if (size == 0) {
            continue;
        }
        const std::size_t n_move = static_cast<std::size_t>(std::ceil(
            proportion * static_cast<double>(size) - 1e-9));
        if (n_move == 0) {
            continue;
        }
        std::vector<std::pair<std::int64_t, std::int64_t>> ranked;  // (count, id)
        ranked.reserve(size);
        for (const auto& [id, count] : shard.skip_counts) {
            ranked.emplace_back(count, id);
        }
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;  // most skipped first
            return a.second < b.second;                        // then smaller id
        });
        for (std::size_t r = 0; r < n_move && r < ranked.size(); ++r) {
            moving[i].push_back(ranked[r].second);
        }
    }

    for (std::size_t i = 0; i < k; ++i) {
        ShardState& src = shards[i];
        ShardState& dst = shards[(i + 1) % k];
        for (std::int64_t id : moving[i]) {
            src.skip_counts.erase(id);
            src.sample_ids.erase(
                std::find(src.sample_ids.begin(), src.sample_ids.end(), id));
            dst.sample_ids.push_back(id);
            dst.skip_counts[id] = 0;
        }
    }

    for (ShardState& shard : shards) {
        std::sort(shard.sample_ids.begin(), shard.sample_ids.end());
        for (auto& [id, count] : shard.skip_counts) {
            count = 0;
        }
    }
}

namespace {

// Returns the mean (unclipped) loss so the round metrics stay comparable.
double dp_sgd_step_impl(std::span<const Sample* const> batch, DenoiserParams& params,
                        const NoiseSchedule& sched, double tau, double clip_norm,
                        const AdamConfig& opt, Rng& rng, DenoiserWorkspace& ws) {
    if (batch.empty()) {
        throw std::invalid_argument("dp_sgd_step: empty batch");
    }
    if (!(clip_norm > 0.0)) {
        throw ConfigError("dp_sgd_step: clip_norm must be > 0");
    }
    const std::size_t dim = static_cast<std::size_t>(params.arch.data_dim);
    std::vector<double> grad(params.values.size());
    std::vector<double> sum(params.values.size(), 0.0);
    std::vector<double> eps(dim);
    double loss_total = 0.0;

    for (const Sample* sample : batch) {
        const int t = static_cast<int>(rng.uniform_int(1, sched.timesteps));
        rng.fill_normal(eps);
        std::fill(grad.begin(), grad.end(), 0.0);
        loss_total += loss_gradient_accumulate(sample->pixels, t, eps, params, sched,
                                               grad, ws);
        double norm_sq = 0.0;
        for (double g : grad) {
            norm_sq += g * g;
        }
        const double norm = std::sqrt(norm_sq);
        const double scale = (norm > clip_norm) ? clip_norm / norm : 1.0;
        for (std::size_t i = 0; i < grad.size(); ++i) {
            sum[i] += scale * grad[i];
        }
    }

    const double inv = 1.0 / static_cast<double>(batch.size());
    const double noise_std = tau * clip_norm;
    for (double& g : sum) {
        g *= inv;
        g += noise_std * rng.normal();
    }
    optimizer_step(params, sum, opt);
    return loss_total * inv;
}

}  // namespace

void dp_sgd_step(std::span<const Sample* const> batch, DenoiserParams& params,
                 const NoiseSchedule& sched, double tau, double clip_norm,
                 const AdamConfig& opt, Rng& rng, DenoiserWorkspace& ws) {
    dp_sgd_step_impl(batch, params, sched, tau, clip_norm, opt, rng, ws);
}

namespace {

struct ShardRoundOutput {
    RoundShardMetrics metrics;
    std::map<std::int64_t, std::int64_t> skips;
};

ShardRoundOutput train_shard_round(const ExperimentConfig& cfg,
                                   const NoiseSchedule& sched,
                                   const std::unordered_map<std::int64_t, const Sample*>& by_id,
                                   ShardState& shard, int round, int image_side) {
    ShardRoundOutput out;
    out.metrics.round = round;
    out.metrics.shard_id = shard.shard_id;
    out.metrics.shard_size = static_cast<std::int64_t>(shard.sample_ids.size());

    Rng rng(derive_seed(cfg.seed, {streams::kTrain,
                                   static_cast<std::uint64_t>(shard.shard_id),
                                   static_cast<std::uint64_t>(round)}));
    DenoiserWorkspace ws;

    const TreatmentToggles toggles{cfg.toggles.agc, cfg.toggles.taa};
    double loss_weighted = 0.0;
    std::int64_t samples_seen = 0;

    for (int epoch = 0; epoch < cfg.epochs_per_round; ++epoch) {
        std::vector<std::int64_t> order = shard.sample_ids;  // sorted at round start
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(
                order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            std::vector<const Sample*> batch;
            batch.reserve(stop - start);
            for (std::size_t i = start; i < stop; ++i) {
                batch.push_back(by_id.at(order[i]));
            }

            if (cfg.trainer_kind == TrainerKind::DpSgd) {
                const double mean_loss = dp_sgd_step_impl(
                    batch, shard.params, sched, cfg.dp.tau, cfg.dp.clip_norm,
                    cfg.optim, rng, ws);
                loss_weighted += mean_loss * static_cast<double>(batch.size());
                out.metrics.n_kept += static_cast<std::int64_t>(batch.size());
            } else {
                const BatchOutcome outcome = controlled_batch_step(
                    batch, shard.params, sched, shard.bank, cfg.control, toggles,
                    cfg.aug, cfg.optim, image_side, shard.params.step, rng, ws);
                loss_weighted +=
                    outcome.mean_raw_loss * static_cast<double>(batch.size());
                for (std::size_t i = 0; i < outcome.decisions.size(); ++i) {
                    const SampleDecision& d = outcome.decisions[i];
                    const std::int64_t id = order[start + i];
                    switch (d.verdict) {
                        case Verdict::Skip:
                            out.metrics.n_skipped += 1;
                            shard.skip_counts[id] += 1;
                            out.skips[id] += 1;
                            break;
                        case Verdict::Augment:
                            out.metrics.n_augmented += 1;
                            break;
                        case Verdict::Keep:
                            out.metrics.n_kept += 1;
                            break;
                    }
                }
            }
            out.metrics.n_batches += 1;
            samples_seen += static_cast<std::int64_t>(stop - start);
        }
    }
    out.metrics.mean_loss =
        (samples_seen > 0) ? loss_weighted / static_cast<double>(samples_seen) : 0.0;
    return out;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg_in, const Dataset& dataset,
                         const InteractionObserver& observer) {
    validate_dataset(dataset);
    const ExperimentConfig cfg = resolve_config(cfg_in, dataset);
    const NoiseSchedule sched = build_schedule(cfg.sched_timesteps, cfg.sched_kind);

    DenoiserArch arch;
    arch.data_dim = dataset.dim();
    arch.time_embed_width = cfg.time_embed_width;
    arch.hidden = cfg.hidden;
    const DenoiserParams theta0 = init_params(arch, derive_seed(cfg.seed, {streams::kInit}));

    Rng split_rng(derive_seed(cfg.seed, {streams::kSplit}));
    std::vector<ShardState> shards =
        shard_split(dataset, cfg.shard_count, cfg.split_kind, cfg.dirichlet_alpha,
                    split_rng);
    for (ShardState& shard : shards) {
        shard.bank = make_bank(cfg.sched_timesteps, cfg.bank_eta);
        shard.params = theta0;
        shard.rng_stream = derive_seed(cfg.seed, {streams::kTrain,
                                                  static_cast<std::uint64_t>(shard.shard_id)});
    }
    check_shard_partition(shards, dataset);

    std::unordered_map<std::int64_t, const Sample*> by_id;
    by_id.reserve(dataset.size());
    for (const Sample& s : dataset.samples) {
        by_id.emplace(s.id, &s);
    }

    RunResult result;
    for (const Sample& s : dataset.samples) {
        result.cumulative_skips[s.id] = 0;
    }

    const int k = cfg.shard_count;
    for (int round = 1; round <= cfg.rounds; ++round) {
        std::vector<ShardRoundOutput> outputs(static_cast<std::size_t>(k));
        parallel_stripes(static_cast<std::size_t>(k), std::min(cfg.workers, k),
                         [&](int, std::size_t idx) {
                             outputs[idx] = train_shard_round(
                                 cfg, sched, by_id, shards[idx], round,
                                 dataset.image_side);
                         });

        RoundRecord record;
        record.round = round;
        for (int i = 0; i < k; ++i) {
            const ShardRoundOutput& out = outputs[static_cast<std::size_t>(i)];
            result.metrics.push_back(out.metrics);
            record.round_skips.push_back(out.skips);
            for (const auto& [id, count] : out.skips) {
                result.cumulative_skips[id] += count;
            }
        }

        DenoiserParams global;
        if (round % 2 == 0) {
            record.interaction = InteractionKind::Aggregate;
            std::vector<DenoiserParams> models;
            models.reserve(static_cast<std::size_t>(k));
            for (const ShardState& shard : shards) {
                models.push_back(shard.params);
            }
            global = aggregate(models);
            for (ShardState& shard : shards) {
                shard.params = global;
            }
        } else {
            record.interaction = InteractionKind::Redistribute;
            if (cfg.toggles.msr) {
                msr_redistribute(shards, cfg.redistribute_proportion);
            }
        }
        check_shard_partition(shards, dataset);

        for (const ShardState& shard : shards) {
            record.shard_members.push_back(shard.sample_ids);
        }
        result.history.push_back(std::move(record));

        if (observer) {
            InteractionEvent event;
            event.round = round;
            event.kind = result.history.back().interaction;
            event.shards = &shards;
            event.global_params = (round % 2 == 0) ? &global : nullptr;
            observer(event);
        }
    }

    if (cfg.rounds == 0) {
        result.final_params = theta0;
    } else if (cfg.rounds % 2 == 0) {
        result.final_params = shards.front().params;  // the last aggregate
    } else {
        // the schedule ends on a redistribute round; fold the shard models
        // into a usable global model
        std::vector<DenoiserParams> models;
        models.reserve(shards.size());
        for (const ShardState& shard : shards) {
            models.push_back(shard.params);
        }
        result.final_params = aggregate(models);
    }
    result.final_shards = std::move(shards);
    return result;
}

}  // namespace memshard
