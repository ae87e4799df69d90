#pragma once

#include <cstdint>
#include <map>
#include <string_view>
#include <vector>

#include "memshard/bank.hpp"
#include "memshard/dataset.hpp"
#include "memshard/denoiser.hpp"
#include "memshard/rng.hpp"

namespace memshard {

enum class SplitKind { IidStratified, EqualRandom, Dirichlet };

const char* to_string(SplitKind kind);
SplitKind split_kind_from_string(std::string_view name);

/// One proxy model's world: its slice of the data, skip bookkeeping, loss
/// bank and parameter snapshot. Owned by exactly one worker during training.
struct ShardState {
    int shard_id = 1;  // 1-based
    std::vector<std::int64_t> sample_ids;
    std::map<std::int64_t, std::int64_t> skip_counts;
    MemoryBank bank;
    std::uint64_t rng_stream = 0;
    DenoiserParams params;
};

/// Partitions dataset ids into K shards. iid-stratified deals each class
/// round-robin (needs labels); equal-random deals a global shuffle;
/// dirichlet draws per-class shard proportions from Dirichlet(alpha) and
/// rounds them to counts by largest remainder. Banks and params are left for
/// the orchestrator to fill in.
std::vector<ShardState> shard_split(const Dataset& dataset, int shard_count,
                                    SplitKind kind, double dirichlet_alpha,
                                    Rng& rng);

/// Throws if the shards do not exactly partition the dataset ids or a skip
/// counter is dangling.
void check_shard_partition(const std::vector<ShardState>& shards,
                           const Dataset& dataset);

}  // namespace memshard
