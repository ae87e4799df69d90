#include "memshard/shard.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>

#include "memshard/errors.hpp"

namespace memshard {

const char* to_string(SplitKind kind) {
    switch (kind) {
        case SplitKind::IidStratified: return "iid-stratified";
        case SplitKind::EqualRandom: return "equal-random";
        case SplitKind::Dirichlet: return "dirichlet";
    }
    return "unknown";
}

SplitKind split_kind_from_string(std::string_view name) {
    if (name == "iid-stratified") return SplitKind::IidStratified;
    if (name == "equal-random") return SplitKind::EqualRandom;
    if (name == "dirichlet") return SplitKind::Dirichlet;
    throw ConfigError("unknown split kind: " + std::string(name));
}

namespace {

// Class label -> shuffled member ids, in deterministic label order.
std::map<int, std::vector<std::int64_t>> group_by_class(const Dataset& dataset,
                                                        Rng& rng) {
    std::map<int, std::vector<std::int64_t>> by_class;
    for (const Sample& s : dataset.samples) {
        by_class[*s.class_label].push_back(s.id);
    }
    for (auto& [label, ids] : by_class) {
        std::sort(ids.begin(), ids.end());
        rng.shuffle(ids);
    }
    return by_class;
}

}  // namespace

std::vector<ShardState> shard_split(const Dataset& dataset, int shard_count,
                                    SplitKind kind, double dirichlet_alpha,
                                    Rng& rng) {
    const std::size_t n = dataset.size();
    if (shard_count < 1) {
        throw ConfigError("shard_split: shard count must be >= 1");
    }
    if (static_cast<std::size_t>(shard_count) > n) {
        throw ConfigError("shard_split: more shards than samples");
    }
    if ((kind == SplitKind::IidStratified || kind == SplitKind::Dirichlet) &&
        !dataset.has_class_labels()) {
        throw ConfigError(std::string("shard_split: ") + to_string(kind) +
                          " requires class labels; use equal-random explicitly");
    }

    std::vector<ShardState> shards(static_cast<std::size_t>(shard_count));
    for (int i = 0; i < shard_count; ++i) {
        shards[static_cast<std::size_t>(i)].shard_id = i + 1;
    }
    auto give = [&shards](int shard_idx, std::int64_t id) {
        shards[static_cast<std::size_t>(shard_idx)].sample_ids.push_back(id);
    };

    switch (kind) {
        case SplitKind::EqualRandom: {
            std::vector<std::int64_t> ids;
            ids.reserve(n);
            for (const Sample& s : dataset.samples) {
                ids.push_back(s.id);
            }
            std::sort(ids.begin(), ids.end());
            rng.shuffle(ids);
            for (std::size_t i = 0; i < ids.size(); ++i) {
                give(static_cast<int>(i % static_cast<std::size_t>(shard_count)),
                     ids[i]);
            }
            break;
        }
        case SplitKind::IidStratified: {
            // One cursor shared across classes keeps both the per-class and
            // the total counts within +-1.
            auto by_class = group_by_class(dataset, rng);
            int cursor = 0;
            for (auto& [label, ids] : by_class) {
                for (std::int64_t id : ids) {
                    give(cursor, id);
                    cursor = (cursor + 1) % shard_count;
                }
            }
            break;
        }
        case SplitKind::Dirichlet: {
            if (!(dirichlet_alpha > 0.0)) {
                throw ConfigError("shard_split: dirichlet alpha must be > 0");
            }
            auto by_class = group_by_class(dataset, rng);
            for (auto& [label, ids] : by_class) {
                const std::size_t n_class = ids.size();
                const std::vector<double> props =
                    rng.dirichlet_symmetric(dirichlet_alpha,
                                            static_cast<std::size_t>(shard_count));
                // largest-remainder rounding so the counts sum exactly
                std::vector<std::size_t> counts(props.size());
                std::vector<std::pair<double, int>> remainders;
                std::size_t assigned = 0;
                for (std::size_t k = 0; k < props.size(); ++k) {
                    const double exact = props[k] * static_cast<double>(n_class);
                    counts[k] = static_cast<std::size_t>(exact);
                    assigned += counts[k];
                    remainders.emplace_back(exact - static_cast<double>(counts[k]),
                                            static_cast<int>(k));
                }
                std::sort(remainders.begin(), remainders.end(),
                          [](const auto& a, const auto& b) {
                              if (a.first != b.first) return a.first > b.first;
                              return a.second < b.second;
                          });
                for (std::size_t r = 0; assigned < n_class; ++r, ++assigned) {
                    counts[static_cast<std::size_t>(
                        remainders[r % remainders.size()].second)] += 1;
                }
                std::size_t pos = 0;
                for (int k = 0; k < shard_count; ++k) {
                    for (std::size_t c = 0; c < counts[static_cast<std::size_t>(k)];
                         ++c) {
                        give(k, ids[pos++]);
                    }
                }
            }
            break;
        }
    }

    for (ShardState& shard : shards) {
        std::sort(shard.sample_ids.begin(), shard.sample_ids.end());
        for (std::int64_t id : shard.sample_ids) {
            shard.skip_counts[id] = 0;
        }
    }
    return shards;
}

void check_shard_partition(const std::vector<ShardState>& shards,
                           const Dataset& dataset) {
    std::set<std::int64_t> seen;
    std::size_t total = 0;
    for (const ShardState& shard : shards) {
        std::set<std::int64_t> own(shard.sample_ids.begin(), shard.sample_ids.end());
        total += shard.sample_ids.size();
        for (std::int64_t id : shard.sample_ids) {
            if (!seen.insert(id).second) {
                throw ConfigError("shards are not disjoint: id " + std::to_string(id));
            }
        }
        if (shard.skip_counts.size() != shard.sample_ids.size()) {
            throw ConfigError("shard " + std::to_string(shard.shard_id) +
                              ": skip counters out of sync");
        }
        for (const auto& [id, count] : shard.skip_counts) {
            if (count < 0 || own.count(id) == 0) {
                throw ConfigError("shard " + std::to_string(shard.shard_id) +
                                  ": dangling skip counter for id " +
                                  std::to_string(id));
            }
        }
    }
    if (total != dataset.size()) {
        throw ConfigError("shards cover " + std::to_string(total) + " of " +
                          std::to_string(dataset.size()) + " samples");
    }
    for (const Sample& s : dataset.samples) {
        if (seen.count(s.id) == 0) {
            throw ConfigError("sample " + std::to_string(s.id) +
                              " missing from all shards");
        }
    }
}

}  // namespace memshard
