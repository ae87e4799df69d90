#pragma once

#include <cstdint>
#include <vector>

#include "memshard/dataset.hpp"

namespace memshard {

struct DuplicateGroupSpec {
    int n_copies = 2;        // total copies, base included
    double jitter_std = 0.0; // 0 = exact duplicates
};

struct SynthSpec {
    int n_total = 256;
    int image_side = 8;
    int n_classes = 4;  // shape families cycle: disc, bar, cross, checker
    std::vector<DuplicateGroupSpec> duplicate_groups;
    double noise_floor_std = 0.02;
    std::uint64_t seed = 0;
};

void validate_synth_spec(const SynthSpec& spec);

struct DuplicateGroup {
    std::int64_t base_id = 0;
    std::vector<std::int64_t> member_ids;  // includes base_id
    double jitter_std = 0.0;
};

struct SynthResult {
    Dataset dataset;
    std::vector<DuplicateGroup> groups;  // ground truth for memorization bait

    std::vector<std::int64_t> duplicate_ids() const;
};

/// Procedurally renders class shapes (random position and intensity, plus a
/// noise floor). Sample id i gets class i % n_classes. Each duplicate group
/// claims free slots of one class - so copies share the base's label - and
/// replicates the base image with per-copy Gaussian jitter. Deterministic in
/// the spec seed.
SynthResult synth_dataset(const SynthSpec& spec);

}  // namespace memshard
