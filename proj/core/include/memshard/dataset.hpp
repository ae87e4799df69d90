#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace memshard {

/// One training image, pixels flattened row-major in [0, 1].
struct Sample {
    std::int64_t id = 0;
    std::optional<int> class_label;
    std::vector<double> pixels;
};

struct Dataset {
    int image_side = 0;  // H; pixel count is H*H
    std::vector<Sample> samples;

    int dim() const { return image_side * image_side; }
    std::size_t size() const { return samples.size(); }
    bool has_class_labels() const;

    /// Index of the sample with a given id, or -1.
    std::int64_t index_of(std::int64_t id) const;
};

/// Checks id uniqueness, pixel range and dimension consistency.
/// Throws ConfigError on violation.
void validate_dataset(const Dataset& ds);

}  // namespace memshard
