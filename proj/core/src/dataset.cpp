#include "memshard/dataset.hpp"

#include <cmath>
#include <unordered_set>

#include "memshard/errors.hpp"

namespace memshard {

bool Dataset::has_class_labels() const {
    if (samples.empty()) {
        return false;
    }
    for (const Sample& s : samples) {
        if (!s.class_label.has_value()) {
            return false;
        }
    }
    return true;
}

std::int64_t Dataset::index_of(std::int64_t id) const {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].id == id) {
            return static_cast<std::int64_t>(i);
        }
    }
    return -1;
}

void validate_dataset(const Dataset& ds) {
    if (ds.image_side < 2) {
        throw ConfigError("dataset: image_side must be >= 2");
    }
    const std::size_t dim = static_cast<std::size_t>(ds.dim());
    std::unordered_set<std::int64_t> seen;
    seen.reserve(ds.samples.size());
    for (const Sample& s : ds.samples) {
        if (s.pixels.size() != dim) {
            throw ConfigError("dataset: sample " + std::to_string(s.id) +
                              " has wrong pixel count");
        }
        for (double p : s.pixels) {
            if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
                throw ConfigError("dataset: sample " + std::to_string(s.id) +
                                  " has pixels outside [0,1]");
            }
        }
        if (!seen.insert(s.id).second) {
            throw ConfigError("dataset: duplicate sample id " + std::to_string(s.id));
        }
    }
}

}  // namespace memshard
