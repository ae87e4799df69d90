#include "memshard/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "memshard/errors.hpp"

namespace memshard {

const char* to_string(AugmentOp op) {
    switch (op) {
        case AugmentOp::HorizontalFlip: return "horizontal-flip";
        case AugmentOp::Translate: return "translate";
        case AugmentOp::Brightness: return "brightness";
        case AugmentOp::Contrast: return "contrast";
        case AugmentOp::AdditiveGaussian: return "additive-gaussian";
        case AugmentOp::Cutout: return "cutout";
    }
    return "unknown";
}

AugmentOp augment_op_from_string(std::string_view name) {
    for (AugmentOp op : all_augment_ops()) {
        if (name == to_string(op)) {
            return op;
        }
    }
    throw ConfigError("unknown augment op: " + std::string(name));
}

std::vector<AugmentOp> all_augment_ops() {
    return {AugmentOp::HorizontalFlip, AugmentOp::Translate, AugmentOp::Brightness,
            AugmentOp::Contrast,       AugmentOp::AdditiveGaussian,
            AugmentOp::Cutout};
}

void validate_augment_config(const AugmentConfig& cfg) {
    if (cfg.magnitude < 1) {
        throw ConfigError("augment: magnitude must be >= 1");
    }
    if (cfg.ops_per_call < 1) {
        throw ConfigError("augment: ops_per_call must be >= 1");
    }
    if (cfg.enabled_ops.empty()) {
        throw ConfigError("augment: enabled_ops must be non-empty");
    }
}

void apply_horizontal_flip(std::span<double> pixels, int image_side) {
    for (int r = 0; r < image_side; ++r) {
        double* row = pixels.data() + static_cast<std::ptrdiff_t>(r) * image_side;
        std::reverse(row, row + image_side);
    }
}

void apply_translate(std::span<double> pixels, int image_side, int dx, int dy) {
    if (dx == 0 && dy == 0) {
        return;
    }
    std::vector<double> shifted(pixels.size(), 0.0);
    for (int r = 0; r < image_side; ++r) {
        const int src_r = r - dy;
        if (src_r < 0 || src_r >= image_side) {
            continue;
        }
        for (int c = 0; c < image_side; ++c) {
            const int src_c = c - dx;
            if (src_c < 0 || src_c >= image_side) {
                continue;
            }
            shifted[static_cast<std::size_t>(r * image_side + c)] =
                pixels[static_cast<std::size_t>(src_r * image_side + src_c)];
        }
    }
    std::copy(shifted.begin(), shifted.end(), pixels.begin());
}

void apply_brightness(std::span<double> pixels, double delta) {
    for (double& p : pixels) {
        p = std::clamp(p + delta, 0.0, 1.0);
    }
}

void apply_contrast(std::span<double> pixels, double factor) {
    if (factor == 1.0) {
        return;
    }
    double mean = 0.0;
    for (double p : pixels) {
        mean += p;
    }
    mean /= static_cast<double>(pixels.size());
    for (double& p : pixels) {
        p = std::clamp(mean + factor * (p - mean), 0.0, 1.0);
    }
}

void apply_additive_gaussian(std::span<double> pixels, double sigma, Rng& rng) {
    for (double& p : pixels) {
        p = std::clamp(p + sigma * rng.normal(), 0.0, 1.0);
    }
}

void apply_cutout(std::span<double> pixels, int image_side, int row, int col,
                  int patch) {
    for (int r = row; r < std::min(row + patch, image_side); ++r) {
        for (int c = col; c < std::min(col + patch, image_side); ++c) {
            pixels[static_cast<std::size_t>(r * image_side + c)] = 0.5;
        }
    }
}

std::vector<double> augment(std::span<const double> pixels, int image_side,
                            double rho, const AugmentConfig& cfg, Rng& rng) {
    validate_augment_config(cfg);
    if (!(rho > 0.0) || rho > 1.0) {
        throw std::invalid_argument("augment: rho must be in (0, 1]");
    }
    if (pixels.size() != static_cast<std::size_t>(image_side) *
                             static_cast<std::size_t>(image_side)) {
        throw std::invalid_argument("augment: pixel count does not match image side");
    }

    const double magnitude = rho * static_cast<double>(cfg.magnitude);
    std::vector<double> out(pixels.begin(), pixels.end());
    std::span<double> view(out);

    for (int k = 0; k < cfg.ops_per_call; ++k) {
        const AugmentOp op = cfg.enabled_ops[static_cast<std::size_t>(
            rng.uniform_below(cfg.enabled_ops.size()))];
        switch (op) {
            case AugmentOp::HorizontalFlip:
                apply_horizontal_flip(view, image_side);
                break;
            case AugmentOp::Translate: {
                const std::int64_t span = std::llround(magnitude);
                const int dx = static_cast<int>(rng.uniform_int(-span, span));
                const int dy = static_cast<int>(rng.uniform_int(-span, span));
                apply_translate(view, image_side, dx, dy);
                break;
            }
            case AugmentOp::Brightness: {
                const double sign = (rng.uniform_below(2) == 0) ? 1.0 : -1.0;
                apply_brightness(view, sign * kBrightnessPerUnit * magnitude);
                break;
            }
            case AugmentOp::Contrast: {
                const double sign = (rng.uniform_below(2) == 0) ? 1.0 : -1.0;
                apply_contrast(view, 1.0 + sign * kContrastPerUnit * magnitude);
                break;
            }
            case AugmentOp::AdditiveGaussian:
                apply_additive_gaussian(view, kGaussianPerUnit * magnitude, rng);
                break;
            case AugmentOp::Cutout: {
                const std::int64_t patch = std::llround(magnitude);
                if (patch > 0) {
                    const int row = static_cast<int>(
                        rng.uniform_below(static_cast<std::uint64_t>(image_side)));
                    const int col = static_cast<int>(
                        rng.uniform_below(static_cast<std::uint64_t>(image_side)));
                    apply_cutout(view, image_side, row, col, static_cast<int>(patch));
                }
                break;
            }
        }
    }
    return out;
}

}  // namespace memshard
