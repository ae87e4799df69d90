#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "memshard/rng.hpp"

namespace memshard {

enum class AugmentOp {
    HorizontalFlip,
    Translate,
    Brightness,
    Contrast,
    AdditiveGaussian,
    Cutout,
};

const char* to_string(AugmentOp op);
AugmentOp augment_op_from_string(std::string_view name);
std::vector<AugmentOp> all_augment_ops();

struct AugmentConfig {
    int magnitude = 3;      // base magnitude M
    int ops_per_call = 2;   // RandAugment convention
    std::vector<AugmentOp> enabled_ops = all_augment_ops();
};

void validate_augment_config(const AugmentConfig& cfg);

/// Applies ops_per_call ops drawn uniformly from enabled_ops, each at
/// effective magnitude rho * magnitude mapped into its own range. Output
/// stays in [0,1]. At effective magnitude 0 the value-shift ops are exact
/// identities.
std::vector<double> augment(std::span<const double> pixels, int image_side,
                            double rho, const AugmentConfig& cfg, Rng& rng);

// Individual kernels, exposed for direct testing.
void apply_horizontal_flip(std::span<double> pixels, int image_side);
void apply_translate(std::span<double> pixels, int image_side, int dx, int dy);
void apply_brightness(std::span<double> pixels, double delta);
void apply_contrast(std::span<double> pixels, double factor);
void apply_additive_gaussian(std::span<double> pixels, double sigma, Rng& rng);
void apply_cutout(std::span<double> pixels, int image_side, int row, int col,
                  int patch);

/// Per-magnitude-unit scales used when mapping rho*M into op ranges.
inline constexpr double kBrightnessPerUnit = 0.05;
inline constexpr double kContrastPerUnit = 0.1;
inline constexpr double kGaussianPerUnit = 0.02;

}  // namespace memshard
