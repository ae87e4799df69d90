#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "memshard/dataset.hpp"
#include "memshard/denoiser.hpp"
#include "memshard/schedule.hpp"

namespace memshard {

struct MemorizationReport {
    std::int64_t n_generated = 0;
    std::vector<double> ell_values;             // one per generation
    std::map<double, std::int64_t> mq;          // threshold -> count(ell <= threshold)
    double quality_proxy = 0.0;                 // sliced Wasserstein-2 to train set
    std::vector<std::int64_t> nearest_ids;      // nearest training id per generation
};

inline constexpr int kDefaultNeighborCount = 50;
inline constexpr int kQualityProjections = 128;
inline const std::vector<double> kDefaultMqThresholds = {0.4, 0.5, 0.6};

/// Distance from x to its nearest training sample, normalized by that
/// sample's mean distance to its own n nearest training neighbors. Ties go
/// to the smaller index. A zero denominator yields 0 when the numerator is
/// also 0, +infinity otherwise. Optionally reports the nearest sample's id.
double ell_ratio(std::span<const double> x, const Dataset& train, int n_neighbors,
                 std::int64_t* nearest_id = nullptr);

/// Count of ell values at or below each threshold (boundary inclusive).
/// Thresholds must be sorted ascending.
std::map<double, std::int64_t> mq_count(std::span<const double> ells,
                                        std::span<const double> thresholds);

/// Mean over random unit directions of the exact 1-D Wasserstein-2 distance
/// between the projected empirical distributions.
double quality_proxy(const std::vector<Sample>& generated, const Dataset& real,
                     int n_projections, std::uint64_t seed);

/// 1-D W2 between two (unsorted) value sets of possibly different sizes,
/// via the piecewise quantile coupling. Exposed for tests.
double wasserstein2_1d(std::vector<double> a, std::vector<double> b);

/// Samples n_gen images and assembles the full report. Deterministic in
/// (params bits, seed); generation and scoring chunk across workers.
MemorizationReport evaluate_model(const DenoiserParams& params,
                                  const NoiseSchedule& sched, const Dataset& train,
                                  int n_gen, std::uint64_t seed,
                                  std::span<const double> thresholds,
                                  int n_neighbors = kDefaultNeighborCount,
                                  int workers = 1);

/// Per-timestep mean losses for two sample sets under shared noise draws:
/// position p of either set sees the same (t, rep) noise, so equal sets give
/// exactly equal curves. Returns {curve_a, curve_b}, each of length T.
std::pair<std::vector<double>, std::vector<double>> loss_gap_curves(
    const DenoiserParams& params, const NoiseSchedule& sched,
    std::span<const Sample* const> set_a, std::span<const Sample* const> set_b,
    int reps, std::uint64_t seed, int workers = 1);

/// Non-DC energy of the 2-D DFT of the mean-subtracted image, divided by the
/// pixel count. Equals pixel variance times the pixel count (Parseval).
double spectral_energy(std::span<const double> pixels, int image_side);

/// For each id in subset: min L2 distance to any *other* dataset member.
std::vector<double> nn_distances(std::span<const std::int64_t> subset_ids,
                                 const Dataset& dataset, int workers = 1);

/// Histogram of per-sample cumulative skip totals over [edges[i], edges[i+1])
/// bins, last bin closed. Values outside the edge range are not counted.
std::vector<std::int64_t> skip_count_histogram(
    const std::map<std::int64_t, std::int64_t>& totals,
    std::span<const double> bin_edges);

}  // namespace memshard
