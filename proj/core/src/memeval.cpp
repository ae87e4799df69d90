#include "memshard/memeval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "memshard/errors.hpp"
#include "memshard/parallel.hpp"
#include "memshard/rng.hpp"
#include "memshard/sampler.hpp"

namespace memshard {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

}  // namespace

double ell_ratio(std::span<const double> x, const Dataset& train, int n_neighbors,
                 std::int64_t* nearest_id) {
    const std::size_t n_train = train.size();
    if (n_neighbors < 1 ||
        n_train < static_cast<std::size_t>(n_neighbors) + 1) {
        throw std::invalid_argument("ell_ratio: need at least n+1 training samples");
    }

    // nearest training sample, ties to the smaller index
    std::size_t best = 0;
    double best_sq = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_train; ++i) {
        const double d = squared_distance(x, train.samples[i].pixels);
        if (d < best_sq) {
            best_sq = d;
            best = i;
        }
    }
    if (nearest_id != nullptr) {
        *nearest_id = train.samples[best].id;
    }

    // mean distance from the nearest sample to its own n nearest neighbors
    std::vector<double> dists;
    dists.reserve(n_train - 1);
    for (std::size_t i = 0; i < n_train; ++i) {
        if (i == best) {
            continue;
        }
        dists.push_back(
            std::sqrt(squared_distance(train.samples[best].pixels,
                                       train.samples[i].pixels)));
    }
    std::nth_element(dists.begin(), dists.begin() + (n_neighbors - 1), dists.end());
    double denom = 0.0;
    for (int i = 0; i < n_neighbors; ++i) {
        denom += dists[static_cast<std::size_t>(i)];
    }
    denom /= static_cast<double>(n_neighbors);

    const double numer = std::sqrt(best_sq);
    if (denom == 0.0) {
        return (numer == 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return numer / denom;
}

std::map<double, std::int64_t> mq_count(std::span<const double> ells,
                                        std::span<const double> thresholds) {
    for (std::size_t i = 1; i < thresholds.size(); ++i) {
        if (!(thresholds[i - 1] < thresholds[i])) {
            throw std::invalid_argument("mq_count: thresholds must be ascending");
        }
    }
    std::map<double, std::int64_t> counts;
    for (double delta : thresholds) {
        std::int64_t c = 0;
        for (double ell : ells) {
            if (ell <= delta) {
                ++c;
            }
        }
        counts[delta] = c;
    }
    return counts;
}

double wasserstein2_1d(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("wasserstein2_1d: empty input");
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    // integrate the squared gap between the two step quantile functions;
    // breakpoint comparisons are done in integers to keep segments exact
    std::size_t i = 0;
    std::size_t j = 0;
    double q = 0.0;
    double acc = 0.0;
    while (i < n && j < m) {
        const std::uint64_t lhs = static_cast<std::uint64_t>(i + 1) * m;
        const std::uint64_t rhs = static_cast<std::uint64_t>(j + 1) * n;
        const double q_next = (lhs <= rhs)
            ? static_cast<double>(i + 1) / static_cast<double>(n)
            : static_cast<double>(j + 1) / static_cast<double>(m);
        const double d = a[i] - b[j];
        acc += d * d * (q_next - q);
        q = q_next;
        if (lhs <= rhs) {
            ++i;
        }
        if (rhs <= lhs) {
            ++j;
        }
    }
    return std::sqrt(std::max(acc, 0.0));
}

double quality_proxy(const std::vector<Sample>& generated, const Dataset& real,
                     int n_projections, std::uint64_t seed) {
    if (generated.empty() || real.samples.empty()) {
        throw std::invalid_argument("quality_proxy: empty sample set");
    }
    const std::size_t dim = generated.front().pixels.size();
    if (dim != static_cast<std::size_t>(real.dim())) {
        throw std::invalid_argument("quality_proxy: dimension mismatch");
    }
    if (n_projections < 1) {
        throw std::invalid_argument("quality_proxy: need at least one projection");
    }

    Rng rng(derive_seed(seed, {streams::kProjection}));
    std::vector<double> direction(dim);
    std::vector<double> proj_gen(generated.size());
    std::vector<double> proj_real(real.samples.size());

    double total = 0.0;
    for (int p = 0; p < n_projections; ++p) {
        double norm = 0.0;
        do {
            rng.fill_normal(direction);
            norm = 0.0;
            for (double v : direction) {
                norm += v * v;
            }
            norm = std::sqrt(norm);
        } while (norm == 0.0);
        for (double& v : direction) {
            v /= norm;
        }

        for (std::size_t g = 0; g < generated.size(); ++g) {
            double dot = 0.0;
            const auto& pix = generated[g].pixels;
            for (std::size_t d = 0; d < dim; ++d) {
                dot += direction[d] * pix[d];
            }
            proj_gen[g] = dot;
        }
        for (std::size_t r = 0; r < real.samples.size(); ++r) {
            double dot = 0.0;
            const auto& pix = real.samples[r].pixels;
            for (std::size_t d = 0; d < dim; ++d) {
                dot += direction[d] * pix[d];
            }
            proj_real[r] = dot;
        }
        total += wasserstein2_1d(proj_gen, proj_real);
    }
    return total / static_cast<double>(n_projections);
}

MemorizationReport evaluate_model(const DenoiserParams& params,
                                  const NoiseSchedule& sched, const Dataset& train,
                                  int n_gen, std::uint64_t seed,
                                  std::span<const double> thresholds,
                                  int n_neighbors, int workers) {
    if (n_gen < 1) {
        throw std::invalid_argument("evaluate_model: n_gen must be >= 1");
    }
    MemorizationReport report;
    report.n_generated = n_gen;

    const std::vector<Sample> generated =
        sample_images(params, sched, n_gen, seed, workers);

    report.ell_values.resize(static_cast<std::size_t>(n_gen));
    report.nearest_ids.resize(static_cast<std::size_t>(n_gen));
    parallel_stripes(static_cast<std::size_t>(n_gen), workers,
                     [&](int, std::size_t i) {
                         report.ell_values[i] =
                             ell_ratio(generated[i].pixels, train, n_neighbors,
                                       &report.nearest_ids[i]);
                     });

    report.mq = mq_count(report.ell_values, thresholds);
    report.quality_proxy = quality_proxy(generated, train, kQualityProjections, seed);
    return report;
}

std::pair<std::vector<double>, std::vector<double>> loss_gap_curves(
    const DenoiserParams& params, const NoiseSchedule& sched,
    std::span<const Sample* const> set_a, std::span<const Sample* const> set_b,
    int reps, std::uint64_t seed, int workers) {
    if (reps < 1) {
        throw std::invalid_argument("loss_gap_curves: reps must be >= 1");
    }
    const int T = sched.timesteps;
    const std::size_t dim = static_cast<std::size_t>(params.arch.data_dim);
    std::vector<double> curve_a(static_cast<std::size_t>(T), 0.0);
    std::vector<double> curve_b(static_cast<std::size_t>(T), 0.0);

    const std::size_t positions = std::max(set_a.size(), set_b.size());
    const int w = std::max(1, workers);
    std::vector<DenoiserWorkspace> workspaces(static_cast<std::size_t>(w));

    parallel_stripes(static_cast<std::size_t>(T), w, [&](int worker, std::size_t ti) {
        DenoiserWorkspace& ws = workspaces[static_cast<std::size_t>(worker)];
        const int t = static_cast<int>(ti) + 1;
        std::vector<double> eps(dim);
        double sum_a = 0.0;
        double sum_b = 0.0;
        for (int rep = 0; rep < reps; ++rep) {
            for (std::size_t pos = 0; pos < positions; ++pos) {
                // one noise draw per (t, rep, position), shared by both sets
                Rng rng(derive_seed(seed, {streams::kLossGap,
                                           static_cast<std::uint64_t>(t),
                                           static_cast<std::uint64_t>(rep), pos}));
                rng.fill_normal(eps);
                if (pos < set_a.size()) {
                    sum_a += per_sample_loss(set_a[pos]->pixels, t, eps, params,
                                             sched, ws);
                }
                if (pos < set_b.size()) {
                    sum_b += per_sample_loss(set_b[pos]->pixels, t, eps, params,
                                             sched, ws);
                }
            }
        }
        if (!set_a.empty()) {
            curve_a[ti] = sum_a / static_cast<double>(set_a.size() *
                                                      static_cast<std::size_t>(reps));
        }
        if (!set_b.empty()) {
            curve_b[ti] = sum_b / static_cast<double>(set_b.size() *
                                                      static_cast<std::size_t>(reps));
        }
    });
    return {curve_a, curve_b};
}

double spectral_energy(std::span<const double> pixels, int image_side) {
    const std::size_t dim = static_cast<std::size_t>(image_side) *
                            static_cast<std::size_t>(image_side);
    if (pixels.size() != dim || image_side < 1) {
        throw std::invalid_argument("spectral_energy: pixel count mismatch");
    }
    double mean = 0.0;
    for (double p : pixels) {
        mean += p;
    }
    mean /= static_cast<double>(dim);
    std::vector<double> centered(pixels.size());
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        centered[i] = pixels[i] - mean;
    }

    const int side = image_side;
    double energy = 0.0;
    for (int u = 0; u < side; ++u) {
        for (int v = 0; v < side; ++v) {
            if (u == 0 && v == 0) {
                continue;  // DC is zero after mean subtraction anyway
            }
            double re = 0.0;
            double im = 0.0;
            for (int h = 0; h < side; ++h) {
                for (int w = 0; w < side; ++w) {
                    const double angle = -kTwoPi *
                        (static_cast<double>(u * h) + static_cast<double>(v * w)) /
                        static_cast<double>(side);
                    const double g = centered[static_cast<std::size_t>(h * side + w)];
                    re += g * std::cos(angle);
                    im += g * std::sin(angle);
                }
            }
            energy += re * re + im * im;
        }
    }
    return energy / static_cast<double>(dim);
}

std::vector<double> nn_distances(std::span<const std::int64_t> subset_ids,
                                 const Dataset& dataset, int workers) {
    if (dataset.size() < 2) {
        throw std::invalid_argument("nn_distances: dataset must have >= 2 samples");
    }
    std::unordered_map<std::int64_t, std::size_t> index_by_id;
    index_by_id.reserve(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        index_by_id.emplace(dataset.samples[i].id, i);
    }

    std::vector<double> out(subset_ids.size());
    parallel_stripes(subset_ids.size(), workers, [&](int, std::size_t q) {
        const auto it = index_by_id.find(subset_ids[q]);
        if (it == index_by_id.end()) {
            throw std::invalid_argument("nn_distances: id not in dataset: " +
                                        std::to_string(subset_ids[q]));
        }
        const std::size_t self = it->second;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            if (i == self) {
                continue;
            }
            best = std::min(best, squared_distance(dataset.samples[self].pixels,
                                                   dataset.samples[i].pixels));
        }
        out[q] = std::sqrt(best);
    });
    return out;
}

std::vector<std::int64_t> skip_count_histogram(
    const std::map<std::int64_t, std::int64_t>& totals,
    std::span<const double> bin_edges) {
    if (bin_edges.size() < 2) {
        throw std::invalid_argument("skip_count_histogram: need >= 2 bin edges");
    }
    for (std::size_t i = 1; i < bin_edges.size(); ++i) {
        if (!(bin_edges[i - 1] < bin_edges[i])) {
            throw std::invalid_argument("skip_count_histogram: edges must ascend");
        }
    }
    std::vector<std::int64_t> bins(bin_edges.size() - 1, 0);
    for (const auto& [id, count] : totals) {
        const double v = static_cast<double>(count);
        if (v < bin_edges.front() || v > bin_edges.back()) {
            continue;
        }
        // last bin is closed so the top edge is countable
        std::size_t bin = bins.size() - 1;
        for (std::size_t i = 1; i < bin_edges.size(); ++i) {
            if (v < bin_edges[i]) {
                bin = i - 1;
                break;
            }
        }
        bins[bin] += 1;
    }
    return bins;
}

}  // namespace memshard
