#include "sdist/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "sdist/error.hpp"
#include "sdist/rng.hpp"

namespace sdist {

namespace {

struct LloydRun {
    VectorSet centers;
    double inertia = 0.0;
    std::size_t iterations = 0;
    std::vector<double> history;
};

/// Squared distance, abandoning the sum once it reaches `bound`. The terms
/// are non-negative, so a partial sum >= bound can never win a strict `<`
/// comparison and the nearest-center result is unchanged.
double bounded_squared_distance(VectorView a, VectorView b, double bound) {
    double acc = 0.0;
    std::size_t j = 0;
    const std::size_t d = a.size();
    for (; j + 4 <= d; j += 4) {
        const double d0 = a[j] - b[j];
        const double d1 = a[j + 1] - b[j + 1];
        const double d2 = a[j + 2] - b[j + 2];
        const double d3 = a[j + 3] - b[j + 3];
        acc += d0 * d0;
        acc += d1 * d1;
        acc += d2 * d2;
        acc += d3 * d3;
        if (acc >= bound) return acc;
    }
    for (; j < d; ++j) {
        const double diff = a[j] - b[j];
        acc += diff * diff;
    }
    return acc;
}

/// Fills labels and per-point squared distances; returns the inertia summed
/// in point order.
double assign_all(const VectorSet& codes, const VectorSet& centers, std::vector<std::size_t>& labels,
                  std::vector<double>& dist, const ExecPolicy& exec) {
    parallel_chunks(codes.size(), exec, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto point = codes.row(i);
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < centers.size(); ++k) {
                const double d = bounded_squared_distance(point, centers.row(k), best_d);
                if (d < best_d) {
                    best_d = d;
                    best = k;
                }
            }
            labels[i] = best;
            dist[i] = best_d;
        }
    });
    double total = 0.0;
    for (double d : dist) total += d;
    return total;
}

std::vector<std::size_t> distinct_indices(std::size_t n, std::size_t count, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.index(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    return idx;
}

LloydRun lloyd(const VectorSet& codes, std::size_t k, Rng& rng, std::size_t max_iter, const ExecPolicy& exec) {
    const std::size_t n = codes.size();
    const std::size_t d = codes.dim();
    const auto init = distinct_indices(n, k, rng);

    LloydRun run;
    run.centers = codes.select(init);
    std::vector<std::size_t> labels(n);
    std::vector<std::size_t> next_labels(n);
    std::vector<double> dist(n);
    run.inertia = assign_all(codes, run.centers, labels, dist, exec);
    run.history.push_back(run.inertia);

    std::vector<double> sums(k * d);
    std::vector<std::size_t> counts(k);
    for (std::size_t iter = 1; iter <= max_iter; ++iter) {
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto point = codes.row(i);
            double* acc = sums.data() + labels[i] * d;
            for (std::size_t j = 0; j < d; ++j) acc[j] += point[j];
            ++counts[labels[i]];
        }
        bool any_empty = false;
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                any_empty = true;
                continue;
            }
            auto center = run.centers.row(c);
            const double inv = 1.0 / static_cast<double>(counts[c]);
            for (std::size_t j = 0; j < d; ++j) center[j] = sums[c * d + j] * inv;
        }
        if (any_empty) {
            for (std::size_t i = 0; i < n; ++i) dist[i] = squared_distance(codes.row(i), run.centers.row(labels[i]));
            for (std::size_t c = 0; c < k; ++c) {
                if (counts[c] != 0) continue;
                const auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
                const auto src = codes.row(far);
                std::copy(src.begin(), src.end(), run.centers.row(c).begin());
                dist[far] = -1.0;
            }
        }

        const double inertia = assign_all(codes, run.centers, next_labels, dist, exec);
        // Lloyd steps never increase inertia; allow only accumulated rounding.
        if (inertia > run.inertia * (1.0 + 1e-12) + 1e-300) {
            throw std::logic_error("kmeans inertia increased from " + std::to_string(run.inertia) + " to " +
                                   std::to_string(inertia));
        }
        run.inertia = inertia;
        run.history.push_back(inertia);
        run.iterations = iter;
        const bool converged = next_labels == labels;
        labels.swap(next_labels);
        if (converged) break;
    }
    return run;
}

}  // namespace

ClusterModel kmeans_fit(const VectorSet& codes, std::size_t n_clusters, std::uint64_t seed, std::size_t restarts,
                        std::size_t max_iter, const ExecPolicy& exec) {
    if (n_clusters < 1 || codes.size() < n_clusters) {
        throw Error(ErrorKind::TooFewPoints, "kmeans with " + std::to_string(n_clusters) + " clusters on " +
                                                 std::to_string(codes.size()) + " points");
    }
    restarts = std::max<std::size_t>(restarts, 1);

    LloydRun best;
    bool have_best = false;
    for (std::size_t r = 0; r < restarts; ++r) {
        Rng rng(seed, r);
        LloydRun run = lloyd(codes, n_clusters, rng, max_iter, exec);
        if (!have_best || run.inertia < best.inertia) {
            best = std::move(run);
            have_best = true;
        }
    }

    ClusterModel model;
    model.centers = std::move(best.centers);
    model.n_clusters = n_clusters;
    model.inertia = best.inertia;
    model.seed = seed;
    model.iterations_run = best.iterations;
    model.inertia_history = std::move(best.history);
    return model;
}

std::size_t nearest_row(const VectorSet& centers, VectorView w) {
    if (centers.empty()) throw Error(ErrorKind::EmptySet, "no centers to assign to");
    if (w.size() != centers.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "code of dimension " + std::to_string(w.size()) +
                                                      " vs centers of dimension " + std::to_string(centers.dim()));
    }
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < centers.size(); ++k) {
        const double d = squared_distance(w, centers.row(k));
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

std::size_t assign_euclidean(const ClusterModel& model, VectorView w) { return nearest_row(model.centers, w); }

double compute_inertia(const VectorSet& codes, const VectorSet& centers) {
    double total = 0.0;
    for (std::size_t i = 0; i < codes.size(); ++i) {
        const auto k = nearest_row(centers, codes.row(i));
        total += squared_distance(codes.row(i), centers.row(k));
    }
    return total;
}

std::size_t elbow_knee(std::span<const std::size_t> candidates, std::span<const double> inertias,
                       std::vector<double>* distances) {
    if (candidates.size() < 3) {
        throw Error(ErrorKind::TooFewCandidates, "elbow needs at least 3 candidates, got " +
                                                     std::to_string(candidates.size()));
    }
    if (inertias.size() != candidates.size()) {
        throw Error(ErrorKind::ShapeMismatch, "one inertia per candidate required");
    }
    const std::size_t m = candidates.size();
    const double x_span = static_cast<double>(candidates.back()) - static_cast<double>(candidates.front());
    const double y_span = inertias.front() - inertias.back();

    std::vector<double> dist(m, 0.0);
    for (std::size_t i = 1; i + 1 < m; ++i) {
        const double x = (static_cast<double>(candidates[i]) - static_cast<double>(candidates.front())) / x_span;
        const double y = y_span != 0.0 ? (inertias[i] - inertias.back()) / y_span : 1.0 - x;
        dist[i] = (1.0 - x - y) / std::sqrt(2.0);
    }
    std::size_t best = 1;
    for (std::size_t i = 2; i + 1 < m; ++i) {
        if (dist[i] > dist[best] + 1e-12) best = i;
    }
    if (distances) *distances = std::move(dist);
    return candidates[best];
}

ElbowCurve elbow_curve(const VectorSet& codes, std::span<const std::size_t> candidates, std::uint64_t seed,
                       std::size_t restarts, std::size_t max_iter, const ExecPolicy& exec) {
    if (candidates.size() < 3) {
        throw Error(ErrorKind::TooFewCandidates, "elbow needs at least 3 candidates, got " +
                                                     std::to_string(candidates.size()));
    }
    if (!std::is_sorted(candidates.begin(), candidates.end()) ||
        std::adjacent_find(candidates.begin(), candidates.end()) != candidates.end()) {
        throw Error(ErrorKind::InvalidArgument, "elbow candidates must be strictly ascending");
    }
    ElbowCurve curve;
    curve.candidates.assign(candidates.begin(), candidates.end());
    for (std::size_t k : candidates) {
        curve.inertias.push_back(kmeans_fit(codes, k, seed, restarts, max_iter, exec).inertia);
    }
    curve.chosen = elbow_knee(curve.candidates, curve.inertias, &curve.knee_distances);
    return curve;
}

std::size_t elbow_select(const VectorSet& codes, std::span<const std::size_t> candidates, std::uint64_t seed,
                         std::size_t restarts, const ExecPolicy& exec) {
    return elbow_curve(codes, candidates, seed, restarts, kDefaultMaxIter, exec).chosen;
}

VectorSet sample_rows(const VectorSet& set, std::size_t count, std::uint64_t seed) {
    if (count >= set.size()) return set;
    Rng rng(seed, 0x5a17);
    auto idx = distinct_indices(set.size(), count, rng);
    return set.select(idx);
}

}  // namespace sdist
