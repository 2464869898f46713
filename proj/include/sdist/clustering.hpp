#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sdist/parallel.hpp"
#include "sdist/vector_set.hpp"

namespace sdist {

inline constexpr std::size_t kDefaultClusters = 64;
inline constexpr std::size_t kDefaultClusterSample = 60000;
inline constexpr std::size_t kDefaultRestarts = 8;
inline constexpr std::size_t kDefaultMaxIter = 300;

/// Result of a KMeans fit. Immutable once returned.
struct ClusterModel {
    VectorSet centers;
    std::size_t n_clusters = 0;
    /// Sum over training codes of the squared distance to the nearest center.
    double inertia = 0.0;
    std::uint64_t seed = 0;
    std::size_t iterations_run = 0;
    /// Inertia after the initial assignment and after every Lloyd step of the
    /// winning restart.
    std::vector<double> inertia_history;
};

/// Lloyd's algorithm with random-row initialization, best of `restarts` by
/// inertia. Empty clusters are re-seeded with the point farthest from its
/// assigned center.
ClusterModel kmeans_fit(const VectorSet& codes, std::size_t n_clusters, std::uint64_t seed,
                        std::size_t restarts = kDefaultRestarts, std::size_t max_iter = kDefaultMaxIter,
                        const ExecPolicy& exec = {});

/// Nearest center by squared Euclidean distance; ties go to the lowest index.
std::size_t assign_euclidean(const ClusterModel& model, VectorView w);
std::size_t nearest_row(const VectorSet& centers, VectorView w);

/// Sum of squared distances from each code to its nearest center.
double compute_inertia(const VectorSet& codes, const VectorSet& centers);

struct ElbowCurve {
    std::vector<std::size_t> candidates;
    std::vector<double> inertias;
    /// Perpendicular distance below the chord of the normalized curve; zero at
    /// both endpoints.
    std::vector<double> knee_distances;
    std::size_t chosen = 0;
};

/// Picks the knee of a (candidate, inertia) curve. Both axes are min-max
/// normalized and the interior point farthest below the chord joining the
/// endpoints wins; a curve with no knee yields the first interior candidate.
std::size_t elbow_knee(std::span<const std::size_t> candidates, std::span<const double> inertias,
                       std::vector<double>* distances = nullptr);

ElbowCurve elbow_curve(const VectorSet& codes, std::span<const std::size_t> candidates, std::uint64_t seed,
                       std::size_t restarts = kDefaultRestarts, std::size_t max_iter = kDefaultMaxIter,
                       const ExecPolicy& exec = {});

std::size_t elbow_select(const VectorSet& codes, std::span<const std::size_t> candidates, std::uint64_t seed,
                         std::size_t restarts = kDefaultRestarts, const ExecPolicy& exec = {});

/// Seeded sample of `count` distinct rows (all rows, in order, if count >= n).
VectorSet sample_rows(const VectorSet& set, std::size_t count, std::uint64_t seed);

}  // namespace sdist
