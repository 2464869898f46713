#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdist/clustering.hpp"
#include "sdist/metrics.hpp"
#include "sdist/parallel.hpp"
#include "sdist/toyworld.hpp"
#include "sdist/vector_set.hpp"

namespace sdist {

enum class TruncationMode { none, global_mean, multimodal_perceptual, multimodal_latent, clamp };

std::string_view to_string(TruncationMode mode);
TruncationMode parse_truncation_mode(std::string_view name);

/// A truncation rule plus everything it needs. psi = 1 is the identity for
/// every mode, psi = 0 collapses onto the target (global mean or the assigned
/// cluster center).
///
/// In clamp mode psi controls the ball radius: clamp_radius * psi / (1 - psi),
/// so psi = 0.5 clamps at clamp_radius itself.
struct TruncationPolicy {
    TruncationMode mode = TruncationMode::none;
    double psi = 1.0;
    std::optional<Vector> global_mean;
    std::optional<ClusterModel> clusters;
    /// G(c_k) for every cluster center, row-aligned with clusters->centers.
    std::optional<VectorSet> center_outputs;
    std::optional<PerceptualMetric> metric;
    std::optional<double> clamp_radius;

    /// Throws if a field required by `mode` is missing or inconsistent.
    void validate() const;
    bool needs_outputs() const { return mode == TruncationMode::multimodal_perceptual; }
};

struct Truncated {
    Vector code;
    std::optional<std::size_t> cluster;
};

Vector compute_global_mean(const VectorSet& codes);

Vector truncate_global(VectorView w, VectorView mean, double psi);

/// Cluster whose precomputed output is nearest to g_of_w under the policy
/// metric; ties go to the lowest index.
std::size_t assign_perceptual(const TruncationPolicy& policy, VectorView w, VectorView g_of_w);

/// psi * w + (1 - psi) * c_i with i chosen per the policy's assignment rule.
Truncated truncate_multimodal(const TruncationPolicy& policy, VectorView w,
                              std::optional<VectorView> g_of_w = std::nullopt);

/// Projects w onto the ball of the given radius around the mean.
Vector truncate_clamp(VectorView w, VectorView mean, double radius);

/// Dispatches on policy.mode. g_of_w is required for perceptual assignment.
Truncated truncate(const TruncationPolicy& policy, VectorView w, std::optional<VectorView> g_of_w = std::nullopt);

/// The given quantile (in [0, 1]) of ||w - mean|| over codes.
double distance_quantile(const VectorSet& codes, VectorView mean, double quantile);

inline constexpr double kDefaultClampQuantile = 0.95;

/// Shared ingredients for building policies against one generator: the
/// global mean and cluster model fit on one seeded code sample, the outputs
/// of the cluster centers, and the default clamp radius.
struct PolicyResources {
    Vector global_mean;
    ClusterModel clusters;
    VectorSet center_outputs;
    PerceptualMetric metric = PerceptualMetric::plain_l2();
    double clamp_radius = 0.0;

    TruncationPolicy policy(TruncationMode mode, double psi) const;
};

struct PolicyResourceOptions {
    std::size_t n_clusters = kDefaultClusters;
    std::size_t n_sample = kDefaultClusterSample;
    std::size_t restarts = kDefaultRestarts;
    std::size_t max_iter = kDefaultMaxIter;
    std::uint64_t seed = 0;
    ExecPolicy exec;
};

PolicyResources build_policy_resources(const Generator& generator, const PerceptualMetric& metric,
                                       const PolicyResourceOptions& options);

struct SweepCell {
    double psi = 1.0;
    TruncationMode mode = TruncationMode::none;
    double fid = 0.0;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
};

inline const std::vector<double> kDefaultPsiGrid{1.0, 0.9, 0.8, 0.7, 0.6, 0.5};

/// FID between truncated syntheses and `reference` for every (psi, mode)
/// cell. All cells share one code sample drawn from `seed`, so differences
/// between cells come from the policy alone. Rows are ordered by psi grid,
/// then by template order.
std::vector<SweepCell> fid_truncation_sweep(const Generator& generator, std::span<const TruncationPolicy> templates,
                                            std::span<const double> psi_grid, std::size_t n_samples,
                                            const VectorSet& reference, std::uint64_t seed,
                                            double ridge = kDefaultRidge, const ExecPolicy& exec = {});

/// `psi,mode,fid,n_samples,seed` CSV with 9 significant digits.
std::string sweep_csv(std::span<const SweepCell> cells);

}  // namespace sdist
