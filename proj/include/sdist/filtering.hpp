#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdist/metrics.hpp"
#include "sdist/parallel.hpp"
#include "sdist/vector_set.hpp"

namespace sdist {

inline constexpr double kDefaultThetaTarget = 0.36;
inline constexpr double kDefaultThetaStep = 0.01;
inline constexpr std::size_t kDefaultMinSize = 70000;

/// Reconstruction distance of one dataset item.
struct ScoredItem {
    std::string id;
    double score = 0.0;
};

enum class HaltReason { target_reached, size_floor, diversity_bound };

std::string_view to_string(HaltReason reason);

struct TraceRow {
    double theta = 0.0;
    std::size_t n_kept = 0;
    /// FID(Y, X); NaN when fewer than two items survive.
    double fid_yx = 0.0;
};

struct FilterReport {
    double theta_target = kDefaultThetaTarget;
    double theta_effective = kDefaultThetaTarget;
    HaltReason halted_by = HaltReason::target_reached;
    /// Positions (into the scores list) of kept items, ascending.
    std::vector<std::size_t> kept;
    std::size_t n_kept = 0;
    double fid_yx = 0.0;
    std::optional<double> fid_bound;
    /// Every evaluated threshold, highest first. When the sweep halts early
    /// the last row is the first rejected threshold.
    std::vector<TraceRow> sweep_trace;
};

struct ThresholdOptions {
    double theta_target = kDefaultThetaTarget;
    double theta_step = kDefaultThetaStep;
    std::size_t min_size = kDefaultMinSize;
    double ridge = kDefaultRidge;
    ExecPolicy exec;
};

/// score_i = metric(items_i, reconstructions_i); ids are row indices.
std::vector<ScoredItem> reconstruction_scores(const VectorSet& items, const VectorSet& reconstructions,
                                              const PerceptualMetric& metric);

/// Positions of items with score < theta (strict), in original order.
std::vector<std::size_t> filter_by_threshold(std::span<const ScoredItem> scores, double theta);

/// Lowers the threshold from just above the largest score towards
/// theta_target in theta_step decrements, stopping at the last threshold whose
/// kept set keeps at least min_size items and, when recon_features are given,
/// has FID(Y, X) <= FID(recon_features, item_features).
FilterReport select_threshold(std::span<const ScoredItem> scores, const VectorSet& item_features,
                              const VectorSet* recon_features, const ThresholdOptions& options = {});

/// (theta, n_kept, FID(Y, X)) for every theta in the grid, in grid order.
std::vector<TraceRow> filtering_tradeoff_curve(std::span<const ScoredItem> scores, const VectorSet& item_features,
                                               std::span<const double> theta_grid, double ridge = kDefaultRidge,
                                               const ExecPolicy& exec = {});

std::string trace_csv(std::span<const TraceRow> rows);
/// `key=value` lines: theta_target, theta_effective, halted_by, n_kept,
/// fid_yx, fid_bound.
std::string summary_text(const FilterReport& report);

}  // namespace sdist
