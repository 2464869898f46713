#include "sdist/filtering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "sdist/error.hpp"
#include "sdist/io.hpp"

namespace sdist {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_aligned(std::span<const ScoredItem> scores, const VectorSet& features) {
    if (scores.size() != features.size()) {
        throw Error(ErrorKind::ShapeMismatch,
                    fmt::format("{} scores but {} feature rows", scores.size(), features.size()));
    }
}

double subset_fid(const VectorSet& features, std::span<const std::size_t> kept, double ridge,
                  const ExecPolicy& exec) {
    if (kept.size() < 2) return kNaN;
    return fid(features.select(kept), features, ridge, exec);
}

}  // namespace

std::string_view to_string(HaltReason reason) {
    switch (reason) {
        case HaltReason::target_reached: return "target_reached";
        case HaltReason::size_floor: return "size_floor";
        case HaltReason::diversity_bound: return "diversity_bound";
    }
    return "target_reached";
}

std::vector<ScoredItem> reconstruction_scores(const VectorSet& items, const VectorSet& reconstructions,
                                              const PerceptualMetric& metric) {
    if (items.size() != reconstructions.size() || items.dim() != reconstructions.dim()) {
        throw Error(ErrorKind::ShapeMismatch,
                    fmt::format("items are {}x{} but reconstructions are {}x{}", items.size(), items.dim(),
                                reconstructions.size(), reconstructions.dim()));
    }
    std::vector<ScoredItem> scores(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        scores[i] = {std::to_string(i), metric.distance(items.row(i), reconstructions.row(i))};
    }
    return scores;
}

std::vector<std::size_t> filter_by_threshold(std::span<const ScoredItem> scores, double theta) {
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i].score < theta) kept.push_back(i);
    }
    return kept;
}

FilterReport select_threshold(std::span<const ScoredItem> scores, const VectorSet& item_features,
                              const VectorSet* recon_features, const ThresholdOptions& options) {
    if (!(options.theta_target > 0.0) || !(options.theta_step > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "theta_target and theta_step must be > 0");
    }
    if (options.min_size < 2) throw Error(ErrorKind::InvalidArgument, "min_size must be >= 2");
    if (scores.empty()) throw Error(ErrorKind::EmptySet, "no scored items");
    check_aligned(scores, item_features);
    double max_score = 0.0;
    for (const auto& s : scores) {
        if (!std::isfinite(s.score) || s.score < 0.0) {
            throw Error(ErrorKind::InvalidArgument, fmt::format("score of item '{}' is not a finite value >= 0", s.id));
        }
        max_score = std::max(max_score, s.score);
    }

    FilterReport report;
    report.theta_target = options.theta_target;
    if (recon_features) {
        if (recon_features->dim() != item_features.dim()) {
            throw Error(ErrorKind::ShapeMismatch, "reconstruction features and item features differ in dimension");
        }
        report.fid_bound = fid(*recon_features, item_features, options.ridge, options.exec);
    }

    // Grid theta_j = target + j * step, from the first grid point at or above
    // the largest score down to the target itself.
    const double span = (max_score - options.theta_target) / options.theta_step;
    const auto top = span > 0.0 ? static_cast<std::size_t>(std::ceil(span - 1e-9)) : std::size_t{0};

    bool have_feasible = false;
    for (std::size_t j = top + 1; j-- > 0;) {
        const double theta = j == 0 ? options.theta_target
                                    : options.theta_target + static_cast<double>(j) * options.theta_step;
        std::vector<std::size_t> kept = filter_by_threshold(scores, theta);
        const double fid_yx = subset_fid(item_features, kept, options.ridge, options.exec);
        report.sweep_trace.push_back({theta, kept.size(), fid_yx});

        const bool size_ok = kept.size() >= options.min_size;
        const bool diversity_ok = !report.fid_bound || (size_ok && fid_yx <= *report.fid_bound);
        if (!size_ok || !diversity_ok) {
            if (!have_feasible) {
                throw Error(ErrorKind::NoFeasibleTheta,
                            fmt::format("threshold {} keeps {} items (floor {}){}", format_real(theta), kept.size(),
                                        options.min_size, size_ok ? " and exceeds the diversity bound" : ""));
            }
            report.halted_by = size_ok ? HaltReason::diversity_bound : HaltReason::size_floor;
            return report;
        }
        have_feasible = true;
        report.theta_effective = theta;
        report.kept = std::move(kept);
        report.n_kept = report.kept.size();
        report.fid_yx = fid_yx;
    }
    report.halted_by = HaltReason::target_reached;
    return report;
}

std::vector<TraceRow> filtering_tradeoff_curve(std::span<const ScoredItem> scores, const VectorSet& item_features,
                                               std::span<const double> theta_grid, double ridge,
                                               const ExecPolicy& exec) {
    if (theta_grid.empty()) throw Error(ErrorKind::InvalidArgument, "empty theta grid");
    check_aligned(scores, item_features);
    std::vector<TraceRow> rows(theta_grid.size());
    const ExecPolicy inner{1};
    parallel_chunks(theta_grid.size(), exec, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto kept = filter_by_threshold(scores, theta_grid[i]);
            rows[i] = {theta_grid[i], kept.size(), subset_fid(item_features, kept, ridge, inner)};
        }
    });
    return rows;
}

std::string trace_csv(std::span<const TraceRow> rows) {
    std::string out = "theta,n_kept,fid_yx\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{}\n", format_real(r.theta), r.n_kept, format_real(r.fid_yx));
    }
    return out;
}

std::string summary_text(const FilterReport& report) {
    std::string out;
    out += fmt::format("theta_target={}\n", format_real(report.theta_target));
    out += fmt::format("theta_effective={}\n", format_real(report.theta_effective));
    out += fmt::format("halted_by={}\n", to_string(report.halted_by));
    out += fmt::format("n_kept={}\n", report.n_kept);
    out += fmt::format("fid_yx={}\n", format_real(report.fid_yx));
    out += fmt::format("fid_bound={}\n", report.fid_bound ? format_real(*report.fid_bound) : std::string("none"));
    return out;
}

}  // namespace sdist
