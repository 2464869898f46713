#include "sdist/truncation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <fmt/format.h>

#include "sdist/error.hpp"
#include "sdist/io.hpp"

namespace sdist {

namespace {

void check_psi(double psi) {
    if (!(psi >= 0.0 && psi <= 1.0)) {
        throw Error(ErrorKind::PsiOutOfRange, fmt::format("psi {} outside [0, 1]", psi));
    }
}

void check_dims(VectorView a, VectorView b, const char* what) {
    if (a.size() != b.size()) {
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("{}: dimensions {} and {} differ", what, a.size(), b.size()));
    }
}

Vector interpolate(VectorView w, VectorView center, double psi) {
    if (psi == 1.0) return Vector(w.begin(), w.end());
    if (psi == 0.0) return Vector(center.begin(), center.end());
    Vector out(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) out[j] = psi * w[j] + (1.0 - psi) * center[j];
    return out;
}

}  // namespace

std::string_view to_string(TruncationMode mode) {
    switch (mode) {
        case TruncationMode::none: return "none";
        case TruncationMode::global_mean: return "global_mean";
        case TruncationMode::multimodal_perceptual: return "multimodal_perceptual";
        case TruncationMode::multimodal_latent: return "multimodal_latent";
        case TruncationMode::clamp: return "clamp";
    }
    return "none";
}

TruncationMode parse_truncation_mode(std::string_view name) {
    if (name == "none") return TruncationMode::none;
    if (name == "global_mean" || name == "global") return TruncationMode::global_mean;
    if (name == "multimodal_perceptual" || name == "multimodal") return TruncationMode::multimodal_perceptual;
    if (name == "multimodal_latent") return TruncationMode::multimodal_latent;
    if (name == "clamp") return TruncationMode::clamp;
    throw Error(ErrorKind::InvalidArgument, fmt::format("unknown truncation mode '{}'", name));
}

void TruncationPolicy::validate() const {
    check_psi(psi);
    switch (mode) {
        case TruncationMode::none:
            return;
        case TruncationMode::global_mean:
            if (!global_mean) throw Error(ErrorKind::MissingInput, "global_mean mode needs a global mean");
            return;
        case TruncationMode::clamp:
            if (!global_mean) throw Error(ErrorKind::MissingInput, "clamp mode needs a global mean");
            if (!clamp_radius) throw Error(ErrorKind::MissingInput, "clamp mode needs a clamp radius");
            if (!(*clamp_radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "clamp radius must be > 0");
            return;
        case TruncationMode::multimodal_latent:
        case TruncationMode::multimodal_perceptual:
            if (!clusters || clusters->centers.empty()) {
                throw Error(ErrorKind::MissingInput, "multimodal modes need cluster centers");
            }
            if (mode == TruncationMode::multimodal_perceptual) {
                if (!center_outputs) {
                    throw Error(ErrorKind::MissingCenterOutputs, "perceptual assignment needs center outputs");
                }
                if (center_outputs->size() != clusters->centers.size()) {
                    throw Error(ErrorKind::ShapeMismatch,
                                fmt::format("{} center outputs for {} centers", center_outputs->size(),
                                            clusters->centers.size()));
                }
                if (!metric) throw Error(ErrorKind::MissingInput, "perceptual assignment needs a metric");
            }
            return;
    }
}

Vector compute_global_mean(const VectorSet& codes) { return mean_vector(codes); }

Vector truncate_global(VectorView w, VectorView mean, double psi) {
    check_dims(w, mean, "truncate_global");
    check_psi(psi);
    return interpolate(w, mean, psi);
}

std::size_t assign_perceptual(const TruncationPolicy& policy, VectorView w, VectorView g_of_w) {
    if (!policy.center_outputs || policy.center_outputs->empty()) {
        throw Error(ErrorKind::MissingCenterOutputs, "perceptual assignment needs center outputs");
    }
    if (policy.clusters) check_dims(w, policy.clusters->centers.row(0), "assign_perceptual code");
    const PerceptualMetric metric = policy.metric.value_or(PerceptualMetric::plain_l2());
    const VectorSet& outputs = *policy.center_outputs;
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < outputs.size(); ++k) {
        const double d = metric.distance(g_of_w, outputs.row(k));
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

Truncated truncate_multimodal(const TruncationPolicy& policy, VectorView w, std::optional<VectorView> g_of_w) {
    if (policy.mode != TruncationMode::multimodal_latent && policy.mode != TruncationMode::multimodal_perceptual) {
        throw Error(ErrorKind::InvalidArgument, "truncate_multimodal needs a multimodal policy");
    }
    policy.validate();
    std::size_t k = 0;
    if (policy.mode == TruncationMode::multimodal_perceptual) {
        if (!g_of_w) throw Error(ErrorKind::MissingInput, "perceptual assignment needs G(w)");
        k = assign_perceptual(policy, w, *g_of_w);
    } else {
        k = assign_euclidean(*policy.clusters, w);
    }
    const auto center = policy.clusters->centers.row(k);
    check_dims(w, center, "truncate_multimodal");
    return {interpolate(w, center, policy.psi), k};
}

Vector truncate_clamp(VectorView w, VectorView mean, double radius) {
    check_dims(w, mean, "truncate_clamp");
    if (!(radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "clamp radius must be > 0");
    const double dist = std::sqrt(squared_distance(w, mean));
    if (dist <= radius) return Vector(w.begin(), w.end());
    const double scale = radius / dist;
    Vector out(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) out[j] = mean[j] + scale * (w[j] - mean[j]);
    return out;
}

Truncated truncate(const TruncationPolicy& policy, VectorView w, std::optional<VectorView> g_of_w) {
    policy.validate();
    switch (policy.mode) {
        case TruncationMode::none:
            return {Vector(w.begin(), w.end()), std::nullopt};
        case TruncationMode::global_mean:
            return {truncate_global(w, *policy.global_mean, policy.psi), std::nullopt};
        case TruncationMode::clamp: {
            const Vector& mean = *policy.global_mean;
            check_dims(w, mean, "truncate");
            if (policy.psi == 1.0) return {Vector(w.begin(), w.end()), std::nullopt};
            if (policy.psi == 0.0) return {mean, std::nullopt};
            const double radius = *policy.clamp_radius * policy.psi / (1.0 - policy.psi);
            return {truncate_clamp(w, mean, radius), std::nullopt};
        }
        case TruncationMode::multimodal_latent:
        case TruncationMode::multimodal_perceptual:
            return truncate_multimodal(policy, w, g_of_w);
    }
    return {Vector(w.begin(), w.end()), std::nullopt};
}

double distance_quantile(const VectorSet& codes, VectorView mean, double quantile) {
    if (codes.empty()) throw Error(ErrorKind::EmptySet, "quantile of an empty set");
    if (!(quantile >= 0.0 && quantile <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "quantile must lie in [0, 1]");
    }
    std::vector<double> dist(codes.size());
    for (std::size_t i = 0; i < codes.size(); ++i) {
        check_dims(codes.row(i), mean, "distance_quantile");
        dist[i] = std::sqrt(squared_distance(codes.row(i), mean));
    }
    std::sort(dist.begin(), dist.end());
    // Linear interpolation between order statistics.
    const double pos = quantile * static_cast<double>(dist.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, dist.size() - 1);
    return dist[lo] + (pos - static_cast<double>(lo)) * (dist[hi] - dist[lo]);
}

TruncationPolicy PolicyResources::policy(TruncationMode mode, double psi) const {
    TruncationPolicy p;
    p.mode = mode;
    p.psi = psi;
    switch (mode) {
        case TruncationMode::none:
            break;
        case TruncationMode::global_mean:
            p.global_mean = global_mean;
            break;
        case TruncationMode::clamp:
            p.global_mean = global_mean;
            p.clamp_radius = clamp_radius;
            break;
        case TruncationMode::multimodal_perceptual:
            p.center_outputs = center_outputs;
            p.metric = metric;
            [[fallthrough]];
        case TruncationMode::multimodal_latent:
            p.clusters = clusters;
            break;
    }
    p.validate();
    return p;
}

PolicyResources build_policy_resources(const Generator& generator, const PerceptualMetric& metric,
                                       const PolicyResourceOptions& options) {
    const VectorSet sample = generator.sample_codes(options.n_sample, options.seed);
    PolicyResources res;
    res.global_mean = compute_global_mean(sample);
    res.clusters = kmeans_fit(sample, options.n_clusters, options.seed, options.restarts, options.max_iter,
                              options.exec);
    res.center_outputs = generator.synthesize_all(res.clusters.centers);
    res.metric = metric;
    res.clamp_radius = distance_quantile(sample, res.global_mean, kDefaultClampQuantile);
    return res;
}

std::vector<SweepCell> fid_truncation_sweep(const Generator& generator, std::span<const TruncationPolicy> templates,
                                            std::span<const double> psi_grid, std::size_t n_samples,
                                            const VectorSet& reference, std::uint64_t seed, double ridge,
                                            const ExecPolicy& exec) {
    if (n_samples < 2) throw Error(ErrorKind::TooFewSamples, "sweep needs n_samples >= 2");
    if (psi_grid.empty()) throw Error(ErrorKind::InvalidArgument, "empty psi grid");
    for (double psi : psi_grid) check_psi(psi);
    for (const auto& t : templates) t.validate();

    const VectorSet codes = generator.sample_codes(n_samples, seed);
    const bool need_outputs = std::any_of(templates.begin(), templates.end(),
                                          [](const TruncationPolicy& t) { return t.needs_outputs(); });
    const VectorSet outputs = need_outputs ? generator.synthesize_all(codes) : VectorSet();

    const std::size_t n_modes = templates.size();
    std::vector<SweepCell> cells(psi_grid.size() * n_modes);
    // Cells are independent; each writes only its own slot.
    const ExecPolicy inner{1};
    parallel_chunks(cells.size(), exec, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t cell = begin; cell < end; ++cell) {
            TruncationPolicy policy = templates[cell % n_modes];
            policy.psi = psi_grid[cell / n_modes];
            VectorSet truncated(n_samples, generator.latent_dim());
            for (std::size_t i = 0; i < n_samples; ++i) {
                std::optional<VectorView> g;
                if (policy.needs_outputs()) g = outputs.row(i);
                const Truncated t = truncate(policy, codes.row(i), g);
                std::copy(t.code.begin(), t.code.end(), truncated.row(i).begin());
            }
            const VectorSet synthesized = generator.synthesize_all(truncated);
            cells[cell] = SweepCell{policy.psi, policy.mode, fid(synthesized, reference, ridge, inner), n_samples, seed};
        }
    });
    return cells;
}

std::string sweep_csv(std::span<const SweepCell> cells) {
    std::string out = "psi,mode,fid,n_samples,seed\n";
    for (const auto& c : cells) {
        out += fmt::format("{},{},{},{},{}\n", format_real(c.psi), to_string(c.mode), format_real(c.fid), c.n_samples,
                           c.seed);
    }
    return out;
}

}  // namespace sdist
