// Command-line front end for the self-distillation toolkit.
//
// Exit codes: 0 success, 2 input/format error, 3 shape/argument error,
// 4 infeasible computation.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "sdist/clustering.hpp"
#include "sdist/error.hpp"
#include "sdist/filtering.hpp"
#include "sdist/io.hpp"
#include "sdist/metrics.hpp"
#include "sdist/toyworld.hpp"
#include "sdist/truncation.hpp"

namespace fs = std::filesystem;
using namespace sdist;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitShape = 3;
constexpr int kExitInfeasible = 4;

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::EmptySet:
        case ErrorKind::MalformedFile:
        case ErrorKind::Io:
        case ErrorKind::BadInput:
            return kExitInput;
        case ErrorKind::NoFeasibleTheta:
        case ErrorKind::NotPSD:
        case ErrorKind::NoConvergence:
            return kExitInfeasible;
        default:
            return kExitShape;
    }
}

struct MetricArgs {
    std::string kind = "rms";
    std::string weights_path;

    PerceptualMetric build(std::size_t dim) const {
        if (kind == "rms") return PerceptualMetric::rms(dim);
        if (kind == "plain_l2") return PerceptualMetric::plain_l2();
        if (kind == "weighted_l2") {
            if (weights_path.empty()) throw Error(ErrorKind::MissingInput, "weighted_l2 needs --metric-weights");
            const VectorSet w = read_vector_file(weights_path);
            if (w.size() != 1) throw Error(ErrorKind::ShapeMismatch, "--metric-weights must hold exactly one row");
            return PerceptualMetric::weighted_l2(Vector(w.row(0).begin(), w.row(0).end()));
        }
        throw Error(ErrorKind::InvalidArgument, "unknown metric '" + kind + "'");
    }
};

void add_metric_options(CLI::App& cmd, MetricArgs& args) {
    cmd.add_option("--metric", args.kind, "Output-space metric: rms, plain_l2 or weighted_l2")
        ->capture_default_str();
    cmd.add_option("--metric-weights", args.weights_path, "1 x d vector file of weights for weighted_l2");
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
    std::vector<T> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
            std::size_t used = 0;
            if constexpr (std::is_same_v<T, double>) {
                out.push_back(std::stod(item, &used));
            } else {
                if (!item.empty() && item.front() == '-') throw std::invalid_argument("negative");
                out.push_back(static_cast<T>(std::stoull(item, &used)));
            }
            if (used != item.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw Error(ErrorKind::BadInput, fmt::format("bad {} entry '{}'", what, item));
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::string format_list(const std::vector<std::size_t>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + std::to_string(values[i]);
    return out;
}

VectorSet single_row(VectorView v) {
    VectorSet s;
    s.push_back(v);
    return s;
}

ToyWorld make_world(const std::string& preset, std::uint64_t world_seed) {
    ToyWorldConfig config = ToyWorldConfig::preset(preset);
    config.seed = world_seed;
    return ToyWorld(config);
}

// ---------------------------------------------------------------------------

struct FidArgs {
    std::string a, b;
    double ridge = kDefaultRidge;
};

int run_fid(const FidArgs& args, const ExecPolicy& exec) {
    const VectorSet a = read_vector_file(args.a);
    const VectorSet b = read_vector_file(args.b);
    std::cout << format_real(fid(a, b, args.ridge, exec)) << "\n";
    return kExitOk;
}

struct FilterArgs {
    std::string items, reconstructions, scores, features, recon_features;
    std::string out_dir = ".";
    bool no_bound = false;
    ThresholdOptions options;
    MetricArgs metric;
};

int run_filter(FilterArgs args, const ExecPolicy& exec) {
    if (args.reconstructions.empty() && args.scores.empty()) {
        throw Error(ErrorKind::MissingInput, "filter needs --reconstructions or --scores");
    }
    const VectorSet items = read_vector_file(args.items);
    if (items.empty()) throw Error(ErrorKind::EmptySet, args.items + " holds no items");

    std::optional<VectorSet> reconstructions;
    if (!args.reconstructions.empty()) reconstructions = read_vector_file(args.reconstructions);

    std::vector<ScoredItem> scores;
    if (!args.scores.empty()) {
        scores = read_scores_csv(args.scores);
    } else {
        scores = reconstruction_scores(items, *reconstructions, args.metric.build(items.dim()));
    }
    if (scores.size() != items.size()) {
        throw Error(ErrorKind::ShapeMismatch,
                    fmt::format("{} scores for {} items", scores.size(), items.size()));
    }

    const VectorSet features = args.features.empty() ? items : read_vector_file(args.features);
    std::optional<VectorSet> recon_features;
    if (!args.no_bound) {
        if (!args.recon_features.empty()) {
            recon_features = read_vector_file(args.recon_features);
        } else if (reconstructions && args.features.empty()) {
            recon_features = *reconstructions;
        }
    }

    args.options.exec = exec;
    const FilterReport report =
        select_threshold(scores, features, recon_features ? &*recon_features : nullptr, args.options);

    const fs::path dir(args.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
    write_text_file(dir / "kept_ids.txt", kept_ids_text(scores, report.kept));
    write_text_file(dir / "trace.csv", trace_csv(report.sweep_trace));
    write_text_file(dir / "summary.txt", summary_text(report));
    std::cout << "theta_effective=" << format_real(report.theta_effective)
              << " halted_by=" << to_string(report.halted_by) << "\n";
    return kExitOk;
}

struct ClusterArgs {
    std::string codes;
    std::string out = "clusters";
    std::size_t n_clusters = kDefaultClusters;
    std::size_t n_sample = kDefaultClusterSample;
    std::size_t restarts = kDefaultRestarts;
    std::size_t max_iter = kDefaultMaxIter;
    std::uint64_t seed = 0;
    std::string elbow;
};

int run_cluster(const ClusterArgs& args, const ExecPolicy& exec) {
    const VectorSet all = read_vector_file(args.codes);
    if (all.empty()) throw Error(ErrorKind::EmptySet, args.codes + " holds no codes");
    const VectorSet codes = sample_rows(all, args.n_sample, args.seed);

    std::size_t k = args.n_clusters;
    if (!args.elbow.empty()) {
        const auto candidates = parse_list<std::size_t>(args.elbow, "--elbow");
        const ElbowCurve curve = elbow_curve(codes, candidates, args.seed, args.restarts, args.max_iter, exec);
        k = curve.chosen;
        std::string inertias;
        for (std::size_t i = 0; i < curve.inertias.size(); ++i) {
            inertias += (i ? "," : "") + format_real(curve.inertias[i]);
        }
        write_text_file(args.out + ".elbow.txt",
                        key_value_text({{"candidates", format_list(curve.candidates)},
                                        {"inertias", inertias},
                                        {"chosen", std::to_string(k)}}));
        std::cout << "n_clusters=" << k << "\n";
    }
    if (k > codes.size()) {
        throw Error(ErrorKind::TooFewPoints, fmt::format("{} clusters requested for {} codes", k, codes.size()));
    }

    const ClusterModel model = kmeans_fit(codes, k, args.seed, args.restarts, args.max_iter, exec);
    write_vector_file(args.out + ".sdv", model.centers);
    write_vector_file(args.out + ".mean.sdv", single_row(compute_global_mean(codes)));
    write_text_file(args.out + ".meta", key_value_text({{"n_clusters", std::to_string(model.n_clusters)},
                                                        {"inertia", format_real(model.inertia)},
                                                        {"seed", std::to_string(model.seed)},
                                                        {"iterations_run", std::to_string(model.iterations_run)}}));
    return kExitOk;
}

struct TruncateArgs {
    std::string codes, out, assignments;
    std::string mode = "global_mean";
    double psi = 0.7;
    std::string centers, center_outputs, outputs, mean;
    std::optional<double> clamp_radius;
    MetricArgs metric;
};

int run_truncate(const TruncateArgs& args) {
    const VectorSet codes = read_vector_file(args.codes);

    TruncationPolicy policy;
    policy.mode = parse_truncation_mode(args.mode);
    policy.psi = args.psi;
    const auto need = [](const std::string& path, const char* flag) {
        if (path.empty()) throw Error(ErrorKind::MissingInput, fmt::format("mode needs {}", flag));
    };

    std::optional<VectorSet> outputs;
    switch (policy.mode) {
        case TruncationMode::none:
            break;
        case TruncationMode::global_mean:
        case TruncationMode::clamp: {
            need(args.mean, "--mean");
            const VectorSet mean = read_vector_file(args.mean);
            if (mean.size() != 1) throw Error(ErrorKind::ShapeMismatch, "--mean must hold exactly one row");
            policy.global_mean = Vector(mean.row(0).begin(), mean.row(0).end());
            if (policy.mode == TruncationMode::clamp) {
                policy.clamp_radius = args.clamp_radius
                                          ? *args.clamp_radius
                                          : distance_quantile(codes, *policy.global_mean, kDefaultClampQuantile);
            }
            break;
        }
        case TruncationMode::multimodal_perceptual:
        case TruncationMode::multimodal_latent: {
            need(args.centers, "--centers");
            ClusterModel model;
            model.centers = read_vector_file(args.centers);
            model.n_clusters = model.centers.size();
            policy.clusters = std::move(model);
            if (policy.mode == TruncationMode::multimodal_perceptual) {
                need(args.center_outputs, "--center-outputs");
                need(args.outputs, "--outputs");
                policy.center_outputs = read_vector_file(args.center_outputs);
                outputs = read_vector_file(args.outputs);
                if (outputs->size() != codes.size()) {
                    throw Error(ErrorKind::ShapeMismatch, fmt::format("{} outputs for {} codes", outputs->size(),
                                                                      codes.size()));
                }
                policy.metric = args.metric.build(policy.center_outputs->dim());
            }
            break;
        }
    }
    policy.validate();

    VectorSet result(codes.size(), codes.dim());
    std::string assignment_csv = "index,cluster\n";
    for (std::size_t i = 0; i < codes.size(); ++i) {
        std::optional<VectorView> g;
        if (outputs) g = outputs->row(i);
        const Truncated t = truncate(policy, codes.row(i), g);
        std::copy(t.code.begin(), t.code.end(), result.row(i).begin());
        if (t.cluster) assignment_csv += fmt::format("{},{}\n", i, *t.cluster);
    }
    write_vector_file(args.out, result);
    if (policy.clusters) {
        write_text_file(args.assignments.empty() ? args.out + ".assignments.csv" : args.assignments, assignment_csv);
    }
    return kExitOk;
}

struct SynthesizeArgs {
    std::string codes, out;
    std::string preset = "default";
    std::uint64_t world_seed = 0;
};

int run_synthesize(const SynthesizeArgs& args) {
    const ToyWorld world = make_world(args.preset, args.world_seed);
    write_vector_file(args.out, world.synthesize_all(read_vector_file(args.codes)));
    return kExitOk;
}

struct SweepArgs {
    std::string preset = "default";
    std::uint64_t world_seed = 0;
    std::uint64_t seed = 0;
    std::string psi_grid = "1.0,0.9,0.8,0.7,0.6,0.5";
    std::size_t n_samples = 5000;
    std::string modes = "global_mean,multimodal_perceptual";
    std::size_t n_clusters = kDefaultClusters;
    std::size_t n_sample = kDefaultClusterSample;
    std::size_t restarts = kDefaultRestarts;
    double ridge = kDefaultRidge;
    std::string out;
    MetricArgs metric;
};

int run_sweep(const SweepArgs& args, const ExecPolicy& exec) {
    const auto grid = parse_list<double>(args.psi_grid, "--psi-grid");
    for (double psi : grid) {
        if (!(psi >= 0.0 && psi <= 1.0)) throw Error(ErrorKind::BadInput, fmt::format("psi {} outside [0, 1]", psi));
    }
    std::vector<TruncationMode> modes;
    {
        std::size_t pos = 0;
        while (pos <= args.modes.size()) {
            const auto comma = args.modes.find(',', pos);
            modes.push_back(parse_truncation_mode(args.modes.substr(pos, comma == std::string::npos ? comma : comma - pos)));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }

    const ToyWorld world = make_world(args.preset, args.world_seed);
    PolicyResourceOptions opts;
    opts.n_clusters = args.n_clusters;
    opts.n_sample = args.n_sample;
    opts.restarts = args.restarts;
    opts.seed = args.seed;
    opts.exec = exec;
    const PolicyResources res = build_policy_resources(world, args.metric.build(world.output_dim()), opts);

    std::vector<TruncationPolicy> templates;
    for (auto m : modes) templates.push_back(res.policy(m, 1.0));
    const VectorSet reference = world.synthesize_all(world.sample_codes(args.n_samples, args.seed + 2));
    const auto cells =
        fid_truncation_sweep(world, templates, grid, args.n_samples, reference, args.seed + 1, args.ridge, exec);
    const std::string csv = sweep_csv(cells);
    if (args.out.empty()) {
        std::cout << csv;
    } else {
        write_text_file(args.out, csv);
    }
    return kExitOk;
}

struct SimulateArgs {
    std::string preset = "default";
    std::size_t n_inliers = 10000;
    std::size_t n_outliers = 1000;
    std::uint64_t seed = 0;
    std::uint64_t world_seed = 0;
    std::string out_dir = "fixture";
};

int run_simulate(const SimulateArgs& args) {
    const ToyWorld world = make_world(args.preset, args.world_seed);
    const ToyDataset ds = world.build_dataset(args.n_inliers, args.n_outliers, args.seed);
    const auto scores = reconstruction_scores(ds.items, ds.reconstructions, PerceptualMetric::rms(world.output_dim()));

    const fs::path dir(args.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());

    write_vector_file(dir / "items.sdv", ds.items);
    write_vector_file(dir / "reconstructions.sdv", ds.reconstructions);
    write_vector_file(dir / "codes.sdv", ds.encoded);
    write_text_file(dir / "scores.csv", scores_csv(scores));
    std::string labels = "id,is_outlier\n";
    for (std::size_t i = 0; i < ds.is_outlier.size(); ++i) labels += fmt::format("{},{}\n", i, ds.is_outlier[i] ? 1 : 0);
    write_text_file(dir / "labels.csv", labels);
    const auto& c = world.config();
    write_text_file(dir / "world.txt",
                    key_value_text({{"preset", args.preset},
                                    {"world_seed", std::to_string(args.world_seed)},
                                    {"seed", std::to_string(args.seed)},
                                    {"n_items", std::to_string(ds.items.size())},
                                    {"n_inliers", std::to_string(args.n_inliers)},
                                    {"n_outliers", std::to_string(args.n_outliers)},
                                    {"noise_dim", std::to_string(c.noise_dim)},
                                    {"latent_dim", std::to_string(c.latent_dim)},
                                    {"output_dim", std::to_string(c.output_dim)},
                                    {"n_modes", std::to_string(c.n_modes)},
                                    {"squash_scale", format_real(c.squash_scale)},
                                    {"score_metric", "rms"}}));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-distillation toolkit: self-filtering, FID monitoring and multi-modal truncation"};
    app.require_subcommand(1);
    unsigned threads = 1;
    app.add_option("--threads", threads, "Worker threads; 1 is the bit-reproducible sequential mode")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    FidArgs fid_args;
    auto* fid_cmd = app.add_subcommand("fid", "Frechet distance between two vector files");
    fid_cmd->add_option("a", fid_args.a)->required();
    fid_cmd->add_option("b", fid_args.b)->required();
    fid_cmd->add_option("--ridge", fid_args.ridge)->capture_default_str();

    FilterArgs filter_args;
    auto* filter_cmd = app.add_subcommand("filter", "Reconstruction-based self-filtering with threshold selection");
    filter_cmd->add_option("--items", filter_args.items, "Items vector file")->required();
    filter_cmd->add_option("--reconstructions", filter_args.reconstructions, "Reconstructions G(E(x))");
    filter_cmd->add_option("--scores", filter_args.scores, "Precomputed id,score CSV");
    filter_cmd->add_option("--features", filter_args.features, "Features for FID (default: items)");
    filter_cmd->add_option("--recon-features", filter_args.recon_features,
                           "Reconstruction features for the diversity bound (default: reconstructions)");
    filter_cmd->add_flag("--no-diversity-bound", filter_args.no_bound);
    filter_cmd->add_option("--theta-target", filter_args.options.theta_target)->capture_default_str();
    filter_cmd->add_option("--theta-step", filter_args.options.theta_step)->capture_default_str();
    filter_cmd->add_option("--min-size", filter_args.options.min_size)->capture_default_str();
    filter_cmd->add_option("--ridge", filter_args.options.ridge)->capture_default_str();
    filter_cmd->add_option("--out-dir", filter_args.out_dir)->capture_default_str();
    add_metric_options(*filter_cmd, filter_args.metric);

    ClusterArgs cluster_args;
    auto* cluster_cmd = app.add_subcommand("cluster", "KMeans over latent codes");
    cluster_cmd->add_option("codes", cluster_args.codes)->required();
    cluster_cmd->add_option("--n-clusters", cluster_args.n_clusters)->capture_default_str();
    cluster_cmd->add_option("--n-cluster-sample", cluster_args.n_sample)->capture_default_str();
    cluster_cmd->add_option("--seed", cluster_args.seed)->capture_default_str();
    cluster_cmd->add_option("--restarts", cluster_args.restarts)->capture_default_str();
    cluster_cmd->add_option("--max-iter", cluster_args.max_iter)->capture_default_str();
    cluster_cmd->add_option("--elbow", cluster_args.elbow, "Comma-separated ascending candidate counts");
    cluster_cmd->add_option("--out", cluster_args.out, "Output prefix")->capture_default_str();

    TruncateArgs truncate_args;
    auto* truncate_cmd = app.add_subcommand("truncate", "Apply a truncation policy to latent codes");
    truncate_cmd->add_option("codes", truncate_args.codes)->required();
    truncate_cmd->add_option("--out", truncate_args.out)->required();
    truncate_cmd->add_option("--mode", truncate_args.mode,
                             "none, global_mean, multimodal_perceptual, multimodal_latent or clamp")
        ->capture_default_str();
    truncate_cmd->add_option("--psi", truncate_args.psi)->capture_default_str();
    truncate_cmd->add_option("--centers", truncate_args.centers);
    truncate_cmd->add_option("--center-outputs", truncate_args.center_outputs);
    truncate_cmd->add_option("--outputs", truncate_args.outputs, "G(w) for every code (perceptual assignment)");
    truncate_cmd->add_option("--mean", truncate_args.mean);
    truncate_cmd->add_option("--clamp-radius", truncate_args.clamp_radius);
    truncate_cmd->add_option("--assignments", truncate_args.assignments, "index,cluster CSV path");
    add_metric_options(*truncate_cmd, truncate_args.metric);

    SynthesizeArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synthesize", "Map latent codes through the toy generator");
    synth_cmd->add_option("codes", synth_args.codes)->required();
    synth_cmd->add_option("--out", synth_args.out)->required();
    synth_cmd->add_option("--preset", synth_args.preset)->capture_default_str();
    synth_cmd->add_option("--world-seed", synth_args.world_seed)->capture_default_str();

    SweepArgs sweep_args;
    auto* sweep_cmd = app.add_subcommand("sweep", "FID versus truncation level on the toy world");
    sweep_cmd->add_option("--preset", sweep_args.preset)->capture_default_str();
    sweep_cmd->add_option("--world-seed", sweep_args.world_seed)->capture_default_str();
    sweep_cmd->add_option("--seed", sweep_args.seed)->capture_default_str();
    sweep_cmd->add_option("--psi-grid", sweep_args.psi_grid)->capture_default_str();
    sweep_cmd->add_option("--n-samples", sweep_args.n_samples)->capture_default_str();
    sweep_cmd->add_option("--modes", sweep_args.modes)->capture_default_str();
    sweep_cmd->add_option("--n-clusters", sweep_args.n_clusters)->capture_default_str();
    sweep_cmd->add_option("--n-cluster-sample", sweep_args.n_sample)->capture_default_str();
    sweep_cmd->add_option("--restarts", sweep_args.restarts)->capture_default_str();
    sweep_cmd->add_option("--ridge", sweep_args.ridge)->capture_default_str();
    sweep_cmd->add_option("--out", sweep_args.out, "CSV path (default: stdout)");
    add_metric_options(*sweep_cmd, sweep_args.metric);

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand("simulate", "Materialize a toy-world dataset fixture");
    sim_cmd->add_option("--preset", sim_args.preset)->capture_default_str();
    sim_cmd->add_option("--n-inliers", sim_args.n_inliers)->capture_default_str();
    sim_cmd->add_option("--n-outliers", sim_args.n_outliers)->capture_default_str();
    sim_cmd->add_option("--seed", sim_args.seed)->capture_default_str();
    sim_cmd->add_option("--world-seed", sim_args.world_seed)->capture_default_str();
    sim_cmd->add_option("--out-dir", sim_args.out_dir)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitShape;
    }

    const ExecPolicy exec{threads};
    try {
        if (*fid_cmd) return run_fid(fid_args, exec);
        if (*filter_cmd) return run_filter(filter_args, exec);
        if (*cluster_cmd) return run_cluster(cluster_args, exec);
        if (*truncate_cmd) return run_truncate(truncate_args);
        if (*synth_cmd) return run_synthesize(synth_args);
        if (*sweep_cmd) return run_sweep(sweep_args, exec);
        if (*sim_cmd) return run_simulate(sim_args);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitShape;
    }
    return kExitShape;
}
