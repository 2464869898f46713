// Acceptance suite: one PASS/FAIL line per criterion, with its runtime and
// budget. Exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <thread>

#include <fmt/core.h>

#include "cli_harness.hpp"
#include "oracles.hpp"
#include "sdist/clustering.hpp"
#include "sdist/filtering.hpp"
#include "sdist/io.hpp"
#include "sdist/metrics.hpp"
#include "sdist/toyworld.hpp"
#include "sdist/truncation.hpp"

using namespace sdist;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

ExecPolicy all_cores() { return ExecPolicy{std::max(1u, std::thread::hardware_concurrency())}; }

Outcome fid_oracle() {
    Outcome o;
    const Vector var_a{1.0}, var_b{4.0};
    const double one_d = frechet_distance({Vector{0.0}, Matrix::diagonal(var_a)}, {Vector{1.0}, Matrix::diagonal(var_b)});
    o.require(std::abs(one_d - 2.0) <= 1e-8, fmt::format("1-D value {}", one_d));

    Rng rng(1);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t d = 1 + rng.index(16);
        Vector mu1(d), mu2(d), v1(d), v2(d);
        for (std::size_t i = 0; i < d; ++i) {
            mu1[i] = rng.normal();
            mu2[i] = rng.normal();
            v1[i] = rng.uniform(0.1, 5.0);
            v2[i] = rng.uniform(0.1, 5.0);
        }
        // Rotate both covariances by the same orthogonal matrix: they still
        // commute and the closed form is unchanged.
        const Matrix q = sym_eig(oracle::random_psd(d, d, rng)).vectors;
        const Matrix s1 = q * Matrix::diagonal(v1) * q.transpose();
        const Matrix s2 = q * Matrix::diagonal(v2) * q.transpose();
        const double got = frechet_distance({mu1, s1}, {mu2, s2});
        worst = std::max(worst, std::abs(got - oracle::frechet_diagonal(mu1, v1, mu2, v2)));
    }
    o.require(worst <= 1e-6, fmt::format("commuting case error {:.3g}", worst));
    if (o.ok) o.detail = fmt::format("1-D={:.12g}, commuting max err {:.2g}", one_d, worst);
    return o;
}

Outcome fid_self() {
    Outcome o;
    Rng rng(2);
    double worst_self = 0.0, worst_sym = 0.0;
    for (int t = 0; t < 3; ++t) {
        VectorSet x(1000, 32), y(1000, 32);
        for (std::size_t i = 0; i < 1000; ++i) {
            for (double& v : x.row(i)) v = rng.normal() * (1.0 + t);
            for (double& v : y.row(i)) v = rng.normal() + 0.3;
        }
        worst_self = std::max(worst_self, std::abs(fid(x, x)));
        worst_sym = std::max(worst_sym, std::abs(fid(x, y) - fid(y, x)));
    }
    o.require(worst_self <= 1e-6, fmt::format("fid(X,X) = {:.3g}", worst_self));
    o.require(worst_sym < 1e-8, fmt::format("asymmetry {:.3g}", worst_sym));
    if (o.ok) o.detail = fmt::format("max fid(X,X) {:.2g}, max asymmetry {:.2g}", worst_self, worst_sym);
    return o;
}

Outcome sqrtm_round_trip() {
    Outcome o;
    Rng rng(3);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t d = 1 + (t * 127) / 99;
        const std::size_t rank = t % 3 == 0 ? std::max<std::size_t>(1, d / 2) : d;
        const Matrix m = oracle::random_psd(d, rank, rng);
        const Matrix r = sqrtm_psd(m);
        worst = std::max(worst, oracle::relative_frobenius(r * r, m));
    }
    o.require(worst < 1e-6, fmt::format("relative error {:.3g}", worst));
    if (o.ok) o.detail = fmt::format("max relative error {:.2g}", worst);
    return o;
}

Outcome kmeans_recovery() {
    Outcome o;
    const auto truth = oracle::square_corners(20.0);
    const VectorSet codes = oracle::blobs(truth, 1000, 0.5, 4);
    // kmeans_fit raises std::logic_error if inertia ever rises between Lloyd
    // iterations; the stored history is checked again here.
    const ClusterModel m = kmeans_fit(codes, 4, 0);
    double worst = 0.0;
    for (const auto& t : truth) {
        double best = 1e300;
        for (std::size_t k = 0; k < 4; ++k) best = std::min(best, std::sqrt(squared_distance(m.centers.row(k), t)));
        worst = std::max(worst, best);
    }
    o.require(worst < 0.1, fmt::format("center error {:.3g}", worst));
    o.require(std::is_sorted(m.inertia_history.rbegin(), m.inertia_history.rend()), "inertia increased");
    if (o.ok) o.detail = fmt::format("max center error {:.3g}, {} iterations", worst, m.iterations_run);
    return o;
}

Outcome elbow() {
    Outcome o;
    const VectorSet codes = oracle::blobs(oracle::cube_corners(20.0), 300, 0.5, 5);
    const std::vector<std::size_t> candidates{2, 4, 8, 16, 32};
    const std::size_t chosen = elbow_select(codes, candidates, 0, kDefaultRestarts, all_cores());
    o.require(chosen == 8, fmt::format("chose {}", chosen));
    if (o.ok) o.detail = "chose 8";
    return o;
}

Outcome truncation_identities() {
    Outcome o;
    Rng rng(6);
    double worst = 0.0;
    const TruncationMode modes[] = {TruncationMode::global_mean, TruncationMode::multimodal_latent,
                                    TruncationMode::multimodal_perceptual, TruncationMode::clamp};
    for (int t = 0; t < 1000; ++t) {
        const std::size_t d = 1 + rng.index(24);
        const std::size_t k = 1 + rng.index(8);
        Vector mean(d), w(d);
        for (double& x : mean) x = rng.normal();
        for (double& x : w) x = 3.0 * rng.normal();
        ClusterModel clusters;
        for (std::size_t c = 0; c < k; ++c) {
            Vector center(d);
            for (double& x : center) x = 3.0 * rng.normal();
            clusters.centers.push_back(center);
        }
        clusters.n_clusters = k;
        const TruncationMode mode = modes[t % 4];
        TruncationPolicy p;
        p.mode = mode;
        p.global_mean = mean;
        p.clusters = clusters;
        p.center_outputs = clusters.centers;
        p.metric = PerceptualMetric::plain_l2();
        p.clamp_radius = 2.0;
        const VectorView g = w;

        p.psi = 1.0;
        o.require(truncate(p, w, g).code == w, fmt::format("psi=1 changed the code ({})", to_string(mode)));

        p.psi = 0.0;
        const Truncated zero = truncate(p, w, g);
        Vector center = mean;
        if (zero.cluster) {
            const auto c = clusters.centers.row(*zero.cluster);
            center.assign(c.begin(), c.end());
        }
        o.require(zero.code == center, fmt::format("psi=0 missed the center ({})", to_string(mode)));

        if (mode == TruncationMode::clamp) continue;
        p.psi = rng.uniform();
        const Truncated mid = truncate(p, w, g);
        const double lhs = std::sqrt(squared_distance(mid.code, center));
        const double rhs = p.psi * std::sqrt(squared_distance(w, center));
        worst = std::max(worst, std::abs(lhs - rhs));
        // Collinear: w_t - c is a non-negative multiple of w - c.
        double dot = 0.0;
        for (std::size_t i = 0; i < d; ++i) dot += (mid.code[i] - center[i]) * (w[i] - center[i]);
        o.require(std::abs(dot - lhs * std::sqrt(squared_distance(w, center))) <= 1e-9 * (1.0 + std::abs(dot)),
                  "not collinear");
    }
    o.require(worst <= 1e-9, fmt::format("distance ratio error {:.3g}", worst));
    if (o.ok) o.detail = fmt::format("1000 cases, max collinearity error {:.2g}", worst);
    return o;
}

Outcome sweep_shape() {
    Outcome o;
    const ToyWorld world;
    const ExecPolicy exec = all_cores();
    PolicyResourceOptions opts;
    opts.exec = exec;
    const PolicyResources res = build_policy_resources(world, PerceptualMetric::rms(world.output_dim()), opts);
    const std::vector<TruncationPolicy> templates{res.policy(TruncationMode::global_mean, 1.0),
                                                  res.policy(TruncationMode::multimodal_perceptual, 1.0),
                                                  res.policy(TruncationMode::multimodal_latent, 1.0)};
    const std::size_t n = 5000;
    const VectorSet reference = world.synthesize_all(world.sample_codes(n, 2));
    const auto cells = fid_truncation_sweep(world, templates, kDefaultPsiGrid, n, reference, 1, kDefaultRidge, exec);

    const std::size_t m = templates.size();
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 1; i < kDefaultPsiGrid.size(); ++i) {
            const SweepCell& prev = cells[(i - 1) * m + j];
            const SweepCell& cur = cells[i * m + j];
            o.require(cur.fid >= 0.99 * prev.fid,
                      fmt::format("{} fid fell from {:.4g} to {:.4g} at psi {}", to_string(cur.mode), prev.fid, cur.fid,
                                  cur.psi));
        }
    }
    for (std::size_t i = 0; i < kDefaultPsiGrid.size(); ++i) {
        if (kDefaultPsiGrid[i] > 0.7) continue;
        const double global = cells[i * m].fid;
        for (std::size_t j = 1; j < m; ++j) {
            o.require(cells[i * m + j].fid <= global,
                      fmt::format("{} fid {:.4g} above global {:.4g} at psi {}", to_string(cells[i * m + j].mode),
                                  cells[i * m + j].fid, global, kDefaultPsiGrid[i]));
        }
    }
    if (o.ok) {
        const std::size_t last = (kDefaultPsiGrid.size() - 1) * m;
        o.detail = fmt::format("psi 0.5: global {:.4g}, multimodal {:.4g}", cells[last].fid, cells[last + 1].fid);
    }
    return o;
}

Outcome filtering_efficacy() {
    Outcome o;
    const ToyWorld world;
    const ToyDataset ds = world.build_dataset(10000, 1000, 1);
    const auto scores = reconstruction_scores(ds.items, ds.reconstructions, PerceptualMetric::rms(world.output_dim()));
    ThresholdOptions opts;
    opts.min_size = 1000;
    opts.exec = all_cores();
    const FilterReport r = select_threshold(scores, ds.items, nullptr, opts);
    std::size_t kept_out = 0, kept_in = 0;
    for (std::size_t i : r.kept) (ds.is_outlier[i] ? kept_out : kept_in)++;
    const double exclusion = 1.0 - kept_out / 1000.0;
    const double loss = 1.0 - kept_in / 10000.0;
    o.require(r.theta_effective == kDefaultThetaTarget, fmt::format("halted at {}", r.theta_effective));
    o.require(exclusion >= 0.99, fmt::format("outlier exclusion {:.4f}", exclusion));
    o.require(loss <= 0.01, fmt::format("inlier loss {:.4f}", loss));
    if (o.ok) o.detail = fmt::format("outlier exclusion {:.4f}, inlier loss {:.4f}", exclusion, loss);
    return o;
}

std::vector<ScoredItem> to_scores(const std::vector<double>& values) {
    std::vector<ScoredItem> out;
    for (std::size_t i = 0; i < values.size(); ++i) out.push_back({std::to_string(i), values[i]});
    return out;
}

Outcome constraint_semantics() {
    Outcome o;
    Rng rng(9);

    // (a) 50 items at 0.2, 30 at 0.37, 20 at 0.5 with a floor of 80.
    std::vector<double> values;
    values.insert(values.end(), 50, 0.2);
    values.insert(values.end(), 30, 0.37);
    values.insert(values.end(), 20, 0.5);
    VectorSet features(100, 2);
    for (std::size_t i = 0; i < 100; ++i) {
        for (double& x : features.row(i)) x = rng.normal();
    }
    ThresholdOptions floor_opts;
    floor_opts.min_size = 80;
    const FilterReport a = select_threshold(to_scores(values), features, nullptr, floor_opts);
    o.require(a.halted_by == HaltReason::size_floor, fmt::format("(a) halted_by {}", to_string(a.halted_by)));
    o.require(a.theta_effective > a.theta_target, "(a) theta not above target");

    // (b) Scores rise with the first feature, so filtering skews the kept set;
    // reconstructions are a slight contraction of the items.
    VectorSet items(400, 2);
    for (std::size_t i = 0; i < 400; ++i) {
        for (double& x : items.row(i)) x = rng.normal();
    }
    std::vector<std::size_t> order(400);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) { return items(p, 0) < items(q, 0); });
    std::vector<double> ranked(400);
    for (std::size_t r = 0; r < 400; ++r) ranked[order[r]] = 0.30 + 0.2 * r / 400.0;
    VectorSet recon = items;
    for (std::size_t i = 0; i < 400; ++i) {
        for (double& x : recon.row(i)) x *= 0.98;
    }
    ThresholdOptions bound_opts;
    bound_opts.min_size = 10;
    const FilterReport b = select_threshold(to_scores(ranked), items, &recon, bound_opts);
    o.require(b.halted_by == HaltReason::diversity_bound, fmt::format("(b) halted_by {}", to_string(b.halted_by)));
    o.require(b.theta_effective > b.theta_target, "(b) theta not above target");
    if (o.ok) {
        o.detail = fmt::format("(a) size_floor at {}, (b) diversity_bound at {}", format_real(a.theta_effective),
                               format_real(b.theta_effective));
    }
    return o;
}

Outcome cli_determinism() {
    Outcome o;
    cli::TempDir dir("sdist_accept");
    const auto q = [&](const std::string& name) { return "\"" + (dir / name) + "\""; };

    struct Step {
        std::string args;
        std::vector<std::string> outputs;
    };
    // Each command writes into a run-specific name; {} is replaced by the run tag.
    const std::vector<Step> steps{
        {"simulate --n-inliers 3000 --n-outliers 300 --seed 3 --out-dir " + q("sim_{}"),
         {"sim_{}/items.sdv", "sim_{}/reconstructions.sdv", "sim_{}/codes.sdv", "sim_{}/scores.csv",
          "sim_{}/labels.csv", "sim_{}/world.txt"}},
        {"fid " + q("sim_0/items.sdv") + " " + q("sim_0/reconstructions.sdv"), {}},
        {"filter --items " + q("sim_0/items.sdv") + " --reconstructions " + q("sim_0/reconstructions.sdv") +
             " --min-size 500 --out-dir " + q("filter_{}"),
         {"filter_{}/kept_ids.txt", "filter_{}/trace.csv", "filter_{}/summary.txt"}},
        {"cluster " + q("sim_0/codes.sdv") + " --n-clusters 8 --restarts 3 --seed 1 --out " + q("cl_{}"),
         {"cl_{}.sdv", "cl_{}.mean.sdv", "cl_{}.meta"}},
        {"cluster " + q("sim_0/codes.sdv") + " --elbow 2,4,8,16 --restarts 2 --out " + q("el_{}"),
         {"el_{}.sdv", "el_{}.mean.sdv", "el_{}.meta", "el_{}.elbow.txt"}},
        {"synthesize " + q("sim_0/codes.sdv") + " --out " + q("g_{}.sdv"), {"g_{}.sdv"}},
        {"synthesize " + q("cl_0.sdv") + " --out " + q("cg_{}.sdv"), {"cg_{}.sdv"}},
        {"truncate " + q("sim_0/codes.sdv") + " --mode global_mean --psi 0.6 --mean " + q("cl_0.mean.sdv") +
             " --out " + q("tg_{}.sdv"),
         {"tg_{}.sdv"}},
        {"truncate " + q("sim_0/codes.sdv") + " --mode clamp --psi 0.6 --mean " + q("cl_0.mean.sdv") + " --out " +
             q("tc_{}.sdv"),
         {"tc_{}.sdv"}},
        {"truncate " + q("sim_0/codes.sdv") + " --mode multimodal_perceptual --psi 0.6 --centers " + q("cl_0.sdv") +
             " --center-outputs " + q("cg_0.sdv") + " --outputs " + q("g_0.sdv") + " --out " + q("tm_{}.sdv"),
         {"tm_{}.sdv", "tm_{}.sdv.assignments.csv"}},
        {"sweep --n-samples 2000 --n-clusters 16 --n-cluster-sample 10000 --restarts 2 --seed 5 --out " +
             q("sweep_{}.csv"),
         {"sweep_{}.csv"}},
    };

    const auto tagged = [](std::string s, int run) {
        for (std::size_t pos; (pos = s.find("{}")) != std::string::npos;) s.replace(pos, 2, std::to_string(run));
        return s;
    };
    std::size_t files = 0;
    for (const Step& step : steps) {
        cli::Result results[2];
        for (int run = 0; run < 2; ++run) {
            results[run] = cli::run("--threads 1 " + tagged(step.args, run), dir.path());
            o.require(results[run].code == 0,
                      fmt::format("'{}' exited {}: {}", tagged(step.args, run), results[run].code, results[run].err));
        }
        o.require(results[0].out == results[1].out, "stdout differs for '" + step.args + "'");
        for (const auto& f : step.outputs) {
            const std::string first = cli::slurp(dir / tagged(f, 0));
            o.require(!first.empty(), "missing output " + tagged(f, 0));
            o.require(first == cli::slurp(dir / tagged(f, 1)), "output differs: " + f);
            ++files;
        }
    }
    if (o.ok) o.detail = fmt::format("{} commands, {} output files byte-identical", steps.size(), files);
    return o;
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const Criterion criteria[] = {
        {1, "FID analytic oracle", 1, fid_oracle},
        {2, "FID self-distance and symmetry", 5, fid_self},
        {3, "sqrtm_psd round trip", 30, sqrtm_round_trip},
        {4, "KMeans recovery", 5, kmeans_recovery},
        {5, "elbow selection", 30, elbow},
        {6, "truncation identities", 1, truncation_identities},
        {7, "truncation sweep shape", 60, sweep_shape},
        {8, "filtering efficacy", 30, filtering_efficacy},
        {9, "constraint semantics", 10, constraint_semantics},
        {10, "CLI determinism", 60, cli_determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs >= c.budget_s) {
            o.detail = fmt::format("over budget; {}", o.detail);
            o.ok = false;
        }
        if (!o.ok) ++failures;
        std::printf("%s criterion %d: %s (%.2fs / %.0fs) %s\n", o.ok ? "PASS" : "FAIL", c.id, c.name, secs, c.budget_s,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
