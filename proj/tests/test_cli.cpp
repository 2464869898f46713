#include <algorithm>
#include <cmath>

#include "cli_harness.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "sdist/io.hpp"
#include "sdist/toyworld.hpp"

using namespace sdist;
using cli::TempDir;

namespace {

cli::Result run(const std::string& args, const TempDir& dir) { return cli::run(args, dir.path()); }

std::string q(const std::string& path) { return "\"" + path + "\""; }

VectorSet normal_set(std::size_t n, std::size_t d, double shift, std::uint64_t seed) {
    Rng rng(seed);
    VectorSet s(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (double& x : s.row(i)) x = rng.normal();
        s(i, 0) += shift;
    }
    return s;
}

std::size_t count_lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST_CASE("cli fid") {
    TempDir dir;
    write_vector_file(dir / "a.sdv", normal_set(2000, 2, 0.0, 1));
    write_vector_file(dir / "b.sdv", normal_set(2000, 2, 10.0, 2));

    auto r = run("fid " + q(dir / "a.sdv") + " " + q(dir / "a.sdv"), dir);
    CHECK(r.code == 0);
    CHECK(std::stod(r.out) <= 1e-6);

    r = run("fid " + q(dir / "a.sdv") + " " + q(dir / "b.sdv"), dir);
    CHECK(r.code == 0);
    CHECK(std::abs(std::stod(r.out) - 100.0) < 5.0);

    const std::string bytes = cli::slurp(dir / "b.sdv");
    write_text_file(dir / "short.sdv", bytes.substr(0, bytes.size() - 6));
    r = run("fid " + q(dir / "a.sdv") + " " + q(dir / "short.sdv"), dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("6 bytes missing") != std::string::npos);

    write_vector_file(dir / "c.sdv", normal_set(50, 3, 0.0, 3));
    CHECK(run("fid " + q(dir / "a.sdv") + " " + q(dir / "c.sdv"), dir).code == 3);
    CHECK(run("fid " + q(dir / "a.sdv") + " " + q(dir / "missing.sdv"), dir).code == 2);
    CHECK(run("fid " + q(dir / "a.sdv"), dir).code == 3);
}

TEST_CASE("cli filter") {
    TempDir dir;
    REQUIRE(run("simulate --n-inliers 2000 --n-outliers 200 --seed 5 --out-dir " + q(dir / "fx"), dir).code == 0);
    const std::string items = q(dir / "fx/items.sdv");
    const std::string recon = q(dir / "fx/reconstructions.sdv");

    SUBCASE("no binding constraint") {
        const auto r = run("filter --items " + items + " --reconstructions " + recon +
                               " --no-diversity-bound --min-size 100 --out-dir " + q(dir / "out"),
                           dir);
        REQUIRE(r.code == 0);
        CHECK(r.out == "theta_effective=0.36 halted_by=target_reached\n");
        const std::string summary = cli::slurp(dir / "out/summary.txt");
        CHECK(summary.find("theta_effective=0.36\nhalted_by=target_reached\n") != std::string::npos);
        const auto kv = parse_key_value_text(summary);
        CHECK(count_lines(cli::slurp(dir / "out/kept_ids.txt")) == std::stoul(kv.at("n_kept")));
        CHECK(cli::slurp(dir / "out/trace.csv").rfind("theta,n_kept,fid_yx\n", 0) == 0);
    }
    SUBCASE("scores file gives the same report") {
        REQUIRE(run("filter --items " + items + " --reconstructions " + recon +
                        " --no-diversity-bound --min-size 100 --out-dir " + q(dir / "o1"),
                    dir)
                    .code == 0);
        REQUIRE(run("filter --items " + items + " --scores " + q(dir / "fx/scores.csv") +
                        " --min-size 100 --out-dir " + q(dir / "o2"),
                    dir)
                    .code == 0);
        CHECK(cli::slurp(dir / "o1/kept_ids.txt") == cli::slurp(dir / "o2/kept_ids.txt"));
        CHECK(cli::slurp(dir / "o1/summary.txt") == cli::slurp(dir / "o2/summary.txt"));
    }
    SUBCASE("binding size floor") {
        const auto r = run("filter --items " + items + " --reconstructions " + recon +
                               " --no-diversity-bound --min-size 2100 --out-dir " + q(dir / "out"),
                           dir);
        REQUIRE(r.code == 0);
        CHECK(r.out.find("halted_by=size_floor") != std::string::npos);
        const auto kv = parse_key_value_text(cli::slurp(dir / "out/summary.txt"));
        CHECK(std::stod(kv.at("theta_effective")) > 0.36);
        CHECK(std::stoul(kv.at("n_kept")) >= 2100);
    }
    SUBCASE("errors") {
        write_vector_file(dir / "empty.sdv", VectorSet(0, 64));
        CHECK(run("filter --items " + q(dir / "empty.sdv") + " --reconstructions " + recon, dir).code == 2);
        write_text_file(dir / "zero.sdv", "");
        CHECK(run("filter --items " + q(dir / "zero.sdv") + " --reconstructions " + recon, dir).code == 2);
        CHECK(run("filter --items " + items + " --reconstructions " + recon + " --min-size 5000 --out-dir " +
                      q(dir / "out"),
                  dir)
                  .code == 4);
        CHECK(run("filter --items " + items, dir).code == 3);
        CHECK(run("filter --items " + items + " --reconstructions " + q(dir / "fx/codes.sdv"), dir).code == 3);
    }
}

TEST_CASE("cli cluster") {
    TempDir dir;
    SUBCASE("one cluster is the mean") {
        const VectorSet codes = normal_set(300, 4, 2.0, 7);
        write_vector_file(dir / "codes.sdv", codes);
        REQUIRE(run("cluster " + q(dir / "codes.sdv") + " --n-clusters 1 --out " + q(dir / "k1"), dir).code == 0);
        const VectorSet centers = read_vector_file(dir / "k1.sdv");
        REQUIRE(centers.size() == 1);
        const VectorSet stored = read_vector_file(dir / "codes.sdv");
        const Vector mean = oracle::mean(stored);
        for (std::size_t j = 0; j < 4; ++j) CHECK(centers(0, j) == doctest::Approx(mean[j]).epsilon(1e-6));
        CHECK(read_vector_file(dir / "k1.mean.sdv") == centers);
        const auto meta = parse_key_value_text(cli::slurp(dir / "k1.meta"));
        CHECK(meta.at("n_clusters") == "1");
        CHECK(meta.at("seed") == "0");
    }
    SUBCASE("four blobs") {
        const auto truth = oracle::square_corners(20.0);
        write_vector_file(dir / "blobs.sdv", oracle::blobs(truth, 500, 0.5, 3));
        REQUIRE(run("cluster " + q(dir / "blobs.sdv") + " --n-clusters 4 --seed 2 --out " + q(dir / "k4"), dir).code ==
                0);
        const VectorSet centers = read_vector_file(dir / "k4.sdv");
        REQUIRE(centers.size() == 4);
        for (const auto& t : truth) {
            double best = 1e9;
            for (std::size_t k = 0; k < 4; ++k) best = std::min(best, std::sqrt(squared_distance(centers.row(k), t)));
            CHECK(best < 0.1);
        }
    }
    SUBCASE("elbow on eight blobs") {
        write_vector_file(dir / "cube.sdv", oracle::blobs(oracle::cube_corners(20.0), 200, 0.5, 12));
        const auto r =
            run("cluster " + q(dir / "cube.sdv") + " --elbow 2,4,8,16,32 --out " + q(dir / "el"), dir);
        REQUIRE(r.code == 0);
        CHECK(r.out == "n_clusters=8\n");
        CHECK(read_vector_file(dir / "el.sdv").size() == 8);
        CHECK(parse_key_value_text(cli::slurp(dir / "el.elbow.txt")).at("chosen") == "8");
    }
    SUBCASE("errors") {
        write_vector_file(dir / "few.sdv", normal_set(5, 2, 0.0, 1));
        CHECK(run("cluster " + q(dir / "few.sdv") + " --n-clusters 6 --out " + q(dir / "x"), dir).code == 3);
        CHECK(run("cluster " + q(dir / "few.sdv") + " --elbow 2,x,4 --out " + q(dir / "x"), dir).code == 2);
    }
}

TEST_CASE("cli truncate") {
    TempDir dir;
    const ToyWorld world;
    write_vector_file(dir / "codes.sdv", world.sample_codes(400, 3));
    const std::string codes = q(dir / "codes.sdv");
    REQUIRE(run("cluster " + codes + " --n-clusters 8 --restarts 2 --out " + q(dir / "cl"), dir).code == 0);
    REQUIRE(run("synthesize " + q(dir / "cl.sdv") + " --out " + q(dir / "cl_out.sdv"), dir).code == 0);
    REQUIRE(run("synthesize " + codes + " --out " + q(dir / "g.sdv"), dir).code == 0);
    const std::string mean = " --mean " + q(dir / "cl.mean.sdv");
    const std::string multi = " --centers " + q(dir / "cl.sdv") + " --center-outputs " + q(dir / "cl_out.sdv") +
                              " --outputs " + q(dir / "g.sdv");

    SUBCASE("psi 1 returns the input bytes") {
        const std::pair<const char*, std::string> modes[] = {{"none", ""},
                                                             {"global_mean", mean},
                                                             {"clamp", mean},
                                                             {"multimodal_latent", multi},
                                                             {"multimodal_perceptual", multi}};
        for (const auto& [mode, extra] : modes) {
            CAPTURE(mode);
            REQUIRE(run("truncate " + codes + " --psi 1.0 --mode " + mode + extra + " --out " + q(dir / "t.sdv"), dir)
                        .code == 0);
            CHECK(cli::slurp(dir / "t.sdv") == cli::slurp(dir / "codes.sdv"));
        }
    }
    SUBCASE("global psi 0 collapses to the mean row") {
        REQUIRE(run("truncate " + codes + " --mode global --psi 0" + mean + " --out " + q(dir / "t.sdv"), dir).code ==
                0);
        const VectorSet out = read_vector_file(dir / "t.sdv");
        const VectorSet m = read_vector_file(dir / "cl.mean.sdv");
        REQUIRE(out.size() == 400);
        for (std::size_t i = 0; i < out.size(); ++i) CHECK(std::ranges::equal(out.row(i), m.row(0)));
    }
    SUBCASE("perceptual assignments match the nearest center output") {
        REQUIRE(run("truncate " + codes + " --mode multimodal_perceptual --psi 0.7" + multi + " --out " +
                        q(dir / "t.sdv"),
                    dir)
                    .code == 0);
        const VectorSet outputs = read_vector_file(dir / "g.sdv");
        const VectorSet center_outputs = read_vector_file(dir / "cl_out.sdv");
        const std::vector<double> weights(outputs.dim(), 1.0 / static_cast<double>(outputs.dim()));
        std::string expected = "index,cluster\n";
        for (std::size_t i = 0; i < outputs.size(); ++i) {
            expected += std::to_string(i) + "," +
                        std::to_string(oracle::nearest(center_outputs, outputs.row(i), &weights)) + "\n";
        }
        CHECK(cli::slurp(dir / "t.sdv.assignments.csv") == expected);
    }
    SUBCASE("missing inputs") {
        CHECK(run("truncate " + codes + " --mode global --psi 0.5 --out " + q(dir / "t.sdv"), dir).code == 3);
        CHECK(run("truncate " + codes + " --mode multimodal_latent --psi 0.5 --out " + q(dir / "t.sdv"), dir).code ==
              3);
        CHECK(run("truncate " + codes + " --mode multimodal_perceptual --psi 0.5 --centers " + q(dir / "cl.sdv") +
                      " --out " + q(dir / "t.sdv"),
                  dir)
                  .code == 3);
        CHECK(run("truncate " + codes + " --mode global --psi 1.5" + mean + " --out " + q(dir / "t.sdv"), dir).code ==
              3);
    }
}

TEST_CASE("cli sweep") {
    TempDir dir;
    const std::string common = "sweep --n-samples 600 --n-clusters 8 --n-cluster-sample 3000 --restarts 2 --seed 4";

    auto r = run(common + " --psi-grid 1.0 --modes global_mean,multimodal_perceptual,multimodal_latent,clamp", dir);
    REQUIRE(r.code == 0);
    std::vector<std::string> fids;
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "psi,mode,fid,n_samples,seed");
    while (std::getline(lines, line)) {
        const auto a = line.find(',', line.find(',') + 1);
        fids.push_back(line.substr(a + 1, line.find(',', a + 1) - a - 1));
    }
    REQUIRE(fids.size() == 4);
    for (const auto& f : fids) CHECK(f == fids.front());

    REQUIRE(run(common + " --psi-grid 1,0.7 --out " + q(dir / "s1.csv"), dir).code == 0);
    REQUIRE(run(common + " --psi-grid 1,0.7 --out " + q(dir / "s2.csv"), dir).code == 0);
    CHECK(cli::slurp(dir / "s1.csv") == cli::slurp(dir / "s2.csv"));
    CHECK(count_lines(cli::slurp(dir / "s1.csv")) == 5);

    CHECK(run(common + " --psi-grid 1.0,abc", dir).code == 2);
    CHECK(run(common + " --psi-grid 1.0,1.5", dir).code == 2);
    CHECK(run(common + " --psi-grid ''", dir).code == 2);
}

TEST_CASE("cli simulate") {
    TempDir dir;
    const std::string args = "simulate --n-inliers 300 --n-outliers 40 --seed 9 --out-dir ";
    REQUIRE(run(args + q(dir / "a"), dir).code == 0);
    REQUIRE(run(args + q(dir / "b"), dir).code == 0);

    const char* files[] = {"items.sdv", "reconstructions.sdv", "codes.sdv", "scores.csv", "labels.csv", "world.txt"};
    for (const char* f : files) {
        CAPTURE(f);
        REQUIRE(std::filesystem::exists(dir / (std::string("a/") + f)));
        CHECK(cli::slurp(dir / (std::string("a/") + f)) == cli::slurp(dir / (std::string("b/") + f)));
    }
    CHECK(read_vector_file(dir / "a/items.sdv").size() == 340);
    CHECK(read_vector_file(dir / "a/reconstructions.sdv").size() == 340);
    CHECK(read_vector_file(dir / "a/codes.sdv").size() == 340);
    CHECK(read_scores_csv(dir / "a/scores.csv").size() == 340);
    const std::string labels = cli::slurp(dir / "a/labels.csv");
    CHECK(count_lines(labels) == 341);
    std::size_t outliers = 0;
    for (std::size_t pos = 0; (pos = labels.find(",1\n", pos)) != std::string::npos; ++pos) ++outliers;
    CHECK(outliers == 40);
    CHECK(parse_key_value_text(cli::slurp(dir / "a/world.txt")).at("n_items") == "340");

    CHECK(run("simulate --n-inliers 10 --n-outliers 1 --out-dir /proc/sdist_nope", dir).code == 2);
}
