#include "sdist/toyworld.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sdist/error.hpp"
#include "sdist/rng.hpp"

namespace sdist {

namespace {

constexpr double kAtanhClamp = 1.0 - 1e-6;
constexpr std::size_t kOffsetAttempts = 100000;

// Stream ids; every random draw in the world derives from (seed, stream).
constexpr std::uint64_t kStreamWorld = 0;
constexpr std::uint64_t kStreamCodes = 1;
constexpr std::uint64_t kStreamDataset = 2;

Matrix orthonormal_columns(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = rng.normal();
    }
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t prev = 0; prev < c; ++prev) {
            double dot = 0.0;
            for (std::size_t r = 0; r < rows; ++r) dot += m(r, c) * m(r, prev);
            for (std::size_t r = 0; r < rows; ++r) m(r, c) -= dot * m(r, prev);
        }
        double len = 0.0;
        for (std::size_t r = 0; r < rows; ++r) len += m(r, c) * m(r, c);
        len = std::sqrt(len);
        if (len < 1e-10) throw Error(ErrorKind::InvalidArgument, "degenerate synthesis matrix draw");
        for (std::size_t r = 0; r < rows; ++r) m(r, c) /= len;
    }
    return m;
}

}  // namespace

VectorSet Generator::synthesize_all(const VectorSet& codes) const {
    VectorSet out(codes.size(), output_dim());
    for (std::size_t i = 0; i < codes.size(); ++i) {
        const Vector x = synthesize(codes.row(i));
        std::copy(x.begin(), x.end(), out.row(i).begin());
    }
    return out;
}

ToyWorldConfig ToyWorldConfig::preset(std::string_view name) {
    ToyWorldConfig c;
    if (name == "default") return c;
    if (name == "four_modes") {
        c.n_modes = 4;
        return c;
    }
    if (name == "parrots") {
        c.n_modes = 64;
        c.latent_dim = 24;
        c.output_dim = 96;
        c.offset_radius = 14.0;
        c.squash_scale = 6.0;
        return c;
    }
    throw Error(ErrorKind::InvalidArgument, "unknown toy world preset '" + std::string(name) + "'");
}

ToyWorld::ToyWorld(const ToyWorldConfig& config) : config_(config) {
    const auto& c = config_;
    if (c.noise_dim == 0 || c.latent_dim == 0 || c.n_modes == 0) {
        throw Error(ErrorKind::InvalidArgument, "toy world dimensions and mode count must be positive");
    }
    if (c.output_dim < c.latent_dim) {
        throw Error(ErrorKind::InvalidArgument, "output_dim must be >= latent_dim for an injective synthesis map");
    }
    if (!(c.squash_scale > 0.0) || !(c.outlier_rate >= 0.0 && c.outlier_rate < 1.0) || !(c.mode_scale > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "invalid toy world scale parameters");
    }

    Rng rng(c.seed, kStreamWorld);
    for (std::size_t k = 0; k < c.n_modes; ++k) {
        std::vector<double> a(c.latent_dim * c.noise_dim);
        for (double& x : a) x = c.mode_scale * rng.normal();
        mode_maps_.emplace_back(c.latent_dim, c.noise_dim, std::move(a));
        mean_spread_ += frobenius_norm(mode_maps_.back());
    }
    mean_spread_ /= static_cast<double>(c.n_modes);

    const double min_gap = c.min_separation * mean_spread_;
    const double component_sd = c.offset_radius / std::sqrt(static_cast<double>(c.latent_dim));
    for (std::size_t k = 0; k < c.n_modes; ++k) {
        bool placed = false;
        for (std::size_t attempt = 0; attempt < kOffsetAttempts && !placed; ++attempt) {
            Vector b(c.latent_dim);
            for (double& x : b) x = component_sd * rng.normal();
            placed = std::all_of(mode_offsets_.begin(), mode_offsets_.end(), [&](const Vector& other) {
                return std::sqrt(squared_distance(b, other)) >= min_gap;
            });
            if (placed) mode_offsets_.push_back(std::move(b));
        }
        if (!placed) {
            throw Error(ErrorKind::InvalidArgument, "could not place " + std::to_string(c.n_modes) +
                                                        " mode offsets with the required separation");
        }
    }

    synth_ = orthonormal_columns(c.output_dim, c.latent_dim, rng);
}

VectorSet ToyWorld::sample_codes(std::size_t n, std::uint64_t seed) const { return sample_codes(n, seed, nullptr); }

VectorSet ToyWorld::sample_codes(std::size_t n, std::uint64_t seed, std::vector<std::size_t>* modes) const {
    const auto& c = config_;
    Rng rng(seed, kStreamCodes);
    VectorSet codes(n, c.latent_dim);
    if (modes) modes->assign(n, 0);
    Vector z(c.noise_dim);
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(rng.index(c.n_modes));
        for (double& x : z) x = rng.normal();
        const Matrix& a = mode_maps_[k];
        const Vector& b = mode_offsets_[k];
        auto w = codes.row(i);
        for (std::size_t r = 0; r < c.latent_dim; ++r) {
            double acc = b[r];
            for (std::size_t j = 0; j < c.noise_dim; ++j) acc += a(r, j) * z[j];
            w[r] = acc;
        }
        if (modes) (*modes)[i] = k;
    }
    return codes;
}

Vector ToyWorld::synthesize(VectorView w) const {
    if (w.size() != config_.latent_dim) {
        throw Error(ErrorKind::DimensionMismatch, "synthesize expects a code of dimension " +
                                                      std::to_string(config_.latent_dim) + ", got " +
                                                      std::to_string(w.size()));
    }
    Vector x(config_.output_dim);
    for (std::size_t r = 0; r < config_.output_dim; ++r) {
        double acc = 0.0;
        for (std::size_t j = 0; j < config_.latent_dim; ++j) acc += synth_(r, j) * w[j];
        x[r] = std::tanh(acc / config_.squash_scale);
    }
    return x;
}

Vector ToyWorld::encode(VectorView x) const {
    if (x.size() != config_.output_dim) {
        throw Error(ErrorKind::DimensionMismatch, "encode expects an output of dimension " +
                                                      std::to_string(config_.output_dim) + ", got " +
                                                      std::to_string(x.size()));
    }
    Vector pre(config_.output_dim);
    for (std::size_t r = 0; r < config_.output_dim; ++r) {
        pre[r] = config_.squash_scale * std::atanh(std::clamp(x[r], -kAtanhClamp, kAtanhClamp));
    }
    Vector w(config_.latent_dim, 0.0);
    for (std::size_t r = 0; r < config_.output_dim; ++r) {
        for (std::size_t j = 0; j < config_.latent_dim; ++j) w[j] += synth_(r, j) * pre[r];
    }
    return w;
}

VectorSet ToyWorld::encode_all(const VectorSet& items) const {
    VectorSet out(items.size(), config_.latent_dim);
    for (std::size_t i = 0; i < items.size(); ++i) {
        const Vector w = encode(items.row(i));
        std::copy(w.begin(), w.end(), out.row(i).begin());
    }
    return out;
}

ToyDataset ToyWorld::build_dataset(std::size_t n_inliers, std::size_t n_outliers, std::uint64_t seed) const {
    const std::size_t n = n_inliers + n_outliers;
    const std::size_t dx = config_.output_dim;
    const VectorSet codes = sample_codes(n_inliers, seed);
    Rng rng(seed, kStreamDataset);

    VectorSet raw(n, dx);
    for (std::size_t i = 0; i < n_inliers; ++i) {
        const Vector x = synthesize(codes.row(i));
        auto out = raw.row(i);
        for (std::size_t r = 0; r < dx; ++r) out[r] = x[r] + config_.observation_noise * rng.normal();
    }
    for (std::size_t i = n_inliers; i < n; ++i) {
        for (double& v : raw.row(i)) v = rng.uniform(-0.99, 0.99);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = n; i > 1; --i) {
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng.index(i))]);
    }

    ToyDataset ds;
    ds.items = raw.select(order);
    ds.is_outlier.resize(n);
    for (std::size_t i = 0; i < n; ++i) ds.is_outlier[i] = order[i] >= n_inliers;
    ds.encoded = encode_all(ds.items);
    ds.reconstructions = synthesize_all(ds.encoded);
    return ds;
}

}  // namespace sdist
