#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "sdist/linalg.hpp"
#include "sdist/vector_set.hpp"

namespace sdist {

/// Anything that can draw latent codes and map them to outputs.
class Generator {
public:
    virtual ~Generator() = default;

    virtual std::size_t latent_dim() const = 0;
    virtual std::size_t output_dim() const = 0;
    virtual VectorSet sample_codes(std::size_t n, std::uint64_t seed) const = 0;
    virtual Vector synthesize(VectorView w) const = 0;

    VectorSet synthesize_all(const VectorSet& codes) const;
};

struct ToyWorldConfig {
    std::size_t noise_dim = 8;    // dz
    std::size_t latent_dim = 16;  // dw
    std::size_t output_dim = 64;  // dx
    std::size_t n_modes = 8;
    double squash_scale = 4.0;
    /// Standard deviation of the entries of each mode's linear map.
    double mode_scale = 0.1;
    /// Mode offsets are drawn with this expected norm.
    double offset_radius = 10.0;
    /// Minimum offset separation in units of the average within-mode spread.
    double min_separation = 6.0;
    double observation_noise = 0.01;
    double outlier_rate = 0.1;
    std::uint64_t seed = 0;

    /// "default" (8 modes), "four_modes", "parrots" (64 modes).
    static ToyWorldConfig preset(std::string_view name);
};

struct ToyDataset {
    VectorSet items;
    VectorSet reconstructions;
    /// Encoder output for every item; reconstructions = synthesize(encoded).
    VectorSet encoded;
    std::vector<bool> is_outlier;
};

/// Analytic stand-in for a mapping network + generator + encoder:
///   w = A_k z + b_k (mode k uniform), G(w) = tanh(C w / s),
///   E(x) = C^T s atanh(x) with C column-orthonormal.
class ToyWorld final : public Generator {
public:
    explicit ToyWorld(const ToyWorldConfig& config = {});

    const ToyWorldConfig& config() const { return config_; }
    std::size_t latent_dim() const override { return config_.latent_dim; }
    std::size_t output_dim() const override { return config_.output_dim; }
    std::size_t n_modes() const { return config_.n_modes; }

    const Matrix& mode_map(std::size_t k) const { return mode_maps_.at(k); }
    const Vector& mode_offset(std::size_t k) const { return mode_offsets_.at(k); }
    const Matrix& synth_matrix() const { return synth_; }
    /// Mean over modes of ||A_k||_F, the RMS radius of a mode around b_k.
    double mean_mode_spread() const { return mean_spread_; }

    VectorSet sample_codes(std::size_t n, std::uint64_t seed) const override;
    /// Same draw as sample_codes, also reporting the mode of every code.
    VectorSet sample_codes(std::size_t n, std::uint64_t seed, std::vector<std::size_t>* modes) const;

    Vector synthesize(VectorView w) const override;
    Vector encode(VectorView x) const;
    VectorSet encode_all(const VectorSet& items) const;

    /// Inliers are noisy syntheses of sampled codes, outliers are uniform in
    /// [-0.99, 0.99]^dx. Rows are shuffled; is_outlier records the truth.
    ToyDataset build_dataset(std::size_t n_inliers, std::size_t n_outliers, std::uint64_t seed) const;

private:
    ToyWorldConfig config_;
    std::vector<Matrix> mode_maps_;
    std::vector<Vector> mode_offsets_;
    Matrix synth_;  // dx x dw, orthonormal columns
    double mean_spread_ = 0.0;
};

}  // namespace sdist
