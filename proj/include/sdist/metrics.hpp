#pragma once

#include <optional>
#include <string>

#include "sdist/linalg.hpp"
#include "sdist/vector_set.hpp"

namespace sdist {

inline constexpr double kDefaultRidge = 1e-6;

/// Gaussian summary (mean, covariance) of a vector set.
struct GaussianStats {
    Vector mu;
    Matrix sigma;
};

GaussianStats fit_gaussian(const VectorSet& set, double ridge = kDefaultRidge, const ExecPolicy& exec = {});

/// ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^{1/2}).
///
/// The cross term is evaluated as Tr(sqrtm(R S_b R)) with R = sqrtm(S_a), which
/// has the same spectrum as (S_a S_b)^{1/2} but stays symmetric. Cross-term
/// eigenvalues down to -1e-6 * lambda_max are treated as rounding and clipped.
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

/// Frechet distance between Gaussians fit to x and y.
double fid(const VectorSet& x, const VectorSet& y, double ridge = kDefaultRidge, const ExecPolicy& exec = {});

/// Fixed output-space distance used in place of a learned perceptual metric:
/// sqrt(sum_i w_i (a_i - b_i)^2). plain_l2 has unit weights.
class PerceptualMetric {
public:
    enum class Kind { weighted_l2, plain_l2 };

    static PerceptualMetric plain_l2() { return PerceptualMetric(); }
    static PerceptualMetric weighted_l2(Vector weights);
    /// weighted_l2 with every weight 1/dim: the root-mean-square difference.
    static PerceptualMetric rms(std::size_t dim);

    Kind kind() const { return kind_; }
    const std::optional<Vector>& weights() const { return weights_; }

    double distance(VectorView a, VectorView b) const;

private:
    PerceptualMetric() = default;

    Kind kind_ = Kind::plain_l2;
    std::optional<Vector> weights_;
};

double perceptual_distance(const PerceptualMetric& metric, VectorView a, VectorView b);

}  // namespace sdist
