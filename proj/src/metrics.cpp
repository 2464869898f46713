#include "sdist/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "sdist/error.hpp"

namespace sdist {

GaussianStats fit_gaussian(const VectorSet& set, double ridge, const ExecPolicy& exec) {
    if (!(ridge >= 0.0) || !std::isfinite(ridge)) {
        throw Error(ErrorKind::InvalidArgument, "ridge must be finite and >= 0");
    }
    if (set.size() < 2) {
        throw Error(ErrorKind::TooFewSamples, "fit_gaussian needs at least 2 rows, got " + std::to_string(set.size()));
    }
    GaussianStats stats{mean_vector(set), covariance(set, exec)};
    for (std::size_t i = 0; i < stats.sigma.rows(); ++i) stats.sigma(i, i) += ridge;
    return stats;
}

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
    const std::size_t d = a.mu.size();
    if (b.mu.size() != d || a.sigma.rows() != d || a.sigma.cols() != d || b.sigma.rows() != d ||
        b.sigma.cols() != d) {
        throw Error(ErrorKind::DimensionMismatch, "Gaussian statistics of different dimensions");
    }

    double mean_term = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double diff = a.mu[j] - b.mu[j];
        mean_term += diff * diff;
    }

    const Matrix root_a = sqrtm_psd(a.sigma);
    Matrix sandwich = root_a * b.sigma * root_a;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            const double sym = 0.5 * (sandwich(i, j) + sandwich(j, i));
            sandwich(i, j) = sym;
            sandwich(j, i) = sym;
        }
    }
    const SymEig eig = sym_eig(sandwich);
    const double lambda_max = eig.values.empty() ? 0.0 : std::max(eig.values.front(), 0.0);
    const double clip = std::max(kPsdTolerance, 1e-6 * lambda_max);
    double cross = 0.0;
    for (double lambda : eig.values) {
        if (lambda < -clip) {
            throw Error(ErrorKind::NotPSD, "cross-term eigenvalue " + std::to_string(lambda) + " below clip level");
        }
        cross += std::sqrt(std::max(lambda, 0.0));
    }

    const double value = mean_term + trace(a.sigma) + trace(b.sigma) - 2.0 * cross;
    return std::max(value, 0.0);
}

double fid(const VectorSet& x, const VectorSet& y, double ridge, const ExecPolicy& exec) {
    if (x.dim() != y.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "fid between sets of dimension " + std::to_string(x.dim()) +
                                                      " and " + std::to_string(y.dim()));
    }
    return frechet_distance(fit_gaussian(x, ridge, exec), fit_gaussian(y, ridge, exec));
}

PerceptualMetric PerceptualMetric::weighted_l2(Vector weights) {
    if (weights.empty()) throw Error(ErrorKind::InvalidArgument, "weighted_l2 needs at least one weight");
    bool any_positive = false;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw Error(ErrorKind::InvalidArgument, "metric weights must be finite and >= 0");
        }
        any_positive = any_positive || w > 0.0;
    }
    if (!any_positive) throw Error(ErrorKind::InvalidArgument, "metric weights are all zero");
    PerceptualMetric m;
    m.kind_ = Kind::weighted_l2;
    m.weights_ = std::move(weights);
    return m;
}

PerceptualMetric PerceptualMetric::rms(std::size_t dim) {
    if (dim == 0) throw Error(ErrorKind::InvalidArgument, "rms metric needs dim >= 1");
    return weighted_l2(Vector(dim, 1.0 / static_cast<double>(dim)));
}

double PerceptualMetric::distance(VectorView a, VectorView b) const {
    if (a.size() != b.size()) {
        throw Error(ErrorKind::DimensionMismatch, "perceptual distance between vectors of dimension " +
                                                      std::to_string(a.size()) + " and " + std::to_string(b.size()));
    }
    if (!weights_) return std::sqrt(squared_distance(a, b));
    if (weights_->size() != a.size()) {
        throw Error(ErrorKind::DimensionMismatch, "metric has " + std::to_string(weights_->size()) +
                                                      " weights for vectors of dimension " + std::to_string(a.size()));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        acc += (*weights_)[i] * diff * diff;
    }
    return std::sqrt(acc);
}

double perceptual_distance(const PerceptualMetric& metric, VectorView a, VectorView b) {
    return metric.distance(a, b);
}

}  // namespace sdist
