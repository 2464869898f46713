#include "sdist/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sdist/error.hpp"

namespace sdist {

namespace {

void require_square(const Matrix& m, const char* what) {
    if (!m.square()) {
        throw Error(ErrorKind::DimensionMismatch, std::string(what) + " requires a square matrix, got " +
                                                      std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
}

void require_same_shape(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "matrix shapes differ");
    }
}

double off_diagonal_norm(const Matrix& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (i != j) acc += a(i, j) * a(i, j);
        }
    }
    return std::sqrt(acc);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw Error(ErrorKind::ShapeMismatch, "matrix data length does not match shape");
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(std::span<const double> values) {
    Matrix m(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return m;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    }
    return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw Error(ErrorKind::DimensionMismatch, "matrix product with incompatible shapes");
    }
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b);
    std::vector<double> data(a.data().size());
    std::transform(a.data().begin(), a.data().end(), b.data().begin(), data.begin(), std::plus<>());
    return Matrix(a.rows(), a.cols(), std::move(data));
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b);
    std::vector<double> data(a.data().size());
    std::transform(a.data().begin(), a.data().end(), b.data().begin(), data.begin(), std::minus<>());
    return Matrix(a.rows(), a.cols(), std::move(data));
}

Matrix operator*(double s, const Matrix& a) {
    std::vector<double> data(a.data());
    for (double& x : data) x *= s;
    return Matrix(a.rows(), a.cols(), std::move(data));
}

double trace(const Matrix& m) {
    require_square(m, "trace");
    double acc = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) acc += m(i, i);
    return acc;
}

double frobenius_norm(const Matrix& m) {
    double acc = 0.0;
    for (double x : m.data()) acc += x * x;
    return std::sqrt(acc);
}

double asymmetry(const Matrix& m) {
    require_square(m, "asymmetry");
    double worst = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = i + 1; j < m.cols(); ++j) worst = std::max(worst, std::abs(m(i, j) - m(j, i)));
    }
    return worst;
}

Vector mean_vector(const VectorSet& set) {
    if (set.empty()) throw Error(ErrorKind::EmptySet, "mean of an empty set");
    Vector mean(set.dim(), 0.0);
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto r = set.row(i);
        for (std::size_t j = 0; j < set.dim(); ++j) mean[j] += r[j];
    }
    const auto n = static_cast<double>(set.size());
    for (double& x : mean) x /= n;
    return mean;
}

Matrix covariance(const VectorSet& set, const ExecPolicy& exec) {
    if (set.size() < 2) {
        throw Error(ErrorKind::TooFewSamples,
                    "covariance needs at least 2 rows, got " + std::to_string(set.size()));
    }
    const std::size_t d = set.dim();
    const Vector mean = mean_vector(set);

    const std::size_t chunks = chunk_count(set.size(), exec);
    std::vector<std::vector<double>> partial(chunks, std::vector<double>(d * d, 0.0));
    parallel_chunks(set.size(), exec, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        auto& acc = partial[chunk];
        std::vector<double> centered(d);
        for (std::size_t i = begin; i < end; ++i) {
            const auto r = set.row(i);
            for (std::size_t j = 0; j < d; ++j) centered[j] = r[j] - mean[j];
            for (std::size_t a = 0; a < d; ++a) {
                const double ca = centered[a];
                double* out = acc.data() + a * d;
                for (std::size_t b = a; b < d; ++b) out[b] += ca * centered[b];
            }
        }
    });

    Matrix cov(d, d);
    const double inv = 1.0 / static_cast<double>(set.size() - 1);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a; b < d; ++b) {
            double sum = 0.0;
            for (const auto& acc : partial) sum += acc[a * d + b];
            cov(a, b) = sum * inv;
            cov(b, a) = cov(a, b);
        }
    }
    return cov;
}

SymEig sym_eig(const Matrix& m) {
    require_square(m, "sym_eig");
    const std::size_t n = m.rows();
    for (double x : m.data()) {
        if (!std::isfinite(x)) throw Error(ErrorKind::InvalidArgument, "sym_eig input has non-finite entries");
    }
    double scale = 1.0;
    for (double x : m.data()) scale = std::max(scale, std::abs(x));
    if (asymmetry(m) > 1e-8 * scale) {
        throw Error(ErrorKind::NotSymmetric, "asymmetry " + std::to_string(asymmetry(m)) + " exceeds 1e-8");
    }

    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (m(i, j) + m(j, i));
    }
    Matrix v = Matrix::identity(n);

    const double target = 1e-12 * frobenius_norm(a);
    const std::size_t max_sweeps = 100 * std::max<std::size_t>(n, 1);
    std::size_t sweep = 0;
    while (off_diagonal_norm(a) > target) {
        if (sweep++ >= max_sweeps) {
            throw Error(ErrorKind::NoConvergence,
                        "Jacobi did not converge in " + std::to_string(max_sweeps) + " sweeps");
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    SymEig out{std::vector<double>(n), Matrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
    }
    return out;
}

Matrix sqrtm_psd(const Matrix& m, double negative_tolerance) {
    const SymEig eig = sym_eig(m);
    const std::size_t n = m.rows();
    std::vector<double> roots(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double lambda = eig.values[k];
        if (lambda < -negative_tolerance) {
            throw Error(ErrorKind::NotPSD, "eigenvalue " + std::to_string(lambda) + " below -" +
                                               std::to_string(negative_tolerance));
        }
        roots[k] = std::sqrt(std::max(lambda, 0.0));
    }
    Matrix r(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += eig.vectors(i, k) * roots[k] * eig.vectors(j, k);
            r(i, j) = acc;
            r(j, i) = acc;
        }
    }
    return r;
}

}  // namespace sdist
