#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sdist/parallel.hpp"
#include "sdist/vector_set.hpp"

namespace sdist {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

    const std::vector<double>& data() const { return data_; }

    Matrix transpose() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

double trace(const Matrix& m);
double frobenius_norm(const Matrix& m);
/// Largest |m(i,j) - m(j,i)|.
double asymmetry(const Matrix& m);

/// Eigen-decomposition of a symmetric matrix. Eigenvalues are sorted in
/// descending order; column k of `vectors` belongs to values[k].
struct SymEig {
    std::vector<double> values;
    Matrix vectors;
};

Vector mean_vector(const VectorSet& set);

/// Unbiased (n - 1) sample covariance. The sequential policy reduces rows in
/// index order; a parallel policy sums fixed chunks and agrees to ~1e-12.
Matrix covariance(const VectorSet& set, const ExecPolicy& exec = {});

/// Cyclic Jacobi. Converges when the off-diagonal Frobenius norm drops below
/// 1e-12 * ||m||_F; gives up with NoConvergence after 100 * d sweeps.
SymEig sym_eig(const Matrix& m);

inline constexpr double kPsdTolerance = 1e-8;

/// Principal square root of a symmetric PSD matrix. Eigenvalues in
/// [-negative_tolerance, 0) are clipped to zero; anything lower is NotPSD.
Matrix sqrtm_psd(const Matrix& m, double negative_tolerance = kPsdTolerance);

}  // namespace sdist
