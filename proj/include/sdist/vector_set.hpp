#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sdist {

using Vector = std::vector<double>;
using VectorView = std::span<const double>;

/// An n x d batch of real vectors stored row-major. Latent codes, output
/// vectors and feature vectors all travel as VectorSets.
class VectorSet {
public:
    VectorSet() = default;
    VectorSet(std::size_t n, std::size_t dim) : n_(n), dim_(dim), data_(n * dim, 0.0) {}
    /// Takes ownership of row-major data; data.size() must equal n * dim.
    VectorSet(std::size_t n, std::size_t dim, std::vector<double> data);
    static VectorSet from_rows(const std::vector<Vector>& rows);

    std::size_t size() const { return n_; }
    std::size_t dim() const { return dim_; }
    bool empty() const { return n_ == 0; }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    std::span<double> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }

    double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * dim_ + j]; }

    /// Appends a row. The first row fixes the dimension of an empty set.
    void push_back(VectorView values);

    /// Rows at the given indices, in the given order.
    VectorSet select(std::span<const std::size_t> indices) const;

    const std::vector<double>& data() const { return data_; }

    friend bool operator==(const VectorSet&, const VectorSet&) = default;

private:
    std::size_t n_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

double squared_distance(VectorView a, VectorView b);
double norm(VectorView v);

}  // namespace sdist
