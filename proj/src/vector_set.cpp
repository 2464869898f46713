#include "sdist/vector_set.hpp"

#include <cmath>
#include <string>

#include "sdist/error.hpp"

namespace sdist {

VectorSet::VectorSet(std::size_t n, std::size_t dim, std::vector<double> data)
    : n_(n), dim_(dim), data_(std::move(data)) {
    if (data_.size() != n_ * dim_) {
        throw Error(ErrorKind::ShapeMismatch, "VectorSet data length " + std::to_string(data_.size()) +
                                                  " != " + std::to_string(n_) + "x" + std::to_string(dim_));
    }
}

VectorSet VectorSet::from_rows(const std::vector<Vector>& rows) {
    VectorSet out;
    for (const auto& r : rows) out.push_back(r);
    return out;
}

void VectorSet::push_back(VectorView values) {
    if (n_ == 0 && data_.empty()) {
        dim_ = values.size();
    } else if (values.size() != dim_) {
        throw Error(ErrorKind::DimensionMismatch,
                    "row of dimension " + std::to_string(values.size()) + " pushed into set of dimension " +
                        std::to_string(dim_));
    }
    data_.insert(data_.end(), values.begin(), values.end());
    ++n_;
}

VectorSet VectorSet::select(std::span<const std::size_t> indices) const {
    VectorSet out(indices.size(), dim_);
    for (std::size_t k = 0; k < indices.size(); ++k) {
        if (indices[k] >= n_) {
            throw Error(ErrorKind::InvalidArgument, "row index " + std::to_string(indices[k]) + " out of range");
        }
        const auto src = row(indices[k]);
        std::copy(src.begin(), src.end(), out.row(k).begin());
    }
    return out;
}

double squared_distance(VectorView a, VectorView b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = a[j] - b[j];
        acc += diff * diff;
    }
    return acc;
}

double norm(VectorView v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

}  // namespace sdist
