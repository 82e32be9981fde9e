#include "stylefuse/tensor.hpp"

#include <cmath>
#include <cstring>

#include "stylefuse/errors.hpp"

namespace stylefuse {

namespace {

int64_t shape_numel(const std::vector<int64_t>& shape) {
    int64_t n = 1;
    for (int64_t d : shape) {
        if (d < 0) {
            throw ShapeError("negative tensor dimension");
        }
        n *= d;
    }
    return n;
}

}  // namespace

Tensor::Tensor(std::vector<int64_t> shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<size_t>(shape_numel(shape_)), 0.0);
}

Tensor Tensor::full(std::vector<int64_t> shape, double value) {
    Tensor t(std::move(shape));
    for (auto& v : t.data_) v = value;
    return t;
}

Tensor Tensor::gaussian(std::vector<int64_t> shape, Rng& rng) {
    Tensor t(std::move(shape));
    for (auto& v : t.data_) v = rng.gaussian();
    return t;
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

bool Tensor::bit_equal(const Tensor& other) const {
    if (shape_ != other.shape_) return false;
    return std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(double)) == 0;
}

Tensor& Tensor::add_scaled(const Tensor& other, double scale) {
    if (!same_shape(other)) {
        throw ShapeError("add_scaled: shape mismatch");
    }
    for (size_t i = 0; i < data_.size(); ++i) {
        data_[i] += scale * other.data_[i];
    }
    return *this;
}

Tensor operator+(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ShapeError("operator+: shape mismatch");
    Tensor out = a;
    for (size_t i = 0; i < out.data_.size(); ++i) out.data_[i] += b.data_[i];
    return out;
}

Tensor operator-(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ShapeError("operator-: shape mismatch");
    Tensor out = a;
    for (size_t i = 0; i < out.data_.size(); ++i) out.data_[i] -= b.data_[i];
    return out;
}

Tensor operator*(double s, const Tensor& a) {
    Tensor out = a;
    for (auto& v : out.data_) v *= s;
    return out;
}

double Tensor::max_abs_diff(const Tensor& other) const {
    if (!same_shape(other)) throw ShapeError("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (size_t i = 0; i < data_.size(); ++i) {
        double d = std::fabs(data_[i] - other.data_[i]);
        if (d > m) m = d;
    }
    return m;
}

}  // namespace stylefuse
