#ifndef STYLEFUSE_TENSOR_HPP
#define STYLEFUSE_TENSOR_HPP

#include <cstdint>
#include <vector>

#include "stylefuse/rng.hpp"

namespace stylefuse {

// Dense row-major tensor of doubles. Small and simple on purpose: every
// kernel in this project iterates it in a fixed order, which is what makes
// whole-pipeline runs bit-reproducible.
//
// Shape conventions used across the project:
//   feature map       (batch, tokens, channels)
//   attention map     (batch, heads, query_tokens, key_tokens)
//   latent            (batch, channels, height, width)
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int64_t> shape);

    static Tensor zeros(std::vector<int64_t> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<int64_t> shape, double value);
    static Tensor gaussian(std::vector<int64_t> shape, Rng& rng);

    int64_t rank() const { return static_cast<int64_t>(shape_.size()); }
    int64_t dim(int64_t i) const { return shape_[static_cast<size_t>(i)]; }
    const std::vector<int64_t>& shape() const { return shape_; }
    int64_t numel() const { return static_cast<int64_t>(data_.size()); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
    double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

    // Indexed access, rank-specific for the shapes listed above.
    double& at3(int64_t a, int64_t b, int64_t c) {
        return data_[static_cast<size_t>((a * shape_[1] + b) * shape_[2] + c)];
    }
    double at3(int64_t a, int64_t b, int64_t c) const {
        return data_[static_cast<size_t>((a * shape_[1] + b) * shape_[2] + c)];
    }
    double& at4(int64_t a, int64_t b, int64_t c, int64_t d) {
        return data_[static_cast<size_t>(((a * shape_[1] + b) * shape_[2] + c) * shape_[3] + d)];
    }
    double at4(int64_t a, int64_t b, int64_t c, int64_t d) const {
        return data_[static_cast<size_t>(((a * shape_[1] + b) * shape_[2] + c) * shape_[3] + d)];
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;
    bool bit_equal(const Tensor& other) const;

    // Elementwise helpers; shapes must match.
    Tensor& add_scaled(const Tensor& other, double scale);  // this += scale * other
    friend Tensor operator+(const Tensor& a, const Tensor& b);
    friend Tensor operator-(const Tensor& a, const Tensor& b);
    friend Tensor operator*(double s, const Tensor& a);

    double max_abs_diff(const Tensor& other) const;

private:
    std::vector<int64_t> shape_;
    std::vector<double> data_;
};

}  // namespace stylefuse

#endif
