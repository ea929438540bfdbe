#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace crnet {

/// Extent of a batch x channel x height x width array. Every component is >= 1.
struct Shape {
    std::size_t n = 1;
    std::size_t c = 1;
    std::size_t h = 1;
    std::size_t w = 1;

    std::size_t size() const { return n * c * h * w; }
    std::size_t plane() const { return h * w; }
    bool operator==(const Shape&) const = default;
    std::string str() const;
};

/// Dense 4-D array of doubles in NCHW order.
class Tensor4 {
public:
    Tensor4() : Tensor4(Shape{}) {}
    explicit Tensor4(Shape shape, double fill = 0.0);
    Tensor4(Shape shape, std::vector<double> data);

    static Tensor4 zeros(Shape shape) { return Tensor4(shape); }
    static Tensor4 full(Shape shape, double value) { return Tensor4(shape, value); }

    const Shape& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    std::size_t batch() const { return shape_.n; }
    std::size_t channels() const { return shape_.c; }
    std::size_t height() const { return shape_.h; }
    std::size_t width() const { return shape_.w; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator()(std::size_t n, std::size_t c, std::size_t i, std::size_t j) {
        return data_[index(n, c, i, j)];
    }
    double operator()(std::size_t n, std::size_t c, std::size_t i, std::size_t j) const {
        return data_[index(n, c, i, j)];
    }
    /// Bounds-checked access; throws ShapeError when outside the shape.
    double at(std::size_t n, std::size_t c, std::size_t i, std::size_t j) const;

    double* plane(std::size_t n, std::size_t c) { return data_.data() + (n * shape_.c + c) * shape_.plane(); }
    const double* plane(std::size_t n, std::size_t c) const {
        return data_.data() + (n * shape_.c + c) * shape_.plane();
    }

    void fill(double value);
    Tensor4& operator+=(const Tensor4& other);
    Tensor4& operator-=(const Tensor4& other);
    Tensor4& operator*=(double s);
    /// this += s * other
    Tensor4& axpy(double s, const Tensor4& other);

    /// Copy of images [first, first + count) along the batch axis.
    Tensor4 slice_batch(std::size_t first, std::size_t count) const;
    Tensor4 reshaped(Shape shape) const;

    bool operator==(const Tensor4& other) const = default;

private:
    std::size_t index(std::size_t n, std::size_t c, std::size_t i, std::size_t j) const {
        return ((n * shape_.c + c) * shape_.h + i) * shape_.w + j;
    }

    Shape shape_;
    std::vector<double> data_;
};

Tensor4 operator+(Tensor4 a, const Tensor4& b);
Tensor4 operator-(Tensor4 a, const Tensor4& b);
Tensor4 operator*(double s, Tensor4 a);

/// Stack equally-shaped tensors along the batch axis.
Tensor4 concat_batch(std::span<const Tensor4> parts);

double inner(const Tensor4& a, const Tensor4& b);
double sum(const Tensor4& a);
double norm2_squared(const Tensor4& a);
double max_abs(const Tensor4& a);
double max_abs_diff(const Tensor4& a, const Tensor4& b);
bool all_finite(const Tensor4& a);

/// Convolution weights laid out out_channels x in_channels x k x k with k odd.
class FilterBank {
public:
    explicit FilterBank(Tensor4 weights);
    FilterBank(std::size_t out_channels, std::size_t in_channels, std::size_t k, double fill = 0.0);

    const Tensor4& weights() const { return weights_; }
    Tensor4& weights() { return weights_; }
    std::size_t out_channels() const { return weights_.shape().n; }
    std::size_t in_channels() const { return weights_.shape().c; }
    std::size_t kernel_size() const { return weights_.shape().h; }

    double& operator()(std::size_t o, std::size_t i, std::size_t u, std::size_t v) { return weights_(o, i, u, v); }
    double operator()(std::size_t o, std::size_t i, std::size_t u, std::size_t v) const {
        return weights_(o, i, u, v);
    }

    bool operator==(const FilterBank&) const = default;

private:
    Tensor4 weights_;
};

/// Throws ConfigError unless `w` is a valid filter-bank layout (square, odd spatial extent).
void check_filter_layout(const Tensor4& w);

}  // namespace crnet
