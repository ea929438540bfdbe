#include "crnet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crnet/errors.hpp"

namespace crnet {

std::string Shape::str() const {
    std::ostringstream os;
    os << n << "x" << c << "x" << h << "x" << w;
    return os.str();
}

namespace {

void check_shape(const Shape& s) {
    if (s.n == 0 || s.c == 0 || s.h == 0 || s.w == 0) {
        throw ShapeError("tensor shape components must be >= 1, got " + s.str());
    }
}

void check_same(const Shape& a, const Shape& b, const char* op) {
    if (!(a == b)) {
        throw ShapeError(std::string(op) + ": shape " + a.str() + " vs " + b.str());
    }
}

}  // namespace

Tensor4::Tensor4(Shape shape, double fill) : shape_(shape) {
    check_shape(shape_);
    data_.assign(shape_.size(), fill);
}

Tensor4::Tensor4(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
    check_shape(shape_);
    if (data_.size() != shape_.size()) {
        throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                         shape_.str());
    }
}

double Tensor4::at(std::size_t n, std::size_t c, std::size_t i, std::size_t j) const {
    if (n >= shape_.n || c >= shape_.c || i >= shape_.h || j >= shape_.w) {
        throw ShapeError("index out of range for shape " + shape_.str());
    }
    return (*this)(n, c, i, j);
}

void Tensor4::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Tensor4& Tensor4::operator+=(const Tensor4& other) {
    check_same(shape_, other.shape_, "add");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
}

Tensor4& Tensor4::operator-=(const Tensor4& other) {
    check_same(shape_, other.shape_, "sub");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    return *this;
}

Tensor4& Tensor4::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

Tensor4& Tensor4::axpy(double s, const Tensor4& other) {
    check_same(shape_, other.shape_, "axpy");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += s * other.data_[k];
    return *this;
}

Tensor4 Tensor4::slice_batch(std::size_t first, std::size_t count) const {
    if (count == 0 || first + count > shape_.n) {
        throw ShapeError("batch slice out of range for shape " + shape_.str());
    }
    Shape s = shape_;
    s.n = count;
    const std::size_t stride = shape_.c * shape_.plane();
    std::vector<double> out(data_.begin() + static_cast<std::ptrdiff_t>(first * stride),
                            data_.begin() + static_cast<std::ptrdiff_t>((first + count) * stride));
    return Tensor4(s, std::move(out));
}

Tensor4 Tensor4::reshaped(Shape shape) const { return Tensor4(shape, data_); }

Tensor4 operator+(Tensor4 a, const Tensor4& b) { return a += b; }
Tensor4 operator-(Tensor4 a, const Tensor4& b) { return a -= b; }
Tensor4 operator*(double s, Tensor4 a) { return a *= s; }

Tensor4 concat_batch(std::span<const Tensor4> parts) {
    if (parts.empty()) throw ShapeError("concat_batch: no tensors");
    Shape s = parts.front().shape();
    std::vector<double> data;
    data.reserve(s.size() * parts.size());
    for (const Tensor4& p : parts) {
        Shape ps = p.shape();
        if (ps.c != s.c || ps.h != s.h || ps.w != s.w) {
            throw ShapeError("concat_batch: shape " + ps.str() + " vs " + s.str());
        }
        data.insert(data.end(), p.values().begin(), p.values().end());
    }
    s.n = data.size() / (s.c * s.plane());
    return Tensor4(s, std::move(data));
}

double inner(const Tensor4& a, const Tensor4& b) {
    check_same(a.shape(), b.shape(), "inner");
    double acc = 0.0;
    auto x = a.data();
    auto y = b.data();
    for (std::size_t k = 0; k < x.size(); ++k) acc += x[k] * y[k];
    return acc;
}

double sum(const Tensor4& a) {
    double acc = 0.0;
    for (double v : a.data()) acc += v;
    return acc;
}

double norm2_squared(const Tensor4& a) { return inner(a, a); }

double max_abs(const Tensor4& a) {
    double m = 0.0;
    for (double v : a.data()) m = std::max(m, std::abs(v));
    return m;
}

double max_abs_diff(const Tensor4& a, const Tensor4& b) {
    check_same(a.shape(), b.shape(), "max_abs_diff");
    double m = 0.0;
    auto x = a.data();
    auto y = b.data();
    for (std::size_t k = 0; k < x.size(); ++k) m = std::max(m, std::abs(x[k] - y[k]));
    return m;
}

bool all_finite(const Tensor4& a) {
    return std::all_of(a.data().begin(), a.data().end(), [](double v) { return std::isfinite(v); });
}

void check_filter_layout(const Tensor4& w) {
    const Shape& s = w.shape();
    if (s.h != s.w) throw ConfigError("filter kernels must be square, got " + s.str());
    if (s.h % 2 == 0) throw ConfigError("filter kernel size must be odd, got " + std::to_string(s.h));
}

FilterBank::FilterBank(Tensor4 weights) : weights_(std::move(weights)) { check_filter_layout(weights_); }

FilterBank::FilterBank(std::size_t out_channels, std::size_t in_channels, std::size_t k, double fill)
    : FilterBank(Tensor4(Shape{out_channels, in_channels, k, k}, fill)) {}

}  // namespace crnet
