#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "cdbin/image.hpp"

namespace cdbin::nn {

/// Dense N-dimensional array (rank <= 4, NCHW convention for rank 4).
template <typename Real>
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> shape, Real fill = Real(0)) : shape_(std::move(shape)) {
        validateShape();
        data_.assign(count(), fill);
    }

    static Tensor fromData(std::vector<int> shape, std::vector<Real> data) {
        Tensor t;
        t.shape_ = std::move(shape);
        t.validateShape();
        if (data.size() != t.count())
            throw Error("Tensor: data length does not match shape");
        t.data_ = std::move(data);
        return t;
    }

    static Tensor scalar(Real v) { return fromData({1}, {v}); }

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[i]; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    Real* data() { return data_.data(); }
    const Real* data() const { return data_.data(); }
    Real& operator[](std::size_t i) { return data_[i]; }
    Real operator[](std::size_t i) const { return data_[i]; }

    // NCHW accessors.
    Real& at4(int n, int c, int y, int x) {
        return data_[((static_cast<std::size_t>(n) * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
    }
    Real at4(int n, int c, int y, int x) const {
        return data_[((static_cast<std::size_t>(n) * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
    }
    Real& at2(int i, int j) { return data_[static_cast<std::size_t>(i) * shape_[1] + j]; }
    Real at2(int i, int j) const { return data_[static_cast<std::size_t>(i) * shape_[1] + j]; }

    bool sameShape(const Tensor& o) const { return shape_ == o.shape_; }

    std::string shapeString() const {
        std::string s = "(";
        for (std::size_t i = 0; i < shape_.size(); ++i)
            s += (i ? "," : "") + std::to_string(shape_[i]);
        return s + ")";
    }

    void fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

    template <typename Other>
    Tensor<Other> cast() const {
        std::vector<Other> d(data_.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<Other>(data_[i]);
        return Tensor<Other>::fromData(shape_, std::move(d));
    }

private:
    std::size_t count() const {
        std::size_t n = 1;
        for (int d : shape_) n *= static_cast<std::size_t>(d);
        return n;
    }
    void validateShape() const {
        if (shape_.empty() || shape_.size() > 4) throw Error("Tensor: rank must be 1..4");
        for (int d : shape_)
            if (d <= 0) throw Error("Tensor: dimensions must be positive");
    }

    std::vector<int> shape_;
    std::vector<Real> data_;
};

enum class ParamRole { Kernel, Bias, BnGamma, BnBeta };

/// Learnable tensor: value plus an accumulated gradient of the same shape.
template <typename Real>
struct Param {
    Tensor<Real> value;
    Tensor<Real> grad;
    ParamRole role = ParamRole::Kernel;

    Param() = default;
    Param(Tensor<Real> v, ParamRole r) : value(std::move(v)), role(r) {
        grad = Tensor<Real>(value.shape());
    }

    void zeroGrad() { grad.fill(Real(0)); }
};

} // namespace cdbin::nn
