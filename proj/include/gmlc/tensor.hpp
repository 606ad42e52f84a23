#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gmlc/error.hpp"

namespace gmlc {

// Dense row-major grid of doubles. The carrier for node/edge attributes,
// parameters and every intermediate value on the tape. Rank 1 and 2 are the
// only shapes the engine produces.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> v;

    Tensor() = default;

    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        v.assign(static_cast<size_t>(checked_numel(shape)), 0.0);
    }

    Tensor(std::vector<int> s, std::vector<double> values) : shape(std::move(s)), v(std::move(values)) {
        if (checked_numel(shape) != static_cast<int64_t>(v.size()))
            throw ShapeError("tensor: " + std::to_string(v.size()) + " values for shape " + shape_str());
    }

    static Tensor scalar(double x) { return Tensor({1}, {x}); }
    static Tensor vec(std::vector<double> values) {
        int n = static_cast<int>(values.size());
        return Tensor({n}, std::move(values));
    }
    static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
    static Tensor full(std::vector<int> s, double x) {
        Tensor t(std::move(s));
        for (double& e : t.v) e = x;
        return t;
    }

    int ndim() const { return static_cast<int>(shape.size()); }
    int extent(int i) const { return shape[static_cast<size_t>(i)]; }
    int64_t numel() const { return static_cast<int64_t>(v.size()); }

    double operator[](int64_t i) const { return v[static_cast<size_t>(i)]; }
    double& operator[](int64_t i) { return v[static_cast<size_t>(i)]; }

    // rank-2 access
    double at2(int r, int c) const { return v[static_cast<size_t>(r) * extent(1) + c]; }
    double& at2(int r, int c) { return v[static_cast<size_t>(r) * extent(1) + c]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    bool all_finite() const {
        for (double e : v)
            if (!std::isfinite(e)) return false;
        return true;
    }

    std::string shape_str() const {
        std::string s = "(";
        for (size_t i = 0; i < shape.size(); ++i) {
            if (i) s += "x";
            s += std::to_string(shape[i]);
        }
        return s + ")";
    }

    static int64_t checked_numel(const std::vector<int>& s) {
        int64_t n = 1;
        for (int e : s) {
            if (e <= 0) throw ShapeError("tensor: non-positive extent " + std::to_string(e));
            n *= e;
        }
        return n;
    }
};

}  // namespace gmlc
