#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <vector>

#include "sgan/rng.hpp"

namespace sgan {

// Dense row-major matrix of doubles. Vectors are 1xN or Nx1; scalars 1x1.
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
    Tensor(int r, int c, std::vector<double> d) : rows(r), cols(c), data(std::move(d)) {
        if (data.size() != static_cast<std::size_t>(r) * c)
            throw std::invalid_argument("tensor: data size does not match shape");
    }

    static Tensor scalar(double v) {
        Tensor t(1, 1);
        t.data[0] = v;
        return t;
    }

    static Tensor row(std::initializer_list<double> v) {
        Tensor t(1, static_cast<int>(v.size()));
        t.data.assign(v);
        return t;
    }

    static Tensor randn(int r, int c, Rng& rng, double mean = 0.0, double stddev = 1.0) {
        Tensor t(r, c);
        for (auto& x : t.data) x = rng.gaussian(mean, stddev);
        return t;
    }

    double& at(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

    std::size_t size() const { return data.size(); }

    void resize(int r, int c) {
        rows = r;
        cols = c;
        data.assign(static_cast<std::size_t>(r) * c, 0.0);
    }

    bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
};

}  // namespace sgan
