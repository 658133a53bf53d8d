// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "qnet/error.hpp"

namespace qnet::ir {

/// Dense row-major tensor. Feature maps are rank 3 (C, H, W) with an
/// implicit batch of 1; filters are rank 4 (M, N/G, K, K).
template <typename T>
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> dims, T fill = T{})
        : dims_(std::move(dims)), data_(element_count(dims_), fill) {}

    Tensor(std::vector<int> dims, std::vector<T> data)
        : dims_(std::move(dims)), data_(std::move(data)) {
        if (data_.size() != element_count(dims_))
            throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                             " does not match shape product " +
                             std::to_string(element_count(dims_)));
    }

    static std::size_t element_count(const std::vector<int>& dims) {
        if (dims.empty())
            return 0;
        std::size_t n = 1;
        for (int d : dims) {
            if (d < 0)
                throw ShapeError("negative tensor dimension");
            n *= static_cast<std::size_t>(d);
        }
        return n;
    }

    const std::vector<int>& dims() const { return dims_; }
    int dim(std::size_t i) const { return dims_.at(i); }
    std::size_t rank() const { return dims_.size(); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::span<T> data() { return data_; }
    std::span<const T> data() const { return data_; }
    std::vector<T>& storage() { return data_; }
    const std::vector<T>& storage() const { return data_; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    // (C, H, W) access for rank-3 feature maps.
    T& at(int c, int h, int w) { return data_[index3(c, h, w)]; }
    const T& at(int c, int h, int w) const { return data_[index3(c, h, w)]; }

    int channels() const { return dims_.at(0); }
    int height() const { return dims_.size() > 1 ? dims_[1] : 1; }
    int width() const { return dims_.size() > 2 ? dims_[2] : 1; }

    bool operator==(const Tensor&) const = default;

private:
    std::size_t index3(int c, int h, int w) const {
        return (static_cast<std::size_t>(c) * height() + h) * width() + w;
    }

    std::vector<int> dims_;
    std::vector<T> data_;
};

using FloatTensor = Tensor<float>;
using IntTensor = Tensor<std::int32_t>;

std::string shape_string(const std::vector<int>& dims);

} // namespace qnet::ir
