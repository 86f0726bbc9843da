// Copyright 2026 The cosalbench authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cosal/error.hpp"

namespace cosal {

/// Dense row-major 2D grid.
template <class T>
class Grid {
public:
    Grid() = default;
    Grid(int height, int width, T fill = T{}) : height_(height), width_(width) {
        if (height <= 0 || width <= 0)
            throw DataError("grid dimensions must be positive, got " + std::to_string(height) +
                            "x" + std::to_string(width));
        values_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), fill);
    }

    int height() const { return height_; }
    int width() const { return width_; }
    std::size_t size() const { return values_.size(); }
    bool same_shape(const Grid& other) const {
        return height_ == other.height_ && width_ == other.width_;
    }

    T& at(int r, int c) { return values_[static_cast<std::size_t>(r) * width_ + c]; }
    const T& at(int r, int c) const { return values_[static_cast<std::size_t>(r) * width_ + c]; }
    T& operator[](std::size_t i) { return values_[i]; }
    const T& operator[](std::size_t i) const { return values_[i]; }

    std::span<T> values() { return values_; }
    std::span<const T> values() const { return values_; }
    T* data() { return values_.data(); }
    const T* data() const { return values_.data(); }

    bool operator==(const Grid&) const = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<T> values_;
};

inline void require_same_shape(int ha, int wa, int hb, int wb, const std::string& what) {
    if (ha != hb || wa != wb)
        throw DataError(what + ": dimension mismatch " + std::to_string(ha) + "x" +
                        std::to_string(wa) + " vs " + std::to_string(hb) + "x" +
                        std::to_string(wb));
}

/// Per-pixel co-saliency probability grid; every value lies in [0, 1].
class ProbMap {
public:
    ProbMap() = default;
    explicit ProbMap(Grid<double> g) : grid_(std::move(g)) { check(); }
    ProbMap(int height, int width, double fill = 0.0) : grid_(height, width, fill) { check(); }

    int height() const { return grid_.height(); }
    int width() const { return grid_.width(); }
    std::size_t size() const { return grid_.size(); }
    double at(int r, int c) const { return grid_.at(r, c); }
    double operator[](std::size_t i) const { return grid_[i]; }
    std::span<const double> values() const { return grid_.values(); }

    void set(int r, int c, double v) {
        check_value(v);
        grid_.at(r, c) = v;
    }
    void set(std::size_t i, double v) {
        check_value(v);
        grid_[i] = v;
    }

    const Grid<double>& grid() const { return grid_; }

private:
    static void check_value(double v) {
        if (!(v >= 0.0 && v <= 1.0))
            throw DataError("probability value out of [0,1]: " + std::to_string(v));
    }
    void check() const {
        for (double v : grid_.values()) check_value(v);
    }
    Grid<double> grid_;
};

/// Strictly binary {0,1} grid: ground truth or binarized prediction.
class BinaryMask {
public:
    BinaryMask() = default;
    explicit BinaryMask(Grid<std::uint8_t> g) : grid_(std::move(g)) { check(); }
    BinaryMask(int height, int width, std::uint8_t fill = 0) : grid_(height, width, fill) { check(); }

    int height() const { return grid_.height(); }
    int width() const { return grid_.width(); }
    std::size_t size() const { return grid_.size(); }
    std::uint8_t at(int r, int c) const { return grid_.at(r, c); }
    std::uint8_t operator[](std::size_t i) const { return grid_[i]; }
    std::span<const std::uint8_t> values() const { return grid_.values(); }

    void set(int r, int c, std::uint8_t v) {
        check_value(v);
        grid_.at(r, c) = v;
    }

    std::size_t foreground_count() const {
        std::size_t n = 0;
        for (auto v : grid_.values()) n += v;
        return n;
    }
    bool empty_foreground() const { return foreground_count() == 0; }

    const Grid<std::uint8_t>& grid() const { return grid_; }

private:
    static void check_value(std::uint8_t v) {
        if (v > 1) throw DataError("mask value not binary: " + std::to_string(int(v)));
    }
    void check() const {
        for (auto v : grid_.values()) check_value(v);
    }
    Grid<std::uint8_t> grid_;
};

/// Interleaved 8-bit RGB raster.
struct RgbImage {
    int height = 0;
    int width = 0;
    std::vector<std::array<std::uint8_t, 3>> pixels;

    RgbImage() = default;
    RgbImage(int h, int w, std::array<std::uint8_t, 3> fill = {0, 0, 0})
        : height(h), width(w),
          pixels(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), fill) {}

    std::array<std::uint8_t, 3>& at(int r, int c) {
        return pixels[static_cast<std::size_t>(r) * width + c];
    }
    const std::array<std::uint8_t, 3>& at(int r, int c) const {
        return pixels[static_cast<std::size_t>(r) * width + c];
    }
};

} // namespace cosal
