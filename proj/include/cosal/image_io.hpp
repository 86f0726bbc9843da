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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "cosal/error.hpp"
#include "cosal/grid.hpp"

namespace cosal {

namespace detail {

inline cv::Mat read_single_channel(const std::filesystem::path& path) {
    cv::Mat raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (raw.empty()) throw DataError("cannot read raster file: " + path.string());
    if (raw.channels() != 1)
        throw DataError("expected single-channel 8-bit raster, got " +
                        std::to_string(raw.channels()) + " channels: " + path.string());
    if (raw.depth() != CV_8U)
        throw DataError("expected 8-bit raster: " + path.string());
    return raw;
}

} // namespace detail

/// Loads an 8-bit grayscale raster as a probability map; values are exactly
/// pixel/255.
inline ProbMap load_prob_map(const std::filesystem::path& path) {
    cv::Mat raw = detail::read_single_channel(path);
    Grid<double> g(raw.rows, raw.cols);
    for (int r = 0; r < raw.rows; ++r) {
        const std::uint8_t* row = raw.ptr<std::uint8_t>(r);
        for (int c = 0; c < raw.cols; ++c) g.at(r, c) = static_cast<double>(row[c]) / 255.0;
    }
    return ProbMap(std::move(g));
}

/// Loads an 8-bit grayscale raster as a binary mask. Every pixel must be 0
/// or 255; anything else is rejected.
inline BinaryMask load_binary_mask(const std::filesystem::path& path) {
    cv::Mat raw = detail::read_single_channel(path);
    Grid<std::uint8_t> g(raw.rows, raw.cols);
    for (int r = 0; r < raw.rows; ++r) {
        const std::uint8_t* row = raw.ptr<std::uint8_t>(r);
        for (int c = 0; c < raw.cols; ++c) {
            if (row[c] != 0 && row[c] != 255)
                throw DataError("non-binary pixel value " + std::to_string(int(row[c])) +
                                " in mask: " + path.string());
            g.at(r, c) = row[c] == 255 ? 1 : 0;
        }
    }
    return BinaryMask(std::move(g));
}

inline void ensure_parent_dir(const std::filesystem::path& path) {
    auto parent = path.parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
}

/// Writes a probability map as 8-bit grayscale, quantized as round(p*255).
inline void save_prob_map(const ProbMap& map, const std::filesystem::path& path) {
    cv::Mat out(map.height(), map.width(), CV_8UC1);
    for (int r = 0; r < map.height(); ++r) {
        std::uint8_t* row = out.ptr<std::uint8_t>(r);
        for (int c = 0; c < map.width(); ++c)
            row[c] = static_cast<std::uint8_t>(std::lround(map.at(r, c) * 255.0));
    }
    ensure_parent_dir(path);
    if (!cv::imwrite(path.string(), out))
        throw DataError("cannot write raster file: " + path.string());
}

inline void save_binary_mask(const BinaryMask& mask, const std::filesystem::path& path) {
    cv::Mat out(mask.height(), mask.width(), CV_8UC1);
    for (int r = 0; r < mask.height(); ++r) {
        std::uint8_t* row = out.ptr<std::uint8_t>(r);
        for (int c = 0; c < mask.width(); ++c) row[c] = mask.at(r, c) ? 255 : 0;
    }
    ensure_parent_dir(path);
    if (!cv::imwrite(path.string(), out))
        throw DataError("cannot write raster file: " + path.string());
}

inline RgbImage load_rgb_image(const std::filesystem::path& path) {
    cv::Mat raw = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (raw.empty()) throw DataError("cannot read image file: " + path.string());
    RgbImage img(raw.rows, raw.cols);
    for (int r = 0; r < raw.rows; ++r) {
        const cv::Vec3b* row = raw.ptr<cv::Vec3b>(r);
        for (int c = 0; c < raw.cols; ++c) {
            // OpenCV stores BGR.
            img.at(r, c) = {row[c][2], row[c][1], row[c][0]};
        }
    }
    return img;
}

inline void save_rgb_image(const RgbImage& img, const std::filesystem::path& path) {
    cv::Mat out(img.height, img.width, CV_8UC3);
    for (int r = 0; r < img.height; ++r) {
        cv::Vec3b* row = out.ptr<cv::Vec3b>(r);
        for (int c = 0; c < img.width; ++c) {
            const auto& px = img.at(r, c);
            row[c] = cv::Vec3b(px[2], px[1], px[0]);
        }
    }
    ensure_parent_dir(path);
    if (!cv::imwrite(path.string(), out))
        throw DataError("cannot write image file: " + path.string());
}

/// Reads just the dimensions of a raster file.
inline std::pair<int, int> read_image_size(const std::filesystem::path& path) {
    cv::Mat raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (raw.empty()) throw DataError("cannot read raster file: " + path.string());
    return {raw.rows, raw.cols};
}

} // namespace cosal
