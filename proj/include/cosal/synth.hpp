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
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cosal/error.hpp"
#include "cosal/grid.hpp"
#include "cosal/image_io.hpp"
#include "cosal/manifest.hpp"
#include "cosal/parallel.hpp"
#include "cosal/rng.hpp"

namespace cosal {

struct SynthConfig {
    int num_categories = 12;
    int groups_per_category = 1;
    int group_size = 10;
    int image_size = 128;
    int min_distractors = 1;
    int max_distractors = 2;
    std::uint64_t seed = 0;
};

enum class ShapeKind { kRectangle, kCircle, kTriangle, kDiamond, kRing };

inline constexpr std::array<const char*, 5> kShapeNames = {
        "rectangle", "circle", "triangle", "diamond", "ring"};

struct PaletteColor {
    const char* name;
    std::array<std::uint8_t, 3> rgb;
};

inline constexpr std::array<PaletteColor, 12> kPalette = {{
        {"red", {255, 0, 0}},
        {"green", {0, 255, 0}},
        {"blue", {0, 0, 255}},
        {"yellow", {255, 255, 0}},
        {"cyan", {0, 255, 255}},
        {"magenta", {255, 0, 255}},
        {"orange", {255, 128, 0}},
        {"chartreuse", {128, 255, 0}},
        {"spring", {0, 255, 128}},
        {"azure", {0, 128, 255}},
        {"violet", {128, 0, 255}},
        {"rose", {255, 0, 128}},
}};

inline constexpr int kMaxSynthCategories =
        static_cast<int>(kShapeNames.size() * kPalette.size());

struct SynthCategory {
    ShapeKind shape;
    std::array<std::uint8_t, 3> color;
    std::string name;
};

/// Category index -> (shape, color). Color-major so the first twelve
/// categories already span the full palette.
inline SynthCategory synth_category(int index) {
    if (index < 0 || index >= kMaxSynthCategories)
        throw ConfigError("category index " + std::to_string(index) + " out of range [0," +
                          std::to_string(kMaxSynthCategories) + ")");
    const auto shape = static_cast<ShapeKind>(index / static_cast<int>(kPalette.size()));
    const auto& color = kPalette[static_cast<std::size_t>(index) % kPalette.size()];
    return SynthCategory{shape, color.rgb,
                         std::string(kShapeNames[static_cast<std::size_t>(shape)]) + "_" + color.name};
}

inline void validate_synth_config(const SynthConfig& c) {
    if (c.num_categories < 1 || c.num_categories > kMaxSynthCategories)
        throw ConfigError("num_categories must be in [1," + std::to_string(kMaxSynthCategories) +
                          "], got " + std::to_string(c.num_categories));
    if (c.groups_per_category < 1) throw ConfigError("groups_per_category must be >= 1");
    if (c.group_size < 1) throw ConfigError("group_size must be >= 1");
    if (c.image_size < 64) throw ConfigError("image_size must be >= 64");
    if (c.min_distractors < 0 || c.min_distractors > c.max_distractors)
        throw ConfigError("distractor count range must satisfy 0 <= min <= max");
    if (c.max_distractors > 0 && c.num_categories < 2)
        throw ConfigError("distractors require at least 2 categories");
}

namespace detail {

inline bool shape_contains(ShapeKind kind, double dr, double dc, double s) {
    const double half = 0.5 * s;
    switch (kind) {
        case ShapeKind::kRectangle:
            return std::fabs(dr) <= 0.25 * s && std::fabs(dc) <= half;
        case ShapeKind::kCircle:
            return dr * dr + dc * dc <= half * half;
        case ShapeKind::kTriangle:
            return dr >= -half && dr <= half && std::fabs(dc) <= 0.5 * dr + 0.25 * s;
        case ShapeKind::kDiamond:
            return std::fabs(dr) + std::fabs(dc) <= half;
        case ShapeKind::kRing: {
            const double rr = dr * dr + dc * dc;
            const double inner = 0.6 * half;
            return rr <= half * half && rr >= inner * inner;
        }
    }
    return false;
}

inline std::vector<std::pair<int, int>> rasterize_shape(ShapeKind kind, int cy, int cx, int s,
                                                        int height, int width) {
    std::vector<std::pair<int, int>> pixels;
    const int ext = s / 2 + 1;
    for (int r = std::max(0, cy - ext); r <= std::min(height - 1, cy + ext); ++r)
        for (int c = std::max(0, cx - ext); c <= std::min(width - 1, cx + ext); ++c)
            if (shape_contains(kind, r - cy, c - cx, static_cast<double>(s)))
                pixels.emplace_back(r, c);
    return pixels;
}

/// Smooth value noise: a coarse lattice of uniform offsets, bilinearly
/// interpolated. Lattice values are drawn row-major, so the background is a
/// pure function of the stream state.
inline void fill_background(RgbImage& img, RandomStream& stream) {
    const int cell = std::max(8, img.height / 8);
    const int gh = img.height / cell + 2;
    const int gw = img.width / cell + 2;
    std::vector<double> lattice(static_cast<std::size_t>(gh) * gw);
    for (auto& v : lattice) v = -12.0 + 24.0 * stream.uniform01();
    for (int r = 0; r < img.height; ++r) {
        const double fr = static_cast<double>(r) / cell;
        const int i0 = static_cast<int>(fr);
        const double t = fr - i0;
        for (int c = 0; c < img.width; ++c) {
            const double fc = static_cast<double>(c) / cell;
            const int j0 = static_cast<int>(fc);
            const double u = fc - j0;
            const double v00 = lattice[static_cast<std::size_t>(i0) * gw + j0];
            const double v01 = lattice[static_cast<std::size_t>(i0) * gw + j0 + 1];
            const double v10 = lattice[static_cast<std::size_t>(i0 + 1) * gw + j0];
            const double v11 = lattice[static_cast<std::size_t>(i0 + 1) * gw + j0 + 1];
            const double n = (1 - t) * ((1 - u) * v00 + u * v01) + t * ((1 - u) * v10 + u * v11);
            long g = std::lround(128.0 + n);
            g = std::min(255L, std::max(0L, g));
            const auto v = static_cast<std::uint8_t>(g);
            img.at(r, c) = {v, v, v};
        }
    }
}

struct PlacedShape {
    std::vector<std::pair<int, int>> pixels;
    int category_index = -1;
};

/// Draws (size, center) until the shape fits in-bounds and overlaps nothing
/// already placed. Consumes three variates per attempt.
inline PlacedShape place_shape(int category_index, int size_lo, int size_hi, const RgbImage& img,
                               const std::vector<std::uint8_t>& occupied, RandomStream& stream) {
    constexpr int kAttempts = 200;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        const int s = static_cast<int>(stream.uniform_range(size_lo, size_hi));
        const int m = s / 2 + 2;
        if (img.height - 1 - m < m || img.width - 1 - m < m) continue;
        const int cy = static_cast<int>(stream.uniform_range(m, img.height - 1 - m));
        const int cx = static_cast<int>(stream.uniform_range(m, img.width - 1 - m));
        auto pixels = rasterize_shape(synth_category(category_index).shape, cy, cx, s, img.height,
                                      img.width);
        if (pixels.empty()) continue;
        bool clash = false;
        for (const auto& [r, c] : pixels) {
            if (occupied[static_cast<std::size_t>(r) * img.width + c]) {
                clash = true;
                break;
            }
        }
        if (!clash) return PlacedShape{std::move(pixels), category_index};
    }
    throw DataError("could not place a shape of category " + synth_category(category_index).name +
                    " after " + std::to_string(kAttempts) + " attempts (image too crowded)");
}

struct RenderedImage {
    RgbImage image{1, 1};
    BinaryMask mask{1, 1, 0};
    std::vector<std::string> tags;
};

inline RenderedImage render_synth_image(const SynthConfig& config, int category_index,
                                        RandomStream& stream) {
    RenderedImage out;
    out.image = RgbImage(config.image_size, config.image_size);
    fill_background(out.image, stream);
    std::vector<std::uint8_t> occupied(
            static_cast<std::size_t>(config.image_size) * config.image_size, 0);

    const int co_lo = std::max(10, config.image_size * 28 / 128);
    const int co_hi = std::max(co_lo, config.image_size * 44 / 128);
    const int di_lo = std::max(6, config.image_size * 12 / 128);
    const int di_hi = std::max(di_lo, config.image_size * 18 / 128);

    auto commit = [&](const PlacedShape& shape) {
        const auto color = synth_category(shape.category_index).color;
        for (const auto& [r, c] : shape.pixels) {
            out.image.at(r, c) = color;
            occupied[static_cast<std::size_t>(r) * config.image_size + c] = 1;
        }
    };

    PlacedShape co = place_shape(category_index, co_lo, co_hi, out.image, occupied, stream);
    commit(co);
    out.mask = BinaryMask(config.image_size, config.image_size, 0);
    for (const auto& [r, c] : co.pixels) out.mask.set(r, c, 1);

    out.tags.push_back(synth_category(category_index).name);
    const int count =
            static_cast<int>(stream.uniform_range(config.min_distractors, config.max_distractors));
    for (int d = 0; d < count; ++d) {
        auto pick = static_cast<int>(stream.uniform_int(static_cast<std::uint64_t>(config.num_categories) - 1));
        if (pick >= category_index) ++pick;
        PlacedShape shape = place_shape(pick, di_lo, di_hi, out.image, occupied, stream);
        commit(shape);
        out.tags.push_back(synth_category(pick).name);
    }
    out.tags = normalize_tags(std::move(out.tags));
    return out;
}

} // namespace detail

/// Renders the dataset under out_dir (images/, masks/, manifest.json) and
/// returns the saved manifest. Every image draws from a stream keyed by
/// (seed, group index, image index), so output bytes are identical for any
/// worker count.
inline DatasetManifest generate_synthetic_dataset(const SynthConfig& config,
                                                  const std::filesystem::path& out_dir,
                                                  unsigned workers = 1) {
    validate_synth_config(config);
    std::filesystem::create_directories(out_dir);

    struct ImageJob {
        int category_index;
        std::size_t group_index;
        std::size_t image_index;
        std::string group_id;
        std::string image_id;
    };
    std::vector<ImageJob> jobs;
    DatasetManifest manifest;
    manifest.root = ".";
    for (int cat = 0; cat < config.num_categories; ++cat) {
        const SynthCategory category = synth_category(cat);
        for (int g = 0; g < config.groups_per_category; ++g) {
            GroupEntry group;
            group.group_id = category.name + "_g" + std::to_string(g);
            group.category = category.name;
            const std::size_t group_index = manifest.groups.size();
            for (int i = 0; i < config.group_size; ++i) {
                std::string image_id = group.group_id + "_img" + std::to_string(i);
                jobs.push_back(ImageJob{cat, group_index, static_cast<std::size_t>(i),
                                        group.group_id, image_id});
                ImageEntry e;
                e.image_id = image_id;
                e.image_path = "images/" + group.group_id + "/" + image_id + ".png";
                e.mask_path = "masks/" + group.group_id + "/" + image_id + ".png";
                e.width = config.image_size;
                e.height = config.image_size;
                group.images.push_back(std::move(e));
            }
            manifest.groups.push_back(std::move(group));
        }
    }

    std::vector<std::vector<std::string>> tags_by_job(jobs.size());
    parallel_for(jobs.size(), workers, [&](std::size_t j) {
        const ImageJob& job = jobs[j];
        RandomStream stream = RandomStream::derive(config.seed, job.group_index, job.image_index);
        detail::RenderedImage rendered = detail::render_synth_image(config, job.category_index, stream);
        save_rgb_image(rendered.image,
                       out_dir / "images" / job.group_id / (job.image_id + ".png"));
        save_binary_mask(rendered.mask, out_dir / "masks" / job.group_id / (job.image_id + ".png"));
        tags_by_job[j] = std::move(rendered.tags);
    });
    for (std::size_t j = 0; j < jobs.size(); ++j)
        manifest.groups[jobs[j].group_index].images[jobs[j].image_index].tags =
                std::move(tags_by_job[j]);

    save_manifest(manifest, out_dir / "manifest.json");
    validate_manifest(manifest, out_dir);
    return manifest;
}

} // namespace cosal
