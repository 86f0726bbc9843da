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

#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>

#include "cosal/baseline.hpp"
#include "cosal/metrics.hpp"
#include "test_util.hpp"

using namespace cosal;
using testutil::TempDir;

namespace {

constexpr std::array<std::uint8_t, 3> kGray = {120, 120, 120};
constexpr std::array<std::uint8_t, 3> kRed = {255, 0, 0};
constexpr std::array<std::uint8_t, 3> kGreen = {0, 255, 0};
constexpr std::array<std::uint8_t, 3> kBlue = {0, 0, 255};
constexpr std::array<std::uint8_t, 3> kYellow = {255, 255, 0};
constexpr std::array<std::uint8_t, 3> kMagenta = {255, 0, 255};

/// 24x24 gray canvas with a 6x6 colored square whose top-left corner is at
/// (r0, c0); the companion mask marks the square.
RgbImage square_image(std::array<std::uint8_t, 3> color, int r0 = 9, int c0 = 9) {
    RgbImage img(24, 24, kGray);
    for (int r = r0; r < r0 + 6; ++r)
        for (int c = c0; c < c0 + 6; ++c) img.at(r, c) = color;
    return img;
}

BinaryMask square_mask(int r0 = 9, int c0 = 9) {
    Grid<std::uint8_t> g(24, 24, 0);
    for (int r = r0; r < r0 + 6; ++r)
        for (int c = c0; c < c0 + 6; ++c) g.at(r, c) = 1;
    return BinaryMask(std::move(g));
}

RgbImage stripe_image(int red_pixels, int total) {
    RgbImage img(1, total);
    for (int c = 0; c < total; ++c) img.at(0, c) = c < red_pixels ? kRed : kBlue;
    return img;
}

} // namespace

TEST_CASE("baseline config validation", "[baseline]") {
    BaselineConfig bad;
    bad.bins_per_channel = 0;
    REQUIRE_THROWS_AS(validate_baseline_config(bad), ConfigError);
    bad = BaselineConfig{};
    bad.bins_per_channel = 257;
    REQUIRE_THROWS_AS(validate_baseline_config(bad), ConfigError);
    bad = BaselineConfig{};
    bad.affinity_threshold = 1.2;
    REQUIRE_THROWS_AS(validate_baseline_config(bad), ConfigError);
    bad = BaselineConfig{};
    bad.saliency_gate = 0.0;
    REQUIRE_THROWS_AS(validate_baseline_config(bad), ConfigError);
    bad = BaselineConfig{};
    bad.affinity_floor = -0.1;
    REQUIRE_THROWS_AS(validate_baseline_config(bad), ConfigError);
    bad = BaselineConfig{};
    bad.blur_radius = -1;
    REQUIRE_THROWS_AS(validate_baseline_config(bad), ConfigError);
    REQUIRE_NOTHROW(validate_baseline_config(BaselineConfig{}));
}

TEST_CASE("color_bin quantizes channels independently", "[baseline]") {
    REQUIRE(detail::color_bin(kRed, 8) == 448);
    REQUIRE(detail::color_bin(kGreen, 8) == 56);
    REQUIRE(detail::color_bin(kBlue, 8) == 7);
    REQUIRE(detail::color_bin(kGray, 8) == (3 * 8 + 3) * 8 + 3);
    REQUIRE(detail::color_bin({255, 255, 255}, 8) == 511);
    REQUIRE(detail::color_bin({0, 0, 0}, 8) == 0);
    REQUIRE(detail::color_bin({255, 255, 255}, 1) == 0);
}

TEST_CASE("single saliency of a flat image is exactly zero", "[baseline]") {
    const ProbMap s = single_saliency(RgbImage(8, 8, kGray));
    for (double v : s.values()) REQUIRE(v == 0.0);
}

TEST_CASE("single saliency highlights a contrasting square", "[baseline]") {
    const RgbImage img = square_image(kRed);
    const ProbMap s = single_saliency(img);
    double max = 0.0;
    for (double v : s.values()) max = std::max(max, v);
    REQUIRE(max == 1.0);
    REQUIRE(s.at(12, 12) > 1.0 - 1e-9);
    REQUIRE(s.at(0, 0) < 0.3);
    REQUIRE(iou(binarize(s, 0.5), square_mask()) > 0.5);
}

TEST_CASE("single saliency highlights both of two contrasting squares", "[baseline]") {
    RgbImage img(24, 24, kGray);
    for (int r = 3; r < 9; ++r)
        for (int c = 3; c < 9; ++c) img.at(r, c) = kRed;
    for (int r = 15; r < 21; ++r)
        for (int c = 15; c < 21; ++c) img.at(r, c) = kBlue;
    const ProbMap s = single_saliency(img);
    REQUIRE(s.at(6, 6) > 0.5);
    REQUIRE(s.at(18, 18) > 0.5);
    REQUIRE(s.at(12, 0) < 0.4);
}

TEST_CASE("group consensus accumulates gated saliency-weighted histograms", "[baseline]") {
    const RgbImage img = stripe_image(7, 10);
    const ProbMap sal(1, 10, 1.0);
    const ConsensusModel model = group_consensus({&img}, {&sal});
    REQUIRE(model.support == 1);
    REQUIRE(model.histogram[448] == 0.7);
    REQUIRE(model.histogram[7] == 0.3);
    CompensatedSum total;
    for (double v : model.histogram) total.add(v);
    REQUIRE(total.value() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("images without gated saliency mass do not contribute", "[baseline]") {
    const RgbImage contributes = stripe_image(10, 10);
    const ProbMap hot(1, 10, 1.0);
    const RgbImage silent = stripe_image(0, 10);
    const ProbMap cold(1, 10, 0.2);  // below the 0.5 gate everywhere

    const ConsensusModel model = group_consensus({&contributes, &silent}, {&hot, &cold});
    REQUIRE(model.support == 1);
    REQUIRE(model.histogram[448] == 1.0);
    REQUIRE(model.histogram[7] == 0.0);
}

TEST_CASE("consensus falls back to uniform when nothing contributes", "[baseline]") {
    const RgbImage img = stripe_image(5, 10);
    const ProbMap cold(1, 10, 0.1);
    const ConsensusModel model = group_consensus({&img}, {&cold});
    REQUIRE(model.support == 0);
    for (double v : model.histogram) REQUIRE(v == 1.0 / 512.0);
}

TEST_CASE("group consensus input validation", "[baseline]") {
    REQUIRE_THROWS_AS(group_consensus({}, {}), DataError);
    const RgbImage img = stripe_image(5, 10);
    const ProbMap sal(1, 10, 1.0);
    REQUIRE_THROWS_AS(group_consensus({&img}, {}), DataError);
    const ProbMap wrong_shape(2, 10, 1.0);
    REQUIRE_THROWS_AS(group_consensus({&img}, {&wrong_shape}), DataError);
}

TEST_CASE("best affinity reflects consensus support for the image's colors", "[baseline]") {
    const RgbImage red_img = square_image(kRed);
    const ProbMap red_sal = single_saliency(red_img);
    const ConsensusModel model = group_consensus({&red_img}, {&red_sal});

    REQUIRE(best_affinity(red_img, red_sal, model) == 1.0);

    const RgbImage blue_img = square_image(kBlue);
    const ProbMap blue_sal = single_saliency(blue_img);
    REQUIRE(best_affinity(blue_img, blue_sal, model) == 0.0);
}

TEST_CASE("co-saliency abstains on images foreign to the consensus", "[baseline]") {
    const RgbImage red_img = square_image(kRed);
    const ProbMap red_sal = single_saliency(red_img);
    const ConsensusModel model = group_consensus({&red_img}, {&red_sal});

    const RgbImage blue_img = square_image(kBlue);
    const ProbMap blue_sal = single_saliency(blue_img);
    const ProbMap out = co_saliency(blue_img, blue_sal, model);
    for (double v : out.values()) REQUIRE(v == 0.0);
}

TEST_CASE("co-saliency tracks single saliency on a consistent group", "[baseline]") {
    const RgbImage img = square_image(kRed);
    const ProbMap sal = single_saliency(img);
    std::vector<const RgbImage*> images = {&img, &img, &img};
    std::vector<const ProbMap*> sals = {&sal, &sal, &sal};
    const ConsensusModel model = group_consensus(images, sals);
    REQUIRE(model.support == 3);
    REQUIRE(model.histogram[448] == Catch::Approx(1.0).margin(1e-12));

    const ProbMap co = co_saliency(img, sal, model);
    REQUIRE(co.at(12, 12) == Catch::Approx(sal.at(12, 12)).margin(1e-9));
    REQUIRE(iou(binarize(co, 0.5), square_mask()) > 0.5);
    // Off-square pixels keep at least the floor share of their saliency.
    REQUIRE(co.at(0, 0) >= 0.65 * sal.at(0, 0) - 1e-9);
}

TEST_CASE("distinct-color groups abstain everywhere", "[baseline]") {
    const std::array<std::array<std::uint8_t, 3>, 5> colors = {kRed, kGreen, kBlue, kYellow,
                                                               kMagenta};
    std::vector<RgbImage> images;
    std::vector<ProbMap> sals;
    for (const auto& color : colors) {
        images.push_back(square_image(color));
        sals.push_back(single_saliency(images.back()));
    }
    std::vector<const RgbImage*> image_ptrs;
    std::vector<const ProbMap*> sal_ptrs;
    for (std::size_t i = 0; i < images.size(); ++i) {
        image_ptrs.push_back(&images[i]);
        sal_ptrs.push_back(&sals[i]);
    }
    const ConsensusModel model = group_consensus(image_ptrs, sal_ptrs);
    REQUIRE(model.support == 5);

    const BinaryMask zero_gt(24, 24, 0);
    for (std::size_t i = 0; i < images.size(); ++i) {
        REQUIRE(best_affinity(images[i], sals[i], model) == Catch::Approx(0.2).margin(1e-12));
        const ProbMap co = co_saliency(images[i], sals[i], model);
        for (double v : co.values()) REQUIRE(v == 0.0);
        REQUIRE(mae(co, zero_gt) <= mae(sals[i], zero_gt));
    }
}

TEST_CASE("predictor mode parsing", "[baseline]") {
    REQUIRE(predictor_mode_from_string("co") == PredictorMode::kCoSaliency);
    REQUIRE(predictor_mode_from_string("single") == PredictorMode::kSingle);
    REQUIRE_THROWS_AS(predictor_mode_from_string("fancy"), ConfigError);
    REQUIRE(std::string(to_string(PredictorMode::kCoSaliency)) == "co");
    REQUIRE(std::string(to_string(PredictorMode::kSingle)) == "single");
}

TEST_CASE("predict_dataset writes one map per image and is worker stable", "[baseline]") {
    TempDir tmp;
    DatasetManifest m;
    m.root = ".";
    GroupEntry g;
    g.group_id = "reds";
    g.category = "reds";
    for (int i = 0; i < 3; ++i) {
        const RgbImage img = square_image(kRed, 5 + 4 * i, 5 + 4 * i);
        ImageEntry e;
        e.image_id = "reds_img" + std::to_string(i);
        e.image_path = "images/" + e.image_id + ".png";
        e.mask_path = "masks/" + e.image_id + ".png";
        e.width = 24;
        e.height = 24;
        e.tags = {"reds"};
        save_rgb_image(img, tmp.path() / e.image_path);
        save_binary_mask(square_mask(5 + 4 * i, 5 + 4 * i), tmp.path() / e.mask_path);
        g.images.push_back(e);
    }
    m.groups.push_back(g);
    validate_manifest(m, tmp.path());

    const auto out_co = tmp.path() / "co";
    predict_dataset(m, tmp.path(), out_co, BaselineConfig{}, PredictorMode::kCoSaliency, 1);
    const auto out_co4 = tmp.path() / "co4";
    predict_dataset(m, tmp.path(), out_co4, BaselineConfig{}, PredictorMode::kCoSaliency, 4);
    const auto out_single = tmp.path() / "single";
    predict_dataset(m, tmp.path(), out_single, BaselineConfig{}, PredictorMode::kSingle, 1);

    for (const auto& e : g.images) {
        const auto rel = std::filesystem::path(g.group_id) / (e.image_id + ".png");
        REQUIRE(std::filesystem::exists(out_co / rel));
        REQUIRE(testutil::read_file(out_co / rel) == testutil::read_file(out_co4 / rel));

        const ProbMap single = load_prob_map(out_single / rel);
        const RgbImage img = load_rgb_image(tmp.path() / e.image_path);
        const ProbMap expected = single_saliency(img);
        for (std::size_t i = 0; i < single.size(); ++i) {
            const double q = static_cast<double>(std::lround(expected[i] * 255.0)) / 255.0;
            REQUIRE(single[i] == q);
        }
    }
}
