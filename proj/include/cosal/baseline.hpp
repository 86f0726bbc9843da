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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cosal/error.hpp"
#include "cosal/grid.hpp"
#include "cosal/image_io.hpp"
#include "cosal/manifest.hpp"
#include "cosal/numeric.hpp"
#include "cosal/parallel.hpp"

namespace cosal {

struct BaselineConfig {
    int bins_per_channel = 8;       // uniform RGB quantization
    double affinity_threshold = 0.25;  // abstain below this consensus peak
    double saliency_gate = 0.5;     // pixels this salient vote and contribute
    double affinity_floor = 0.65;   // non-abstained modulation lower bound
    int blur_radius = 2;            // box half-width for saliency smoothing
};

inline void validate_baseline_config(const BaselineConfig& c) {
    if (c.bins_per_channel < 1 || c.bins_per_channel > 256)
        throw ConfigError("bins_per_channel must lie in [1,256]");
    if (!(c.affinity_threshold >= 0.0 && c.affinity_threshold <= 1.0))
        throw ConfigError("affinity_threshold must lie in [0,1]");
    if (!(c.saliency_gate > 0.0 && c.saliency_gate <= 1.0))
        throw ConfigError("saliency_gate must lie in (0,1]");
    if (!(c.affinity_floor >= 0.0 && c.affinity_floor <= 1.0))
        throw ConfigError("affinity_floor must lie in [0,1]");
    if (c.blur_radius < 0) throw ConfigError("blur_radius must be >= 0");
}

struct ConsensusModel {
    std::vector<double> histogram;  // sums to 1 when support > 0
    int support = 0;                // images that contributed saliency mass
    double affinity_threshold = 0.25;
};

namespace detail {

inline std::size_t color_bin(const std::array<std::uint8_t, 3>& rgb, int bins) {
    const auto b = static_cast<std::size_t>(bins);
    const std::size_t r = static_cast<std::size_t>(rgb[0]) * b >> 8;
    const std::size_t g = static_cast<std::size_t>(rgb[1]) * b >> 8;
    const std::size_t bl = static_cast<std::size_t>(rgb[2]) * b >> 8;
    return (r * b + g) * b + bl;
}

/// Mean over the clamped (2r+1)^2 window via a summed-area table.
inline Grid<double> box_blur(const Grid<double>& in, int radius) {
    if (radius == 0) return in;
    const int h = in.height();
    const int w = in.width();
    std::vector<double> integral(static_cast<std::size_t>(h + 1) * (w + 1), 0.0);
    auto at = [&](int r, int c) -> double& {
        return integral[static_cast<std::size_t>(r) * (w + 1) + c];
    };
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            at(r + 1, c + 1) = in.at(r, c) + at(r, c + 1) + at(r + 1, c) - at(r, c);
    Grid<double> out(h, w);
    for (int r = 0; r < h; ++r) {
        const int r0 = std::max(0, r - radius);
        const int r1 = std::min(h - 1, r + radius);
        for (int c = 0; c < w; ++c) {
            const int c0 = std::max(0, c - radius);
            const int c1 = std::min(w - 1, c + radius);
            const double sum = at(r1 + 1, c1 + 1) - at(r0, c1 + 1) - at(r1 + 1, c0) + at(r0, c0);
            out.at(r, c) = sum / ((r1 - r0 + 1) * (c1 - c0 + 1));
        }
    }
    return out;
}

} // namespace detail

/// Color-contrast saliency: distance of each pixel's color from the image's
/// mean color, box-smoothed, normalized by the maximum. A zero-contrast
/// image yields the all-zero map.
inline ProbMap single_saliency(const RgbImage& image, const BaselineConfig& config = {}) {
    validate_baseline_config(config);
    CompensatedSum sr, sg, sb;
    for (const auto& px : image.pixels) {
        sr.add(px[0]);
        sg.add(px[1]);
        sb.add(px[2]);
    }
    const std::size_t n = image.pixels.size();
    const double mr = sr.mean(n), mg = sg.mean(n), mb = sb.mean(n);

    Grid<double> dist(image.height, image.width);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& px = image.pixels[i];
        const double dr = px[0] - mr, dg = px[1] - mg, db = px[2] - mb;
        dist[i] = std::sqrt(dr * dr + dg * dg + db * db);
    }
    Grid<double> smooth = detail::box_blur(dist, config.blur_radius);
    double max = 0.0;
    for (double v : smooth.values()) max = std::max(max, v);
    if (max == 0.0) return ProbMap(image.height, image.width, 0.0);
    for (auto& v : smooth.values()) v /= max;
    return ProbMap(std::move(smooth));
}

/// Consensus color signature: the mean over contributing images of each
/// image's gated, saliency-weighted, normalized color histogram. Images
/// with no gated saliency mass contribute nothing; if none contribute the
/// histogram falls back to uniform.
inline ConsensusModel group_consensus(const std::vector<const RgbImage*>& images,
                                      const std::vector<const ProbMap*>& saliencies,
                                      const BaselineConfig& config = {}) {
    validate_baseline_config(config);
    if (images.empty() || images.size() != saliencies.size())
        throw DataError("group_consensus needs matching non-empty image/saliency lists");
    const auto bins = static_cast<std::size_t>(config.bins_per_channel);
    const std::size_t total_bins = bins * bins * bins;
    ConsensusModel model;
    model.affinity_threshold = config.affinity_threshold;
    model.histogram.assign(total_bins, 0.0);

    std::vector<double> hist(total_bins);
    for (std::size_t k = 0; k < images.size(); ++k) {
        const RgbImage& img = *images[k];
        const ProbMap& sal = *saliencies[k];
        require_same_shape(img.height, img.width, sal.height(), sal.width(), "group_consensus");
        std::fill(hist.begin(), hist.end(), 0.0);
        double mass = 0.0;
        for (std::size_t i = 0; i < img.pixels.size(); ++i) {
            const double s = sal[i];
            if (s < config.saliency_gate) continue;
            hist[detail::color_bin(img.pixels[i], config.bins_per_channel)] += s;
            mass += s;
        }
        if (mass == 0.0) continue;
        ++model.support;
        for (std::size_t b = 0; b < total_bins; ++b)
            model.histogram[b] += hist[b] / mass;
    }
    if (model.support == 0) {
        std::fill(model.histogram.begin(), model.histogram.end(), 1.0 / total_bins);
    } else {
        for (auto& v : model.histogram) v /= model.support;
    }
    return model;
}

/// Best consensus affinity among the image's gated-salient pixels; the
/// abstention statistic.
inline double best_affinity(const RgbImage& image, const ProbMap& saliency,
                            const ConsensusModel& consensus, const BaselineConfig& config = {}) {
    double best = 0.0;
    for (std::size_t i = 0; i < image.pixels.size(); ++i) {
        if (saliency[i] < config.saliency_gate) continue;
        best = std::max(best,
                        consensus.histogram[detail::color_bin(image.pixels[i],
                                                              config.bins_per_channel)]);
    }
    return best;
}

/// Group-aware prediction: saliency modulated by the consensus affinity of
/// each pixel's color (affinity_floor bounds the modulation from below),
/// renormalized by its maximum. When the image's best affinity falls below
/// the abstention threshold the output is the all-zero map.
inline ProbMap co_saliency(const RgbImage& image, const ProbMap& saliency,
                           const ConsensusModel& consensus, const BaselineConfig& config = {}) {
    validate_baseline_config(config);
    require_same_shape(image.height, image.width, saliency.height(), saliency.width(),
                       "co_saliency");
    if (best_affinity(image, saliency, consensus, config) < consensus.affinity_threshold)
        return ProbMap(image.height, image.width, 0.0);

    double peak = 0.0;
    for (double v : consensus.histogram) peak = std::max(peak, v);
    Grid<double> out(image.height, image.width);
    double max = 0.0;
    for (std::size_t i = 0; i < image.pixels.size(); ++i) {
        const double affinity =
                consensus.histogram[detail::color_bin(image.pixels[i], config.bins_per_channel)] /
                peak;
        out[i] = saliency[i] * (config.affinity_floor + (1.0 - config.affinity_floor) * affinity);
        max = std::max(max, out[i]);
    }
    if (max == 0.0) return ProbMap(image.height, image.width, 0.0);
    for (auto& v : out.values()) v /= max;
    return ProbMap(std::move(out));
}

enum class PredictorMode { kCoSaliency, kSingle };

inline const char* to_string(PredictorMode m) {
    return m == PredictorMode::kCoSaliency ? "co" : "single";
}

inline PredictorMode predictor_mode_from_string(const std::string& s) {
    if (s == "co") return PredictorMode::kCoSaliency;
    if (s == "single") return PredictorMode::kSingle;
    throw ConfigError("unknown predictor mode: " + s + " (expected co or single)");
}

/// Runs the predictor over every manifest group and writes one map per
/// image to out_dir/<group_id>/<image_id>.png. Saliency and co-saliency
/// stages run parallel per image; the consensus reduction is sequential in
/// group order.
inline void predict_dataset(const DatasetManifest& manifest, const std::filesystem::path& base_dir,
                            const std::filesystem::path& out_dir, const BaselineConfig& config = {},
                            PredictorMode mode = PredictorMode::kCoSaliency,
                            unsigned workers = 1) {
    validate_baseline_config(config);
    for (const auto& g : manifest.groups) {
        std::vector<RgbImage> images(g.images.size());
        std::vector<ProbMap> saliencies(g.images.size());
        parallel_for(g.images.size(), workers, [&](std::size_t i) {
            images[i] = load_rgb_image(base_dir / g.images[i].image_path);
            saliencies[i] = single_saliency(images[i], config);
        });
        ConsensusModel consensus;
        if (mode == PredictorMode::kCoSaliency) {
            std::vector<const RgbImage*> image_ptrs;
            std::vector<const ProbMap*> saliency_ptrs;
            for (std::size_t i = 0; i < images.size(); ++i) {
                image_ptrs.push_back(&images[i]);
                saliency_ptrs.push_back(&saliencies[i]);
            }
            consensus = group_consensus(image_ptrs, saliency_ptrs, config);
        }
        parallel_for(g.images.size(), workers, [&](std::size_t i) {
            const ProbMap out = mode == PredictorMode::kCoSaliency
                                        ? co_saliency(images[i], saliencies[i], consensus, config)
                                        : saliencies[i];
            save_prob_map(out, out_dir / g.group_id / (g.images[i].image_id + ".png"));
        });
    }
}

} // namespace cosal
