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
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "cosal/error.hpp"
#include "cosal/grid.hpp"
#include "cosal/image_io.hpp"
#include "cosal/manifest.hpp"
#include "cosal/metrics.hpp"
#include "cosal/numeric.hpp"
#include "cosal/parallel.hpp"

namespace cosal {

/// Confidence domain of the binning. Two-class max-confidence lives in
/// [0.5, 1]; raw probabilities live in [0, 1].
enum class ConfidenceDomain { kMaxConfidence, kRaw };

inline const char* to_string(ConfidenceDomain d) {
    return d == ConfidenceDomain::kMaxConfidence ? "max-confidence" : "raw";
}

struct ConfidenceSample {
    double confidence = 0.0;
    bool correct = false;
};

struct ReliabilityBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    double mean_confidence = 0.0;
    double mean_accuracy = 0.0;
};

struct ReliabilityDiagram {
    std::vector<ReliabilityBin> bins;
    double ece = 0.0;
    int num_bins = 0;
    std::size_t total = 0;
    double domain_lo = 0.5;
    double domain_hi = 1.0;
};

struct CalibrationConfig {
    int bins = 10;
    ConfidenceDomain domain = ConfidenceDomain::kMaxConfidence;
    std::size_t stride = 1;  // keep pixels whose flat index is a multiple
};

/// Per-pixel two-class confidence/correctness: predicted label is
/// p >= 0.5, confidence is max(p, 1 - p).
inline std::vector<ConfidenceSample> pixel_confidence(const ProbMap& p, const BinaryMask& gt) {
    require_same_shape(p.height(), p.width(), gt.height(), gt.width(), "pixel_confidence");
    std::vector<ConfidenceSample> out;
    out.reserve(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const bool label = p[i] >= 0.5;
        out.push_back(ConfidenceSample{label ? p[i] : 1.0 - p[i],
                                       label == static_cast<bool>(gt[i])});
    }
    return out;
}

/// Equal-width confidence binning with deterministic, mergeable partial
/// state: per-image accumulators are merged in manifest order, so the
/// diagram never depends on the worker count.
class ECEAccumulator {
public:
    ECEAccumulator(int num_bins, ConfidenceDomain domain)
        : num_bins_(num_bins), domain_(domain),
          lo_(domain == ConfidenceDomain::kMaxConfidence ? 0.5 : 0.0),
          counts_(static_cast<std::size_t>(num_bins), 0),
          correct_(static_cast<std::size_t>(num_bins), 0),
          conf_sums_(static_cast<std::size_t>(num_bins), 0.0L) {
        if (num_bins < 1) throw ConfigError("ECE needs at least 1 bin");
    }

    void add(double confidence, bool correct) {
        if (!(confidence >= lo_ && confidence <= 1.0))
            throw DataError("confidence " + format_double(confidence) + " outside [" +
                            format_double(lo_) + ",1]");
        auto b = static_cast<std::size_t>((confidence - lo_) / (1.0 - lo_) * num_bins_);
        if (b >= static_cast<std::size_t>(num_bins_)) b = static_cast<std::size_t>(num_bins_) - 1;
        ++counts_[b];
        correct_[b] += correct ? 1 : 0;
        conf_sums_[b] += confidence;
    }

    void add_map(const ProbMap& p, const BinaryMask& gt, std::size_t stride = 1) {
        require_same_shape(p.height(), p.width(), gt.height(), gt.width(), "ECE accumulation");
        if (stride == 0) throw ConfigError("stride must be >= 1");
        for (std::size_t i = 0; i < p.size(); i += stride) {
            const bool label = p[i] >= 0.5;
            const double conf = label ? p[i] : 1.0 - p[i];
            add(domain_ == ConfidenceDomain::kRaw ? p[i] : conf,
                label == static_cast<bool>(gt[i]));
        }
    }

    void merge(const ECEAccumulator& other) {
        if (other.num_bins_ != num_bins_ || other.domain_ != domain_)
            throw ConfigError("cannot merge ECE accumulators with different binning");
        for (std::size_t b = 0; b < counts_.size(); ++b) {
            counts_[b] += other.counts_[b];
            correct_[b] += other.correct_[b];
            conf_sums_[b] += other.conf_sums_[b];
        }
    }

    std::size_t total() const {
        std::size_t n = 0;
        for (auto c : counts_) n += c;
        return n;
    }

    ReliabilityDiagram finish() const {
        const std::size_t n = total();
        if (n == 0) throw DataError("ECE over an empty sample stream");
        ReliabilityDiagram d;
        d.num_bins = num_bins_;
        d.total = n;
        d.domain_lo = lo_;
        d.domain_hi = 1.0;
        const double width = (1.0 - lo_) / num_bins_;
        CompensatedSum ece;
        for (int b = 0; b < num_bins_; ++b) {
            const auto bi = static_cast<std::size_t>(b);
            ReliabilityBin bin;
            bin.lo = lo_ + b * width;
            bin.hi = b + 1 == num_bins_ ? 1.0 : lo_ + (b + 1) * width;
            bin.count = counts_[bi];
            if (bin.count > 0) {
                bin.mean_confidence = static_cast<double>(conf_sums_[bi] /
                                                          static_cast<long double>(bin.count));
                bin.mean_accuracy = static_cast<double>(correct_[bi]) / static_cast<double>(bin.count);
                ece.add(static_cast<double>(bin.count) / static_cast<double>(n) *
                        std::fabs(bin.mean_accuracy - bin.mean_confidence));
            }
            d.bins.push_back(bin);
        }
        d.ece = ece.value();
        return d;
    }

private:
    int num_bins_;
    ConfidenceDomain domain_;
    double lo_;
    std::vector<std::size_t> counts_;
    std::vector<std::size_t> correct_;
    std::vector<long double> conf_sums_;
};

/// ECE over an explicit sample stream; the top bin is right-closed so
/// confidence 1.0 is counted, and empty bins contribute 0.
inline ReliabilityDiagram ece(std::span<const ConfidenceSample> samples, int num_bins,
                              ConfidenceDomain domain = ConfidenceDomain::kMaxConfidence) {
    ECEAccumulator acc(num_bins, domain);
    for (const auto& s : samples) acc.add(s.confidence, s.correct);
    return acc.finish();
}

/// Dataset-level calibration: per-image accumulators computed in parallel,
/// merged in manifest order. Every manifest image must have a prediction.
inline ReliabilityDiagram ece_dataset(const DatasetManifest& manifest,
                                      const std::filesystem::path& predictions_dir,
                                      const std::filesystem::path& base_dir,
                                      const CalibrationConfig& config, unsigned workers = 1) {
    struct Job {
        const GroupEntry* group;
        const ImageEntry* entry;
    };
    std::vector<Job> jobs;
    for (const auto& g : manifest.groups)
        for (const auto& e : g.images) jobs.push_back(Job{&g, &e});

    std::vector<ECEAccumulator> partials(jobs.size(), ECEAccumulator(config.bins, config.domain));
    parallel_for(jobs.size(), workers, [&](std::size_t i) {
        const Job& job = jobs[i];
        const std::filesystem::path pred = prediction_path(predictions_dir, *job.group, *job.entry);
        if (!std::filesystem::exists(pred))
            throw DataError("missing prediction: " + pred.string());
        const ProbMap p = load_prob_map(pred);
        const BinaryMask gt = load_ground_truth(*job.entry, base_dir);
        partials[i].add_map(p, gt, config.stride);
    });

    ECEAccumulator merged(config.bins, config.domain);
    for (const auto& partial : partials) merged.merge(partial);
    return merged.finish();
}

inline std::string reliability_to_csv(const ReliabilityDiagram& d) {
    std::string out = "bin_index,lo,hi,count,mean_confidence,mean_accuracy\n";
    for (std::size_t b = 0; b < d.bins.size(); ++b) {
        const auto& bin = d.bins[b];
        out += std::to_string(b) + "," + format_double(bin.lo) + "," + format_double(bin.hi) +
               "," + std::to_string(bin.count) + "," + format_double(bin.mean_confidence) + "," +
               format_double(bin.mean_accuracy) + "\n";
    }
    return out;
}

/// Hand-assembled SVG reliability diagram: accuracy bars per non-empty bin
/// (empty bins stay gaps) and the identity "Oracle" diagonal.
inline std::string reliability_to_svg(const ReliabilityDiagram& d) {
    const double left = 60, top = 20, plot_w = 400, plot_h = 290;
    const double bottom = top + plot_h;
    auto sx = [&](double conf) {
        return left + (conf - d.domain_lo) / (d.domain_hi - d.domain_lo) * plot_w;
    };
    auto sy = [&](double acc) { return bottom - acc * plot_h; };
    auto num = [](double v) { return format_double_fixed(v, 2); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 480 360\" "
           "font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(plot_w) +
           "\" height=\"" + num(plot_h) + "\" fill=\"white\" stroke=\"black\"/>\n";
    for (const auto& bin : d.bins) {
        if (bin.count == 0) continue;
        const double x0 = sx(bin.lo);
        const double x1 = sx(bin.hi);
        const double y = sy(bin.mean_accuracy);
        svg += "<rect x=\"" + num(x0) + "\" y=\"" + num(y) + "\" width=\"" + num(x1 - x0) +
               "\" height=\"" + num(bottom - y) +
               "\" fill=\"#4682b4\" fill-opacity=\"0.8\" stroke=\"#1c3d5a\"/>\n";
    }
    svg += "<line x1=\"" + num(sx(d.domain_lo)) + "\" y1=\"" + num(sy(d.domain_lo)) + "\" x2=\"" +
           num(sx(d.domain_hi)) + "\" y2=\"" + num(sy(d.domain_hi)) +
           "\" stroke=\"#888\" stroke-dasharray=\"6,4\"/>\n";
    svg += "<text x=\"" + num(sx(d.domain_hi) - 70) + "\" y=\"" + num(sy(d.domain_hi) + 16) +
           "\" fill=\"#555\">Oracle</text>\n";
    for (double tick : {0.0, 0.5, 1.0}) {
        svg += "<text x=\"" + num(left - 34) + "\" y=\"" + num(sy(tick) + 4) + "\">" + num(tick) +
               "</text>\n";
        const double conf = d.domain_lo + tick * (d.domain_hi - d.domain_lo);
        svg += "<text x=\"" + num(sx(conf) - 12) + "\" y=\"" + num(bottom + 18) + "\">" +
               num(conf) + "</text>\n";
    }
    svg += "<text x=\"" + num(left) + "\" y=\"" + num(bottom + 36) +
           "\">confidence (ECE = " + format_double(d.ece) + ", N = " + std::to_string(d.total) +
           ")</text>\n";
    svg += "</svg>\n";
    return svg;
}

inline void render_reliability(const ReliabilityDiagram& d, const std::filesystem::path& csv_path,
                               const std::filesystem::path& svg_path) {
    ensure_parent_dir(csv_path);
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw DataError("cannot open " + csv_path.string());
    csv << reliability_to_csv(d);
    ensure_parent_dir(svg_path);
    std::ofstream svg(svg_path, std::ios::binary);
    if (!svg) throw DataError("cannot open " + svg_path.string());
    svg << reliability_to_svg(d);
    if (!csv || !svg) throw DataError("failed writing reliability diagram files");
}

inline nlohmann::ordered_json reliability_to_json(const ReliabilityDiagram& d) {
    nlohmann::ordered_json j;
    j["ece"] = d.ece;
    j["num_bins"] = d.num_bins;
    j["total"] = d.total;
    j["domain"] = {d.domain_lo, d.domain_hi};
    j["bins"] = nlohmann::ordered_json::array();
    for (const auto& bin : d.bins) {
        nlohmann::ordered_json jb;
        jb["lo"] = bin.lo;
        jb["hi"] = bin.hi;
        jb["count"] = bin.count;
        jb["mean_confidence"] = bin.mean_confidence;
        jb["mean_accuracy"] = bin.mean_accuracy;
        j["bins"].push_back(std::move(jb));
    }
    return j;
}

} // namespace cosal
