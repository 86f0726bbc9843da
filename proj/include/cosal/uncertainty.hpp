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
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cosal/error.hpp"
#include "cosal/grid.hpp"
#include "cosal/image_io.hpp"
#include "cosal/manifest.hpp"
#include "cosal/metrics.hpp"
#include "cosal/numeric.hpp"
#include "cosal/parallel.hpp"

namespace cosal {

/// Dense grid of per-pixel entropy values. Nonnegative under the default
/// clamping; near-certain predictions can dip a hair below zero when
/// clamping is disabled.
using UncertaintyMap = Grid<double>;

struct UncertaintyConfig {
    double epsilon = 1e-6;
    bool clamp_negative = true;
    bool full_binary_entropy = false;
};

inline void validate_uncertainty_config(const UncertaintyConfig& c) {
    if (!(c.epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
}

/// Theoretical maximum of the single-term entropy -p*ln(p), attained at
/// p = 1/e; used as the 8-bit scale factor for stored uncertainty maps.
inline double max_entropy_value() { return std::exp(-1.0); }

/// Pixelwise entropy u = -p * ln(p + eps), natural log. The single-term
/// form is the default; full_binary_entropy adds the complementary term
/// -(1-p) * ln(1-p + eps).
inline UncertaintyMap entropy_map(const ProbMap& p, const UncertaintyConfig& config) {
    validate_uncertainty_config(config);
    UncertaintyMap u(p.height(), p.width());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double v = p[i];
        double value = -v * std::log(v + config.epsilon);
        if (config.full_binary_entropy)
            value += -(1.0 - v) * std::log(1.0 - v + config.epsilon);
        if (config.clamp_negative) value = std::max(value, 0.0);
        u[i] = value;
    }
    return u;
}

inline double mean_value(const UncertaintyMap& u) {
    CompensatedSum sum;
    for (double v : u.values()) sum.add(v);
    return sum.mean(u.size());
}

/// Bias-matrix revision: pixels whose uncertainty lies strictly above the
/// map mean are zeroed in a single pass; everything else is untouched.
inline ProbMap revise(const ProbMap& p, const UncertaintyMap& u) {
    require_same_shape(p.height(), p.width(), u.height(), u.width(), "revise");
    const double mu = mean_value(u);
    Grid<double> out(p.height(), p.width());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = u[i] > mu ? 0.0 : p[i];
    return ProbMap(std::move(out));
}

struct UncertaintyRow {
    std::string group_id;
    std::string image_id;
    double mean_uncertainty = 0.0;
};

struct UncertaintyGroupRow {
    std::string group_id;
    double mean_uncertainty = 0.0;  // mean of the group's per-image means
};

struct UncertaintyReport {
    std::vector<UncertaintyRow> images;
    std::vector<UncertaintyGroupRow> groups;
    UncertaintyConfig config;
    EvalReport eval_before;
    EvalReport eval_after;
};

/// Writes per-image uncertainty maps (8-bit, scaled by 255 / e^-1, clamped)
/// and revised predictions under out_dir, then re-evaluates both prediction
/// sets with the metric suite. Every manifest image must have a prediction.
inline UncertaintyReport uncertainty_report(const DatasetManifest& manifest,
                                            const std::filesystem::path& predictions_dir,
                                            const std::filesystem::path& base_dir,
                                            const UncertaintyConfig& config,
                                            const MetricConfig& metric_config,
                                            const std::filesystem::path& out_dir,
                                            unsigned workers = 1) {
    validate_uncertainty_config(config);
    struct Job {
        const GroupEntry* group;
        const ImageEntry* entry;
    };
    std::vector<Job> jobs;
    for (const auto& g : manifest.groups)
        for (const auto& e : g.images) jobs.push_back(Job{&g, &e});

    const std::filesystem::path unc_dir = out_dir / "uncertainty";
    const std::filesystem::path revised_dir = out_dir / "revised";
    std::vector<double> means(jobs.size(), 0.0);
    parallel_for(jobs.size(), workers, [&](std::size_t i) {
        const Job& job = jobs[i];
        const std::filesystem::path pred = prediction_path(predictions_dir, *job.group, *job.entry);
        if (!std::filesystem::exists(pred)) throw DataError("missing prediction: " + pred.string());
        const ProbMap p = load_prob_map(pred);
        const UncertaintyMap u = entropy_map(p, config);
        means[i] = mean_value(u);

        const double scale = 1.0 / max_entropy_value();
        Grid<double> scaled(u.height(), u.width());
        for (std::size_t k = 0; k < u.size(); ++k)
            scaled[k] = std::clamp(u[k] * scale, 0.0, 1.0);
        save_prob_map(ProbMap(std::move(scaled)),
                      unc_dir / job.group->group_id / (job.entry->image_id + ".png"));
        save_prob_map(revise(p, u),
                      revised_dir / job.group->group_id / (job.entry->image_id + ".png"));
    });

    UncertaintyReport report;
    report.config = config;
    std::size_t idx = 0;
    for (const auto& g : manifest.groups) {
        CompensatedSum group_sum;
        for (const auto& e : g.images) {
            report.images.push_back(UncertaintyRow{g.group_id, e.image_id, means[idx]});
            group_sum.add(means[idx]);
            ++idx;
        }
        report.groups.push_back(UncertaintyGroupRow{g.group_id, group_sum.mean(g.images.size())});
    }
    report.eval_before = evaluate_dataset(manifest, predictions_dir, base_dir, metric_config, workers);
    report.eval_after = evaluate_dataset(manifest, revised_dir, base_dir, metric_config, workers);
    return report;
}

inline nlohmann::ordered_json uncertainty_summary_to_json(const UncertaintyReport& r) {
    nlohmann::ordered_json j;
    j["epsilon"] = r.config.epsilon;
    j["clamp_negative"] = r.config.clamp_negative;
    j["full_binary_entropy"] = r.config.full_binary_entropy;
    j["map_scale"] = "255 * u / e^-1, clamped to [0,255]";
    j["groups"] = nlohmann::ordered_json::array();
    for (const auto& g : r.groups) {
        nlohmann::ordered_json jg;
        jg["group_id"] = g.group_id;
        jg["mean_uncertainty"] = g.mean_uncertainty;
        j["groups"].push_back(std::move(jg));
    }
    j["images"] = nlohmann::ordered_json::array();
    for (const auto& row : r.images) {
        nlohmann::ordered_json ji;
        ji["group_id"] = row.group_id;
        ji["image_id"] = row.image_id;
        ji["mean_uncertainty"] = row.mean_uncertainty;
        j["images"].push_back(std::move(ji));
    }
    return j;
}

} // namespace cosal
