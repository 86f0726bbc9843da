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

#include <json.hpp>

#include "cosal/error.hpp"
#include "cosal/grid.hpp"
#include "cosal/image_io.hpp"
#include "cosal/manifest.hpp"
#include "cosal/numeric.hpp"
#include "cosal/parallel.hpp"
#include "cosal/version.hpp"

namespace cosal {

/// S-measure handling of all-zero ground truth. Strict returns 0 for every
/// prediction (the degenerate behaviour this suite demonstrates); reference
/// follows the original measure's special case, 1 - mean(prediction).
enum class SMode { kStrict, kReference };

/// E-measure score per threshold. Xi-mean averages the alignment values
/// directly; enhanced averages (1 + xi)^2 / 4.
enum class EMode { kXiMean, kEnhanced };

inline const char* to_string(SMode m) { return m == SMode::kStrict ? "strict" : "reference"; }
inline const char* to_string(EMode m) { return m == EMode::kXiMean ? "xi-mean" : "enhanced"; }

inline SMode s_mode_from_string(const std::string& s) {
    if (s == "strict") return SMode::kStrict;
    if (s == "reference") return SMode::kReference;
    throw ConfigError("unknown s-mode: " + s + " (expected strict or reference)");
}

inline EMode e_mode_from_string(const std::string& s) {
    if (s == "xi-mean") return EMode::kXiMean;
    if (s == "enhanced") return EMode::kEnhanced;
    throw ConfigError("unknown e-mode: " + s + " (expected xi-mean or enhanced)");
}

struct MetricConfig {
    double binarize_threshold = 0.5;
    double beta_squared = 0.3;
    double s_alpha = 0.5;
    int thresholds = 256;
    SMode s_mode = SMode::kStrict;
    EMode e_mode = EMode::kEnhanced;
};

inline void validate_metric_config(const MetricConfig& c) {
    if (!(c.binarize_threshold > 0.0 && c.binarize_threshold < 1.0))
        throw ConfigError("binarize_threshold must lie in (0,1)");
    if (!(c.beta_squared > 0.0)) throw ConfigError("beta_squared must be > 0");
    if (!(c.s_alpha >= 0.0 && c.s_alpha <= 1.0)) throw ConfigError("s_alpha must lie in [0,1]");
    if (c.thresholds < 1) throw ConfigError("thresholds must be >= 1");
}

inline BinaryMask binarize(const ProbMap& p, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw ConfigError("binarize threshold must lie in (0,1)");
    Grid<std::uint8_t> g(p.height(), p.width(), 0);
    for (std::size_t i = 0; i < p.size(); ++i) g[i] = p[i] >= threshold ? 1 : 0;
    return BinaryMask(std::move(g));
}

/// Intersection over union of two binary masks. The both-empty case is
/// defined as 1: an all-background prediction of an all-background ground
/// truth is exactly right.
inline double iou(const BinaryMask& pred, const BinaryMask& gt) {
    require_same_shape(pred.height(), pred.width(), gt.height(), gt.width(), "iou");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        tp += pred[i] & gt[i];
        fp += pred[i] & (1 - gt[i]);
        fn += (1 - pred[i]) & gt[i];
    }
    const std::size_t denom = tp + fp + fn;
    if (denom == 0) return 1.0;
    return static_cast<double>(tp) / static_cast<double>(denom);
}

inline double mae(const ProbMap& p, const BinaryMask& gt) {
    require_same_shape(p.height(), p.width(), gt.height(), gt.width(), "mae");
    CompensatedSum sum;
    for (std::size_t i = 0; i < p.size(); ++i) sum.add(std::fabs(p[i] - gt[i]));
    return sum.mean(p.size());
}

namespace detail {

/// Sweep thresholds t_i = i / T for i in 0..T-1.
inline std::vector<double> sweep_thresholds(int count) {
    std::vector<double> ts(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) ts[static_cast<std::size_t>(i)] = static_cast<double>(i) / count;
    return ts;
}

struct ConfusionSweep {
    std::vector<long long> tp;  // per threshold index
    std::vector<long long> fp;
    long long positives = 0;  // ground-truth foreground pixels
    long long total = 0;      // all pixels
};

/// Confusion counts for every sweep threshold in one pass. Each pixel is
/// bucketed by how many thresholds it meets (a binary search on the exact
/// same comparison the single-threshold path uses), then suffix sums give
/// TP/FP per threshold.
inline ConfusionSweep confusion_sweep(const ProbMap& p, const BinaryMask& gt,
                                      const std::vector<double>& ts) {
    const std::size_t t = ts.size();
    std::vector<long long> cnt1(t + 1, 0), cnt0(t + 1, 0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto bucket = static_cast<std::size_t>(
                std::upper_bound(ts.begin(), ts.end(), p[i]) - ts.begin());
        if (gt[i])
            ++cnt1[bucket];
        else
            ++cnt0[bucket];
    }
    ConfusionSweep sweep;
    sweep.tp.assign(t, 0);
    sweep.fp.assign(t, 0);
    sweep.total = static_cast<long long>(p.size());
    long long suf1 = 0, suf0 = 0;
    for (std::size_t b = t; b >= 1; --b) {
        suf1 += cnt1[b];
        suf0 += cnt0[b];
        sweep.tp[b - 1] = suf1;
        sweep.fp[b - 1] = suf0;
    }
    sweep.positives = suf1 + cnt1[0];
    return sweep;
}

inline double f_from_counts(long long tp, long long fp, long long fn, double beta_squared) {
    const double precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
    const double recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
    const double denom = beta_squared * precision + recall;
    if (denom == 0.0) return 0.0;
    return (1.0 + beta_squared) * precision * recall / denom;
}

} // namespace detail

struct CurveResult {
    std::vector<double> curve;
    double max_value = 0.0;
};

/// F at one explicit threshold, by direct counting; the oracle-friendly
/// building block the sweep must agree with.
inline double f_at_threshold(const ProbMap& p, const BinaryMask& gt, double threshold,
                             double beta_squared) {
    require_same_shape(p.height(), p.width(), gt.height(), gt.width(), "f_measure");
    long long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const bool s = p[i] >= threshold;
        if (s && gt[i]) ++tp;
        if (s && !gt[i]) ++fp;
        if (!s && gt[i]) ++fn;
    }
    return detail::f_from_counts(tp, fp, fn, beta_squared);
}

/// Precision/recall F over the threshold sweep. With empty ground truth
/// TP = 0 at every threshold, so the whole curve is exactly 0 regardless of
/// the prediction.
inline CurveResult f_measure(const ProbMap& p, const BinaryMask& gt, const MetricConfig& config) {
    require_same_shape(p.height(), p.width(), gt.height(), gt.width(), "f_measure");
    const std::vector<double> ts = detail::sweep_thresholds(config.thresholds);
    const detail::ConfusionSweep sweep = detail::confusion_sweep(p, gt, ts);
    CurveResult out;
    out.curve.resize(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const long long tp = sweep.tp[i];
        const long long fp = sweep.fp[i];
        const long long fn = sweep.positives - tp;
        out.curve[i] = detail::f_from_counts(tp, fp, fn, config.beta_squared);
        out.max_value = std::max(out.max_value, out.curve[i]);
    }
    return out;
}

namespace detail {

struct MaskedMoments {
    std::size_t count = 0;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation, 0 when count <= 1
};

template <class Select, class Value>
MaskedMoments masked_moments(const ProbMap& p, const BinaryMask& gt, Select select, Value value) {
    MaskedMoments m;
    CompensatedSum sum;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!select(gt[i])) continue;
        ++m.count;
        sum.add(value(p[i]));
    }
    if (m.count == 0) return m;
    m.mean = sum.mean(m.count);
    if (m.count > 1) {
        CompensatedSum sq;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (!select(gt[i])) continue;
            const double d = value(p[i]) - m.mean;
            sq.add(d * d);
        }
        m.stddev = std::sqrt(sq.value() / (m.count - 1));
    }
    return m;
}

inline constexpr double kSObjectEps = 1e-12;

inline double s_object_term(const MaskedMoments& m) {
    if (m.count == 0) return 0.0;
    return 2.0 * m.mean / (m.mean * m.mean + 1.0 + m.stddev + kSObjectEps);
}

inline double s_object(const ProbMap& p, const BinaryMask& gt, double mu) {
    const MaskedMoments fg = masked_moments(
            p, gt, [](std::uint8_t y) { return y == 1; }, [](double x) { return x; });
    const MaskedMoments bg = masked_moments(
            p, gt, [](std::uint8_t y) { return y == 0; }, [](double x) { return 1.0 - x; });
    return mu * s_object_term(fg) + (1.0 - mu) * s_object_term(bg);
}

struct BlockStats {
    std::size_t count = 0;
    double mean_x = 0.0, mean_y = 0.0;
    double var_x = 0.0, var_y = 0.0, cov = 0.0;  // sample statistics, 0 when count <= 1
};

inline double block_ssim(const ProbMap& p, const BinaryMask& gt, int r0, int r1, int c0, int c1) {
    BlockStats s;
    CompensatedSum sx, sy;
    for (int r = r0; r < r1; ++r)
        for (int c = c0; c < c1; ++c) {
            ++s.count;
            sx.add(p.at(r, c));
            sy.add(static_cast<double>(gt.at(r, c)));
        }
    if (s.count == 0) return 0.0;
    s.mean_x = sx.mean(s.count);
    s.mean_y = sy.mean(s.count);
    if (s.count > 1) {
        CompensatedSum vx, vy, cxy;
        for (int r = r0; r < r1; ++r)
            for (int c = c0; c < c1; ++c) {
                const double dx = p.at(r, c) - s.mean_x;
                const double dy = static_cast<double>(gt.at(r, c)) - s.mean_y;
                vx.add(dx * dx);
                vy.add(dy * dy);
                cxy.add(dx * dy);
            }
        const double denom = static_cast<double>(s.count - 1);
        s.var_x = vx.value() / denom;
        s.var_y = vy.value() / denom;
        s.cov = cxy.value() / denom;
    }
    const double alpha = 4.0 * s.mean_x * s.mean_y * s.cov;
    const double beta = (s.mean_x * s.mean_x + s.mean_y * s.mean_y) * (s.var_x + s.var_y);
    if (alpha != 0.0) return alpha / (beta + kSObjectEps);
    if (beta == 0.0) return 1.0;
    return 0.0;
}

inline double s_region(const ProbMap& p, const BinaryMask& gt) {
    const int h = gt.height();
    const int w = gt.width();
    CompensatedSum sum_r, sum_c;
    std::size_t n = 0;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            if (gt.at(r, c)) {
                ++n;
                sum_r.add(r + 1.0);
                sum_c.add(c + 1.0);
            }
    // 1-indexed rounded centroid; callers guarantee non-empty ground truth.
    const int cy = std::clamp(static_cast<int>(std::lround(sum_r.mean(n))), 1, h);
    const int cx = std::clamp(static_cast<int>(std::lround(sum_c.mean(n))), 1, w);
    const double total = static_cast<double>(h) * w;
    double score = 0.0;
    const int rs[3] = {0, cy, h};
    const int cs[3] = {0, cx, w};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const int r0 = rs[i], r1 = rs[i + 1];
            const int c0 = cs[j], c1 = cs[j + 1];
            const double weight = static_cast<double>(r1 - r0) * (c1 - c0) / total;
            if (weight > 0.0) score += weight * block_ssim(p, gt, r0, r1, c0, c1);
        }
    return score;
}

} // namespace detail

/// Structure measure S = alpha * S_object + (1 - alpha) * S_region.
/// Strict mode scores every prediction 0 against all-zero ground truth;
/// reference mode keeps the original special cases (empty gt -> 1 - mean(p),
/// full gt -> mean(p)).
inline double s_measure(const ProbMap& p, const BinaryMask& gt, const MetricConfig& config) {
    require_same_shape(p.height(), p.width(), gt.height(), gt.width(), "s_measure");
    const std::size_t fg = gt.foreground_count();
    CompensatedSum sum;
    for (double v : p.values()) sum.add(v);
    const double mean_p = sum.mean(p.size());
    if (fg == 0) return config.s_mode == SMode::kStrict ? 0.0 : 1.0 - mean_p;
    if (config.s_mode == SMode::kReference && fg == gt.size()) return mean_p;
    const double mu = static_cast<double>(fg) / gt.size();
    const double s = config.s_alpha * detail::s_object(p, gt, mu) +
                     (1.0 - config.s_alpha) * detail::s_region(p, gt);
    return std::max(s, 0.0);
}

/// Alignment measure over the threshold sweep. Per threshold the bias
/// matrices phi = map - mean(map) take one of two values each, so the score
/// is computed in closed form from the confusion counts. With empty ground
/// truth phi_y is identically zero, so xi is 0 everywhere (0/0 -> 0) and the
/// xi-mean curve is exactly 0; enhanced mode maps that same xi to 1/4.
inline CurveResult e_measure(const ProbMap& p, const BinaryMask& gt, const MetricConfig& config) {
    require_same_shape(p.height(), p.width(), gt.height(), gt.width(), "e_measure");
    const std::vector<double> ts = detail::sweep_thresholds(config.thresholds);
    const detail::ConfusionSweep sweep = detail::confusion_sweep(p, gt, ts);
    const double n = static_cast<double>(sweep.total);
    const double mu_y = static_cast<double>(sweep.positives) / n;
    CurveResult out;
    out.curve.resize(ts.size());
    auto xi = [](double a, double b) {
        const double denom = a * a + b * b;
        if (denom == 0.0) return 0.0;
        return 2.0 * a * b / denom;
    };
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const long long n11 = sweep.tp[i];
        const long long n10 = sweep.fp[i];
        const long long n01 = sweep.positives - n11;
        const long long n00 = sweep.total - n11 - n10 - n01;
        const double mu_s = static_cast<double>(n11 + n10) / n;
        const double cells[4][3] = {
                {1.0 - mu_s, 1.0 - mu_y, static_cast<double>(n11)},
                {1.0 - mu_s, -mu_y, static_cast<double>(n10)},
                {-mu_s, 1.0 - mu_y, static_cast<double>(n01)},
                {-mu_s, -mu_y, static_cast<double>(n00)},
        };
        double score = 0.0;
        for (const auto& cell : cells) {
            if (cell[2] == 0.0) continue;
            const double x = xi(cell[0], cell[1]);
            score += cell[2] * (config.e_mode == EMode::kXiMean ? x : (1.0 + x) * (1.0 + x) / 4.0);
        }
        out.curve[i] = score / n;
        out.max_value = std::max(out.max_value, out.curve[i]);
    }
    return out;
}

struct PerImageMetrics {
    std::string group_id;
    std::string image_id;
    bool zero_gt = false;
    bool ok = false;
    std::string error;
    double iou = 0.0;
    double mae = 0.0;
    double f_max = 0.0;
    double s = 0.0;
    double e = 0.0;
};

struct MetricAggregate {
    std::string group_id;  // empty for the dataset row
    std::size_t count = 0;
    double miou = 0.0;
    double mae = 0.0;
    double f_max = 0.0;
    double s = 0.0;
    double e = 0.0;
};

struct EvalReport {
    std::vector<PerImageMetrics> per_image;
    std::vector<MetricAggregate> per_group;
    MetricAggregate dataset;
    MetricConfig config;
    std::string tool_version = kToolVersion;
    bool complete = true;
    std::vector<std::string> errors;
};

inline std::filesystem::path prediction_path(const std::filesystem::path& predictions_dir,
                                             const GroupEntry& g, const ImageEntry& e) {
    return predictions_dir / g.group_id / (e.image_id + ".png");
}

namespace detail {

inline MetricAggregate aggregate_rows(const std::string& group_id,
                                      const std::vector<const PerImageMetrics*>& rows) {
    MetricAggregate a;
    a.group_id = group_id;
    CompensatedSum siou, smae, sf, ss, se;
    for (const PerImageMetrics* r : rows) {
        if (!r->ok) continue;
        ++a.count;
        siou.add(r->iou);
        smae.add(r->mae);
        sf.add(r->f_max);
        ss.add(r->s);
        se.add(r->e);
    }
    if (a.count > 0) {
        a.miou = siou.mean(a.count);
        a.mae = smae.mean(a.count);
        a.f_max = sf.mean(a.count);
        a.s = ss.mean(a.count);
        a.e = se.mean(a.count);
    }
    return a;
}

} // namespace detail

/// Evaluates every manifest image against predictions_dir/<group>/<image>.png.
/// Missing or mismatched predictions are recorded per image and mark the
/// report incomplete; aggregates cover the successfully evaluated images,
/// averaged in manifest order.
inline EvalReport evaluate_dataset(const DatasetManifest& manifest,
                                   const std::filesystem::path& predictions_dir,
                                   const std::filesystem::path& base_dir,
                                   const MetricConfig& config, unsigned workers = 1) {
    validate_metric_config(config);
    EvalReport report;
    report.config = config;

    struct Job {
        const GroupEntry* group;
        const ImageEntry* entry;
    };
    std::vector<Job> jobs;
    for (const auto& g : manifest.groups)
        for (const auto& e : g.images) jobs.push_back(Job{&g, &e});

    report.per_image.resize(jobs.size());
    parallel_for(jobs.size(), workers, [&](std::size_t i) {
        const Job& job = jobs[i];
        PerImageMetrics row;
        row.group_id = job.group->group_id;
        row.image_id = job.entry->image_id;
        row.zero_gt = job.entry->zero_mask();
        const std::filesystem::path pred_path =
                prediction_path(predictions_dir, *job.group, *job.entry);
        try {
            if (!std::filesystem::exists(pred_path))
                throw DataError("missing prediction: " + pred_path.string());
            const ProbMap p = load_prob_map(pred_path);
            const BinaryMask gt = load_ground_truth(*job.entry, base_dir);
            require_same_shape(p.height(), p.width(), gt.height(), gt.width(),
                               "prediction for " + job.entry->image_id);
            row.iou = iou(binarize(p, config.binarize_threshold), gt);
            row.mae = mae(p, gt);
            row.f_max = f_measure(p, gt, config).max_value;
            row.s = s_measure(p, gt, config);
            row.e = e_measure(p, gt, config).max_value;
            row.ok = true;
        } catch (const std::exception& ex) {
            row.ok = false;
            row.error = ex.what();
        }
        report.per_image[i] = std::move(row);
    });

    std::vector<const PerImageMetrics*> all_rows;
    std::size_t row_index = 0;
    for (const auto& g : manifest.groups) {
        std::vector<const PerImageMetrics*> group_rows;
        for (std::size_t k = 0; k < g.images.size(); ++k) {
            const PerImageMetrics& row = report.per_image[row_index++];
            group_rows.push_back(&row);
            all_rows.push_back(&row);
            if (!row.ok) {
                report.complete = false;
                report.errors.push_back(row.image_id + ": " + row.error);
            }
        }
        report.per_group.push_back(detail::aggregate_rows(g.group_id, group_rows));
    }
    report.dataset = detail::aggregate_rows("", all_rows);
    return report;
}

inline nlohmann::ordered_json metric_config_to_json(const MetricConfig& c) {
    nlohmann::ordered_json j;
    j["binarize_threshold"] = c.binarize_threshold;
    j["beta_squared"] = c.beta_squared;
    j["s_alpha"] = c.s_alpha;
    j["thresholds"] = c.thresholds;
    j["s_mode"] = to_string(c.s_mode);
    j["e_mode"] = to_string(c.e_mode);
    return j;
}

inline nlohmann::ordered_json aggregate_to_json(const MetricAggregate& a) {
    nlohmann::ordered_json j;
    if (!a.group_id.empty()) j["group_id"] = a.group_id;
    j["count"] = a.count;
    j["miou"] = a.miou;
    j["mae"] = a.mae;
    j["f_max"] = a.f_max;
    j["s"] = a.s;
    j["e"] = a.e;
    return j;
}

inline nlohmann::ordered_json eval_report_to_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    j["tool"] = kToolName;
    j["version"] = r.tool_version;
    j["config"] = metric_config_to_json(r.config);
    j["complete"] = r.complete;
    j["errors"] = r.errors;
    j["dataset"] = aggregate_to_json(r.dataset);
    j["groups"] = nlohmann::ordered_json::array();
    for (const auto& g : r.per_group) j["groups"].push_back(aggregate_to_json(g));
    return j;
}

/// Flat per-image table for spreadsheet diffing.
inline std::string eval_report_to_csv(const EvalReport& r) {
    std::string out = "group_id,image_id,zero_gt,iou,mae,f_max,s,e,status\n";
    for (const auto& row : r.per_image) {
        out += row.group_id + "," + row.image_id + "," + (row.zero_gt ? "1" : "0") + ",";
        if (row.ok) {
            out += format_double(row.iou) + "," + format_double(row.mae) + "," +
                   format_double(row.f_max) + "," + format_double(row.s) + "," +
                   format_double(row.e) + ",ok\n";
        } else {
            out += ",,,,,error\n";
        }
    }
    return out;
}

} // namespace cosal
