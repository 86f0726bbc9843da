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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cosal/cosal.hpp"

namespace {

using namespace cosal;
namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
    ensure_parent_dir(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw DataError("failed writing: " + path.string());
}

/// Run directories are named by a hash of the resolved config, so identical
/// invocations land in (and deterministically overwrite) the same place.
fs::path prepare_run_dir(const fs::path& out_base, const std::string& subcommand,
                         const nlohmann::ordered_json& config) {
    const std::string echo = config.dump(2) + "\n";
    const fs::path run_dir = out_base / (subcommand + "-" + hex64(fnv1a64(echo)));
    std::error_code ec;
    fs::remove_all(run_dir, ec);
    if (ec) throw DataError("cannot clear run directory " + run_dir.string() + ": " + ec.message());
    fs::create_directories(run_dir);
    write_text(run_dir / "config.json", echo);
    return run_dir;
}

fs::path manifest_base_dir(const fs::path& manifest_path, const DatasetManifest& m) {
    return fs::weakly_canonical(resolve_root(manifest_path, m.root));
}

struct CommonFlags {
    std::string manifest;
    std::string out;
    std::uint64_t seed = 0;
    unsigned workers = 0;
};

struct SynthFlags {
    CommonFlags common;
    SynthConfig config;
};

struct BuildFlags {
    CommonFlags common;
    std::string mode = "common";
    std::string ratio_ranges = "[0.2,0.4),[0.4,0.6),[0.6,0.8]";
    int variants = 3;
    std::vector<std::string> exclude;
    int num_groups = 55;
    int min_group_size = 4;
    int max_group_size = 10;
};

struct SampleFlags {
    CommonFlags common;
    std::string mode = "floor-uniform";
    int epochs = 1;
};

struct PredictFlags {
    CommonFlags common;
    std::string mode = "co";
    BaselineConfig config;
};

struct MetricFlags {
    double threshold = 0.5;
    double beta_squared = 0.3;
    double s_alpha = 0.5;
    int sweep = 256;
    std::string s_mode = "strict";
    std::string e_mode = "enhanced";
};

struct EvalFlags {
    CommonFlags common;
    std::string predictions;
    MetricFlags metrics;
    int bins = 10;
    std::string domain = "max-confidence";
    std::size_t stride = 1;
};

struct UncertaintyFlags {
    CommonFlags common;
    std::string predictions;
    MetricFlags metrics;
    double eps = 1e-6;
    bool no_clamp = false;
    bool full_binary_entropy = false;
};

MetricConfig to_metric_config(const MetricFlags& f) {
    MetricConfig c;
    c.binarize_threshold = f.threshold;
    c.beta_squared = f.beta_squared;
    c.s_alpha = f.s_alpha;
    c.thresholds = f.sweep;
    c.s_mode = s_mode_from_string(f.s_mode);
    c.e_mode = e_mode_from_string(f.e_mode);
    validate_metric_config(c);
    return c;
}

nlohmann::ordered_json metric_flags_json(const MetricFlags& f) {
    nlohmann::ordered_json j;
    j["threshold"] = f.threshold;
    j["beta_squared"] = f.beta_squared;
    j["s_alpha"] = f.s_alpha;
    j["sweep"] = f.sweep;
    j["s_mode"] = f.s_mode;
    j["e_mode"] = f.e_mode;
    return j;
}

void cmd_synth(const SynthFlags& f) {
    nlohmann::ordered_json config;
    config["subcommand"] = "synth";
    config["tool_version"] = kToolVersion;
    config["seed"] = f.common.seed;
    config["num_categories"] = f.config.num_categories;
    config["groups_per_category"] = f.config.groups_per_category;
    config["group_size"] = f.config.group_size;
    config["image_size"] = f.config.image_size;
    config["min_distractors"] = f.config.min_distractors;
    config["max_distractors"] = f.config.max_distractors;
    const fs::path run_dir = prepare_run_dir(f.common.out, "synth", config);
    SynthConfig synth = f.config;
    synth.seed = f.common.seed;
    generate_synthetic_dataset(synth, run_dir, f.common.workers);
    std::cout << run_dir.string() << "\n";
}

void cmd_build(const BuildFlags& f) {
    nlohmann::ordered_json config;
    config["subcommand"] = "build";
    config["tool_version"] = kToolVersion;
    config["manifest"] = f.common.manifest;
    config["seed"] = f.common.seed;
    config["mode"] = f.mode;
    config["exclude"] = f.exclude;
    if (f.mode == "common") {
        config["ratio_ranges"] = f.ratio_ranges;
        config["variants"] = f.variants;
    } else if (f.mode == "zero") {
        config["num_groups"] = f.num_groups;
        config["min_group_size"] = f.min_group_size;
        config["max_group_size"] = f.max_group_size;
    } else {
        throw ConfigError("unknown build mode: " + f.mode + " (expected common or zero)");
    }

    DatasetManifest source = load_manifest(f.common.manifest);
    source.root = manifest_base_dir(f.common.manifest, source).string();

    const fs::path run_dir = prepare_run_dir(f.common.out, "build", config);
    std::set<std::string> exclusions(f.exclude.begin(), f.exclude.end());
    DatasetManifest built;
    BuildStats stats;
    if (f.mode == "common") {
        CommonBuildConfig c;
        c.ratio_ranges = parse_ratio_ranges(f.ratio_ranges);
        c.variants_per_category = f.variants;
        c.seed = f.common.seed;
        c.exclusions = exclusions;
        std::tie(built, stats) = build_common(source, c);
    } else {
        ZeroBuildConfig c;
        c.num_groups = f.num_groups;
        c.min_group_size = f.min_group_size;
        c.max_group_size = f.max_group_size;
        c.seed = f.common.seed;
        c.exclusions = exclusions;
        std::tie(built, stats) = build_zero(source, c);
    }
    save_manifest(built, run_dir / "manifest.json");
    write_text(run_dir / "build_stats.json", build_stats_to_string(stats));
    std::cout << run_dir.string() << "\n";
}

void cmd_sample(const SampleFlags& f) {
    nlohmann::ordered_json config;
    config["subcommand"] = "sample";
    config["tool_version"] = kToolVersion;
    config["manifest"] = f.common.manifest;
    config["seed"] = f.common.seed;
    config["mode"] = f.mode;
    config["epochs"] = f.epochs;
    if (f.epochs < 1) throw ConfigError("--epochs must be >= 1");

    DatasetManifest manifest = load_manifest(f.common.manifest);
    const fs::path run_dir = prepare_run_dir(f.common.out, "sample", config);
    for (int epoch = 0; epoch < f.epochs; ++epoch) {
        SamplerConfig c;
        c.seed = f.common.seed;
        c.full_replacement_mode = ratio_mode_from_string(f.mode);
        c.epoch = static_cast<std::uint64_t>(epoch);
        const std::vector<SampledGroup> stream = sample_epoch(manifest, c, f.common.workers);
        write_sample_stream(stream, run_dir / ("epoch_" + std::to_string(epoch) + ".jsonl"));
    }
    std::cout << run_dir.string() << "\n";
}

void cmd_predict(const PredictFlags& f) {
    nlohmann::ordered_json config;
    config["subcommand"] = "predict";
    config["tool_version"] = kToolVersion;
    config["manifest"] = f.common.manifest;
    config["mode"] = f.mode;
    config["color_bins"] = f.config.bins_per_channel;
    config["affinity_threshold"] = f.config.affinity_threshold;
    config["saliency_gate"] = f.config.saliency_gate;
    config["affinity_floor"] = f.config.affinity_floor;
    config["blur_radius"] = f.config.blur_radius;

    DatasetManifest manifest = load_manifest(f.common.manifest);
    const fs::path base_dir = manifest_base_dir(f.common.manifest, manifest);
    const fs::path run_dir = prepare_run_dir(f.common.out, "predict", config);
    predict_dataset(manifest, base_dir, run_dir / "maps", f.config,
                    predictor_mode_from_string(f.mode), f.common.workers);
    std::cout << run_dir.string() << "\n";
}

void cmd_eval(const EvalFlags& f) {
    nlohmann::ordered_json config;
    config["subcommand"] = "eval";
    config["tool_version"] = kToolVersion;
    config["manifest"] = f.common.manifest;
    config["predictions"] = f.predictions;
    config["metrics"] = metric_flags_json(f.metrics);
    config["bins"] = f.bins;
    config["domain"] = f.domain;
    config["stride"] = f.stride;

    const MetricConfig metric_config = to_metric_config(f.metrics);
    CalibrationConfig calibration;
    calibration.bins = f.bins;
    calibration.stride = f.stride;
    if (f.domain == "max-confidence")
        calibration.domain = ConfidenceDomain::kMaxConfidence;
    else if (f.domain == "raw")
        calibration.domain = ConfidenceDomain::kRaw;
    else
        throw ConfigError("unknown confidence domain: " + f.domain +
                          " (expected max-confidence or raw)");
    if (calibration.bins < 1) throw ConfigError("--bins must be >= 1");
    if (calibration.stride < 1) throw ConfigError("--stride must be >= 1");

    DatasetManifest manifest = load_manifest(f.common.manifest);
    const fs::path base_dir = manifest_base_dir(f.common.manifest, manifest);
    const fs::path run_dir = prepare_run_dir(f.common.out, "eval", config);

    EvalReport report = evaluate_dataset(manifest, f.predictions, base_dir, metric_config,
                                         f.common.workers);
    nlohmann::ordered_json report_json = eval_report_to_json(report);
    report_json["config"]["calibration"] = {{"bins", f.bins}, {"domain", f.domain},
                                            {"stride", f.stride}};
    if (report.complete) {
        const ReliabilityDiagram diagram =
                ece_dataset(manifest, f.predictions, base_dir, calibration, f.common.workers);
        report_json["calibration"] = reliability_to_json(diagram);
        render_reliability(diagram, run_dir / "reliability.csv", run_dir / "reliability.svg");
    }
    write_text(run_dir / "report.json", report_json.dump(2) + "\n");
    write_text(run_dir / "per_image.csv", eval_report_to_csv(report));
    std::cout << run_dir.string() << "\n";
    if (!report.complete)
        throw DataError("evaluation incomplete: " + std::to_string(report.errors.size()) +
                        " images failed (see report.json)");
}

void cmd_uncertainty(const UncertaintyFlags& f) {
    nlohmann::ordered_json config;
    config["subcommand"] = "uncertainty";
    config["tool_version"] = kToolVersion;
    config["manifest"] = f.common.manifest;
    config["predictions"] = f.predictions;
    config["eps"] = f.eps;
    config["clamp_negative"] = !f.no_clamp;
    config["full_binary_entropy"] = f.full_binary_entropy;
    config["metrics"] = metric_flags_json(f.metrics);

    UncertaintyConfig uc;
    uc.epsilon = f.eps;
    uc.clamp_negative = !f.no_clamp;
    uc.full_binary_entropy = f.full_binary_entropy;
    validate_uncertainty_config(uc);
    const MetricConfig metric_config = to_metric_config(f.metrics);

    DatasetManifest manifest = load_manifest(f.common.manifest);
    const fs::path base_dir = manifest_base_dir(f.common.manifest, manifest);
    const fs::path run_dir = prepare_run_dir(f.common.out, "uncertainty", config);

    const UncertaintyReport report = uncertainty_report(manifest, f.predictions, base_dir, uc,
                                                        metric_config, run_dir, f.common.workers);
    nlohmann::ordered_json summary = uncertainty_summary_to_json(report);
    write_text(run_dir / "summary.json", summary.dump(2) + "\n");
    write_text(run_dir / "eval_before.json", eval_report_to_json(report.eval_before).dump(2) + "\n");
    write_text(run_dir / "eval_after.json", eval_report_to_json(report.eval_after).dump(2) + "\n");
    std::cout << run_dir.string() << "\n";
}

void add_common_flags(CLI::App* cmd, CommonFlags& f, bool with_manifest) {
    if (with_manifest)
        cmd->add_option("--manifest", f.manifest, "Dataset manifest path")
                ->required()
                ->check(CLI::ExistingFile);
    cmd->add_option("--out", f.out, "Output base directory (a run directory is created inside)")
            ->required();
    cmd->add_option("--seed", f.seed, "RNG seed")->capture_default_str();
    cmd->add_option("--workers", f.workers,
                    "Worker threads (0 = hardware concurrency); never affects output bytes")
            ->capture_default_str();
}

void add_metric_flags(CLI::App* cmd, MetricFlags& f) {
    cmd->add_option("--threshold", f.threshold, "Binarization threshold for IoU")
            ->capture_default_str();
    cmd->add_option("--beta-squared", f.beta_squared, "Beta^2 of the F-measure")
            ->capture_default_str();
    cmd->add_option("--s-alpha", f.s_alpha, "S-measure object/region mix")->capture_default_str();
    cmd->add_option("--sweep", f.sweep, "Threshold count for F/E max sweeps")
            ->capture_default_str();
    cmd->add_option("--s-mode", f.s_mode, "S-measure empty-gt handling: strict|reference")
            ->capture_default_str();
    cmd->add_option("--e-mode", f.e_mode, "E-measure score mapping: xi-mean|enhanced")
            ->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(kToolName) +
                 " - benchmark toolkit for co-salient object detection with noisy groups"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    SynthFlags synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic shape dataset");
    add_common_flags(synth_cmd, synth.common, false);
    synth_cmd->add_option("--categories", synth.config.num_categories,
                          "Number of (shape, color) categories")
            ->capture_default_str();
    synth_cmd->add_option("--groups-per-category", synth.config.groups_per_category,
                          "Groups per category")
            ->capture_default_str();
    synth_cmd->add_option("--group-size", synth.config.group_size, "Images per group")
            ->capture_default_str();
    synth_cmd->add_option("--image-size", synth.config.image_size, "Square image side in pixels")
            ->capture_default_str();
    synth_cmd->add_option("--min-distractors", synth.config.min_distractors,
                          "Minimum distractor shapes per image")
            ->capture_default_str();
    synth_cmd->add_option("--max-distractors", synth.config.max_distractors,
                          "Maximum distractor shapes per image")
            ->capture_default_str();
    synth_cmd->callback([&] { cmd_synth(synth); });

    BuildFlags build;
    auto* build_cmd = app.add_subcommand("build", "Rebuild a manifest into benchmark groups");
    add_common_flags(build_cmd, build.common, true);
    build_cmd->add_option("--mode", build.mode, "Build flavour: common|zero")
            ->capture_default_str();
    build_cmd->add_option("--ratio-ranges", build.ratio_ranges,
                          "Primary ratio intervals, e.g. \"[0.2,0.4),[0.4,0.6),[0.6,0.8]\"")
            ->capture_default_str();
    build_cmd->add_option("--variants", build.variants, "Output groups per source category")
            ->capture_default_str();
    build_cmd->add_option("--exclude", build.exclude,
                          "Categories barred as contributors and tolerated as secondary tags")
            ->delimiter(',');
    build_cmd->add_option("--num-groups", build.num_groups, "Zero mode: number of groups")
            ->capture_default_str();
    build_cmd->add_option("--min-group-size", build.min_group_size, "Zero mode: smallest group")
            ->capture_default_str();
    build_cmd->add_option("--max-group-size", build.max_group_size, "Zero mode: largest group")
            ->capture_default_str();
    build_cmd->callback([&] { cmd_build(build); });

    SampleFlags sample;
    auto* sample_cmd = app.add_subcommand("sample", "Emit serialized training-group epoch streams");
    add_common_flags(sample_cmd, sample.common, true);
    sample_cmd->add_option("--mode", sample.mode,
                           "Replacement count draw: floor-uniform|integer-uniform")
            ->capture_default_str();
    sample_cmd->add_option("--epochs", sample.epochs, "Number of epochs to emit")
            ->capture_default_str();
    sample_cmd->callback([&] { cmd_sample(sample); });

    PredictFlags predict;
    auto* predict_cmd = app.add_subcommand("predict", "Run the toy baseline predictor");
    add_common_flags(predict_cmd, predict.common, true);
    predict_cmd->add_option("--mode", predict.mode,
                            "Predictor: co (group-aware) | single (per-image saliency)")
            ->capture_default_str();
    predict_cmd->add_option("--color-bins", predict.config.bins_per_channel,
                            "Histogram bins per RGB channel")
            ->capture_default_str();
    predict_cmd->add_option("--affinity-threshold", predict.config.affinity_threshold,
                            "Abstain when the best consensus affinity is below this")
            ->capture_default_str();
    predict_cmd->add_option("--saliency-gate", predict.config.saliency_gate,
                            "Pixels at least this salient vote and contribute")
            ->capture_default_str();
    predict_cmd->add_option("--affinity-floor", predict.config.affinity_floor,
                            "Lower bound of the affinity modulation for non-abstained images")
            ->capture_default_str();
    predict_cmd->add_option("--blur-radius", predict.config.blur_radius,
                            "Box blur half-width for saliency smoothing")
            ->capture_default_str();
    predict_cmd->callback([&] { cmd_predict(predict); });

    EvalFlags eval;
    auto* eval_cmd = app.add_subcommand("eval", "Metrics and calibration over predictions");
    add_common_flags(eval_cmd, eval.common, true);
    eval_cmd->add_option("--predictions", eval.predictions, "Prediction maps directory")
            ->required()
            ->check(CLI::ExistingDirectory);
    add_metric_flags(eval_cmd, eval.metrics);
    eval_cmd->add_option("--bins", eval.bins, "ECE bin count")->capture_default_str();
    eval_cmd->add_option("--domain", eval.domain, "Confidence domain: max-confidence|raw")
            ->capture_default_str();
    eval_cmd->add_option("--stride", eval.stride, "Calibration pixel subsampling stride")
            ->capture_default_str();
    eval_cmd->callback([&] { cmd_eval(eval); });

    UncertaintyFlags uncertainty;
    auto* uncertainty_cmd =
            app.add_subcommand("uncertainty", "Entropy maps, revision, and re-evaluation");
    add_common_flags(uncertainty_cmd, uncertainty.common, true);
    uncertainty_cmd->add_option("--predictions", uncertainty.predictions,
                                "Prediction maps directory")
            ->required()
            ->check(CLI::ExistingDirectory);
    uncertainty_cmd->add_option("--eps", uncertainty.eps, "Entropy log offset epsilon")
            ->capture_default_str();
    uncertainty_cmd->add_flag("--no-clamp", uncertainty.no_clamp,
                              "Keep raw (possibly negative) entropy values");
    uncertainty_cmd->add_flag("--full-binary-entropy", uncertainty.full_binary_entropy,
                              "Add the complementary -(1-p)ln(1-p+eps) term");
    add_metric_flags(uncertainty_cmd, uncertainty.metrics);
    uncertainty_cmd->callback([&] { cmd_uncertainty(uncertainty); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const cosal::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const cosal::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
