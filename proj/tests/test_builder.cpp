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

#include <set>

#include "cosal/builder.hpp"
#include "test_util.hpp"

using namespace cosal;

TEST_CASE("ratio range parsing and membership", "[builder]") {
    const auto ranges = parse_ratio_ranges("[0.2,0.4),[0.4,0.6),[0.6,0.8]");
    REQUIRE(ranges.size() == 3);
    REQUIRE(ranges == default_ratio_ranges());

    REQUIRE(ranges[0].contains(0.2));
    REQUIRE_FALSE(ranges[0].contains(0.4));
    REQUIRE(ranges[1].contains(0.4));
    REQUIRE(ranges[2].contains(0.8));
    REQUIRE_FALSE(ranges[2].contains(0.81));

    REQUIRE(ranges[0].to_string() == "[0.2,0.4)");
    REQUIRE(ranges[2].to_string() == "[0.6,0.8]");

    REQUIRE_THROWS_AS(parse_ratio_ranges(""), ConfigError);
    REQUIRE_THROWS_AS(parse_ratio_ranges("(0.2,0.4)"), ConfigError);
    REQUIRE_THROWS_AS(parse_ratio_ranges("[0.2,0.4"), ConfigError);
    REQUIRE_THROWS_AS(parse_ratio_ranges("[0.2;0.4)"), ConfigError);
}

TEST_CASE("common config validation", "[builder]") {
    CommonBuildConfig c;
    REQUIRE_NOTHROW(validate_common_config(c));

    CommonBuildConfig overlapping;
    overlapping.ratio_ranges = {{0.2, 0.5, false}, {0.4, 0.6, false}};
    REQUIRE_THROWS_AS(validate_common_config(overlapping), ConfigError);

    CommonBuildConfig touching_closed;
    touching_closed.ratio_ranges = {{0.2, 0.4, true}, {0.4, 0.6, false}};
    REQUIRE_THROWS_AS(validate_common_config(touching_closed), ConfigError);

    CommonBuildConfig inverted;
    inverted.ratio_ranges = {{0.6, 0.4, false}};
    REQUIRE_THROWS_AS(validate_common_config(inverted), ConfigError);

    CommonBuildConfig above_one;
    above_one.ratio_ranges = {{0.9, 1.1, false}};
    REQUIRE_THROWS_AS(validate_common_config(above_one), ConfigError);

    CommonBuildConfig no_variants;
    no_variants.variants_per_category = 0;
    REQUIRE_THROWS_AS(validate_common_config(no_variants), ConfigError);
}

TEST_CASE("build_common assigns every variant its range", "[builder]") {
    const DatasetManifest source = testutil::toy_manifest(10, 10);
    CommonBuildConfig config;
    config.seed = 9;

    const auto [built, stats] = build_common(source, config);
    REQUIRE(built.group_count() == 30);
    REQUIRE(stats.kind == "common");
    REQUIRE(stats.groups.size() == 30);
    REQUIRE(stats.violations.empty());

    const auto ranges = default_ratio_ranges();
    for (const auto& row : stats.groups) {
        REQUIRE(row.range_index >= 0);
        REQUIRE(ranges[static_cast<std::size_t>(row.range_index)].contains(row.ratio));
        REQUIRE(row.ratio == static_cast<double>(row.n_primary) / row.group_size);
    }

    const PrimaryRatioHistogram hist = primary_ratio_histogram(built, config.ratio_ranges);
    REQUIRE(hist.bin_counts == std::vector<std::size_t>{10, 10, 10});

    for (const auto& g : built.groups) {
        REQUIRE(g.images.size() == 10);
        std::set<std::string> noisy_sources;
        for (const auto& e : g.images) {
            if (!e.zero_mask()) continue;
            const auto dot = e.image_id.find('.');
            REQUIRE(dot != std::string::npos);
            REQUIRE(noisy_sources.insert(e.image_id.substr(0, dot)).second);
        }
    }
}

TEST_CASE("build_common is a pure function of source and config", "[builder]") {
    const DatasetManifest source = testutil::toy_manifest(10, 10);
    CommonBuildConfig config;
    config.seed = 10;
    const auto [a, stats_a] = build_common(source, config);
    const auto [b, stats_b] = build_common(source, config);
    REQUIRE(manifest_to_string(a) == manifest_to_string(b));
    REQUIRE(build_stats_to_string(stats_a) == build_stats_to_string(stats_b));

    config.seed = 11;
    const auto [c, stats_c] = build_common(source, config);
    REQUIRE(manifest_to_string(a) != manifest_to_string(c));
}

TEST_CASE("build_common never invents images", "[builder]") {
    const DatasetManifest source = testutil::toy_manifest(10, 10);
    std::set<std::string> source_paths;
    for (const auto& g : source.groups)
        for (const auto& e : g.images) source_paths.insert(e.image_path);

    CommonBuildConfig config;
    config.seed = 12;
    const auto [built, stats] = build_common(source, config);
    for (const auto& g : built.groups)
        for (const auto& e : g.images) REQUIRE(source_paths.count(e.image_path) == 1);
}

TEST_CASE("build_common errors on infeasible ranges and exhausted pools", "[builder]") {
    const DatasetManifest source = testutil::toy_manifest(3, 10);

    CommonBuildConfig no_feasible;
    no_feasible.ratio_ranges = {{0.91, 0.99, false}};
    no_feasible.variants_per_category = 1;
    no_feasible.seed = 1;
    REQUIRE_THROWS_AS(build_common(source, no_feasible), DataError);

    CommonBuildConfig starved;
    starved.seed = 1;
    starved.exclusions = {"cat1", "cat2"};
    REQUIRE_THROWS_WITH(build_common(source, starved),
                        Catch::Matchers::ContainsSubstring("insufficient noisy pool"));
}

TEST_CASE("excluded categories neither emit variants nor fill slots", "[builder]") {
    const DatasetManifest source = testutil::toy_manifest(10, 10);
    CommonBuildConfig config;
    config.seed = 13;
    config.exclusions = {"cat0"};

    const auto [built, stats] = build_common(source, config);
    REQUIRE(built.group_count() == 27);
    for (const auto& g : built.groups) {
        REQUIRE(g.category != "cat0");
        for (const auto& e : g.images)
            if (e.zero_mask()) REQUIRE(e.image_id.rfind("cat0.", 0) != 0);
    }
}

TEST_CASE("build_zero emits requested group count with distinct sources", "[builder]") {
    const DatasetManifest source = testutil::toy_manifest(8, 6);
    ZeroBuildConfig config;
    config.num_groups = 7;
    config.min_group_size = 2;
    config.max_group_size = 5;
    config.seed = 14;

    const auto [built, stats] = build_zero(source, config);
    REQUIRE(built.group_count() == 7);
    REQUIRE(stats.kind == "zero");
    REQUIRE(validate_zero(built, config.exclusions).empty());

    for (std::size_t i = 0; i < built.groups.size(); ++i) {
        const auto& g = built.groups[i];
        REQUIRE(g.category == "zero");
        REQUIRE(g.group_id == "zero_" + std::to_string(i));
        REQUIRE(g.images.size() >= 2);
        REQUIRE(g.images.size() <= 5);
        std::set<std::string> sources;
        for (const auto& e : g.images) {
            REQUIRE(e.zero_mask());
            const auto dot = e.image_id.find('.');
            REQUIRE(sources.insert(e.image_id.substr(0, dot)).second);
        }
    }

    const auto [again, stats_again] = build_zero(source, config);
    REQUIRE(manifest_to_string(built) == manifest_to_string(again));
}

TEST_CASE("build_zero rejects infeasible configurations", "[builder]") {
    const DatasetManifest source = testutil::toy_manifest(3, 6);
    ZeroBuildConfig config;
    config.num_groups = 2;
    config.min_group_size = 4;
    config.max_group_size = 5;
    config.seed = 1;
    REQUIRE_THROWS_AS(build_zero(source, config), DataError);

    ZeroBuildConfig bad;
    bad.min_group_size = 0;
    REQUIRE_THROWS_AS(validate_zero_config(bad), ConfigError);
    bad.min_group_size = 6;
    bad.max_group_size = 4;
    REQUIRE_THROWS_AS(validate_zero_config(bad), ConfigError);
}

TEST_CASE("validate_zero flags shared non-excluded tags", "[builder]") {
    DatasetManifest m;
    GroupEntry g;
    g.group_id = "zero_000";
    g.category = "zero";
    for (int i = 0; i < 9; ++i) {
        ImageEntry e;
        e.image_id = "img" + std::to_string(i);
        e.image_path = "images/img" + std::to_string(i) + ".png";
        e.mask_path = kZeroMask;
        e.width = 4;
        e.height = 4;
        e.tags = normalize_tags({"own" + std::to_string(i)});
        if (i < 7) e.tags = normalize_tags({e.tags[0], "person"});
        g.images.push_back(e);
    }
    m.groups.push_back(g);

    SECTION("seven of nine sharing a tag is a violation") {
        const auto violations = validate_zero(m, {});
        REQUIRE(violations.size() == 1);
        REQUIRE(violations[0].group_id == "zero_000");
        REQUIRE(violations[0].tag == "person");
        REQUIRE(violations[0].count == 7);
        REQUIRE(violations[0].group_size == 9);
    }

    SECTION("excluding the tag silences the violation") {
        REQUIRE(validate_zero(m, {"person"}).empty());
    }

    SECTION("overlap threshold raises the bar") {
        REQUIRE(validate_zero(m, {}, 0.5).size() == 1);
        REQUIRE(validate_zero(m, {}, 0.9).empty());
    }

    SECTION("pairwise-disjoint tags are clean") {
        for (auto& e : m.groups[0].images) e.tags = {e.image_id};
        REQUIRE(validate_zero(m, {}).empty());
    }
}

TEST_CASE("primary ratio histogram reads roles from ZERO labels", "[builder]") {
    DatasetManifest m;
    GroupEntry g;
    g.group_id = "mixed";
    g.category = "apple";
    for (int i = 0; i < 10; ++i) {
        ImageEntry e;
        e.image_id = "img" + std::to_string(i);
        e.image_path = "images/img" + std::to_string(i) + ".png";
        e.mask_path = i < 6 ? "masks/img" + std::to_string(i) + ".png" : std::string(kZeroMask);
        e.width = 4;
        e.height = 4;
        e.tags = {"apple"};
        g.images.push_back(e);
    }
    m.groups.push_back(g);

    GroupEntry all_zero = g;
    all_zero.group_id = "empty";
    for (auto& e : all_zero.images) e.mask_path = kZeroMask;
    m.groups.push_back(all_zero);

    const PrimaryRatioHistogram hist = primary_ratio_histogram(m, default_ratio_ranges());
    REQUIRE(hist.rows.size() == 2);
    REQUIRE(hist.rows[0].n_primary == 6);
    REQUIRE(hist.rows[0].ratio == 0.6);
    REQUIRE(hist.rows[0].range_index == 2);
    REQUIRE(hist.rows[1].n_primary == 0);
    REQUIRE(hist.rows[1].ratio == 0.0);
    REQUIRE(hist.rows[1].range_index == -1);
}
