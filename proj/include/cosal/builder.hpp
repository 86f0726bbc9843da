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
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cosal/error.hpp"
#include "cosal/manifest.hpp"
#include "cosal/numeric.hpp"
#include "cosal/rng.hpp"

namespace cosal {

/// A primary-presence ratio interval, closed at lo, open or closed at hi.
struct RatioRange {
    double lo = 0.0;
    double hi = 0.0;
    bool closed_hi = false;

    bool contains(double x) const { return x >= lo && (closed_hi ? x <= hi : x < hi); }
    std::string to_string() const {
        return "[" + format_double(lo) + "," + format_double(hi) + (closed_hi ? "]" : ")");
    }
    bool operator==(const RatioRange&) const = default;
};

inline std::vector<RatioRange> default_ratio_ranges() {
    return {{0.2, 0.4, false}, {0.4, 0.6, false}, {0.6, 0.8, true}};
}

/// Parses interval-list notation, e.g. "[0.2,0.4),[0.4,0.6),[0.6,0.8]".
/// Every interval is closed at its lower bound.
inline std::vector<RatioRange> parse_ratio_ranges(const std::string& text) {
    std::vector<RatioRange> out;
    std::size_t i = 0;
    auto skip_separators = [&] {
        while (i < text.size() && (text[i] == ',' || text[i] == ' ')) ++i;
    };
    skip_separators();
    while (i < text.size()) {
        if (text[i] != '[')
            throw ConfigError("ratio range must start with '[' at position " + std::to_string(i) +
                              " in: " + text);
        std::size_t end = text.find_first_of(")]", i + 1);
        if (end == std::string::npos)
            throw ConfigError("unterminated ratio range in: " + text);
        std::string body = text.substr(i + 1, end - i - 1);
        std::size_t comma = body.find(',');
        if (comma == std::string::npos)
            throw ConfigError("ratio range needs two comma-separated bounds: [" + body + "...");
        RatioRange r;
        try {
            r.lo = std::stod(body.substr(0, comma));
            r.hi = std::stod(body.substr(comma + 1));
        } catch (const std::exception&) {
            throw ConfigError("cannot parse ratio range bounds: [" + body + "...");
        }
        r.closed_hi = text[end] == ']';
        out.push_back(r);
        i = end + 1;
        skip_separators();
    }
    if (out.empty()) throw ConfigError("empty ratio range list");
    return out;
}

struct CommonBuildConfig {
    std::vector<RatioRange> ratio_ranges = default_ratio_ranges();
    int variants_per_category = 3;
    std::uint64_t seed = 0;
    std::set<std::string> exclusions;
};

struct ZeroBuildConfig {
    int num_groups = 55;
    int min_group_size = 4;
    int max_group_size = 10;
    std::uint64_t seed = 0;
    std::set<std::string> exclusions;
};

struct ZeroViolation {
    std::string group_id;
    std::string tag;
    int count = 0;
    int group_size = 0;

    bool operator==(const ZeroViolation&) const = default;
};

struct GroupRatioRow {
    std::string group_id;
    int n_primary = 0;
    int group_size = 0;
    double ratio = 0.0;
    int range_index = -1;  // -1 when no range applies (zero builds)
};

struct BuildStats {
    std::uint64_t seed = 0;
    std::string kind;  // "common" or "zero"
    std::vector<GroupRatioRow> groups;
    std::vector<ZeroViolation> violations;
};

inline void validate_common_config(const CommonBuildConfig& c) {
    if (c.ratio_ranges.empty()) throw ConfigError("ratio_ranges must be non-empty");
    for (const auto& r : c.ratio_ranges) {
        if (!(r.lo > 0.0 && r.lo < r.hi && r.hi <= 1.0))
            throw ConfigError("ratio range " + r.to_string() + " must satisfy 0 < lo < hi <= 1");
    }
    auto sorted = c.ratio_ranges;
    std::sort(sorted.begin(), sorted.end(),
              [](const RatioRange& a, const RatioRange& b) { return a.lo < b.lo; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        const auto& prev = sorted[i - 1];
        const auto& next = sorted[i];
        bool overlap = next.lo < prev.hi || (next.lo == prev.hi && prev.closed_hi);
        if (overlap)
            throw ConfigError("ratio ranges " + prev.to_string() + " and " + next.to_string() +
                              " overlap");
    }
    if (c.variants_per_category < 1) throw ConfigError("variants_per_category must be >= 1");
}

inline void validate_zero_config(const ZeroBuildConfig& c) {
    if (c.num_groups < 1) throw ConfigError("num_groups must be >= 1");
    if (!(c.min_group_size >= 1 && c.min_group_size <= c.max_group_size))
        throw ConfigError("group size bounds must satisfy 1 <= min <= max");
}

/// Reports every group in which some non-excluded tag is shared by at least
/// max(2, ceil(overlap_threshold * group_size)) images. The default
/// threshold of 0 keeps the floor of 2, so any repeated tag is a violation.
inline std::vector<ZeroViolation> validate_zero(const DatasetManifest& manifest,
                                                const std::set<std::string>& exclusions,
                                                double overlap_threshold = 0.0) {
    std::vector<ZeroViolation> out;
    for (const auto& g : manifest.groups) {
        const int n = static_cast<int>(g.images.size());
        const int limit = std::max(2, static_cast<int>(std::ceil(overlap_threshold * n)));
        std::map<std::string, int> tag_counts;
        for (const auto& e : g.images)
            for (const auto& t : e.tags)
                if (!exclusions.count(t)) ++tag_counts[t];
        for (const auto& [tag, count] : tag_counts)
            if (count >= limit) out.push_back(ZeroViolation{g.group_id, tag, count, n});
    }
    return out;
}

struct PrimaryRatioHistogram {
    std::vector<GroupRatioRow> rows;
    std::vector<std::size_t> bin_counts;  // parallel to the supplied ranges
};

/// Per-group primary ratio (non-ZERO-label images / N) with counts per
/// configured range. Roles are recovered from the ZERO sentinel.
inline PrimaryRatioHistogram primary_ratio_histogram(
        const DatasetManifest& manifest,
        const std::vector<RatioRange>& ranges = default_ratio_ranges()) {
    PrimaryRatioHistogram h;
    h.bin_counts.assign(ranges.size(), 0);
    for (const auto& g : manifest.groups) {
        int n_primary = 0;
        for (const auto& e : g.images)
            if (!e.zero_mask()) ++n_primary;
        GroupRatioRow row;
        row.group_id = g.group_id;
        row.n_primary = n_primary;
        row.group_size = static_cast<int>(g.images.size());
        row.ratio = static_cast<double>(n_primary) / row.group_size;
        for (std::size_t b = 0; b < ranges.size(); ++b) {
            if (ranges[b].contains(row.ratio)) {
                row.range_index = static_cast<int>(b);
                ++h.bin_counts[b];
                break;
            }
        }
        h.rows.push_back(std::move(row));
    }
    return h;
}

namespace detail {

/// A filler image never shows the target category and never comes from an
/// excluded or same-category source group.
inline std::vector<const ImageEntry*> filler_candidates(const GroupEntry& g,
                                                        const std::string& target_category) {
    std::vector<const ImageEntry*> out;
    for (const auto& e : g.images)
        if (!e.has_tag(target_category)) out.push_back(&e);
    return out;
}

inline ImageEntry prefixed_copy(const ImageEntry& e, const std::string& source_group_id) {
    ImageEntry out = e;
    out.image_id = source_group_id + "." + e.image_id;
    out.mask_path = kZeroMask;
    return out;
}

} // namespace detail

/// Rebuilds the source into groups with controlled primary-presence ratios.
/// Each non-excluded source group yields variants_per_category output
/// groups; variant v targets ratio_ranges[v mod |ranges|]. Slots not kept
/// from the source group are filled with ZERO-labelled images from other
/// categories, at most one per source group.
inline std::pair<DatasetManifest, BuildStats> build_common(const DatasetManifest& source,
                                                           const CommonBuildConfig& config) {
    validate_common_config(config);
    if (source.groups.size() < 2)
        throw DataError("build_common requires at least 2 source groups");
    RandomStream stream = RandomStream::derive(config.seed, 0xC0u, 0);

    DatasetManifest out;
    out.root = source.root;
    BuildStats stats;
    stats.seed = config.seed;
    stats.kind = "common";

    for (const auto& src : source.groups) {
        if (config.exclusions.count(src.category)) continue;
        const int n = static_cast<int>(src.images.size());

        std::vector<const GroupEntry*> filler_groups;
        std::vector<std::vector<const ImageEntry*>> filler_images;
        for (const auto& other : source.groups) {
            if (other.category == src.category) continue;
            if (config.exclusions.count(other.category)) continue;
            auto imgs = detail::filler_candidates(other, src.category);
            if (imgs.empty()) continue;
            filler_groups.push_back(&other);
            filler_images.push_back(std::move(imgs));
        }

        for (int v = 0; v < config.variants_per_category; ++v) {
            const std::size_t range_index = static_cast<std::size_t>(v) % config.ratio_ranges.size();
            const RatioRange& range = config.ratio_ranges[range_index];

            std::vector<int> feasible;
            for (int k = 1; k <= n; ++k)
                if (range.contains(static_cast<double>(k) / n)) feasible.push_back(k);
            if (feasible.empty())
                throw DataError("ratio range " + range.to_string() +
                                " admits no feasible primary count for group " + src.group_id +
                                " of size " + std::to_string(n));
            const int n_primary = feasible[stream.uniform_int(feasible.size())];
            const int n_filler = n - n_primary;

            if (static_cast<std::size_t>(n_filler) > filler_groups.size())
                throw DataError("insufficient noisy pool after exclusions: group " + src.group_id +
                                " needs " + std::to_string(n_filler) + " fillers but only " +
                                std::to_string(filler_groups.size()) + " source groups qualify");

            std::vector<std::size_t> kept = stream.pick_distinct(static_cast<std::size_t>(n),
                                                                 static_cast<std::size_t>(n_primary));
            std::vector<bool> is_kept(static_cast<std::size_t>(n), false);
            for (std::size_t s : kept) is_kept[s] = true;

            std::vector<std::size_t> chosen = stream.pick_distinct(filler_groups.size(),
                                                                   static_cast<std::size_t>(n_filler));
            std::vector<ImageEntry> fillers;
            fillers.reserve(chosen.size());
            for (std::size_t gi : chosen) {
                const auto& candidates = filler_images[gi];
                const ImageEntry* pick = candidates[stream.uniform_int(candidates.size())];
                fillers.push_back(detail::prefixed_copy(*pick, filler_groups[gi]->group_id));
            }

            GroupEntry g;
            g.group_id = src.group_id + "_v" + std::to_string(v);
            g.category = src.category;
            std::size_t next_filler = 0;
            for (int s = 0; s < n; ++s) {
                if (is_kept[static_cast<std::size_t>(s)])
                    g.images.push_back(src.images[static_cast<std::size_t>(s)]);
                else
                    g.images.push_back(fillers[next_filler++]);
            }

            GroupRatioRow row;
            row.group_id = g.group_id;
            row.n_primary = n_primary;
            row.group_size = n;
            row.ratio = static_cast<double>(n_primary) / n;
            row.range_index = static_cast<int>(range_index);
            stats.groups.push_back(std::move(row));
            out.groups.push_back(std::move(g));
        }
    }
    if (out.groups.empty())
        throw DataError("build_common produced no groups (every category excluded?)");
    validate_manifest(out);
    return {std::move(out), std::move(stats)};
}

/// Builds groups with no shared salient category: every image comes from a
/// distinct non-excluded source group, all labels are ZERO, and non-excluded
/// tags are pairwise disjoint within a group, so validate_zero is clean by
/// construction.
inline std::pair<DatasetManifest, BuildStats> build_zero(const DatasetManifest& source,
                                                         const ZeroBuildConfig& config) {
    validate_zero_config(config);
    std::vector<const GroupEntry*> eligible;
    for (const auto& g : source.groups)
        if (!config.exclusions.count(g.category)) eligible.push_back(&g);
    if (eligible.size() < static_cast<std::size_t>(config.max_group_size))
        throw DataError("infeasible constraints: " + std::to_string(eligible.size()) +
                        " eligible source groups cannot supply groups of size " +
                        std::to_string(config.max_group_size));
    RandomStream stream = RandomStream::derive(config.seed, 0x2Eu, 0);

    DatasetManifest out;
    out.root = source.root;
    BuildStats stats;
    stats.seed = config.seed;
    stats.kind = "zero";

    int id_width = 1;
    for (int v = config.num_groups - 1; v >= 10; v /= 10) ++id_width;

    for (int gi = 0; gi < config.num_groups; ++gi) {
        const int target =
                static_cast<int>(stream.uniform_range(config.min_group_size, config.max_group_size));
        GroupEntry g;
        {
            std::string num = std::to_string(gi);
            g.group_id = "zero_" + std::string(static_cast<std::size_t>(id_width) - num.size(), '0') + num;
        }
        g.category = "zero";

        constexpr int kMaxAttempts = 1000;
        bool done = false;
        for (int attempt = 0; attempt < kMaxAttempts && !done; ++attempt) {
            std::vector<std::size_t> order(eligible.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            stream.shuffle(order);

            std::vector<ImageEntry> members;
            std::set<std::string> used_tags;
            for (std::size_t idx : order) {
                if (static_cast<int>(members.size()) == target) break;
                const GroupEntry& src = *eligible[idx];
                const ImageEntry& pick = src.images[stream.uniform_int(src.images.size())];
                bool clash = false;
                for (const auto& t : pick.tags)
                    if (!config.exclusions.count(t) && used_tags.count(t)) { clash = true; break; }
                if (clash) continue;
                for (const auto& t : pick.tags)
                    if (!config.exclusions.count(t)) used_tags.insert(t);
                members.push_back(detail::prefixed_copy(pick, src.group_id));
            }
            if (static_cast<int>(members.size()) == target) {
                g.images = std::move(members);
                done = true;
            }
        }
        if (!done)
            throw DataError("could not assemble zero group " + g.group_id + " of size " +
                            std::to_string(target) + " after " + std::to_string(kMaxAttempts) +
                            " attempts (exclusions too aggressive?)");

        GroupRatioRow row;
        row.group_id = g.group_id;
        row.n_primary = 0;
        row.group_size = target;
        row.ratio = 0.0;
        stats.groups.push_back(std::move(row));
        out.groups.push_back(std::move(g));
    }

    validate_manifest(out);
    stats.violations = validate_zero(out, config.exclusions);
    if (!stats.violations.empty())
        throw DataError("internal: zero build emitted " + std::to_string(stats.violations.size()) +
                        " tag violations");
    return {std::move(out), std::move(stats)};
}

inline std::string build_stats_to_string(const BuildStats& s) {
    nlohmann::ordered_json j;
    j["seed"] = s.seed;
    j["kind"] = s.kind;
    j["groups"] = nlohmann::ordered_json::array();
    for (const auto& row : s.groups) {
        nlohmann::ordered_json jr;
        jr["group_id"] = row.group_id;
        jr["n_primary"] = row.n_primary;
        jr["size"] = row.group_size;
        jr["ratio"] = row.ratio;
        if (row.range_index >= 0) jr["range_index"] = row.range_index;
        j["groups"].push_back(std::move(jr));
    }
    j["violations"] = nlohmann::ordered_json::array();
    for (const auto& v : s.violations) {
        nlohmann::ordered_json jv;
        jv["group_id"] = v.group_id;
        jv["tag"] = v.tag;
        jv["count"] = v.count;
        jv["size"] = v.group_size;
        j["violations"].push_back(std::move(jv));
    }
    return j.dump(2) + "\n";
}

} // namespace cosal
