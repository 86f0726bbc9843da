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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cosal/error.hpp"
#include "cosal/manifest.hpp"
#include "cosal/parallel.hpp"
#include "cosal/rng.hpp"

namespace cosal {

/// How the replacement count r is drawn for a group of size N.
///
/// kFloorUniform draws r_tilde ~ U[0,1) and sets r = floor(N * r_tilde),
/// so full replacement (r = N) has probability zero. kIntegerUniform draws
/// r uniformly from {0, ..., N}, realizing both extreme cases (conventional
/// co-saliency at r = 0, a fully noisy group at r = N) with positive
/// probability.
enum class RatioMode {
    kFloorUniform,
    kIntegerUniform,
};

inline const char* to_string(RatioMode m) {
    return m == RatioMode::kFloorUniform ? "floor-uniform" : "integer-uniform";
}

inline RatioMode ratio_mode_from_string(const std::string& s) {
    if (s == "floor-uniform") return RatioMode::kFloorUniform;
    if (s == "integer-uniform") return RatioMode::kIntegerUniform;
    throw ConfigError("unknown replacement mode: " + s +
                      " (expected floor-uniform or integer-uniform)");
}

struct SamplerConfig {
    std::uint64_t seed = 0;
    RatioMode full_replacement_mode = RatioMode::kFloorUniform;
    std::uint64_t epoch = 0;
};

enum class Role { kPrimary, kNoisy };

inline const char* to_string(Role r) {
    return r == Role::kPrimary ? "primary" : "noisy";
}

struct SampledEntry {
    ImageEntry image;
    std::string source_group_id;
    Role role = Role::kPrimary;
    std::string effective_mask;  // image.mask_path for primary, kZeroMask for noisy

    bool operator==(const SampledEntry&) const = default;
};

struct SampledGroup {
    std::string group_id;
    std::size_t draw_index = 0;
    double drawn_ratio = 0.0;    // r_tilde
    int replacement_count = 0;   // r
    std::vector<SampledEntry> entries;

    bool operator==(const SampledGroup&) const = default;
};

/// Derives the RNG stream for one group draw. All randomness of a sampled
/// group flows from this single stream, so results depend only on
/// (seed, epoch, group index) and never on scheduling.
inline RandomStream sampler_stream(const SamplerConfig& config, std::size_t group_index) {
    return RandomStream::derive(config.seed, config.epoch, static_cast<std::uint64_t>(group_index));
}

/// Draws (r_tilde, r) for a group of the given size. Consumes exactly one
/// variate from the stream in either mode.
inline std::pair<double, int> draw_replacement_count(int group_size,
                                                     const SamplerConfig& config,
                                                     RandomStream& stream) {
    if (group_size < 1) throw DataError("draw_replacement_count: group_size must be >= 1");
    if (config.full_replacement_mode == RatioMode::kFloorUniform) {
        double r_tilde = stream.uniform01();
        int r = static_cast<int>(group_size * r_tilde);
        return {r_tilde, r};
    }
    auto r = static_cast<int>(stream.uniform_int(static_cast<std::uint64_t>(group_size) + 1));
    return {static_cast<double>(r) / group_size, r};
}

/// Selects r distinct secondary groups (never the primary) and one uniformly
/// drawn image from each. Consumes the group draws first, then one image
/// draw per chosen group, in draw order.
inline std::vector<std::pair<std::string, ImageEntry>> sample_noisy_sources(
        const std::string& primary_group_id, int r, const DatasetManifest& manifest,
        RandomStream& stream) {
    std::vector<const GroupEntry*> secondary;
    secondary.reserve(manifest.groups.size());
    for (const auto& g : manifest.groups)
        if (g.group_id != primary_group_id) secondary.push_back(&g);
    if (r < 0) throw DataError("sample_noisy_sources: negative replacement count");
    if (static_cast<std::size_t>(r) > secondary.size())
        throw DataError("replacement count " + std::to_string(r) + " exceeds the " +
                        std::to_string(secondary.size()) + " secondary groups available (manifest has " +
                        std::to_string(manifest.groups.size()) + " groups)");
    std::vector<std::size_t> chosen = stream.pick_distinct(secondary.size(), static_cast<std::size_t>(r));
    std::vector<std::pair<std::string, ImageEntry>> out;
    out.reserve(chosen.size());
    for (std::size_t idx : chosen) {
        const GroupEntry& g = *secondary[idx];
        std::size_t j = stream.uniform_int(g.images.size());
        out.emplace_back(g.group_id, g.images[j]);
    }
    return out;
}

/// Replaces a uniformly random subset of |noisy| primary slots in-place.
/// Noisy entries carry the ZERO label; untouched entries keep their
/// original masks. Group size is preserved.
inline SampledGroup compose_training_group(const GroupEntry& primary,
                                           const std::vector<std::pair<std::string, ImageEntry>>& noisy,
                                           RandomStream& stream) {
    const std::size_t n = primary.images.size();
    if (noisy.size() > n)
        throw DataError("compose_training_group: " + std::to_string(noisy.size()) +
                        " noisy entries exceed group size " + std::to_string(n));
    SampledGroup out;
    out.group_id = primary.group_id;
    out.replacement_count = static_cast<int>(noisy.size());
    out.entries.reserve(n);
    for (const auto& e : primary.images)
        out.entries.push_back(SampledEntry{e, primary.group_id, Role::kPrimary, e.mask_path});
    std::vector<std::size_t> slots = stream.pick_distinct(n, noisy.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
        SampledEntry& slot = out.entries[slots[i]];
        slot.image = noisy[i].second;
        slot.source_group_id = noisy[i].first;
        slot.role = Role::kNoisy;
        slot.effective_mask = kZeroMask;
    }
    return out;
}

/// Draws one training group for the manifest group at group_index.
inline SampledGroup sample_group(const DatasetManifest& manifest, std::size_t group_index,
                                 const SamplerConfig& config) {
    const GroupEntry& primary = manifest.groups.at(group_index);
    RandomStream stream = sampler_stream(config, group_index);
    auto [r_tilde, r] = draw_replacement_count(static_cast<int>(primary.images.size()), config, stream);
    auto noisy = sample_noisy_sources(primary.group_id, r, manifest, stream);
    SampledGroup g = compose_training_group(primary, noisy, stream);
    g.draw_index = group_index;
    g.drawn_ratio = r_tilde;
    return g;
}

/// Draws one training group per manifest group, in manifest order. Each
/// group uses its own derived stream, so the result is identical for any
/// worker count.
inline std::vector<SampledGroup> sample_epoch(const DatasetManifest& manifest,
                                              const SamplerConfig& config,
                                              unsigned workers = 1) {
    if (manifest.groups.size() < 2)
        throw DataError("sampling requires at least 2 groups, manifest has " +
                        std::to_string(manifest.groups.size()));
    std::vector<SampledGroup> out(manifest.groups.size());
    parallel_for(manifest.groups.size(), workers,
                 [&](std::size_t i) { out[i] = sample_group(manifest, i, config); });
    return out;
}

inline nlohmann::ordered_json sampled_group_to_json(const SampledGroup& g) {
    nlohmann::ordered_json j;
    j["group_id"] = g.group_id;
    j["draw_index"] = g.draw_index;
    j["r_tilde"] = g.drawn_ratio;
    j["r"] = g.replacement_count;
    j["entries"] = nlohmann::ordered_json::array();
    for (const auto& e : g.entries) {
        nlohmann::ordered_json je;
        je["image_id"] = e.image.image_id;
        je["source_group_id"] = e.source_group_id;
        je["role"] = to_string(e.role);
        j["entries"].push_back(std::move(je));
    }
    return j;
}

/// One JSON record per line, in stream order; the golden-file format.
inline std::string serialize_sample_stream(std::span<const SampledGroup> groups) {
    std::string out;
    for (const auto& g : groups) {
        out += sampled_group_to_json(g).dump();
        out += '\n';
    }
    return out;
}

inline void write_sample_stream(std::span<const SampledGroup> groups,
                                const std::filesystem::path& path) {
    ensure_parent_dir(path);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open sample stream for writing: " + path.string());
    f << serialize_sample_stream(groups);
    if (!f) throw DataError("failed writing sample stream: " + path.string());
}

} // namespace cosal
