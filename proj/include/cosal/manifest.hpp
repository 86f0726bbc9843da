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
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "cosal/error.hpp"
#include "cosal/image_io.hpp"

namespace cosal {

/// Sentinel mask path denoting an all-zero (complete-negative) ground truth
/// of the image's dimensions. Never materialized as a file.
inline constexpr const char* kZeroMask = "ZERO";

inline constexpr int kManifestSchemaVersion = 1;

struct ImageEntry {
    std::string image_id;
    std::string image_path;              // relative to manifest root
    std::string mask_path;               // relative to root, or kZeroMask
    int width = 0;
    int height = 0;
    std::vector<std::string> tags;       // sorted unique category strings

    bool zero_mask() const { return mask_path == kZeroMask; }
    bool has_tag(const std::string& t) const {
        return std::binary_search(tags.begin(), tags.end(), t);
    }
    bool operator==(const ImageEntry&) const = default;
};

struct GroupEntry {
    std::string group_id;
    std::string category;
    std::vector<ImageEntry> images;

    bool operator==(const GroupEntry&) const = default;
};

struct DatasetManifest {
    int schema_version = kManifestSchemaVersion;
    std::string root = ".";
    std::vector<GroupEntry> groups;

    std::size_t group_count() const { return groups.size(); }
    std::size_t image_count() const {
        std::size_t n = 0;
        for (const auto& g : groups) n += g.images.size();
        return n;
    }
    bool operator==(const DatasetManifest&) const = default;
};

inline std::vector<std::string> normalize_tags(std::vector<std::string> tags) {
    std::sort(tags.begin(), tags.end());
    tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
    return tags;
}

struct ManifestCheckOptions {
    bool check_files = true;       // referenced image/mask files must exist
    bool check_dimensions = true;  // decoded sizes must match declared sizes
};

/// Resolves the manifest root against the directory the manifest file lives
/// in (absolute roots pass through).
inline std::filesystem::path resolve_root(const std::filesystem::path& manifest_path,
                                          const std::string& root) {
    std::filesystem::path r(root);
    if (r.is_absolute()) return r;
    return manifest_path.parent_path() / r;
}

/// Structural validation of the manifest invariants. base_dir is the
/// resolved root used for file checks; pass an empty path to skip them.
inline void validate_manifest(const DatasetManifest& m,
                              const std::filesystem::path& base_dir = {},
                              const ManifestCheckOptions& opts = {}) {
    if (m.schema_version != kManifestSchemaVersion)
        throw DataError("unsupported manifest schema_version " + std::to_string(m.schema_version));
    std::unordered_set<std::string> group_ids;
    for (const auto& g : m.groups) {
        if (!group_ids.insert(g.group_id).second)
            throw DataError("duplicate group_id: " + g.group_id);
        if (g.images.empty())
            throw DataError("group has no images: " + g.group_id);
        std::unordered_set<std::string> image_ids;
        for (const auto& e : g.images) {
            if (!image_ids.insert(e.image_id).second)
                throw DataError("duplicate image_id: " + e.image_id + " in group " + g.group_id);
            if (e.width <= 0 || e.height <= 0)
                throw DataError("non-positive dimensions for image " + e.image_id);
            if (!std::is_sorted(e.tags.begin(), e.tags.end()))
                throw DataError("tags not in canonical order for image " + e.image_id);
            if (e.mask_path.empty())
                throw DataError("empty mask_path for image " + e.image_id +
                                " (use the ZERO sentinel for all-zero ground truth)");
            if (!base_dir.empty() && opts.check_files) {
                auto img = base_dir / e.image_path;
                if (!std::filesystem::exists(img))
                    throw DataError("missing image file for " + e.image_id + ": " + img.string());
                if (!e.zero_mask()) {
                    auto msk = base_dir / e.mask_path;
                    if (!std::filesystem::exists(msk))
                        throw DataError("missing mask file for " + e.image_id + ": " + msk.string());
                }
                if (opts.check_dimensions) {
                    auto [ih, iw] = read_image_size(img);
                    if (ih != e.height || iw != e.width)
                        throw DataError("image dimension mismatch for " + e.image_id + ": manifest " +
                                        std::to_string(e.height) + "x" + std::to_string(e.width) +
                                        ", file " + std::to_string(ih) + "x" + std::to_string(iw));
                    if (!e.zero_mask()) {
                        auto [mh, mw] = read_image_size(base_dir / e.mask_path);
                        if (mh != e.height || mw != e.width)
                            throw DataError("mask dimension mismatch for " + e.image_id);
                    }
                }
            }
        }
    }
}

namespace detail {

inline nlohmann::ordered_json manifest_to_json(const DatasetManifest& m) {
    nlohmann::ordered_json j;
    j["schema_version"] = m.schema_version;
    j["root"] = m.root;
    j["groups"] = nlohmann::ordered_json::array();
    for (const auto& g : m.groups) {
        nlohmann::ordered_json jg;
        jg["group_id"] = g.group_id;
        jg["category"] = g.category;
        jg["images"] = nlohmann::ordered_json::array();
        for (const auto& e : g.images) {
            nlohmann::ordered_json je;
            je["image_id"] = e.image_id;
            je["image_path"] = e.image_path;
            je["mask_path"] = e.mask_path;
            je["width"] = e.width;
            je["height"] = e.height;
            je["tags"] = e.tags;
            jg["images"].push_back(std::move(je));
        }
        j["groups"].push_back(std::move(jg));
    }
    return j;
}

inline DatasetManifest manifest_from_json(const nlohmann::json& j) {
    DatasetManifest m;
    try {
        m.schema_version = j.at("schema_version").get<int>();
        m.root = j.at("root").get<std::string>();
        for (const auto& jg : j.at("groups")) {
            GroupEntry g;
            g.group_id = jg.at("group_id").get<std::string>();
            g.category = jg.at("category").get<std::string>();
            for (const auto& je : jg.at("images")) {
                ImageEntry e;
                e.image_id = je.at("image_id").get<std::string>();
                e.image_path = je.at("image_path").get<std::string>();
                e.mask_path = je.at("mask_path").get<std::string>();
                e.width = je.at("width").get<int>();
                e.height = je.at("height").get<int>();
                if (je.contains("tags")) e.tags = je.at("tags").get<std::vector<std::string>>();
                g.images.push_back(std::move(e));
            }
            m.groups.push_back(std::move(g));
        }
    } catch (const nlohmann::json::exception& ex) {
        throw DataError(std::string("malformed manifest: ") + ex.what());
    }
    return m;
}

} // namespace detail

/// Canonical serialization: fixed key order, two-space indent, newline
/// terminated. Identical manifests always produce identical bytes.
inline std::string manifest_to_string(const DatasetManifest& m) {
    return detail::manifest_to_json(m).dump(2) + "\n";
}

inline void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
    validate_manifest(m);
    ensure_parent_dir(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open manifest for writing: " + path.string());
    out << manifest_to_string(m);
    if (!out) throw DataError("failed writing manifest: " + path.string());
}

inline DatasetManifest load_manifest(const std::filesystem::path& path,
                                     const ManifestCheckOptions& opts = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open manifest: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw DataError("manifest parse error in " + path.string() + ": " + ex.what());
    }
    DatasetManifest m = detail::manifest_from_json(j);
    validate_manifest(m, resolve_root(path, m.root), opts);
    return m;
}

/// Builds the all-zero ground-truth mask for an entry, or loads its mask
/// file, depending on the ZERO sentinel.
inline BinaryMask load_ground_truth(const ImageEntry& e, const std::filesystem::path& base_dir) {
    if (e.zero_mask()) return BinaryMask(e.height, e.width, 0);
    return load_binary_mask(base_dir / e.mask_path);
}

} // namespace cosal
