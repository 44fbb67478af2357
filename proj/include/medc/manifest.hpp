#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "medc/registry.hpp"

namespace medc {

/// Hex-encoded SHA-256 of a byte buffer.
std::string sha256_hex(const std::uint8_t* data, std::size_t size);
std::string sha256_hex(const std::vector<std::uint8_t>& data);

/// Hex-encoded SHA-256 of a file's contents.
std::string sha256_file(const std::string& path);

/// One generated output file, as recorded in the manifest.
struct ManifestEntry {
    std::string path;  // relative to the output root, e.g. "jpeg/3/img_0007.png"
    std::string corruption;
    int severity = 0;
    std::uint64_t image_index = 0;
    std::string image_id;
    std::string sha256;

    bool operator==(const ManifestEntry&) const = default;
};

/// Reproducibility record written next to a generated corruption set. Captures
/// everything needed to regenerate or audit the tree: seed, RNG algorithm,
/// the full registry at time of generation, and a content hash per file.
struct Manifest {
    std::string tool_version;
    std::string rng_algorithm;
    std::uint64_t master_seed = 0;
    std::string dataset;
    std::string registry_version;
    std::string registry_json;  // full registry dump
    std::vector<ManifestEntry> entries;

    /// Entries sorted by (corruption, severity, image_index).
    void sort_entries();

    std::string to_json(int indent = 2) const;
    static Manifest from_json(const std::string& json_text);
    static Manifest load(const std::string& path);
    void save(const std::string& path) const;
};

/// Current tool version, recorded in manifests.
inline constexpr const char* kToolVersion = "medcorrupt 1.0.0";

}  // namespace medc
