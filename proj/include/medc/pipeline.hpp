#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "medc/image.hpp"
#include "medc/manifest.hpp"
#include "medc/metrics.hpp"
#include "medc/registry.hpp"

namespace medc {

/// One row of an input index: a stable image id, the image file's path
/// relative to the index directory, and its label (unused by generation,
/// carried for completeness).
struct InputIndexEntry {
    std::string image_id;
    std::string path;
    std::string label;
};

/// The clean-test-set listing read from `<input_dir>/index.csv`
/// (header: image_id,path,label). Row order defines image_index 0..n-1.
class InputIndex {
public:
    static InputIndex load(const std::string& input_dir);

    const std::string& root() const { return root_; }
    const std::vector<InputIndexEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    /// Absolute (root-joined) path of entry i.
    std::string resolve_path(std::size_t i) const;

private:
    std::string root_;
    std::vector<InputIndexEntry> entries_;
};

struct GenerateOptions {
    std::string dataset;
    std::string input_dir;
    std::string output_dir;
    std::uint64_t master_seed = 0;
    std::vector<std::string> corruptions;  // empty = full corruption set
    std::vector<int> severities;           // empty = 1..5
    const Registry* registry = nullptr;    // null = builtin registry
    int threads = 0;                       // 0 = hardware concurrency
};

/// Generates `output_dir/<corruption>/<severity>/<image_id>.png` for every
/// selected (corruption, severity, image) triple, each from its own derived
/// random stream, then writes manifest.json last. Returns the manifest.
Manifest generate_corrupted_set(const GenerateOptions& options);

struct VerifyResult {
    std::size_t files_checked = 0;
    std::vector<std::string> missing;     // manifest entries without a file
    std::vector<std::string> mismatched;  // files whose hash differs
    std::vector<std::string> extra;       // stray pngs not in the manifest

    bool ok() const { return missing.empty() && mismatched.empty(); }
};

/// Re-hashes a generated tree against its manifest. A missing manifest means
/// generation never completed and raises IncompletenessError.
VerifyResult verify_tree(const std::string& output_dir);

/// Loads two prediction files and runs the full scoring protocol.
RobustnessReport evaluate_files(const std::string& predictions_path,
                                const std::string& baseline_path, const DatasetProfile& profile,
                                double threshold = 0.5);

/// Contact sheet for one image: rows = the dataset's corruptions in registry
/// order, columns = severities 1..5, with 2px white gutters.
ImageBuffer make_gallery(const ImageBuffer& img, const Registry& registry,
                         std::string_view dataset_id, std::uint64_t master_seed);

}  // namespace medc
