#include "medc/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "medc/codec.hpp"
#include "medc/errors.hpp"
#include "medc/kernels.hpp"
#include "medc/rng.hpp"

namespace fs = std::filesystem;

namespace medc {

namespace {

std::vector<std::string> split_line(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

void check_image_id(const std::string& id, int line_no) {
    if (id.empty()) {
        throw DataError("index.csv line " + std::to_string(line_no) + ": empty image_id");
    }
    if (id.find('/') != std::string::npos || id.find('\\') != std::string::npos ||
        id.find("..") != std::string::npos) {
        throw DataError("index.csv line " + std::to_string(line_no) + ": image_id '" + id +
                        "' must not contain path separators");
    }
}

void write_file_atomic(const fs::path& final_path, const std::vector<std::uint8_t>& bytes) {
    const fs::path tmp = final_path.parent_path() / (".tmp-" + final_path.filename().string());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write file: " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) throw DataError("failed writing file: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, final_path, ec);
    if (ec) throw DataError("cannot finalize file " + final_path.string() + ": " + ec.message());
}

}  // namespace

InputIndex InputIndex::load(const std::string& input_dir) {
    InputIndex index;
    index.root_ = input_dir;
    const fs::path csv_path = fs::path(input_dir) / "index.csv";
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw DataError("cannot open index file: " + csv_path.string());

    std::string line;
    int line_no = 0;
    std::set<std::string> seen_ids;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != "image_id,path,label") {
                throw DataError("index.csv header must be 'image_id,path,label'");
            }
            continue;
        }
        const auto fields = split_line(line, ',');
        if (fields.size() != 3) {
            throw DataError("index.csv line " + std::to_string(line_no) +
                            ": expected 3 fields, got " + std::to_string(fields.size()));
        }
        check_image_id(fields[0], line_no);
        if (fields[1].empty()) {
            throw DataError("index.csv line " + std::to_string(line_no) + ": empty path");
        }
        if (!seen_ids.insert(fields[0]).second) {
            throw DataError("index.csv line " + std::to_string(line_no) + ": duplicate image_id '" +
                            fields[0] + "'");
        }
        index.entries_.push_back({fields[0], fields[1], fields[2]});
    }
    if (index.entries_.empty()) {
        throw DataError("index.csv lists no images: " + csv_path.string());
    }
    return index;
}

std::string InputIndex::resolve_path(std::size_t i) const {
    return (fs::path(root_) / entries_.at(i).path).string();
}

Manifest generate_corrupted_set(const GenerateOptions& options) {
    const Registry& registry = options.registry ? *options.registry : Registry::builtin();
    const DatasetProfile& profile = registry.profile(options.dataset);

    // Resolve the corruption filter against the dataset's set, keeping
    // registry order for stable layouts.
    std::vector<std::string> corruptions;
    if (options.corruptions.empty()) {
        corruptions = registry.corruption_set(options.dataset);
    } else {
        for (const auto& cid : options.corruptions) {
            if (!Registry::is_known_corruption(cid)) {
                throw UsageError("unknown corruption: " + cid);
            }
            profile.corruption(cid);  // throws ApplicabilityError when not in C_d
        }
        for (const auto& cid : registry.corruption_set(options.dataset)) {
            if (std::find(options.corruptions.begin(), options.corruptions.end(), cid) !=
                    options.corruptions.end() &&
                std::find(corruptions.begin(), corruptions.end(), cid) == corruptions.end()) {
                corruptions.push_back(cid);
            }
        }
    }

    std::vector<Severity> severities;
    if (options.severities.empty()) {
        for (int s = 1; s <= static_cast<int>(Severity::kCount); ++s) severities.emplace_back(s);
    } else {
        for (int s : options.severities) {
            const Severity sev(s);
            if (std::none_of(severities.begin(), severities.end(),
                             [&](Severity e) { return e.level() == sev.level(); })) {
                severities.push_back(sev);
            }
        }
        std::sort(severities.begin(), severities.end(),
                  [](Severity a, Severity b) { return a.level() < b.level(); });
    }

    // Load and validate every input up front so generation fails before any
    // output is written.
    const InputIndex index = InputIndex::load(options.input_dir);
    std::vector<ImageBuffer> images;
    images.reserve(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        const std::string path = index.resolve_path(i);
        ImageBuffer img;
        try {
            img = read_png(path);
        } catch (const Error& e) {
            throw DataError("cannot decode input image '" + path + "': " + e.what());
        }
        if (img.channels != profile.channels) {
            throw DataError("image '" + index.entries()[i].image_id + "' has " +
                            std::to_string(img.channels) + " channel(s); dataset '" + profile.id +
                            "' expects " + std::to_string(profile.channels));
        }
        images.push_back(std::move(img));
    }

    const fs::path out_root(options.output_dir);
    fs::create_directories(out_root);
    for (const auto& cid : corruptions) {
        for (const Severity sev : severities) {
            fs::create_directories(out_root / cid / std::to_string(sev.level()));
        }
    }

    struct WorkItem {
        std::string corruption;
        Severity severity{1};
        std::size_t image_index = 0;
    };
    std::vector<WorkItem> work;
    for (const auto& cid : corruptions) {
        for (const Severity sev : severities) {
            for (std::size_t i = 0; i < index.size(); ++i) {
                work.push_back({cid, sev, i});
            }
        }
    }

    std::vector<ManifestEntry> entries(work.size());
    std::vector<std::exception_ptr> failures(work.size());
    std::atomic<std::size_t> next{0};

    auto run_one = [&](std::size_t k) {
        const WorkItem& item = work[k];
        try {
            const KernelParams& params =
                registry.params_for(options.dataset, item.corruption, item.severity);
            RngStream rng =
                RngStream::derive(options.master_seed, options.dataset, item.corruption,
                                  item.severity.level(), item.image_index);
            const ImageBuffer out =
                apply_params(images[item.image_index], item.corruption, params, rng);
            const std::vector<std::uint8_t> png = encode_png(out);

            const std::string filename = index.entries()[item.image_index].image_id + ".png";
            const fs::path rel =
                fs::path(item.corruption) / std::to_string(item.severity.level()) / filename;
            write_file_atomic(out_root / rel, png);

            ManifestEntry entry;
            entry.path = rel.generic_string();
            entry.corruption = item.corruption;
            entry.severity = item.severity.level();
            entry.image_index = item.image_index;
            entry.image_id = index.entries()[item.image_index].image_id;
            entry.sha256 = sha256_hex(png);
            entries[k] = std::move(entry);
        } catch (...) {
            failures[k] = std::current_exception();
        }
    };

    int threads = options.threads > 0
                      ? options.threads
                      : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min<int>(threads, static_cast<int>(std::max<std::size_t>(1, work.size())));
    if (threads <= 1) {
        for (std::size_t k = 0; k < work.size(); ++k) run_one(k);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t k = next.fetch_add(1);
                    if (k >= work.size()) return;
                    run_one(k);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    for (std::size_t k = 0; k < work.size(); ++k) {
        if (failures[k]) std::rethrow_exception(failures[k]);
    }

    Manifest manifest;
    manifest.tool_version = kToolVersion;
    manifest.rng_algorithm = RngStream::kAlgorithm;
    manifest.master_seed = options.master_seed;
    manifest.dataset = options.dataset;
    manifest.registry_version = registry.version();
    manifest.registry_json = registry.to_json(2);
    manifest.entries = std::move(entries);
    manifest.sort_entries();
    manifest.save((out_root / "manifest.json").string());
    return manifest;
}

VerifyResult verify_tree(const std::string& output_dir) {
    const fs::path root(output_dir);
    const fs::path manifest_path = root / "manifest.json";
    if (!fs::exists(manifest_path)) {
        throw IncompletenessError("no manifest.json in '" + output_dir +
                                  "' — generation incomplete or not a corrupted-set directory");
    }
    const Manifest manifest = Manifest::load(manifest_path.string());

    VerifyResult result;
    std::set<std::string> known_paths;
    for (const auto& entry : manifest.entries) {
        known_paths.insert(entry.path);
        const fs::path file = root / entry.path;
        if (!fs::exists(file)) {
            result.missing.push_back(entry.path);
            continue;
        }
        ++result.files_checked;
        if (sha256_file(file.string()) != entry.sha256) {
            result.mismatched.push_back(entry.path);
        }
    }
    if (fs::exists(root)) {
        for (const auto& p : fs::recursive_directory_iterator(root)) {
            if (!p.is_regular_file() || p.path().extension() != ".png") continue;
            const std::string rel = fs::relative(p.path(), root).generic_string();
            if (!known_paths.count(rel)) result.extra.push_back(rel);
        }
        std::sort(result.extra.begin(), result.extra.end());
    }
    return result;
}

RobustnessReport evaluate_files(const std::string& predictions_path,
                                const std::string& baseline_path, const DatasetProfile& profile,
                                double threshold) {
    const PredictionTable model =
        PredictionTable::load(predictions_path, profile.task, profile.num_classes);
    const PredictionTable baseline =
        PredictionTable::load(baseline_path, profile.task, profile.num_classes);
    const ErrorGrid model_grid = compute_error_grid(model, profile, threshold);
    const ErrorGrid baseline_grid = compute_error_grid(baseline, profile, threshold);
    return compute_report(model_grid, baseline_grid, profile);
}

ImageBuffer make_gallery(const ImageBuffer& img, const Registry& registry,
                         std::string_view dataset_id, std::uint64_t master_seed) {
    validate(img);
    const DatasetProfile& profile = registry.profile(dataset_id);
    if (img.channels != profile.channels) {
        throw ApplicabilityError("gallery input has " + std::to_string(img.channels) +
                                 " channel(s); dataset '" + profile.id + "' expects " +
                                 std::to_string(profile.channels));
    }

    const int gutter = 2;
    const int rows = static_cast<int>(profile.corruptions.size());
    const int cols = static_cast<int>(Severity::kCount);
    const int sheet_w = cols * img.width + (cols - 1) * gutter;
    const int sheet_h = rows * img.height + (rows - 1) * gutter;
    ImageBuffer sheet = make_image(sheet_w, sheet_h, img.channels, 255);

    for (int r = 0; r < rows; ++r) {
        const std::string& cid = profile.corruptions[static_cast<std::size_t>(r)].id;
        for (int s = 1; s <= cols; ++s) {
            const Severity sev(s);
            RngStream rng = RngStream::derive(master_seed, dataset_id, cid, sev.level(), 0);
            const ImageBuffer cell =
                apply_params(img, cid, registry.params_for(dataset_id, cid, sev), rng);
            const int ox = (s - 1) * (img.width + gutter);
            const int oy = r * (img.height + gutter);
            for (int y = 0; y < img.height; ++y) {
                for (int x = 0; x < img.width; ++x) {
                    for (int c = 0; c < img.channels; ++c) {
                        sheet.at(ox + x, oy + y, c) = cell.at(x, y, c);
                    }
                }
            }
        }
    }
    return sheet;
}

}  // namespace medc
