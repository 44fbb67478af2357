#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "medc/augment.hpp"
#include "medc/codec.hpp"
#include "medc/errors.hpp"
#include "medc/manifest.hpp"
#include "medc/metrics.hpp"
#include "medc/pipeline.hpp"
#include "medc/registry.hpp"
#include "medc/rng.hpp"

namespace {

constexpr const char* kConfigEnvVar = "MEDCORRUPT_CONFIG";

medc::Registry resolve_registry(const std::string& config_flag) {
    if (!config_flag.empty()) return medc::Registry::load(config_flag);
    if (const char* env = std::getenv(kConfigEnvVar); env != nullptr && *env != '\0') {
        return medc::Registry::load(env);
    }
    return medc::Registry::builtin();
}

void check_severity_args(const std::vector<int>& severities) {
    for (int s : severities) {
        if (s < 1 || s > static_cast<int>(medc::Severity::kCount)) {
            throw medc::UsageError("--severities values must be 1..5, got " + std::to_string(s));
        }
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw medc::DataError("cannot write file: " + path);
    out << text;
    if (!out) throw medc::DataError("failed writing file: " + path);
}

int cmd_corrupt(const std::string& dataset, const std::string& input, const std::string& output,
                std::uint64_t seed, const std::vector<std::string>& corruptions,
                const std::vector<int>& severities, const std::string& config, int threads) {
    check_severity_args(severities);
    const medc::Registry registry = resolve_registry(config);
    medc::GenerateOptions options;
    options.dataset = dataset;
    options.input_dir = input;
    options.output_dir = output;
    options.master_seed = seed;
    options.corruptions = corruptions;
    options.severities = severities;
    options.registry = &registry;
    options.threads = threads;
    const medc::Manifest manifest = medc::generate_corrupted_set(options);
    std::cout << "wrote " << manifest.entries.size() << " corrupted image(s) to " << output
              << " (manifest.json written last)\n";
    return 0;
}

int cmd_evaluate(const std::string& dataset, const std::string& predictions,
                 const std::string& baseline, const std::string& output,
                 const std::string& format, double threshold, const std::string& config) {
    const medc::Registry registry = resolve_registry(config);
    const medc::DatasetProfile& profile = registry.profile(dataset);
    const medc::RobustnessReport report =
        medc::evaluate_files(predictions, baseline, profile, threshold);

    const std::string rendered = format == "csv" ? report.to_csv() : report.to_markdown();
    if (output.empty()) {
        std::cout << rendered;
    } else {
        write_text_file(output, rendered);
        write_text_file(output + ".json", report.to_json(2) + "\n");
        std::cout << "wrote " << output << " and " << output << ".json\n";
    }
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    return 0;
}

int cmd_augment(const std::string& dataset, const std::string& input, const std::string& output,
                std::uint64_t seed, std::uint64_t image_index, const std::string& config) {
    const medc::Registry registry = resolve_registry(config);
    const medc::ImageBuffer img = medc::read_png(input);
    const medc::AugmentationPolicy policy(registry, dataset, seed);

    medc::RngStream rng = policy.stream_for(image_index);
    const medc::SampledCorruption pick = policy.sample(rng);
    medc::ImageBuffer out = img;
    if (!pick.is_identity()) {
        out = medc::apply_params(img, pick.corruption_id, pick.params, rng);
    }
    medc::write_png(out, output);

    std::cout << "sampled: " << pick.corruption_id;
    for (const auto& [name, value] : pick.params.values()) {
        std::cout << ' ' << name << '=' << value;
    }
    std::cout << '\n';
    return 0;
}

int cmd_registry(const std::string& dataset, const std::string& config, bool as_json) {
    const medc::Registry registry = resolve_registry(config);
    if (as_json) {
        std::cout << registry.to_json(2) << '\n';
        return 0;
    }
    if (dataset.empty()) {
        std::cout << "registry version: " << registry.version() << "\n\n";
        for (const auto& id : registry.dataset_ids()) {
            const medc::DatasetProfile& p = registry.profile(id);
            std::cout << id << "  (" << p.modality << ", " << medc::to_string(p.task) << ", "
                      << p.channels << "ch, " << p.num_classes << " classes): "
                      << p.corruptions.size() << " corruptions\n";
        }
        return 0;
    }
    const medc::DatasetProfile& p = registry.profile(dataset);
    std::cout << "dataset: " << p.id << "\nmodality: " << p.modality
              << "\ntask: " << medc::to_string(p.task) << "\nchannels: " << p.channels
              << "\nclasses: " << p.num_classes << "\ncorruptions (" << p.corruptions.size()
              << "):\n";
    for (const auto& spec : p.corruptions) {
        const medc::CorruptionMeta& meta = medc::Registry::corruption_meta(spec.id);
        std::cout << "  " << spec.id << "  [" << medc::to_string(meta.category)
                  << (meta.stochastic ? ", stochastic" : "") << "]\n";
        for (std::size_t s = 0; s < medc::Severity::kCount; ++s) {
            std::cout << "    s" << (s + 1) << ":";
            for (const auto& [name, value] : spec.severities[s].values()) {
                std::cout << ' ' << name << '=' << value;
            }
            std::cout << '\n';
        }
    }
    return 0;
}

int cmd_gallery(const std::string& dataset, const std::string& input, const std::string& output,
                std::uint64_t seed, const std::string& config) {
    const medc::Registry registry = resolve_registry(config);
    const medc::ImageBuffer img = medc::read_png(input);
    const medc::ImageBuffer sheet = medc::make_gallery(img, registry, dataset, seed);
    medc::write_png(sheet, output);
    std::cout << "wrote " << output << " (" << sheet.width << "x" << sheet.height << ")\n";
    return 0;
}

int cmd_verify(const std::string& input) {
    const medc::VerifyResult result = medc::verify_tree(input);
    for (const auto& p : result.extra) std::cerr << "warning: stray file not in manifest: " << p
                                                 << '\n';
    if (!result.missing.empty()) {
        std::string joined;
        for (const auto& p : result.missing) {
            if (!joined.empty()) joined += ", ";
            joined += p;
        }
        throw medc::IncompletenessError("missing " + std::to_string(result.missing.size()) +
                                        " file(s): " + joined);
    }
    if (!result.mismatched.empty()) {
        std::string joined;
        for (const auto& p : result.mismatched) {
            if (!joined.empty()) joined += ", ";
            joined += p;
        }
        throw medc::DataError("hash mismatch in " + std::to_string(result.mismatched.size()) +
                              " file(s): " + joined);
    }
    std::cout << "verified " << result.files_checked << " file(s): all hashes match\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"medcorrupt: severity-graded medical-image corruption, augmentation, and "
                 "robustness scoring"};
    app.require_subcommand(1);
    app.set_version_flag("--version", medc::kToolVersion);

    std::string dataset, input, output, config, baseline, format = "md";
    std::vector<std::string> corruptions;
    std::vector<int> severities;
    std::uint64_t seed = 0, image_index = 0;
    double threshold = 0.5;
    int threads = 0;
    bool as_json = false;

    CLI::App* corrupt = app.add_subcommand(
        "corrupt", "Generate the corrupted test set for one dataset");
    corrupt->add_option("--dataset", dataset, "Dataset id (e.g. octmnist)")->required();
    corrupt->add_option("--input", input, "Directory containing index.csv and clean images")
        ->required();
    corrupt->add_option("--output", output, "Output directory for the corrupted tree")->required();
    corrupt->add_option("--seed", seed, "Master seed (default 0)");
    corrupt->add_option("--corruptions", corruptions, "Subset of corruption ids")
        ->delimiter(',');
    corrupt->add_option("--severities", severities, "Subset of severity levels 1..5")
        ->delimiter(',');
    corrupt->add_option("--config", config, "Registry JSON replacing the builtin registry");
    corrupt->add_option("--threads", threads, "Worker threads (default: hardware)");

    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "Score model predictions against a baseline model's predictions");
    evaluate->add_option("--dataset", dataset, "Dataset id")->required();
    evaluate->add_option("--input", input, "Model prediction CSV")->required();
    evaluate->add_option("--baseline", baseline, "Baseline (reference) prediction CSV")
        ->required();
    evaluate->add_option("--output", output, "Report path (default: print to stdout)");
    evaluate->add_option("--format", format, "Report format")
        ->check(CLI::IsMember({"csv", "md"}));
    evaluate->add_option("--threshold", threshold, "Multilabel decision threshold (default 0.5)");
    evaluate->add_option("--config", config, "Registry JSON replacing the builtin registry");

    CLI::App* augment = app.add_subcommand(
        "augment", "Apply one sampled training augmentation to a single image");
    augment->add_option("--dataset", dataset, "Dataset id")->required();
    augment->add_option("--input", input, "Input PNG")->required();
    augment->add_option("--output", output, "Output PNG")->required();
    augment->add_option("--seed", seed, "Master seed (default 0)");
    augment->add_option("--image-index", image_index, "Image index for stream derivation");
    augment->add_option("--config", config, "Registry JSON replacing the builtin registry");

    CLI::App* registry_cmd = app.add_subcommand(
        "registry", "Inspect the dataset/corruption registry");
    registry_cmd->add_option("--dataset", dataset, "Show one dataset's full parameter tables");
    registry_cmd->add_option("--config", config, "Registry JSON replacing the builtin registry");
    registry_cmd->add_flag("--json", as_json, "Dump the registry as JSON");

    CLI::App* gallery = app.add_subcommand(
        "gallery", "Render a corruption x severity contact sheet for one image");
    gallery->add_option("--dataset", dataset, "Dataset id")->required();
    gallery->add_option("--input", input, "Input PNG")->required();
    gallery->add_option("--output", output, "Output PNG")->required();
    gallery->add_option("--seed", seed, "Master seed (default 0)");
    gallery->add_option("--config", config, "Registry JSON replacing the builtin registry");

    CLI::App* verify = app.add_subcommand(
        "verify", "Re-hash a generated tree against its manifest");
    verify->add_option("--input", input, "Corrupted-set directory containing manifest.json")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (corrupt->parsed()) {
            return cmd_corrupt(dataset, input, output, seed, corruptions, severities, config,
                               threads);
        }
        if (evaluate->parsed()) {
            return cmd_evaluate(dataset, input, baseline, output, format, threshold, config);
        }
        if (augment->parsed()) {
            return cmd_augment(dataset, input, output, seed, image_index, config);
        }
        if (registry_cmd->parsed()) {
            return cmd_registry(dataset, config, as_json);
        }
        if (gallery->parsed()) {
            return cmd_gallery(dataset, input, output, seed, config);
        }
        if (verify->parsed()) {
            return cmd_verify(input);
        }
        std::cerr << "error: no subcommand\n";
        return 1;
    } catch (const medc::UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const medc::IncompletenessError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const medc::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    }
}
