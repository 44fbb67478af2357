#include "medc/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "medc/errors.hpp"

namespace medc {

std::string sha256_hex(const std::uint8_t* data, std::size_t size) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digest_len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, data, size) != 1 ||
        EVP_DigestFinal_ex(ctx, digest, &digest_len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw Error("SHA-256 computation failed");
    }
    EVP_MD_CTX_free(ctx);

    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(digest_len * 2);
    for (unsigned int i = 0; i < digest_len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0x0F]);
    }
    return out;
}

std::string sha256_hex(const std::vector<std::uint8_t>& data) {
    return sha256_hex(data.data(), data.size());
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file for hashing: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return sha256_hex(bytes);
}

void Manifest::sort_entries() {
    std::sort(entries.begin(), entries.end(), [](const ManifestEntry& a, const ManifestEntry& b) {
        return std::tie(a.corruption, a.severity, a.image_index) <
               std::tie(b.corruption, b.severity, b.image_index);
    });
}

std::string Manifest::to_json(int indent) const {
    nlohmann::json root;
    root["tool_version"] = tool_version;
    root["rng_algorithm"] = rng_algorithm;
    root["master_seed"] = master_seed;
    root["dataset"] = dataset;
    root["registry_version"] = registry_version;
    root["registry"] = nlohmann::json::parse(registry_json);
    nlohmann::json files = nlohmann::json::array();
    for (const auto& e : entries) {
        files.push_back({{"path", e.path},
                         {"corruption", e.corruption},
                         {"severity", e.severity},
                         {"image_index", e.image_index},
                         {"image_id", e.image_id},
                         {"sha256", e.sha256}});
    }
    root["files"] = std::move(files);
    return root.dump(indent);
}

Manifest Manifest::from_json(const std::string& json_text) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("manifest JSON malformed: ") + e.what());
    }
    Manifest m;
    try {
        m.tool_version = root.at("tool_version").get<std::string>();
        m.rng_algorithm = root.at("rng_algorithm").get<std::string>();
        m.master_seed = root.at("master_seed").get<std::uint64_t>();
        m.dataset = root.at("dataset").get<std::string>();
        m.registry_version = root.at("registry_version").get<std::string>();
        m.registry_json = root.at("registry").dump(2);
        for (const auto& jf : root.at("files")) {
            ManifestEntry e;
            e.path = jf.at("path").get<std::string>();
            e.corruption = jf.at("corruption").get<std::string>();
            e.severity = jf.at("severity").get<int>();
            e.image_index = jf.at("image_index").get<std::uint64_t>();
            e.image_id = jf.at("image_id").get<std::string>();
            e.sha256 = jf.at("sha256").get<std::string>();
            m.entries.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("manifest JSON missing or mistyped field: ") + e.what());
    }
    return m;
}

Manifest Manifest::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open manifest: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

void Manifest::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write manifest: " + path);
    out << to_json(2) << '\n';
    if (!out) throw DataError("failed writing manifest: " + path);
}

}  // namespace medc
