#include "manifest.hpp"

#include <array>
#include <fstream>
#include <memory>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "funcount/csv.hpp"
#include "funcount/error.hpp"

namespace funcount::cli {

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cli", fmt::format("cannot open '{}'", path.string()));
    const std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("cli", "SHA-256 unavailable");
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

void write_manifest(const std::filesystem::path& dir, const Manifest& manifest) {
    nlohmann::ordered_json j;
    j["command"] = manifest.command;
    j["argv"] = manifest.argv;
    j["seed"] = manifest.seed ? nlohmann::ordered_json(*manifest.seed) : nlohmann::ordered_json(nullptr);
    j["inputs"] = nlohmann::ordered_json::array();
    for (const auto& p : manifest.inputs) {
        j["inputs"].push_back({{"path", p.generic_string()}, {"sha256", sha256_file(p)}});
    }
    j["outputs"] = nlohmann::ordered_json::array();
    for (const auto& p : manifest.outputs) {
        j["outputs"].push_back({{"path", p.generic_string()}, {"sha256", sha256_file(dir / p)}});
    }
    csv::write_atomic(dir / "run_manifest.json", j.dump(2) + "\n");
}

}  // namespace funcount::cli
