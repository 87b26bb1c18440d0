#include "dcda/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>
#include <stdexcept>

namespace dcda {

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("sha256: cannot open " + path.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256: digest initialisation failed");
    }
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        const auto got = in.gcount();
        if (got > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(got));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xf];
    }
    return out;
}

RunManifest::RunManifest(std::string command) {
    doc_.set("engine_version", std::string(kEngineVersion));
    doc_.set("command", std::move(command));
}

void RunManifest::add_config(const KeyValueDoc& config) {
    for (const auto& [k, v] : config.entries()) doc_.set("config." + k, v);
}

void RunManifest::add_input(const std::string& role, const std::filesystem::path& path) {
    doc_.set("input." + role, path.string());
    doc_.set("input." + role + ".sha256", sha256_file(path));
}

void RunManifest::add_output(const std::string& role, const std::filesystem::path& path) {
    doc_.set("output." + role, path.string());
    doc_.set("output." + role + ".sha256", sha256_file(path));
}

}  // namespace dcda
