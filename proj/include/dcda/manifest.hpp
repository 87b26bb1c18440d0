#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "dcda/kv.hpp"

namespace dcda {

inline constexpr std::string_view kEngineVersion = "0.3.0";

// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

// Record of one CLI run: configuration, inputs and every file written, each
// file with its content digest.
class RunManifest {
public:
    explicit RunManifest(std::string command);

    void set(const std::string& key, const std::string& value) { doc_.set(key, value); }
    void add_config(const KeyValueDoc& config);
    void add_input(const std::string& role, const std::filesystem::path& path);
    void add_output(const std::string& role, const std::filesystem::path& path);

    const KeyValueDoc& document() const { return doc_; }
    void write(const std::filesystem::path& path) const { doc_.write(path); }

private:
    KeyValueDoc doc_;
};

}  // namespace dcda
