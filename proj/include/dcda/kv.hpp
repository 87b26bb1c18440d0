#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dcda {

// Flat "key = value" document. '#' starts a comment line; key order is kept.
class KeyValueDoc {
public:
    void set(std::string key, std::string value);
    std::optional<std::string> get(std::string_view key) const;
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    std::string render() const;
    static KeyValueDoc parse(std::string_view text, std::string_view source = "<string>");

    void write(const std::filesystem::path& path) const;
    static KeyValueDoc read(const std::filesystem::path& path);

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace dcda
