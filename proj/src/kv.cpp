#include "dcda/kv.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dcda/text.hpp"

namespace dcda {

void KeyValueDoc::set(std::string key, std::string value) {
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    entries_.emplace_back(std::move(key), std::move(value));
}

std::optional<std::string> KeyValueDoc::get(std::string_view key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) return v;
    }
    return std::nullopt;
}

std::string KeyValueDoc::render() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
    return out;
}

KeyValueDoc KeyValueDoc::parse(std::string_view body, std::string_view source) {
    KeyValueDoc doc;
    std::size_t line_no = 0;
    for (auto line : text::split(body, '\n')) {
        ++line_no;
        line = text::trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        const std::string where = std::string(source) + ":" + std::to_string(line_no);
        if (eq == std::string_view::npos) throw std::runtime_error(where + ": expected 'key = value'");
        const auto key = text::trim(line.substr(0, eq));
        if (key.empty()) throw std::runtime_error(where + ": empty key");
        if (doc.get(key)) throw std::runtime_error(where + ": duplicate key '" + std::string(key) + "'");
        doc.entries_.emplace_back(std::string(key), std::string(text::trim(line.substr(eq + 1))));
    }
    return doc;
}

void KeyValueDoc::write(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << render();
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

KeyValueDoc KeyValueDoc::read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

}  // namespace dcda
