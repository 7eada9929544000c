#pragma once

// Text-format primitives shared by the persistence layer: exact double
// round-tripping, the vector table format, and a config digest. All files
// are UTF-8 text with '\n' newlines; '#'-prefixed lines carry metadata.
//
// Vector table:
//   #dim <d>
//   <name>\t<v1> <v2> ... <vd>

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "quantground/vec.hpp"

namespace qg::io {

/// Shortest-exact double formatting; parses back bit-for-bit.
inline std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& context) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw std::runtime_error(context + ": bad number '" + std::string(s) + "'");
    return v;
}

inline std::uint64_t parse_u64(std::string_view s, const std::string& context) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error(context + ": bad integer '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(s.substr(start));
            break;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return parts;
}

inline Vec parse_vector(std::string_view s, const std::string& context) {
    Vec v;
    std::size_t start = 0;
    while (start < s.size()) {
        while (start < s.size() && s[start] == ' ') ++start;
        if (start >= s.size()) break;
        std::size_t end = s.find(' ', start);
        if (end == std::string_view::npos) end = s.size();
        v.push_back(parse_double(s.substr(start, end - start), context));
        start = end;
    }
    return v;
}

inline std::string join_vector(const Vec& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ' ';
        out += fmt_double(v[i]);
    }
    return out;
}

/// FNV-1a, used for config digests embedded in output files.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

/// Splits file content into lines; keeps empty interior lines so that
/// reported line numbers match the file.
inline std::vector<std::string> to_lines(const std::string& content) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= content.size()) {
        std::size_t end = content.find('\n', start);
        if (end == std::string::npos) {
            if (start < content.size()) lines.push_back(content.substr(start));
            break;
        }
        lines.push_back(content.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

struct VectorTable {
    std::size_t dim = 0;
    std::vector<std::pair<std::string, Vec>> rows;
};

inline VectorTable read_vector_table(const std::filesystem::path& path) {
    const std::vector<std::string> lines = to_lines(read_file(path));
    VectorTable table;
    bool have_dim = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        const std::string where = path.filename().string() + ":" + std::to_string(i + 1);
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("#dim ", 0) == 0) {
                table.dim = static_cast<std::size_t>(parse_u64(std::string_view(line).substr(5), where));
                have_dim = true;
            }
            continue;
        }
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos || tab == 0)
            throw std::runtime_error(where + ": expected '<name>\\t<values>'");
        std::string name = line.substr(0, tab);
        Vec v = parse_vector(std::string_view(line).substr(tab + 1), where);
        if (!have_dim) throw std::runtime_error(where + ": missing '#dim' header");
        if (v.size() != table.dim)
            throw std::runtime_error(where + ": expected " + std::to_string(table.dim) +
                                     " values, got " + std::to_string(v.size()));
        table.rows.emplace_back(std::move(name), std::move(v));
    }
    if (!have_dim) throw std::runtime_error(path.string() + ": missing '#dim' header");
    return table;
}

inline void write_vector_table(const std::filesystem::path& path, const VectorTable& table,
                               const std::vector<std::string>& meta = {}) {
    std::string out;
    for (const std::string& m : meta) out += "#" + m + "\n";
    out += "#dim " + std::to_string(table.dim) + "\n";
    for (const auto& [name, v] : table.rows) {
        out += name;
        out += '\t';
        out += join_vector(v);
        out += '\n';
    }
    write_file(path, out);
}

} // namespace qg::io
