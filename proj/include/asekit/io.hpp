// Copyright 2026 the asekit developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cerrno>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace asekit {

//---------------------------------------------------------------------------//
// Number formatting and parsing
//---------------------------------------------------------------------------//

/// Format a double with 17 significant digits: enough to round-trip any
/// IEEE-754 binary64 value exactly through text.
inline std::string format_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(std::string_view text, char const* what)
{
    // std::from_chars<double> is the locale-independent fast path.
    double v{};
    auto* first = text.data();
    auto* last = text.data() + text.size();
    while (first != last && (*first == ' ' || *first == '\t'))
        ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    while (ptr != last && (*ptr == ' ' || *ptr == '\t' || *ptr == '\r'))
        ++ptr;
    if (ec != std::errc{} || ptr != last)
        throw std::runtime_error(std::string("failed to parse number for ")
                                 + what + ": '" + std::string(text) + "'");
    return v;
}

inline std::int64_t parse_int(std::string_view text, char const* what)
{
    std::int64_t v{};
    auto* first = text.data();
    auto* last = text.data() + text.size();
    while (first != last && (*first == ' ' || *first == '\t'))
        ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    while (ptr != last && (*ptr == ' ' || *ptr == '\t' || *ptr == '\r'))
        ++ptr;
    if (ec != std::errc{} || ptr != last)
        throw std::runtime_error(std::string("failed to parse integer for ")
                                 + what + ": '" + std::string(text) + "'");
    return v;
}

inline std::string_view trim(std::string_view s)
{
    while (!s.empty()
           && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty()
           && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

//---------------------------------------------------------------------------//
// Hashing
//---------------------------------------------------------------------------//

/// FNV-1a 64-bit hash; used to fingerprint canonicalized configurations in
/// output provenance headers.
inline std::uint64_t fnv1a64(std::string_view data)
{
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : data)
    {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(v));
    return buf;
}

//---------------------------------------------------------------------------//
// Atomic file writes
//---------------------------------------------------------------------------//

/// Write a file by streaming into a sibling temporary and renaming over the
/// destination, so readers never observe a partially written file.
template<class WriteFn>
void atomic_write(std::filesystem::path const& path, WriteFn&& write_fn)
{
    namespace fs = std::filesystem;
    if (path.has_parent_path())
    {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("atomic_write: cannot open "
                                     + tmp.string());
        write_fn(out);
        out.flush();
        if (!out)
        {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("atomic_write: write failed for "
                                     + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec)
    {
        std::error_code rm;
        fs::remove(tmp, rm);
        throw std::runtime_error("atomic_write: rename to " + path.string()
                                 + " failed: " + ec.message());
    }
}

inline void atomic_write_text(std::filesystem::path const& path,
                              std::string const& content)
{
    atomic_write(path, [&](std::ostream& out) { out << content; });
}

//---------------------------------------------------------------------------//
// key = value documents
//---------------------------------------------------------------------------//

/// Ordered key/value document: the line format used by configs and reports.
/// Lines are `key = value`; '#' starts a comment; blank lines are ignored.
struct KeyValueDocument
{
    std::vector<std::pair<std::string, std::string>> entries;
    std::vector<std::string> comments;  //!< leading '#' lines, in order

    bool contains(std::string_view key) const
    {
        return this->find(key) != nullptr;
    }

    std::string const* find(std::string_view key) const
    {
        for (auto const& [k, v] : entries)
            if (k == key)
                return &v;
        return nullptr;
    }

    std::string const& at(std::string_view key) const
    {
        if (auto* v = this->find(key))
            return *v;
        throw std::runtime_error("missing required key: "
                                 + std::string(key));
    }

    double number(std::string_view key) const
    {
        return parse_double(this->at(key), std::string(key).c_str());
    }

    std::int64_t integer(std::string_view key) const
    {
        return parse_int(this->at(key), std::string(key).c_str());
    }
};

inline KeyValueDocument parse_key_values(std::istream& in)
{
    KeyValueDocument doc;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        std::string_view sv = trim(line);
        if (sv.empty())
            continue;
        if (sv.front() == '#')
        {
            doc.comments.emplace_back(sv);
            continue;
        }
        auto eq = sv.find('=');
        if (eq == std::string_view::npos)
            throw std::runtime_error("line " + std::to_string(line_no)
                                     + ": expected 'key = value', got '"
                                     + std::string(sv) + "'");
        std::string_view key = trim(sv.substr(0, eq));
        std::string_view value = trim(sv.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("line " + std::to_string(line_no)
                                     + ": empty key");
        doc.entries.emplace_back(std::string(key), std::string(value));
    }
    return doc;
}

inline KeyValueDocument parse_key_values(std::string const& text)
{
    std::istringstream in(text);
    return parse_key_values(in);
}

inline KeyValueDocument load_key_values(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    return parse_key_values(in);
}

}  // namespace asekit
