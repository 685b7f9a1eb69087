#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace elink {

// Locale-free ASCII classification. Bytes >= 0x80 (UTF-8 continuation and
// lead bytes) are treated as word characters so non-ASCII words survive
// tokenization as opaque tokens.
inline bool is_token_char(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9') || c >= 0x80;
}

inline char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + ('a' - 'A')) : c;
}

inline std::string lower_ascii(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(ascii_lower(c));
    return out;
}

inline bool equals_ignore_ascii_case(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (ascii_lower(a[i]) != ascii_lower(b[i])) return false;
    return true;
}

inline std::string_view trim(std::string_view s) {
    const char* ws = " \t\r\n\f\v";
    auto begin = s.find_first_not_of(ws);
    if (begin == std::string_view::npos) return {};
    auto end = s.find_last_not_of(ws);
    return s.substr(begin, end - begin + 1);
}

// Lowercase, split on non-token characters, drop empty tokens.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char raw : text) {
        auto c = static_cast<unsigned char>(raw);
        if (is_token_char(c)) {
            current.push_back(ascii_lower(raw));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

inline std::unordered_set<std::string> token_set(std::string_view text) {
    auto tokens = tokenize(text);
    return {tokens.begin(), tokens.end()};
}

// Size of the intersection of the two texts' distinct-token sets.
inline int common_words(std::string_view a, std::string_view b) {
    auto sa = token_set(a);
    if (sa.empty()) return 0;
    auto sb = token_set(b);
    int shared = 0;
    for (const auto& t : sa)
        if (sb.count(t)) ++shared;
    return shared;
}

inline std::vector<std::string> split(std::string_view s, char delim) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(delim, start);
        if (pos == std::string_view::npos) {
            parts.emplace_back(s.substr(start));
            return parts;
        }
        parts.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace elink
