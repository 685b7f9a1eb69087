#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string_view>
#include <vector>

namespace elink {

// Unit-cost edit distance over bytes, two-row dynamic program.
inline std::size_t levenshtein_distance(std::string_view a, std::string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    if (b.empty()) return a.size();

    std::vector<std::size_t> prev(b.size() + 1);
    std::vector<std::size_t> curr(b.size() + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});

    for (std::size_t i = 1; i <= a.size(); ++i) {
        curr[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, sub});
        }
        std::swap(prev, curr);
    }
    return prev[b.size()];
}

// 1 - distance / max(|a|, |b|), in [0,1]. Both empty -> 1.
inline double levenshtein_ratio(std::string_view a, std::string_view b) {
    if (a.empty() && b.empty()) return 1.0;
    auto longest = static_cast<double>(std::max(a.size(), b.size()));
    return 1.0 - static_cast<double>(levenshtein_distance(a, b)) / longest;
}

// Jaro similarity with the Winkler prefix bonus (prefix <= 4, scale 0.1).
inline double jaro_winkler(std::string_view a, std::string_view b) {
    if (a == b) return 1.0;
    if (a.empty() || b.empty()) return 0.0;

    const auto la = static_cast<std::ptrdiff_t>(a.size());
    const auto lb = static_cast<std::ptrdiff_t>(b.size());
    const std::ptrdiff_t window = std::max<std::ptrdiff_t>(std::max(la, lb) / 2 - 1, 0);

    std::vector<bool> a_matched(a.size(), false);
    std::vector<bool> b_matched(b.size(), false);
    std::ptrdiff_t matches = 0;

    for (std::ptrdiff_t i = 0; i < la; ++i) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - window);
        const std::ptrdiff_t hi = std::min(lb - 1, i + window);
        for (std::ptrdiff_t j = lo; j <= hi; ++j) {
            if (!b_matched[j] && a[i] == b[j]) {
                a_matched[i] = true;
                b_matched[j] = true;
                ++matches;
                break;
            }
        }
    }
    if (matches == 0) return 0.0;

    // Half the number of matched characters that are out of sequence.
    std::ptrdiff_t out_of_order = 0;
    std::ptrdiff_t j = 0;
    for (std::ptrdiff_t i = 0; i < la; ++i) {
        if (!a_matched[i]) continue;
        while (!b_matched[j]) ++j;
        if (a[i] != b[j]) ++out_of_order;
        ++j;
    }
    const double transpositions = static_cast<double>(out_of_order) / 2.0;

    const double m = static_cast<double>(matches);
    const double jaro =
        (m / static_cast<double>(la) + m / static_cast<double>(lb) + (m - transpositions) / m) / 3.0;

    std::ptrdiff_t prefix = 0;
    const std::ptrdiff_t prefix_cap = std::min<std::ptrdiff_t>({4, la, lb});
    while (prefix < prefix_cap && a[prefix] == b[prefix]) ++prefix;

    return jaro + static_cast<double>(prefix) * 0.1 * (1.0 - jaro);
}

}  // namespace elink
