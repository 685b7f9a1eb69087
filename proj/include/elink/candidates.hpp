#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace elink {

enum class Source { simple, dictionary, profile, hybrid };

inline const char* to_string(Source s) {
    switch (s) {
        case Source::simple: return "simple";
        case Source::dictionary: return "dictionary";
        case Source::profile: return "profile";
        case Source::hybrid: return "hybrid";
    }
    return "?";
}

struct ScoredEntity {
    std::string id;
    double score;
};

// Scores non-increasing, entity ids unique, length bounded by the query cap.
struct RankedCandidates {
    Source source;
    std::vector<ScoredEntity> items;

    bool contains(const std::string& id) const {
        for (const auto& it : items)
            if (it.id == id) return true;
        return false;
    }

    // 1-based rank of the entity, or 0 when absent.
    int rank_of(const std::string& id) const {
        for (std::size_t i = 0; i < items.size(); ++i)
            if (items[i].id == id) return static_cast<int>(i) + 1;
        return 0;
    }
};

inline void require_positive_k(int k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
}

}  // namespace elink
