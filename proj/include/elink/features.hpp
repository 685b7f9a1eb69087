#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "elink/kb.hpp"
#include "elink/profile.hpp"
#include "elink/string_metrics.hpp"
#include "elink/text.hpp"

namespace elink {

// Per-candidate feature set: two reciprocal-rank features, four string
// similarities and six common-word counts. Field order is the canonical
// feature order everywhere (training, model snapshots, split indices).
struct FeatureVector {
    double a_d = 0.0;
    double a_e = 0.0;
    double lev_title = 0.0;
    double lev_best_alias = 0.0;
    double jw_title = 0.0;
    double jw_best_alias = 0.0;
    double cw_surface_name = 0.0;
    double cw_context_name = 0.0;
    double cw_surface_desc = 0.0;
    double cw_context_desc = 0.0;
    double cw_surface_cat = 0.0;
    double cw_context_cat = 0.0;

    static constexpr int count = 12;

    static const std::array<std::string, count>& names() {
        static const std::array<std::string, count> n = {
            "a_d",           "a_e",          "lev_title",       "lev_best_alias",
            "jw_title",      "jw_best_alias", "cw_surface_name", "cw_context_name",
            "cw_surface_desc", "cw_context_desc", "cw_surface_cat", "cw_context_cat"};
        return n;
    }

    std::array<double, count> to_array() const {
        return {a_d,           a_e,           lev_title,       lev_best_alias,
                jw_title,      jw_best_alias, cw_surface_name, cw_context_name,
                cw_surface_desc, cw_context_desc, cw_surface_cat, cw_context_cat};
    }
};

// Reciprocal ranks; rank 0 means absent from that source list.
inline std::pair<double, double> rank_features(int r_d, int r_e) {
    double a_d = r_d > 0 ? 1.0 / static_cast<double>(r_d) : 0.0;
    double a_e = r_e > 0 ? 1.0 / static_cast<double>(r_e) : 0.0;
    return {a_d, a_e};
}

// Alias most similar to the surface by levenshtein_ratio; ties keep the first
// listed alias. Absent when the alias list is empty.
inline std::optional<std::string> select_alias(const std::string& surface,
                                               const std::vector<std::string>& aliases) {
    std::optional<std::string> best;
    double best_ratio = -1.0;
    for (const auto& alias : aliases) {
        double r = levenshtein_ratio(surface, alias);
        if (r > best_ratio) {
            best_ratio = r;
            best = alias;
        }
    }
    return best;
}

// String and rank features for one (mention, candidate) pair. `entity` may be
// null when the candidate id is known only to the dictionary; string features
// are then zero and only the rank features carry signal. Entities without
// aliases reuse the title for the alias-based similarities.
inline FeatureVector extract_features(const Mention& mention, const Entity* entity, int r_d,
                                      int r_e) {
    FeatureVector f;
    std::tie(f.a_d, f.a_e) = rank_features(r_d, r_e);
    if (!entity) return f;

    const std::string& surface = mention.surface;
    std::string context = mention.ctx_left + " " + mention.ctx_right;
    std::string best_alias =
        select_alias(surface, entity->aliases).value_or(entity->title);

    f.lev_title = levenshtein_ratio(surface, entity->title);
    f.lev_best_alias = levenshtein_ratio(surface, best_alias);
    f.jw_title = jaro_winkler(surface, entity->title);
    f.jw_best_alias = jaro_winkler(surface, best_alias);

    std::string name = entity->name_text();
    const std::string desc = entity->description.value_or("");
    const std::string cat = entity->category.value_or("");
    f.cw_surface_name = common_words(surface, name);
    f.cw_context_name = common_words(context, name);
    f.cw_surface_desc = common_words(surface, desc);
    f.cw_context_desc = common_words(context, desc);
    f.cw_surface_cat = common_words(surface, cat);
    f.cw_context_cat = common_words(context, cat);
    return f;
}

}  // namespace elink
