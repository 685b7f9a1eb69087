#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "elink/candidates.hpp"
#include "elink/dictionary.hpp"
#include "elink/features.hpp"
#include "elink/gbt.hpp"
#include "elink/profile.hpp"
#include "elink/search_index.hpp"

namespace elink {

struct FusionParams {
    int dict_k = 100;
    int profile_k = 100;
    int hybrid_k = 50;
    QueryWeights weights;
    bool dict_case_insensitive = false;
};

// One merged candidate before truncation. Rank 0 means absent from that
// source list. A candidate may exist only in the dictionary (anchor target
// filtered out of the KB); its string features are then zero.
struct HybridCandidate {
    std::string entity_id;
    int r_d = 0;
    int r_e = 0;
    FeatureVector features;
    double score = 0.0;
};

struct HybridResult {
    RankedCandidates ranked;             // top hybrid_k by score, ties by id
    std::vector<HybridCandidate> merged; // full C_d ∪ C_e, first-seen order
    RankedCandidates dict_list;          // C_d as retrieved
    RankedCandidates profile_list;       // C_e as retrieved
};

namespace detail {

inline RankedCandidates profile_list_for(const SearchIndex& index, const Mention& mention,
                                         const std::optional<EntityProfile>& profile,
                                         const FusionParams& params) {
    if (!profile) return {Source::profile, {}};
    if (mention.surface.empty() && profile->title.empty() && profile->description.empty())
        return {Source::profile, {}};
    ProfileQuery q{mention.surface, profile->title, profile->description, params.weights};
    return index.profile_query(q, params.profile_k);
}

}  // namespace detail

// Union of the dictionary and profile lists, deduplicated by entity id, with
// features extracted against the index's entity store. Scores are left at 0.
inline std::vector<HybridCandidate> merge_candidates(const Mention& mention,
                                                     const RankedCandidates& dict_list,
                                                     const RankedCandidates& profile_list,
                                                     const EntityStore& store) {
    std::vector<HybridCandidate> merged;
    std::unordered_map<std::string, std::size_t> position;
    auto absorb = [&](const RankedCandidates& list, bool from_dict) {
        for (std::size_t i = 0; i < list.items.size(); ++i) {
            const auto& id = list.items[i].id;
            int rank = static_cast<int>(i) + 1;
            auto it = position.find(id);
            if (it == position.end()) {
                it = position.emplace(id, merged.size()).first;
                merged.push_back({id, 0, 0, {}, 0.0});
            }
            (from_dict ? merged[it->second].r_d : merged[it->second].r_e) = rank;
        }
    };
    absorb(dict_list, true);
    absorb(profile_list, false);
    for (auto& c : merged)
        c.features = extract_features(mention, store.find(c.entity_id), c.r_d, c.r_e);
    return merged;
}

// Full hybrid retrieval: dictionary top dict_k, profile top profile_k, merge,
// score with the GBT, keep the top hybrid_k (score descending, ties by id).
// A missing profile leaves the profile side empty; the dictionary side can
// still carry the mention (and vice versa). Both empty → empty result.
inline HybridResult hybrid_candidates(const Mention& mention, const Dictionary& dict,
                                      const SearchIndex& index,
                                      const std::optional<EntityProfile>& profile,
                                      const GbtModel& model, const FusionParams& params = {}) {
    HybridResult result;
    result.dict_list = dict.candidates(mention.surface, params.dict_k, params.dict_case_insensitive);
    result.profile_list = detail::profile_list_for(index, mention, profile, params);
    result.merged = merge_candidates(mention, result.dict_list, result.profile_list, index.store());
    for (auto& c : result.merged) c.score = model.score(c.features);

    std::vector<ScoredEntity> scored;
    scored.reserve(result.merged.size());
    for (const auto& c : result.merged) scored.push_back({c.entity_id, c.score});
    std::sort(scored.begin(), scored.end(), [](const ScoredEntity& a, const ScoredEntity& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    if (static_cast<int>(scored.size()) > params.hybrid_k)
        scored.resize(static_cast<std::size_t>(params.hybrid_k));
    result.ranked = {Source::hybrid, std::move(scored)};
    return result;
}

inline HybridResult hybrid_candidates(const Mention& mention, const Dictionary& dict,
                                      const SearchIndex& index, const ProfileGenerator& generator,
                                      const GbtModel& model, const FusionParams& params = {}) {
    return hybrid_candidates(mention, dict, index, generator.generate(mention), model, params);
}

// Labeled (features, relevance) pairs for GBT training: each mention's merged
// candidates, the gold entity as the positive. Mentions whose gold was not
// retrieved (or who have none) contribute negatives only; that keeps hard
// negatives from NIL-ish mentions in the mix.
inline std::vector<GbtSample> build_training_samples(const std::vector<Mention>& mentions,
                                                     const Dictionary& dict,
                                                     const SearchIndex& index,
                                                     const ProfileGenerator& generator,
                                                     const FusionParams& params = {}) {
    std::vector<GbtSample> samples;
    for (const auto& mention : mentions) {
        auto dict_list = dict.candidates(mention.surface, params.dict_k, params.dict_case_insensitive);
        auto profile_list =
            detail::profile_list_for(index, mention, generator.generate(mention), params);
        auto merged = merge_candidates(mention, dict_list, profile_list, index.store());
        for (const auto& c : merged) {
            int label = mention.gold_entity && c.entity_id == *mention.gold_entity ? 1 : 0;
            samples.push_back({c.features, label});
        }
    }
    return samples;
}

}  // namespace elink
