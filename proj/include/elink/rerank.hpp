#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "elink/candidates.hpp"
#include "elink/features.hpp"
#include "elink/kb.hpp"
#include "elink/profile.hpp"

namespace elink {

// Serialized (mention, candidate) pair in the cross-attention input format.
struct CandidateRepresentation {
    std::string text;
    std::string mention_id;
    std::string entity_id;
    int rank = 0;
};

// text = serialized mention + " [rank{n}] [TITLE] {title}", then [ALIAS],
// [DESC], [CAT] segments for the fields the entity actually has. The alias is
// the one most similar to the surface form; missing fields drop both the
// value and its marker.
inline CandidateRepresentation serialize_candidate(const Mention& m, const Entity& e, int rank) {
    if (rank < 1) throw std::invalid_argument("serialize_candidate: rank must be >= 1");
    std::string text = serialize_mention(m);
    text += " [rank" + std::to_string(rank) + "]";
    text += " [TITLE] " + e.title;
    if (auto alias = select_alias(m.surface, e.aliases)) text += " [ALIAS] " + *alias;
    if (e.description) text += " [DESC] " + *e.description;
    if (e.category) text += " [CAT] " + *e.category;
    return {std::move(text), m.id, e.id, rank};
}

// Matching score for one candidate; rank is the candidate's position in the
// incoming list (1-based). Entity data, if needed, is the scorer's own
// lookup so candidates unknown to the KB can still be scored.
using Scorer = std::function<double(const Mention&, const std::string& entity_id, int rank)>;

struct RerankDecision {
    std::vector<ScoredEntity> candidates;  // re-scored, descending
    std::optional<std::string> linked;     // nullopt = NIL
    double threshold = 0.5;
};

// Re-scores the candidate list, sorts descending (ties by entity id), and
// links the top candidate iff its score clears the threshold. An empty list
// is NIL by definition.
inline RerankDecision rerank(const Mention& mention, const RankedCandidates& candidates,
                             const Scorer& scorer, double threshold) {
    RerankDecision decision;
    decision.threshold = threshold;
    decision.candidates.reserve(candidates.items.size());
    for (std::size_t i = 0; i < candidates.items.size(); ++i) {
        const auto& c = candidates.items[i];
        decision.candidates.push_back({c.id, scorer(mention, c.id, static_cast<int>(i) + 1)});
    }
    std::sort(decision.candidates.begin(), decision.candidates.end(),
              [](const ScoredEntity& a, const ScoredEntity& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.id < b.id;
              });
    if (!decision.candidates.empty() && decision.candidates.front().score >= threshold)
        decision.linked = decision.candidates.front().id;
    return decision;
}

}  // namespace elink
