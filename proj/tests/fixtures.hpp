#pragma once

// Shared test data: a tiny sports KB for the ambiguous-surface cases, a
// two-entity popularity trap, and a seeded synthetic corpus big enough for
// the statistical checks (10k entities, 100k anchors, hundreds of mentions).

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "elink/dictionary.hpp"
#include "elink/kb.hpp"
#include "elink/profile.hpp"

namespace fixtures {

struct TempDir {
    std::filesystem::path dir;

    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        dir = std::filesystem::temp_directory_path() /
              (tag + "-" + std::to_string(counter.fetch_add(1)) + "-" +
               std::to_string(std::random_device{}()));
        std::filesystem::create_directories(dir);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path operator/(const std::string& name) const { return dir / name; }
};

inline elink::Entity make_entity(std::string id, std::string title,
                                 std::vector<std::string> aliases = {},
                                 std::optional<std::string> description = std::nullopt,
                                 std::optional<std::string> category = std::nullopt) {
    elink::Entity e;
    e.id = std::move(id);
    e.title = std::move(title);
    e.aliases = std::move(aliases);
    e.description = std::move(description);
    e.category = std::move(category);
    e.title_and_aliases.push_back(e.title);
    for (const auto& alias : e.aliases)
        if (alias != e.title) e.title_and_aliases.push_back(alias);
    return e;
}

inline elink::Mention make_mention(std::string id, std::string ctx_left, std::string surface,
                                   std::string ctx_right,
                                   std::optional<std::string> gold = std::nullopt) {
    elink::Mention m;
    m.id = std::move(id);
    m.ctx_left = std::move(ctx_left);
    m.surface = std::move(surface);
    m.ctx_right = std::move(ctx_right);
    m.gold_entity = std::move(gold);
    return m;
}

// Three teams answer to "Bruins". The football side only wins once a profile
// spells out which program the text is about.
inline std::vector<elink::Entity> bruins_entities() {
    return {
        make_entity("Q194121", "Boston Bruins", {"Bruins", "B's"},
                    "professional ice hockey team based in Boston", "ice hockey team"),
        make_entity("Q3615392", "UCLA Bruins men's basketball", {"Bruins", "UCLA Bruins"},
                    "college basketball team of the University of California, Los Angeles",
                    "basketball team"),
        make_entity("Q7863617", "UCLA Bruins men's football", {"Bruins", "UCLA Bruins"},
                    "college football team of the University of California, Los Angeles",
                    "american football team"),
    };
}

inline elink::EntityProfile bruins_football_profile() {
    return {"UCLA Bruins men's football",
            "college football team of the University of California, Los Angeles"};
}

inline elink::Mention bruins_mention() {
    return make_mention("m-bruins", "the defensive lineman anchored the", "Bruins",
                        "front seven all season", "Q7863617");
}

// "Baltimore" overwhelmingly means the city in anchor text, so a
// most-frequent-sense profile goes to the city even in baseball context. The
// dictionary still carries the team as a candidate.
inline std::vector<elink::Entity> baltimore_entities() {
    return {
        make_entity("Q5092", "Baltimore", {"Baltimore, Maryland", "Charm City"},
                    "largest city in Maryland, United States", "city"),
        make_entity("Q805855", "Baltimore Orioles", {"Baltimore", "Orioles", "O's"},
                    "professional baseball team based in Baltimore, Maryland", "baseball team"),
    };
}

inline std::vector<elink::AnchorRecord> baltimore_anchors() {
    std::vector<elink::AnchorRecord> records;
    for (int i = 0; i < 8; ++i) records.push_back({"Baltimore", "Q5092"});
    for (int i = 0; i < 2; ++i) records.push_back({"Baltimore", "Q805855"});
    for (int i = 0; i < 3; ++i) records.push_back({"Orioles", "Q805855"});
    return records;
}

inline elink::Mention baltimore_mention() {
    return make_mention("m-baltimore", "the first baseman re-signed with", "Baltimore",
                        "ahead of the playoffs", "Q805855");
}

// ---------------------------------------------------------------------------
// Synthetic corpus. Everything below is driven by one seeded generator, so a
// given spec always produces the same corpus.

struct CorpusSpec {
    int entities = 10000;
    int anchor_records = 100000;
    int train_mentions = 300;
    int eval_mentions = 500;
    std::uint32_t seed = 20260819;
};

struct Corpus {
    std::vector<elink::Entity> entities;
    std::vector<elink::AnchorRecord> anchors;
    std::vector<elink::Mention> train_mentions;
    std::vector<elink::Mention> eval_mentions;
    // gold title/description per eval mention id, for mentions whose gold is real
    std::vector<std::pair<std::string, elink::EntityProfile>> eval_profiles;
    std::set<std::string> anchored_ids;  // entities that occur as anchor targets
};

namespace detail {

inline std::vector<std::string> make_vocabulary(int n, std::mt19937& rng) {
    static const std::vector<std::string> onsets = {"b", "br", "d",  "dr", "f", "fl", "g", "gr",
                                                    "k", "kl", "l",  "m",  "n", "p",  "pr", "r",
                                                    "s", "st", "t",  "tr", "v", "z"};
    static const std::vector<std::string> nuclei = {"a", "e", "i", "o", "u", "ai", "ea", "ou"};
    static const std::vector<std::string> codas = {"", "n", "r", "s", "l", "k", "m", "t"};
    std::uniform_int_distribution<std::size_t> pick_onset(0, onsets.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_nucleus(0, nuclei.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_coda(0, codas.size() - 1);
    std::uniform_int_distribution<int> pick_syllables(2, 3);

    std::set<std::string> seen;
    std::vector<std::string> words;
    while (static_cast<int>(words.size()) < n) {
        std::string w;
        int syllables = pick_syllables(rng);
        for (int s = 0; s < syllables; ++s) w += onsets[pick_onset(rng)] + nuclei[pick_nucleus(rng)];
        w += codas[pick_coda(rng)];
        if (seen.insert(w).second) words.push_back(w);
    }
    return words;
}

// Skewed word choice: low indices dominate, long tail stays reachable.
inline const std::string& skewed_word(const std::vector<std::string>& vocab, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double x = u(rng);
    auto idx = static_cast<std::size_t>(x * x * x * static_cast<double>(vocab.size()));
    if (idx >= vocab.size()) idx = vocab.size() - 1;
    return vocab[idx];
}

inline std::string capitalize(std::string w) {
    if (!w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
    return w;
}

}  // namespace detail

inline Corpus make_corpus(const CorpusSpec& spec = {}) {
    Corpus corpus;
    std::mt19937 rng(spec.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto vocab = detail::make_vocabulary(700, rng);

    std::vector<std::string> categories;
    for (int i = 0; i < 24; ++i)
        categories.push_back(detail::skewed_word(vocab, rng) + " " + detail::skewed_word(vocab, rng));

    // entities
    std::uniform_int_distribution<int> pick_title_len(1, 3);
    std::uniform_int_distribution<int> pick_desc_len(6, 12);
    std::uniform_int_distribution<std::size_t> pick_category(0, categories.size() - 1);
    for (int i = 0; i < spec.entities; ++i) {
        std::string id = "Q" + std::to_string(10000 + i);

        int title_len = pick_title_len(rng);
        std::vector<std::string> title_words;
        for (int w = 0; w < title_len; ++w)
            title_words.push_back(detail::capitalize(detail::skewed_word(vocab, rng)));
        std::string title = elink::join(title_words, " ");

        std::vector<std::string> aliases;
        if (u(rng) < 0.5) {
            int n_aliases = u(rng) < 0.3 ? 2 : 1;
            for (int a = 0; a < n_aliases; ++a) {
                double roll = u(rng);
                if (roll < 0.4 && title_len > 1) {
                    aliases.push_back(title_words.front());
                } else if (roll < 0.7) {
                    aliases.push_back(title + " " + detail::skewed_word(vocab, rng));
                } else {
                    aliases.push_back(detail::capitalize(detail::skewed_word(vocab, rng)) + " " +
                                      detail::skewed_word(vocab, rng));
                }
            }
        }

        std::optional<std::string> category;
        if (u(rng) < 0.7) category = categories[pick_category(rng)];

        std::optional<std::string> description;
        if (u(rng) < 0.85) {
            int desc_len = pick_desc_len(rng);
            std::vector<std::string> desc_words;
            for (int w = 0; w < desc_len; ++w) {
                double roll = u(rng);
                if (roll < 0.25) {
                    desc_words.push_back(elink::lower_ascii(
                        title_words[static_cast<std::size_t>(u(rng) * title_words.size()) %
                                    title_words.size()]));
                } else if (roll < 0.35 && category) {
                    desc_words.push_back(*category);
                } else {
                    desc_words.push_back(detail::skewed_word(vocab, rng));
                }
            }
            description = elink::join(desc_words, " ");
        }

        corpus.entities.push_back(
            make_entity(std::move(id), std::move(title), std::move(aliases), std::move(description),
                        std::move(category)));
    }

    // anchors: ~70% of entities are anchor targets; counts are skewed, a slice
    // of surfaces is shared across entities so priors have real structure.
    std::vector<std::size_t> anchored;
    for (std::size_t i = 0; i < corpus.entities.size(); ++i) {
        // entity 0 is always anchored and entity 1 never is, so both pools
        // exist even for tiny specs
        bool is_anchored = i == 0 || (i != 1 && u(rng) < 0.7);
        if (is_anchored) {
            anchored.push_back(i);
            corpus.anchored_ids.insert(corpus.entities[i].id);
        }
    }

    std::vector<std::pair<elink::AnchorRecord, int>> weighted;
    std::uniform_int_distribution<std::size_t> pick_anchored(0, anchored.size() - 1);
    for (std::size_t idx : anchored) {
        const auto& e = corpus.entities[idx];
        double r = u(rng);
        weighted.push_back({{e.title, e.id}, 1 + static_cast<int>(29.0 * r * r)});
        if (!e.aliases.empty() && u(rng) < 0.4) {
            const auto& alias = e.aliases[static_cast<std::size_t>(u(rng) * e.aliases.size()) %
                                          e.aliases.size()];
            double ra = u(rng);
            weighted.push_back({{alias, e.id}, 1 + static_cast<int>(9.0 * ra * ra)});
        }
        if (u(rng) < 0.10) {
            // another anchored entity's title also points here: ambiguity
            const auto& other = corpus.entities[anchored[pick_anchored(rng)]];
            weighted.push_back({{other.title, e.id}, 1 + static_cast<int>(4.0 * u(rng))});
        }
    }
    for (const auto& [record, count] : weighted)
        for (int c = 0; c < count; ++c) corpus.anchors.push_back(record);
    for (std::size_t k = 0; corpus.anchors.size() < static_cast<std::size_t>(spec.anchor_records); ++k)
        corpus.anchors.push_back(weighted[k % weighted.size()].first);

    // mention text around a chosen entity: context borrows from the entity's
    // description and category, padded with corpus noise
    auto context_words = [&](const elink::Entity& e, int n) {
        auto desc_tokens = elink::tokenize(e.description.value_or(""));
        std::vector<std::string> words;
        for (int w = 0; w < n; ++w) {
            double roll = u(rng);
            if (roll < 0.5 && !desc_tokens.empty()) {
                words.push_back(desc_tokens[static_cast<std::size_t>(u(rng) * desc_tokens.size()) %
                                            desc_tokens.size()]);
            } else if (roll < 0.6 && e.category) {
                words.push_back(*e.category);
            } else {
                words.push_back(detail::skewed_word(vocab, rng));
            }
        }
        return elink::join(words, " ");
    };
    std::uniform_int_distribution<int> pick_ctx_len(2, 6);
    auto mention_for = [&](const elink::Entity& e, std::string id) {
        std::string surface = e.title;
        if (!e.aliases.empty() && u(rng) < 0.2)
            surface = e.aliases[static_cast<std::size_t>(u(rng) * e.aliases.size()) % e.aliases.size()];
        return make_mention(std::move(id), context_words(e, pick_ctx_len(rng)), surface,
                            context_words(e, pick_ctx_len(rng)), e.id);
    };

    std::vector<std::size_t> not_anchored;
    for (std::size_t i = 0; i < corpus.entities.size(); ++i)
        if (!corpus.anchored_ids.count(corpus.entities[i].id)) not_anchored.push_back(i);
    std::uniform_int_distribution<std::size_t> pick_unanchored(0, not_anchored.size() - 1);

    for (int i = 0; i < spec.train_mentions; ++i) {
        std::size_t idx =
            u(rng) < 0.25 ? not_anchored[pick_unanchored(rng)] : anchored[pick_anchored(rng)];
        corpus.train_mentions.push_back(
            mention_for(corpus.entities[idx], "t" + std::to_string(i)));
    }

    // eval: ~5% unlinkable (fake or missing gold), ~30% of the rest with golds
    // that never occur as anchor targets
    for (int i = 0; i < spec.eval_mentions; ++i) {
        std::string id = "m" + std::to_string(i);
        if (i % 40 == 0) {
            const auto& decoy = corpus.entities[anchored[pick_anchored(rng)]];
            auto m = mention_for(decoy, id);
            m.gold_entity = "QX" + std::to_string(i);  // not in the KB
            corpus.eval_mentions.push_back(std::move(m));
            continue;
        }
        if (i % 40 == 1) {
            const auto& decoy = corpus.entities[anchored[pick_anchored(rng)]];
            auto m = mention_for(decoy, id);
            m.gold_entity.reset();
            corpus.eval_mentions.push_back(std::move(m));
            continue;
        }
        std::size_t idx =
            i % 10 < 3 ? not_anchored[pick_unanchored(rng)] : anchored[pick_anchored(rng)];
        const auto& e = corpus.entities[idx];
        corpus.eval_mentions.push_back(mention_for(e, id));
        corpus.eval_profiles.push_back(
            {corpus.eval_mentions.back().id, {e.title, e.description.value_or("")}});
    }
    return corpus;
}

}  // namespace fixtures
