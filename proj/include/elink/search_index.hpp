#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "elink/candidates.hpp"
#include "elink/kb.hpp"
#include "elink/text.hpp"

namespace elink {

enum class Field { title_and_aliases, description };

inline Field field_from_name(const std::string& name) {
    if (name == "title_and_aliases") return Field::title_and_aliases;
    if (name == "description") return Field::description;
    throw std::invalid_argument("unknown field: " + name);
}

struct QueryWeights {
    double surface = 1.0;
    double title = 1.0;
    double description = 1.0;
    double exact = 2.0;
};

struct ProfileQuery {
    std::string surface;
    std::string generated_title;
    std::string generated_description;
    QueryWeights weights;
};

// Embedded inverted index with per-field BM25 (k1 = 1.2, b = 0.75).
//
// Scoring follows the Lucene/Elasticsearch form of BM25, which keeps the idf
// term positive on small corpora:
//
//   idf(t)      = ln(1 + (N - df + 0.5) / (df + 0.5))
//   score(d, t) = idf(t) * ((k1 + 1) * tf) / (tf + k1 * (1 - b + b * len_d / avg_len))
//
// summed over the query tokens in order (repeated tokens contribute once per
// occurrence). Average field length is taken over all indexed entities,
// counting absent fields as length zero. Immutable after build; concurrent
// reads are safe.
class SearchIndex {
  public:
    static constexpr double k1 = 1.2;
    static constexpr double b = 0.75;

    static SearchIndex build(std::vector<Entity> entities) {
        SearchIndex index;
        for (auto& e : entities) index.store_.add(std::move(e));

        const auto& all = index.store_.entities();
        for (auto& fs : index.fields_) {
            fs.doc_len.assign(all.size(), 0);
            fs.total_len = 0;
        }
        for (std::uint32_t ord = 0; ord < all.size(); ++ord) {
            index.index_field(Field::title_and_aliases, ord, tokenize(all[ord].name_text()));
            index.index_field(Field::description, ord,
                              tokenize(all[ord].description.value_or("")));
            for (const auto& entry : all[ord].title_and_aliases) {
                auto& ords = index.exact_entries_[lower_ascii(entry)];
                if (ords.empty() || ords.back() != ord) ords.push_back(ord);
            }
        }
        for (auto& fs : index.fields_) {
            fs.avg_len = all.empty() ? 0.0
                                     : static_cast<double>(fs.total_len) /
                                           static_cast<double>(all.size());
        }
        return index;
    }

    const EntityStore& store() const { return store_; }
    std::size_t size() const { return store_.size(); }

    // Per-field BM25 for a token list; entities with no matching token are
    // omitted. Exposed by field name for external callers.
    std::map<std::string, double> bm25_score(const std::string& field_name,
                                             const std::vector<std::string>& query_tokens) const {
        Field field = field_from_name(field_name);
        std::vector<double> scores(size(), 0.0);
        std::vector<std::uint32_t> touched;
        score_field(field, query_tokens, scores, touched);
        std::map<std::string, double> out;
        for (auto ord : touched) out[store_.entities()[ord].id] = scores[ord];
        return out;
    }

    // Weighted-sum query over the surface form and a generated profile:
    //   w_surface * bm25(title_and_aliases, surface)
    // + w_title   * bm25(title_and_aliases, generated_title)
    // + w_desc    * bm25(description, generated_description)
    // + w_exact   * [surface or generated_title equals some title_and_aliases
    //                entry, ASCII-case-insensitively]
    // Top-k by score, ties by entity id ascending.
    RankedCandidates profile_query(const ProfileQuery& q, int k) const {
        require_positive_k(k);
        if (q.surface.empty() && q.generated_title.empty() && q.generated_description.empty())
            throw std::invalid_argument("profile_query: all query clauses are empty");
        return run_query(q, k, Source::profile);
    }

    // Literal-surface query: BM25 over title_and_aliases plus the exact-match
    // bonus. Equivalent to a profile query whose generated fields are empty.
    RankedCandidates simple_query(const std::string& surface, int k,
                                  const QueryWeights& weights = {}) const {
        require_positive_k(k);
        if (surface.empty()) return {Source::simple, {}};
        ProfileQuery q{surface, "", "", weights};
        auto result = run_query(q, k, Source::simple);
        return result;
    }

    // Snapshot: header line, then one entity per line in ordinal order.
    // Postings and statistics are rebuilt on load.
    void save(const std::filesystem::path& path, const std::string& header = {}) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write index: " + path.string());
        out << "elink.index 1\n";
        if (!header.empty()) out << "# " << header << "\n";
        for (const auto& e : store_.entities()) out << nlohmann::json(e).dump() << "\n";
    }

    static SearchIndex load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open index: " + path.string());
        std::string line;
        if (!std::getline(in, line) || line != "elink.index 1")
            throw std::runtime_error(path.string() + ": not an elink.index snapshot (version 1)");
        std::vector<Entity> entities;
        std::uint64_t line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty() || line[0] == '#') continue;
            try {
                entities.push_back(nlohmann::json::parse(line).get<Entity>());
            } catch (const std::exception& e) {
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
            }
        }
        return build(std::move(entities));
    }

  private:
    struct Posting {
        std::uint32_t ordinal;
        std::uint32_t tf;
    };
    struct FieldStats {
        std::unordered_map<std::string, std::vector<Posting>> postings;  // ordinal-sorted
        std::vector<std::uint32_t> doc_len;
        std::uint64_t total_len = 0;
        double avg_len = 0.0;
    };

    FieldStats& field_stats(Field f) { return fields_[static_cast<int>(f)]; }
    const FieldStats& field_stats(Field f) const { return fields_[static_cast<int>(f)]; }

    void index_field(Field field, std::uint32_t ordinal, const std::vector<std::string>& tokens) {
        auto& fs = field_stats(field);
        fs.doc_len[ordinal] = static_cast<std::uint32_t>(tokens.size());
        fs.total_len += tokens.size();
        std::unordered_map<std::string, std::uint32_t> tf;
        for (const auto& t : tokens) ++tf[t];
        for (const auto& [token, freq] : tf) fs.postings[token].push_back({ordinal, freq});
    }

    // Accumulates BM25 contributions into `scores`; every ordinal with at
    // least one matching token is appended to `touched` (once).
    void score_field(Field field, const std::vector<std::string>& query_tokens,
                     std::vector<double>& scores, std::vector<std::uint32_t>& touched) const {
        const auto& fs = field_stats(field);
        const double n_docs = static_cast<double>(size());
        std::vector<bool> seen(size(), false);
        for (const auto& token : query_tokens) {
            auto it = fs.postings.find(token);
            if (it == fs.postings.end()) continue;
            const double df = static_cast<double>(it->second.size());
            const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
            for (const auto& posting : it->second) {
                const double tf = static_cast<double>(posting.tf);
                const double len = static_cast<double>(fs.doc_len[posting.ordinal]);
                const double norm = tf + k1 * (1.0 - b + b * len / fs.avg_len);
                scores[posting.ordinal] += idf * ((k1 + 1.0) * tf) / norm;
                if (!seen[posting.ordinal]) {
                    seen[posting.ordinal] = true;
                    touched.push_back(posting.ordinal);
                }
            }
        }
        // Postings are ordinal-sorted per token, but multi-token queries may
        // interleave; keep `touched` deterministic.
        std::sort(touched.begin(), touched.end());
        touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    }

    RankedCandidates run_query(const ProfileQuery& q, int k, Source source) const {
        std::vector<double> s_surface(size(), 0.0), s_title(size(), 0.0), s_desc(size(), 0.0);
        std::vector<std::uint32_t> touched;
        score_field(Field::title_and_aliases, tokenize(q.surface), s_surface, touched);
        score_field(Field::title_and_aliases, tokenize(q.generated_title), s_title, touched);
        score_field(Field::description, tokenize(q.generated_description), s_desc, touched);

        std::vector<bool> exact(size(), false);
        auto mark_exact = [&](const std::string& text) {
            if (text.empty()) return;
            auto it = exact_entries_.find(lower_ascii(text));
            if (it == exact_entries_.end()) return;
            for (auto ord : it->second) {
                if (!exact[ord]) {
                    exact[ord] = true;
                    touched.push_back(ord);
                }
            }
        };
        mark_exact(q.surface);
        mark_exact(q.generated_title);

        std::sort(touched.begin(), touched.end());
        touched.erase(std::unique(touched.begin(), touched.end()), touched.end());

        std::vector<ScoredEntity> scored;
        scored.reserve(touched.size());
        for (auto ord : touched) {
            double total = q.weights.surface * s_surface[ord] + q.weights.title * s_title[ord] +
                           q.weights.description * s_desc[ord];
            if (exact[ord]) total += q.weights.exact;
            if (total > 0.0) scored.push_back({store_.entities()[ord].id, total});
        }
        std::sort(scored.begin(), scored.end(), [](const ScoredEntity& a, const ScoredEntity& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.id < b.id;
        });
        if (static_cast<int>(scored.size()) > k) scored.resize(static_cast<std::size_t>(k));
        return {source, std::move(scored)};
    }

    EntityStore store_;
    FieldStats fields_[2];
    std::unordered_map<std::string, std::vector<std::uint32_t>> exact_entries_;
};

}  // namespace elink
