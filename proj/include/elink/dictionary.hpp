#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "elink/candidates.hpp"
#include "elink/text.hpp"

namespace elink {

struct AnchorRecord {
    std::string surface;
    std::string entity_id;
};

struct DictEntry {
    std::string entity_id;
    std::uint64_t count;
    double prior;  // count / total count for the surface
};

// Mention-to-entity dictionary built from an anchor corpus. Surfaces are
// normalized by trimming outer whitespace only; case is preserved. Per
// surface, entries are ordered by prior descending, entity id ascending.
class Dictionary {
  public:
    using SurfaceCounts = std::unordered_map<std::string, std::unordered_map<std::string, std::uint64_t>>;

    static Dictionary build(const std::vector<AnchorRecord>& records) {
        SurfaceCounts counts;
        for (const auto& rec : records) {
            std::string surface(trim(rec.surface));
            if (surface.empty() || rec.entity_id.empty()) continue;
            ++counts[surface][rec.entity_id];
        }
        return from_counts(counts);
    }

    static Dictionary from_counts(const SurfaceCounts& counts) {
        Dictionary dict;
        for (const auto& [surface, per_entity] : counts) {
            std::uint64_t total = 0;
            for (const auto& [id, n] : per_entity) total += n;
            if (total == 0) continue;

            std::vector<DictEntry> entries;
            entries.reserve(per_entity.size());
            for (const auto& [id, n] : per_entity)
                entries.push_back({id, n, static_cast<double>(n) / static_cast<double>(total)});
            // Prior descending equals count descending (shared denominator),
            // so ordering never depends on float comparisons.
            std::sort(entries.begin(), entries.end(), [](const DictEntry& a, const DictEntry& b) {
                if (a.count != b.count) return a.count > b.count;
                return a.entity_id < b.entity_id;
            });
            dict.entries_.emplace(surface, std::move(entries));
        }
        dict.rebuild_case_folded();
        return dict;
    }

    std::size_t surface_count() const { return entries_.size(); }

    // The entry list for a surface; empty when unseen. Exact (trimmed) lookup.
    const std::vector<DictEntry>& lookup(const std::string& surface) const {
        static const std::vector<DictEntry> empty;
        auto it = entries_.find(std::string(trim(surface)));
        return it == entries_.end() ? empty : it->second;
    }

    // p-hat(e|m): fraction of the surface's anchors that point to the entity.
    double prior(const std::string& surface, const std::string& entity_id) const {
        for (const auto& entry : lookup(surface))
            if (entry.entity_id == entity_id) return entry.prior;
        return 0.0;
    }

    // Top-k entities for the surface by prior. With case_insensitive set, a
    // missed exact lookup falls back to pooling all case variants of the
    // surface and renormalizing their counts.
    RankedCandidates candidates(const std::string& surface, int k,
                                bool case_insensitive = false) const {
        require_positive_k(k);
        RankedCandidates out{Source::dictionary, {}};

        const auto& exact = lookup(surface);
        if (!exact.empty()) {
            for (const auto& entry : exact) {
                if (static_cast<int>(out.items.size()) >= k) break;
                out.items.push_back({entry.entity_id, entry.prior});
            }
            return out;
        }
        if (!case_insensitive) return out;

        auto folded = case_folded_.find(lower_ascii(trim(surface)));
        if (folded == case_folded_.end()) return out;

        std::map<std::string, std::uint64_t> pooled;
        std::uint64_t total = 0;
        for (const auto& variant : folded->second) {
            for (const auto& entry : entries_.at(variant)) {
                pooled[entry.entity_id] += entry.count;
                total += entry.count;
            }
        }
        std::vector<DictEntry> merged;
        merged.reserve(pooled.size());
        for (const auto& [id, n] : pooled)
            merged.push_back({id, n, static_cast<double>(n) / static_cast<double>(total)});
        std::sort(merged.begin(), merged.end(), [](const DictEntry& a, const DictEntry& b) {
            if (a.count != b.count) return a.count > b.count;
            return a.entity_id < b.entity_id;
        });
        for (const auto& entry : merged) {
            if (static_cast<int>(out.items.size()) >= k) break;
            out.items.push_back({entry.entity_id, entry.prior});
        }
        return out;
    }

    // Snapshot: `surface<TAB>entity_id<TAB>count` lines in canonical order.
    void save(const std::filesystem::path& path, const std::string& header = {}) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write dictionary: " + path.string());
        if (!header.empty()) out << "# " << header << "\n";
        std::map<std::string, const std::vector<DictEntry>*> ordered;
        for (const auto& [surface, entries] : entries_) ordered.emplace(surface, &entries);
        for (const auto& [surface, entries] : ordered)
            for (const auto& entry : *entries)
                out << surface << '\t' << entry.entity_id << '\t' << entry.count << "\n";
    }

    static Dictionary load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open dictionary: " + path.string());
        SurfaceCounts counts;
        std::string line;
        std::uint64_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty() || line[0] == '#') continue;
            auto fields = split(line, '\t');
            if (fields.size() != 3)
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                         ": expected surface<TAB>entity<TAB>count");
            counts[fields[0]][fields[1]] += std::stoull(fields[2]);
        }
        return from_counts(counts);
    }

  private:
    void rebuild_case_folded() {
        case_folded_.clear();
        for (const auto& [surface, entries] : entries_)
            case_folded_[lower_ascii(surface)].push_back(surface);
        for (auto& [folded, variants] : case_folded_) std::sort(variants.begin(), variants.end());
    }

    std::unordered_map<std::string, std::vector<DictEntry>> entries_;
    std::unordered_map<std::string, std::vector<std::string>> case_folded_;
};

// Anchor corpus: UTF-8, `surface<TAB>entity_id`, one record per line.
inline std::vector<AnchorRecord> load_anchor_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open anchor corpus: " + path.string());
    std::vector<AnchorRecord> records;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": expected surface<TAB>entity_id");
        records.push_back({line.substr(0, tab), line.substr(tab + 1)});
    }
    return records;
}

}  // namespace elink
