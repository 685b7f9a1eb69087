#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "elink/text.hpp"

namespace elink {

// One record of the line-delimited dump format. Field names follow the wire
// format: id, labels, aliases, descriptions, instance_of, subclass_of.
struct RawEntityRecord {
    std::string id;
    std::map<std::string, std::string> labels;                 // language -> title
    std::map<std::string, std::vector<std::string>> aliases;   // language -> alias list
    std::map<std::string, std::string> descriptions;           // language -> text
    std::vector<std::string> instance_of;
    std::vector<std::string> subclass_of;
};

struct Entity {
    std::string id;
    std::string title;                          // never empty
    std::vector<std::string> aliases;           // trimmed, deduplicated, no empties
    std::optional<std::string> description;
    std::optional<std::string> category;
    std::vector<std::string> title_and_aliases; // title first, exact duplicates removed

    // Title plus aliases as one text blob, for token-level comparisons.
    std::string name_text() const { return join(title_and_aliases, " "); }
};

struct FilterRule {
    enum class Kind { no_english_title, admin_type, title_prefix };
    Kind kind;
    std::string matched_value;
};

inline const char* to_string(FilterRule::Kind k) {
    switch (k) {
        case FilterRule::Kind::no_english_title: return "no-english-title";
        case FilterRule::Kind::admin_type: return "admin-type";
        case FilterRule::Kind::title_prefix: return "title-prefix";
    }
    return "?";
}

// Administrative / internal item classes whose instances and subclasses are
// dropped during ingest.
inline const std::set<std::string>& default_admin_ids() {
    static const std::set<std::string> ids = {
        "Q4167836",  "Q24046192", "Q20010800", "Q11266439", "Q11753321",
        "Q19842659", "Q21528878", "Q17362920", "Q14204246", "Q21025364",
        "Q17442446", "Q26267864", "Q4663903",  "Q15184295", "Q13442814",
    };
    return ids;
}

namespace detail {

inline std::string require_string(const nlohmann::json& j, const char* field) {
    if (!j.is_string()) throw std::runtime_error(std::string("field '") + field + "' must be a string");
    return j.get<std::string>();
}

inline void read_lang_map(const nlohmann::json& j, const char* field,
                          std::map<std::string, std::string>& out) {
    if (j.is_null()) return;
    if (!j.is_object()) throw std::runtime_error(std::string("field '") + field + "' must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        out[it.key()] = require_string(it.value(), field);
}

inline void read_id_list(const nlohmann::json& j, const char* field, std::vector<std::string>& out) {
    if (j.is_null()) return;
    if (!j.is_array()) throw std::runtime_error(std::string("field '") + field + "' must be an array");
    for (const auto& v : j) out.push_back(require_string(v, field));
}

}  // namespace detail

// Parses one dump line. Throws std::runtime_error on malformed input.
inline RawEntityRecord parse_dump_line(std::string_view line) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) throw std::runtime_error("not a well-formed record");

    RawEntityRecord rec;
    if (!j.contains("id")) throw std::runtime_error("missing field 'id'");
    rec.id = detail::require_string(j.at("id"), "id");
    if (rec.id.empty()) throw std::runtime_error("field 'id' is empty");

    if (j.contains("labels")) detail::read_lang_map(j.at("labels"), "labels", rec.labels);
    if (j.contains("descriptions"))
        detail::read_lang_map(j.at("descriptions"), "descriptions", rec.descriptions);
    if (j.contains("aliases")) {
        const auto& a = j.at("aliases");
        if (!a.is_null()) {
            if (!a.is_object()) throw std::runtime_error("field 'aliases' must be an object");
            for (auto it = a.begin(); it != a.end(); ++it)
                detail::read_id_list(it.value(), "aliases", rec.aliases[it.key()]);
        }
    }
    if (j.contains("instance_of")) detail::read_id_list(j.at("instance_of"), "instance_of", rec.instance_of);
    if (j.contains("subclass_of")) detail::read_id_list(j.at("subclass_of"), "subclass_of", rec.subclass_of);
    return rec;
}

struct DumpStats {
    std::uint64_t lines = 0;
    std::uint64_t records = 0;
    std::uint64_t malformed = 0;
};

// Lazy reader over a line-delimited dump. Malformed lines are reported to the
// diagnostic handler, counted, and skipped; next() yields only parsed records.
class DumpReader {
  public:
    using Diagnostic = std::function<void(std::uint64_t line_no, const std::string& error)>;

    explicit DumpReader(std::istream& in, Diagnostic diag = {}) : in_(in), diag_(std::move(diag)) {
        if (!in_.good()) throw std::runtime_error("unreadable input stream");
    }

    std::optional<RawEntityRecord> next() {
        std::string line;
        while (std::getline(in_, line)) {
            ++stats_.lines;
            try {
                RawEntityRecord rec = parse_dump_line(line);
                ++stats_.records;
                return rec;
            } catch (const std::exception& e) {
                ++stats_.malformed;
                if (diag_) diag_(stats_.lines, e.what());
            }
        }
        if (in_.bad()) throw std::runtime_error("unreadable input stream");
        return std::nullopt;
    }

    const DumpStats& stats() const { return stats_; }

  private:
    std::istream& in_;
    Diagnostic diag_;
    DumpStats stats_;
};

// Keep/Drop decision. Checks run in a fixed order; the first hit wins:
//   (a) no English title, (b) instance/subclass of an administrative class,
//   (c) title starts with "Category:", "Template:" or "Project:".
// Returns the matched rule, or nullopt to keep the record.
inline std::optional<FilterRule> filter_entity(const RawEntityRecord& record,
                                               const std::set<std::string>& admin_ids = default_admin_ids()) {
    std::string title;
    if (auto it = record.labels.find("en"); it != record.labels.end())
        title = std::string(trim(it->second));
    if (title.empty())
        return FilterRule{FilterRule::Kind::no_english_title, ""};

    for (const auto& id : record.instance_of)
        if (admin_ids.count(id)) return FilterRule{FilterRule::Kind::admin_type, id};
    for (const auto& id : record.subclass_of)
        if (admin_ids.count(id)) return FilterRule{FilterRule::Kind::admin_type, id};

    for (const char* prefix : {"Category:", "Template:", "Project:"})
        if (title.rfind(prefix, 0) == 0) return FilterRule{FilterRule::Kind::title_prefix, prefix};

    return std::nullopt;
}

// Resolves an entity id to its English label, for category derivation.
using LabelResolver = std::function<std::optional<std::string>(const std::string& id)>;

// Builds the normalized entity for a record that passed filter_entity.
// The category is the English label of the first instance_of target when the
// resolver can supply one.
inline Entity normalize_entity(const RawEntityRecord& record, const LabelResolver& resolve_label = {}) {
    Entity e;
    e.id = record.id;

    if (auto it = record.labels.find("en"); it != record.labels.end())
        e.title = std::string(trim(it->second));
    if (e.title.empty())
        throw std::invalid_argument("normalize_entity: record '" + record.id + "' has no English title");

    if (auto it = record.aliases.find("en"); it != record.aliases.end()) {
        for (const auto& raw : it->second) {
            std::string alias(trim(raw));
            if (alias.empty()) continue;
            bool seen = false;
            for (const auto& prev : e.aliases)
                if (prev == alias) { seen = true; break; }
            if (!seen) e.aliases.push_back(std::move(alias));
        }
    }

    if (auto it = record.descriptions.find("en"); it != record.descriptions.end()) {
        std::string desc(trim(it->second));
        if (!desc.empty()) e.description = std::move(desc);
    }

    if (resolve_label && !record.instance_of.empty()) {
        if (auto label = resolve_label(record.instance_of.front())) {
            std::string cat(trim(*label));
            if (!cat.empty()) e.category = std::move(cat);
        }
    }

    e.title_and_aliases.push_back(e.title);
    for (const auto& alias : e.aliases)
        if (alias != e.title) e.title_and_aliases.push_back(alias);
    return e;
}

inline void to_json(nlohmann::json& j, const Entity& e) {
    j = nlohmann::json{{"id", e.id}, {"title", e.title}};
    if (!e.aliases.empty()) j["aliases"] = e.aliases;
    if (e.description) j["description"] = *e.description;
    if (e.category) j["category"] = *e.category;
}

inline void from_json(const nlohmann::json& j, Entity& e) {
    e = Entity{};
    e.id = j.at("id").get<std::string>();
    e.title = j.at("title").get<std::string>();
    if (e.id.empty() || e.title.empty()) throw std::runtime_error("entity id and title must be non-empty");
    if (j.contains("aliases")) e.aliases = j.at("aliases").get<std::vector<std::string>>();
    if (j.contains("description")) e.description = j.at("description").get<std::string>();
    if (j.contains("category")) e.category = j.at("category").get<std::string>();
    e.title_and_aliases.push_back(e.title);
    for (const auto& alias : e.aliases)
        if (alias != e.title) e.title_and_aliases.push_back(alias);
}

// Normalized entities addressable by id. Insertion order is preserved.
class EntityStore {
  public:
    void add(Entity entity) {
        auto [it, inserted] = by_id_.emplace(entity.id, entities_.size());
        if (!inserted) throw std::runtime_error("duplicate entity id: " + entity.id);
        entities_.push_back(std::move(entity));
    }

    const Entity* find(const std::string& id) const {
        auto it = by_id_.find(id);
        return it == by_id_.end() ? nullptr : &entities_[it->second];
    }

    bool contains(const std::string& id) const { return by_id_.count(id) != 0; }
    std::size_t size() const { return entities_.size(); }
    const std::vector<Entity>& entities() const { return entities_; }

    // Entity-per-line JSON; lines starting with '#' are skipped.
    static EntityStore load_jsonl(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open entity file: " + path.string());
        EntityStore store;
        std::string line;
        std::uint64_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty() || line[0] == '#') continue;
            try {
                store.add(nlohmann::json::parse(line).get<Entity>());
            } catch (const std::exception& e) {
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
            }
        }
        return store;
    }

    void save_jsonl(const std::filesystem::path& path, const std::string& header = {}) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write entity file: " + path.string());
        if (!header.empty()) out << "# " << header << "\n";
        for (const auto& e : entities_) out << nlohmann::json(e).dump() << "\n";
    }

  private:
    std::vector<Entity> entities_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

}  // namespace elink
