#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "elink/dictionary.hpp"
#include "elink/kb.hpp"
#include "elink/text.hpp"

namespace elink {

struct Mention {
    std::string id;
    std::string ctx_left;
    std::string surface;
    std::string ctx_right;
    std::optional<std::string> gold_entity;
};

inline void to_json(nlohmann::json& j, const Mention& m) {
    j = nlohmann::json{{"id", m.id},
                       {"ctx_left", m.ctx_left},
                       {"surface", m.surface},
                       {"ctx_right", m.ctx_right}};
    if (m.gold_entity) j["gold_entity"] = *m.gold_entity;
}

inline void from_json(const nlohmann::json& j, Mention& m) {
    j.at("id").get_to(m.id);
    j.at("ctx_left").get_to(m.ctx_left);
    j.at("surface").get_to(m.surface);
    j.at("ctx_right").get_to(m.ctx_right);
    if (j.contains("gold_entity") && !j.at("gold_entity").is_null())
        m.gold_entity = j.at("gold_entity").get<std::string>();
    else
        m.gold_entity.reset();
    if (m.id.empty()) throw std::invalid_argument("mention with empty id");
}

// Marked single-line form of a mention:
//   [s] {ctx_left} [m] {surface} [/m] {ctx_right} [/s]
// Markers always appear; empty segments are dropped, and the remaining pieces
// are joined by single spaces.
inline std::string serialize_mention(const Mention& m) {
    std::vector<std::string> parts;
    parts.push_back("[s]");
    if (!m.ctx_left.empty()) parts.push_back(m.ctx_left);
    parts.push_back("[m]");
    if (!m.surface.empty()) parts.push_back(m.surface);
    parts.push_back("[/m]");
    if (!m.ctx_right.empty()) parts.push_back(m.ctx_right);
    parts.push_back("[/s]");
    return join(parts, " ");
}

// Inverse of serialize_mention for well-formed inputs. Round-trips whenever
// the original segments had no leading/trailing/doubled spaces and contained
// no marker tokens. The parsed mention has empty id and no gold entity.
inline Mention parse_mention(const std::string& text) {
    auto find_marker = [&](const std::string& marker, std::size_t from) {
        auto pos = text.find(marker, from);
        if (pos == std::string::npos)
            throw std::invalid_argument("serialized mention missing " + marker);
        return pos;
    };
    std::size_t s_open = find_marker("[s]", 0);
    std::size_t m_open = find_marker("[m]", s_open + 3);
    std::size_t m_close = find_marker("[/m]", m_open + 3);
    std::size_t s_close = find_marker("[/s]", m_close + 4);

    auto slice = [&](std::size_t begin, std::size_t end) {
        return std::string(trim(text.substr(begin, end - begin)));
    };
    Mention m;
    m.ctx_left = slice(s_open + 3, m_open);
    m.surface = slice(m_open + 3, m_close);
    m.ctx_right = slice(m_close + 4, s_close);
    return m;
}

inline std::vector<Mention> load_mentions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open mentions: " + path.string());
    std::vector<Mention> mentions;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        try {
            mentions.push_back(nlohmann::json::parse(line).get<Mention>());
        } catch (const std::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return mentions;
}

inline void save_mentions(const std::vector<Mention>& mentions, const std::filesystem::path& path,
                          const std::string& header = {}) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write mentions: " + path.string());
    if (!header.empty()) out << "# " << header << "\n";
    for (const auto& m : mentions) out << nlohmann::json(m).dump() << "\n";
}

// A generated entity profile for a mention: the title the mention most likely
// refers to plus a one-line description, both free text.
struct EntityProfile {
    std::string title;
    std::string description;
};

// `{title} [SEP] {description}`; an empty description keeps the separator so
// the form parses back unambiguously.
inline std::string serialize_profile(const EntityProfile& p) {
    return p.title + " [SEP] " + p.description;
}

inline EntityProfile parse_profile(const std::string& text) {
    auto pos = text.find(" [SEP] ");
    if (pos == std::string::npos) throw std::invalid_argument("profile missing [SEP]");
    return {text.substr(0, pos), text.substr(pos + 7)};
}

namespace detail {
inline std::string sanitize_tsv(std::string s) {
    for (auto& c : s)
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    return s;
}
}  // namespace detail

// Profiles on disk: `mention_id<TAB>title<TAB>description`, one per line.
// Tabs and newlines inside fields are flattened to spaces on save.
inline void save_profiles(const std::vector<std::pair<std::string, EntityProfile>>& profiles,
                          const std::filesystem::path& path, const std::string& header = {}) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write profiles: " + path.string());
    if (!header.empty()) out << "# " << header << "\n";
    for (const auto& [mention_id, p] : profiles) {
        out << detail::sanitize_tsv(mention_id) << "\t" << detail::sanitize_tsv(p.title) << "\t"
            << detail::sanitize_tsv(p.description) << "\n";
    }
}

inline std::vector<std::pair<std::string, EntityProfile>> load_profiles(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open profiles: " + path.string());
    std::vector<std::pair<std::string, EntityProfile>> profiles;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto fields = split(line, '\t');
        if (fields.size() != 3)
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": expected 3 tab-separated fields, got " +
                                     std::to_string(fields.size()));
        profiles.emplace_back(std::string(fields[0]),
                              EntityProfile{std::string(fields[1]), std::string(fields[2])});
    }
    return profiles;
}

// Produces an entity profile for a mention, or nothing if the generator has
// no opinion. The expensive generator in the original pipeline is a seq2seq
// model; here the interface stays pluggable and the bundled implementations
// cover precomputed outputs and a cheap frequency fallback.
class ProfileGenerator {
  public:
    virtual ~ProfileGenerator() = default;
    virtual std::optional<EntityProfile> generate(const Mention& mention) const = 0;
};

// Replays profiles precomputed elsewhere (e.g. by a trained generation
// model), keyed by mention id.
class PrecomputedProfileGenerator : public ProfileGenerator {
  public:
    explicit PrecomputedProfileGenerator(
        const std::vector<std::pair<std::string, EntityProfile>>& profiles) {
        for (const auto& [id, p] : profiles) by_mention_.emplace(id, p);
    }

    static PrecomputedProfileGenerator from_file(const std::filesystem::path& path) {
        return PrecomputedProfileGenerator(load_profiles(path));
    }

    std::optional<EntityProfile> generate(const Mention& mention) const override {
        auto it = by_mention_.find(mention.id);
        if (it == by_mention_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t size() const { return by_mention_.size(); }

  private:
    std::unordered_map<std::string, EntityProfile> by_mention_;
};

// Context-free fallback: takes the mention surface's most frequent dictionary
// sense that exists in the store and reuses that entity's title and
// description as the profile.
class FrequencyProfileGenerator : public ProfileGenerator {
  public:
    FrequencyProfileGenerator(const Dictionary& dict, const EntityStore& store)
        : dict_(dict), store_(store) {}

    std::optional<EntityProfile> generate(const Mention& mention) const override {
        for (const auto& entry : dict_.lookup(mention.surface)) {
            const Entity* e = store_.find(entry.entity_id);
            if (e) return EntityProfile{e->title, e->description.value_or("")};
        }
        return std::nullopt;
    }

  private:
    const Dictionary& dict_;
    const EntityStore& store_;
};

// First generator with an answer wins.
class ChainProfileGenerator : public ProfileGenerator {
  public:
    explicit ChainProfileGenerator(std::vector<const ProfileGenerator*> chain)
        : chain_(std::move(chain)) {}

    std::optional<EntityProfile> generate(const Mention& mention) const override {
        for (const auto* g : chain_) {
            auto p = g->generate(mention);
            if (p) return p;
        }
        return std::nullopt;
    }

  private:
    std::vector<const ProfileGenerator*> chain_;
};

}  // namespace elink
