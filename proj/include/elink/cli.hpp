#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "elink/config.hpp"
#include "elink/dictionary.hpp"
#include "elink/eval.hpp"
#include "elink/fusion.hpp"
#include "elink/gbt.hpp"
#include "elink/kb.hpp"
#include "elink/profile.hpp"
#include "elink/rerank.hpp"
#include "elink/search_index.hpp"

namespace elink::cli {

// Effective settings for one command run: defaults, overlaid by the config
// file, overlaid by flags. Flags mirror config keys one-to-one
// (dict_k <-> --dict-k and so on).
struct Settings {
    std::string dump, kb, anchors, index, dict, model, profiles, mentions, out, scores, candidates;
    std::string surface, context_left, context_right, profile_title, profile_desc;
    int dict_k = 100;
    int profile_k = 100;
    int hybrid_k = 50;
    int k = 10;
    int gbt_rounds = 100;
    int gbt_depth = 3;
    int gbt_min_split = 2;
    double gbt_learning_rate = 0.1;
    double w_surface = 1.0;
    double w_title = 1.0;
    double w_desc = 1.0;
    double w_exact = 2.0;
    double nil_threshold = 0.5;
    int jobs = 1;
    bool case_insensitive_dict = false;
    std::vector<std::string> strategies{"simple", "dictionary", "profile-title-only",
                                        "profile-full", "hybrid"};
    std::vector<int> recall_ks{1, 10, 50, 100};
    std::vector<std::string> admin_ids;  // empty = built-in default set

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["dump"] = dump;
        j["kb"] = kb;
        j["anchors"] = anchors;
        j["index"] = index;
        j["dict"] = dict;
        j["model"] = model;
        j["profiles"] = profiles;
        j["mentions"] = mentions;
        j["out"] = out;
        j["scores"] = scores;
        j["candidates"] = candidates;
        j["surface"] = surface;
        j["context_left"] = context_left;
        j["context_right"] = context_right;
        j["profile_title"] = profile_title;
        j["profile_desc"] = profile_desc;
        j["dict_k"] = dict_k;
        j["profile_k"] = profile_k;
        j["hybrid_k"] = hybrid_k;
        j["k"] = k;
        j["gbt_rounds"] = gbt_rounds;
        j["gbt_depth"] = gbt_depth;
        j["gbt_min_split"] = gbt_min_split;
        j["gbt_learning_rate"] = gbt_learning_rate;
        j["w_surface"] = w_surface;
        j["w_title"] = w_title;
        j["w_desc"] = w_desc;
        j["w_exact"] = w_exact;
        j["nil_threshold"] = nil_threshold;
        j["jobs"] = jobs;
        j["case_insensitive_dict"] = case_insensitive_dict;
        j["strategies"] = strategies;
        j["recall_ks"] = recall_ks;
        j["admin_ids"] = admin_ids;
        return j;
    }

    std::string provenance() const { return "config=" + to_json().dump(); }

    FusionParams fusion() const {
        FusionParams p;
        p.dict_k = dict_k;
        p.profile_k = profile_k;
        p.hybrid_k = hybrid_k;
        p.weights = {w_surface, w_title, w_desc, w_exact};
        p.dict_case_insensitive = case_insensitive_dict;
        return p;
    }

    GbtConfig gbt() const { return {gbt_rounds, gbt_depth, gbt_min_split, gbt_learning_rate}; }

    std::set<std::string> admin_id_set() const {
        if (admin_ids.empty()) return default_admin_ids();
        return {admin_ids.begin(), admin_ids.end()};
    }
};

namespace detail {

inline void apply_setting(Settings& s, const std::string& key, const ConfigValue& v) {
    auto str = [&](std::string& field) { field = value_as_string(key, v); };
    if (key == "dump") str(s.dump);
    else if (key == "kb") str(s.kb);
    else if (key == "anchors") str(s.anchors);
    else if (key == "index") str(s.index);
    else if (key == "dict") str(s.dict);
    else if (key == "model") str(s.model);
    else if (key == "profiles") str(s.profiles);
    else if (key == "mentions") str(s.mentions);
    else if (key == "out") str(s.out);
    else if (key == "scores") str(s.scores);
    else if (key == "candidates") str(s.candidates);
    else if (key == "surface") str(s.surface);
    else if (key == "context_left") str(s.context_left);
    else if (key == "context_right") str(s.context_right);
    else if (key == "profile_title") str(s.profile_title);
    else if (key == "profile_desc") str(s.profile_desc);
    else if (key == "dict_k") s.dict_k = value_as_int(key, v);
    else if (key == "profile_k") s.profile_k = value_as_int(key, v);
    else if (key == "hybrid_k") s.hybrid_k = value_as_int(key, v);
    else if (key == "k") s.k = value_as_int(key, v);
    else if (key == "gbt_rounds") s.gbt_rounds = value_as_int(key, v);
    else if (key == "gbt_depth") s.gbt_depth = value_as_int(key, v);
    else if (key == "gbt_min_split") s.gbt_min_split = value_as_int(key, v);
    else if (key == "gbt_learning_rate") s.gbt_learning_rate = value_as_double(key, v);
    else if (key == "w_surface") s.w_surface = value_as_double(key, v);
    else if (key == "w_title") s.w_title = value_as_double(key, v);
    else if (key == "w_desc") s.w_desc = value_as_double(key, v);
    else if (key == "w_exact") s.w_exact = value_as_double(key, v);
    else if (key == "nil_threshold") s.nil_threshold = value_as_double(key, v);
    else if (key == "jobs") s.jobs = value_as_int(key, v);
    else if (key == "case_insensitive_dict") s.case_insensitive_dict = value_as_bool(key, v);
    else if (key == "strategies") s.strategies = value_as_string_list(key, v);
    else if (key == "recall_ks") s.recall_ks = value_as_int_list(key, v);
    else if (key == "admin_ids") s.admin_ids = value_as_string_list(key, v);
    else throw ConfigError("unknown config key: " + key);
}

inline void validate(const Settings& s) {
    auto positive = [](const std::string& key, int v) {
        if (v < 1) throw ConfigError(key + ": must be >= 1");
    };
    positive("dict_k", s.dict_k);
    positive("profile_k", s.profile_k);
    positive("hybrid_k", s.hybrid_k);
    positive("k", s.k);
    positive("gbt_rounds", s.gbt_rounds);
    positive("gbt_depth", s.gbt_depth);
    positive("jobs", s.jobs);
    if (s.gbt_min_split < 2) throw ConfigError("gbt_min_split: must be >= 2");
    if (s.gbt_learning_rate <= 0.0) throw ConfigError("gbt_learning_rate: must be > 0");
    for (int k : s.recall_ks) positive("recall_ks", k);
    for (const auto& name : s.strategies) {
        try {
            strategy_from_name(name);
        } catch (const std::exception&) {
            throw ConfigError("strategies: unknown strategy: " + name);
        }
    }
}

inline void require_set(const std::string& key, const std::string& value) {
    if (value.empty()) throw ConfigError(key + ": missing");
}

inline void require_file(const std::string& key, const std::string& path) {
    require_set(key, path);
    if (!std::filesystem::exists(path))
        throw std::runtime_error(key + ": no such file: " + path);
}

inline SearchIndex load_index(const Settings& s) {
    if (!s.index.empty()) {
        require_file("index", s.index);
        return SearchIndex::load(s.index);
    }
    if (!s.kb.empty()) {
        require_file("kb", s.kb);
        auto store = EntityStore::load_jsonl(s.kb);
        return SearchIndex::build(store.entities());
    }
    throw ConfigError("index: missing (give an index snapshot, or kb to build one)");
}

inline Dictionary load_dict(const Settings& s) {
    require_file("dict", s.dict);
    return Dictionary::load(s.dict);
}

// Owns whichever generators the settings enable and exposes them as one
// chain: precomputed profiles first, frequency fallback second.
struct GeneratorStack {
    std::unique_ptr<PrecomputedProfileGenerator> precomputed;
    std::unique_ptr<FrequencyProfileGenerator> frequency;
    std::unique_ptr<ChainProfileGenerator> chain;

    const ProfileGenerator& generator() const { return *chain; }
};

inline GeneratorStack make_generators(const Settings& s, const Dictionary& dict,
                                      const EntityStore& store) {
    GeneratorStack g;
    std::vector<const ProfileGenerator*> chain;
    if (!s.profiles.empty()) {
        require_file("profiles", s.profiles);
        g.precomputed =
            std::make_unique<PrecomputedProfileGenerator>(load_profiles(s.profiles));
        chain.push_back(g.precomputed.get());
    }
    g.frequency = std::make_unique<FrequencyProfileGenerator>(dict, store);
    chain.push_back(g.frequency.get());
    g.chain = std::make_unique<ChainProfileGenerator>(std::move(chain));
    return g;
}

inline std::string format_score(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

// ---- subcommands ----

inline void cmd_ingest(const Settings& s, std::ostream& out, std::ostream& err) {
    require_file("dump", s.dump);
    require_set("out", s.out);
    const auto admin = s.admin_id_set();

    std::ifstream in(s.dump);
    if (!in) throw std::runtime_error("dump: cannot open: " + s.dump);
    DumpReader reader(in, [&](std::uint64_t line_no, const std::string& what) {
        err << s.dump << ":" << line_no << ": skipped: " << what << "\n";
    });
    std::vector<RawEntityRecord> records;
    while (auto rec = reader.next()) records.push_back(std::move(*rec));

    std::map<std::string, std::string> labels;
    for (const auto& rec : records)
        if (auto it = rec.labels.find("en"); it != rec.labels.end()) labels[rec.id] = it->second;
    LabelResolver resolver = [&](const std::string& id) -> std::optional<std::string> {
        auto it = labels.find(id);
        if (it == labels.end()) return std::nullopt;
        return it->second;
    };

    EntityStore store;
    std::map<std::string, std::uint64_t> filtered;
    for (const auto& rec : records) {
        if (auto rule = filter_entity(rec, admin)) {
            ++filtered[to_string(rule->kind)];
            continue;
        }
        store.add(normalize_entity(rec, resolver));
    }
    store.save_jsonl(s.out, s.provenance());

    const auto& stats = reader.stats();
    out << "read " << stats.records << " records (" << stats.malformed << " malformed lines)\n";
    out << "kept " << store.size();
    std::uint64_t dropped = 0;
    for (const auto& [rule, n] : filtered) dropped += n;
    out << ", filtered " << dropped;
    for (const auto& [rule, n] : filtered) out << " " << rule << "=" << n;
    out << "\n";
    out << "wrote " << s.out << "\n";
}

inline void cmd_index(const Settings& s, std::ostream& out, std::ostream&) {
    require_file("kb", s.kb);
    require_set("out", s.out);
    auto store = EntityStore::load_jsonl(s.kb);
    auto index = SearchIndex::build(store.entities());
    index.save(s.out, s.provenance());
    out << "indexed " << index.size() << " entities -> " << s.out << "\n";
}

inline void cmd_build_dict(const Settings& s, std::ostream& out, std::ostream&) {
    require_file("anchors", s.anchors);
    require_set("out", s.out);
    auto records = load_anchor_corpus(s.anchors);
    auto dict = Dictionary::build(records);
    dict.save(s.out, s.provenance());
    out << "dictionary: " << dict.surface_count() << " surfaces from " << records.size()
        << " anchors -> " << s.out << "\n";
}

inline void cmd_train_fusion(const Settings& s, std::ostream& out, std::ostream&) {
    require_file("mentions", s.mentions);
    require_set("out", s.out);
    auto index = load_index(s);
    auto dict = load_dict(s);
    auto mentions = load_mentions(s.mentions);
    auto generators = make_generators(s, dict, index.store());

    auto samples = build_training_samples(mentions, dict, index, generators.generator(), s.fusion());
    int positives = 0;
    for (const auto& sample : samples) positives += sample.label;
    TrainLog log;
    auto model = train_gbt(samples, s.gbt(), &log);
    model.save(s.out, s.provenance());
    out << "trained on " << samples.size() << " samples (" << positives << " positive), loss "
        << format_score(log.losses.front()) << " -> " << format_score(log.losses.back()) << "\n";
    out << "wrote " << s.out << "\n";
}

inline void link_one(const Settings& s, std::ostream& out) {
    auto index = load_index(s);
    auto dict = load_dict(s);
    require_file("model", s.model);
    auto model = GbtModel::load(s.model);
    auto generators = make_generators(s, dict, index.store());

    Mention m{"cli", s.context_left, s.surface, s.context_right, std::nullopt};
    std::optional<EntityProfile> profile;
    if (!s.profile_title.empty() || !s.profile_desc.empty())
        profile = EntityProfile{s.profile_title, s.profile_desc};
    else
        profile = generators.generator().generate(m);

    auto result = hybrid_candidates(m, dict, index, profile, model, s.fusion());
    out << "# " << s.provenance() << "\n";
    if (profile)
        out << "# profile: " << serialize_profile(*profile) << "\n";
    int shown = std::min<int>(s.k, static_cast<int>(result.ranked.items.size()));
    for (int i = 0; i < shown; ++i) {
        const auto& c = result.ranked.items[i];
        const Entity* e = index.store().find(c.id);
        out << (i + 1) << "\t" << c.id << "\t" << format_score(c.score) << "\t"
            << (e ? e->title : "?") << "\n";
    }
    bool linked = !result.ranked.items.empty() &&
                  result.ranked.items.front().score >= s.nil_threshold;
    out << "linked\t" << (linked ? result.ranked.items.front().id : "NIL") << "\n";
}

inline std::map<std::string, std::map<std::string, double>> load_score_file(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("scores: cannot open: " + path);
    std::map<std::string, std::map<std::string, double>> scores;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto fields = split(line, '\t');
        if (fields.size() != 3)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected mention_id<TAB>entity_id<TAB>score");
        try {
            scores[std::string(fields[0])][std::string(fields[1])] =
                std::stod(std::string(fields[2]));
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad score value");
        }
    }
    return scores;
}

struct CandidateFileEntry {
    Mention mention;
    std::vector<ScoredEntity> candidates;
};

inline std::vector<CandidateFileEntry> load_candidate_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("candidates: cannot open: " + path);
    std::vector<CandidateFileEntry> entries;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        try {
            auto j = nlohmann::json::parse(line);
            CandidateFileEntry entry;
            entry.mention = j.at("mention").get<Mention>();
            for (const auto& c : j.at("candidates"))
                entry.candidates.push_back(
                    {c.at("id").get<std::string>(), c.at("score").get<double>()});
            entries.push_back(std::move(entry));
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return entries;
}

inline void link_batch(const Settings& s, std::ostream& out) {
    require_file("mentions", s.mentions);
    require_set("out", s.out);
    auto index = load_index(s);
    auto dict = load_dict(s);
    require_file("model", s.model);
    auto model = GbtModel::load(s.model);
    auto generators = make_generators(s, dict, index.store());
    auto mentions = load_mentions(s.mentions);

    std::ofstream file(s.out);
    if (!file) throw std::runtime_error("out: cannot write: " + s.out);
    file << "# " << s.provenance() << "\n";

    if (!s.scores.empty()) {
        // Rescore with externally computed scores and emit decisions.
        auto scores = load_score_file(s.scores);
        for (const auto& m : mentions) {
            auto result = hybrid_candidates(m, dict, index, generators.generator(), model,
                                            s.fusion());
            auto it = scores.find(m.id);
            Scorer scorer = [&](const Mention&, const std::string& id, int) {
                if (it == scores.end()) return 0.0;
                auto sit = it->second.find(id);
                return sit == it->second.end() ? 0.0 : sit->second;
            };
            auto decision = rerank(m, result.ranked, scorer, s.nil_threshold);
            double top = decision.candidates.empty() ? 0.0 : decision.candidates.front().score;
            file << m.id << "\t" << decision.linked.value_or("NIL") << "\t"
                 << elink::detail::fmt_double(top) << "\n";
        }
        out << "wrote " << mentions.size() << " decisions -> " << s.out << "\n";
        return;
    }

    for (const auto& m : mentions) {
        auto result = hybrid_candidates(m, dict, index, generators.generator(), model, s.fusion());
        nlohmann::json j;
        j["mention"] = m;
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& c : result.ranked.items) arr.push_back({{"id", c.id}, {"score", c.score}});
        j["candidates"] = arr;
        file << j.dump() << "\n";
    }
    out << "wrote candidates for " << mentions.size() << " mentions -> " << s.out << "\n";
}

inline void cmd_link(const Settings& s, std::ostream& out, std::ostream&) {
    if (!s.surface.empty()) {
        link_one(s, out);
    } else if (!s.mentions.empty()) {
        link_batch(s, out);
    } else {
        throw ConfigError("surface: missing (or mentions for batch mode)");
    }
}

inline void cmd_eval(const Settings& s, std::ostream& out, std::ostream& err) {
    require_file("mentions", s.mentions);
    require_set("out", s.out);
    auto index = load_index(s);
    auto dict = load_dict(s);
    auto mentions = load_mentions(s.mentions);
    auto generators = make_generators(s, dict, index.store());

    ExperimentOptions opt;
    opt.strategies.clear();
    for (const auto& name : s.strategies) opt.strategies.push_back(strategy_from_name(name));
    opt.recall_ks = s.recall_ks;
    opt.fusion = s.fusion();
    opt.nil_threshold = s.nil_threshold;
    opt.jobs = s.jobs;

    std::optional<GbtModel> model;
    bool wants_hybrid = std::find(opt.strategies.begin(), opt.strategies.end(),
                                  Strategy::hybrid) != opt.strategies.end();
    if (wants_hybrid) {
        require_file("model", s.model);
        model = GbtModel::load(s.model);
    }

    ExperimentInputs in;
    in.index = &index;
    in.dict = &dict;
    in.model = model ? &*model : nullptr;
    in.generator = &generators.generator();
    in.mentions = &mentions;

    auto report = run_experiment(in, opt);
    report.effective_config = s.to_json();
    report.save(s.out);
    out << report.table();
    err << "elapsed " << format_score(report.elapsed_seconds) << "s for " << mentions.size()
        << " mentions\n";
}

inline void cmd_export_seq2seq(const Settings& s, std::ostream& out, std::ostream&) {
    require_file("mentions", s.mentions);
    require_set("out", s.out);
    auto index = load_index(s);
    auto mentions = load_mentions(s.mentions);

    std::ofstream file(s.out);
    if (!file) throw std::runtime_error("out: cannot write: " + s.out);
    file << "# " << s.provenance() << "\n";
    std::size_t pairs = 0, skipped = 0, max_ctx = 0, total_ctx = 0;
    for (const auto& m : mentions) {
        const Entity* gold = m.gold_entity ? index.store().find(*m.gold_entity) : nullptr;
        if (!gold) {
            ++skipped;
            continue;
        }
        EntityProfile target{gold->title, gold->description.value_or("")};
        file << serialize_mention(m) << "\t" << serialize_profile(target) << "\n";
        std::size_t ctx = m.ctx_left.size() + m.ctx_right.size();
        max_ctx = std::max(max_ctx, ctx);
        total_ctx += ctx;
        ++pairs;
    }
    out << "wrote " << pairs << " pairs (" << skipped << " without a gold entity in the KB) -> "
        << s.out << "\n";
    if (pairs > 0)
        out << "context chars: max " << max_ctx << ", mean "
            << format_score(static_cast<double>(total_ctx) / static_cast<double>(pairs)) << "\n";
}

inline void cmd_export_rerank(const Settings& s, std::ostream& out, std::ostream&) {
    require_file("candidates", s.candidates);
    require_set("out", s.out);
    auto index = load_index(s);
    auto entries = load_candidate_file(s.candidates);

    std::ofstream file(s.out);
    if (!file) throw std::runtime_error("out: cannot write: " + s.out);
    file << "# " << s.provenance() << "\n";
    std::size_t written = 0, skipped = 0;
    for (const auto& entry : entries) {
        for (std::size_t i = 0; i < entry.candidates.size(); ++i) {
            const Entity* e = index.store().find(entry.candidates[i].id);
            if (!e) {
                ++skipped;
                continue;
            }
            auto rep = serialize_candidate(entry.mention, *e, static_cast<int>(i) + 1);
            file << rep.mention_id << "\t" << rep.entity_id << "\t" << rep.text << "\n";
            ++written;
        }
    }
    out << "wrote " << written << " representations (" << skipped
        << " candidates not in the KB) -> " << s.out << "\n";
}

inline void cmd_query(const Settings& s, std::ostream& out, std::ostream&) {
    require_set("surface", s.surface);
    auto index = load_index(s);
    RankedCandidates result;
    if (!s.profile_title.empty() || !s.profile_desc.empty()) {
        ProfileQuery q{s.surface, s.profile_title, s.profile_desc,
                       {s.w_surface, s.w_title, s.w_desc, s.w_exact}};
        result = index.profile_query(q, s.k);
    } else {
        result = index.simple_query(s.surface, s.k, {s.w_surface, s.w_title, s.w_desc, s.w_exact});
    }
    out << "# " << s.provenance() << "\n";
    for (std::size_t i = 0; i < result.items.size(); ++i) {
        const auto& c = result.items[i];
        const Entity* e = index.store().find(c.id);
        out << (i + 1) << "\t" << c.id << "\t" << format_score(c.score) << "\t"
            << (e ? e->title : "?") << "\n";
    }
}

}  // namespace detail

// Parses argv (program name excluded), runs one subcommand, and reports
// through the given streams. Exit codes: 0 success, 1 invalid config or
// runtime failure, 2 usage errors (unknown subcommand or flag).
inline int dispatch(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"entity linking: candidate retrieval, fusion and NIL thresholding", "elink"};
    app.require_subcommand(1);

    std::map<std::string, ConfigValue> overrides;
    std::string config_path;

    auto bind = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "declarative config file (key = value lines)");
        auto opt_str = [&overrides, sub](const std::string& flag, const std::string& key,
                                         const std::string& desc) {
            sub->add_option_function<std::string>(
                flag,
                [&overrides, key](const std::string& v) {
                    ConfigValue cv;
                    cv.kind = ConfigValue::Kind::string;
                    cv.str = v;
                    overrides[key] = cv;
                },
                desc);
        };
        auto opt_int = [&overrides, sub](const std::string& flag, const std::string& key,
                                         const std::string& desc) {
            sub->add_option_function<int>(
                flag,
                [&overrides, key](int v) {
                    ConfigValue cv;
                    cv.kind = ConfigValue::Kind::number;
                    cv.num = v;
                    overrides[key] = cv;
                },
                desc);
        };
        auto opt_double = [&overrides, sub](const std::string& flag, const std::string& key,
                                            const std::string& desc) {
            sub->add_option_function<double>(
                flag,
                [&overrides, key](double v) {
                    ConfigValue cv;
                    cv.kind = ConfigValue::Kind::number;
                    cv.num = v;
                    overrides[key] = cv;
                },
                desc);
        };
        auto opt_flag = [&overrides, sub](const std::string& flag, const std::string& key,
                                          const std::string& desc) {
            sub->add_flag_function(
                flag,
                [&overrides, key](std::int64_t) {
                    ConfigValue cv;
                    cv.kind = ConfigValue::Kind::boolean;
                    cv.flag = true;
                    overrides[key] = cv;
                },
                desc);
        };
        auto opt_str_list = [&overrides, sub](const std::string& flag, const std::string& key,
                                              const std::string& desc) {
            sub->add_option_function<std::vector<std::string>>(
                     flag,
                     [&overrides, key](const std::vector<std::string>& vs) {
                         ConfigValue cv;
                         cv.kind = ConfigValue::Kind::array;
                         for (const auto& v : vs) {
                             ConfigValue item;
                             item.kind = ConfigValue::Kind::string;
                             item.str = v;
                             cv.items.push_back(item);
                         }
                         overrides[key] = cv;
                     },
                     desc)
                ->delimiter(',');
        };
        auto opt_int_list = [&overrides, sub](const std::string& flag, const std::string& key,
                                              const std::string& desc) {
            sub->add_option_function<std::vector<int>>(
                     flag,
                     [&overrides, key](const std::vector<int>& vs) {
                         ConfigValue cv;
                         cv.kind = ConfigValue::Kind::array;
                         for (int v : vs) {
                             ConfigValue item;
                             item.kind = ConfigValue::Kind::number;
                             item.num = v;
                             cv.items.push_back(item);
                         }
                         overrides[key] = cv;
                     },
                     desc)
                ->delimiter(',');
        };
        return std::make_tuple(opt_str, opt_int, opt_double, opt_flag, opt_str_list, opt_int_list);
    };

    auto resolve = [&]() {
        Settings s;
        if (!config_path.empty()) {
            auto cfg = ConfigFile::load(config_path);
            for (const auto& [key, value] : cfg.values()) detail::apply_setting(s, key, value);
        }
        for (const auto& [key, value] : overrides) detail::apply_setting(s, key, value);
        detail::validate(s);
        return s;
    };

    {
        auto* sub = app.add_subcommand("ingest", "filter and normalize a KB dump");
        auto [str, num, dbl, flg, strs, ints] = bind(sub);
        str("--dump", "dump", "line-delimited KB dump");
        str("--out", "out", "normalized entities output");
        strs("--admin-ids", "admin_ids", "administrative class ids (replaces the default set)");
        sub->callback([&] { detail::cmd_ingest(resolve(), out, err); });
        (void)num; (void)dbl; (void)flg; (void)ints;
    }
    {
        auto* sub = app.add_subcommand("index", "build a search index from normalized entities");
        auto [str, num, dbl, flg, strs, ints] = bind(sub);
        str("--kb", "kb", "normalized entities file");
        str("--out", "out", "index snapshot output");
        sub->callback([&] { detail::cmd_index(resolve(), out, err); });
        (void)num; (void)dbl; (void)flg; (void)strs; (void)ints;
    }
    {
        auto* sub = app.add_subcommand("build-dict", "build the anchor dictionary");
        auto [str, num, dbl, flg, strs, ints] = bind(sub);
        str("--anchors", "anchors", "anchor corpus (surface<TAB>entity_id)");
        str("--out", "out", "dictionary snapshot output");
        sub->callback([&] { detail::cmd_build_dict(resolve(), out, err); });
        (void)num; (void)dbl; (void)flg; (void)strs; (void)ints;
    }
    {
        auto* sub = app.add_subcommand("train-fusion", "train the candidate fusion model");
        auto [str, num, dbl, flg, strs, ints] = bind(sub);
        str("--mentions", "mentions", "training mentions with gold entities");
        str("--kb", "kb", "normalized entities file (alternative to --index)");
        str("--index", "index", "index snapshot");
        str("--dict", "dict", "dictionary snapshot");
        str("--profiles", "profiles", "precomputed profiles (mention_id<TAB>title<TAB>description)");
        str("--out", "out", "model output");
        num("--dict-k", "dict_k", "dictionary candidates per mention");
        num("--profile-k", "profile_k", "profile-query candidates per mention");
        num("--gbt-rounds", "gbt_rounds", "boosting rounds");
        num("--gbt-depth", "gbt_depth", "max tree depth");
        num("--gbt-min-split", "gbt_min_split", "min samples to split a node");
        dbl("--gbt-learning-rate", "gbt_learning_rate", "shrinkage per round");
        dbl("--w-surface", "w_surface", "surface clause weight");
        dbl("--w-title", "w_title", "generated-title clause weight");
        dbl("--w-desc", "w_desc", "generated-description clause weight");
        dbl("--w-exact", "w_exact", "exact-match bonus");
        flg("--case-insensitive-dict", "case_insensitive_dict", "case-insensitive dictionary fallback");
        sub->callback([&] { detail::cmd_train_fusion(resolve(), out, err); });
        (void)strs; (void)ints;
    }
    {
        auto* sub = app.add_subcommand("link", "link one mention or a mention file");
        auto [str, num, dbl, flg, strs, ints] = bind(sub);
        str("--surface", "surface", "mention surface form (one-off mode)");
        str("--context-left", "context_left", "text left of the mention");
        str("--context-right", "context_right", "text right of the mention");
        str("--profile-title", "profile_title", "generated profile title");
        str("--profile-desc", "profile_desc", "generated profile description");
        str("--mentions", "mentions", "mention file (batch mode)");
        str("--kb", "kb", "normalized entities file (alternative to --index)");
        str("--index", "index", "index snapshot");
        str("--dict", "dict", "dictionary snapshot");
        str("--model", "model", "fusion model");
        str("--profiles", "profiles", "precomputed profiles");
        str("--scores", "scores", "external scores (mention_id<TAB>entity_id<TAB>score)");
        str("--out", "out", "batch output path");
        num("-k,--k", "k", "results to show");
        num("--dict-k", "dict_k", "dictionary candidates per mention");
        num("--profile-k", "profile_k", "profile-query candidates per mention");
        num("--hybrid-k", "hybrid_k", "merged candidates to keep");
        dbl("--nil-threshold", "nil_threshold", "NIL decision threshold");
        dbl("--w-surface", "w_surface", "surface clause weight");
        dbl("--w-title", "w_title", "generated-title clause weight");
        dbl("--w-desc", "w_desc", "generated-description clause weight");
        dbl("--w-exact", "w_exact", "exact-match bonus");
        flg("--case-insensitive-dict", "case_insensitive_dict", "case-insensitive dictionary fallback");
        sub->callback([&] { detail::cmd_link(resolve(), out, err); });
        (void)strs; (void)ints;
    }
    {
        auto* sub = app.add_subcommand("eval", "run the strategy-comparison experiment");
        auto [str, num, dbl, flg, strs, ints] = bind(sub);
        str("--mentions", "mentions", "evaluation mentions");
        str("--kb", "kb", "normalized entities file (alternative to --index)");
        str("--index", "index", "index snapshot");
        str("--dict", "dict", "dictionary snapshot");
        str("--model", "model", "fusion model (needed for the hybrid strategy)");
        str("--profiles", "profiles", "precomputed profiles");
        str("--out", "out", "report output path");
        strs("--strategies", "strategies", "strategies to run (comma separated)");
        ints("--recall-ks", "recall_ks", "recall cutoffs (comma separated)");
        num("--jobs", "jobs", "worker threads");
        num("--dict-k", "dict_k", "dictionary candidates per mention");
        num("--profile-k", "profile_k", "profile-query candidates per mention");
        num("--hybrid-k", "hybrid_k", "merged candidates to keep");
        dbl("--nil-threshold", "nil_threshold", "NIL decision threshold");
        dbl("--w-surface", "w_surface", "surface clause weight");
        dbl("--w-title", "w_title", "generated-title clause weight");
        dbl("--w-desc", "w_desc", "generated-description clause weight");
        dbl("--w-exact", "w_exact", "exact-match bonus");
        flg("--case-insensitive-dict", "case_insensitive_dict", "case-insensitive dictionary fallback");
        sub->callback([&] { detail::cmd_eval(resolve(), out, err); });
    }
    {
        auto* sub = app.add_subcommand("export-seq2seq", "export generator training pairs");
        auto [str, num, dbl, flg, strs, ints] = bind(sub);
        str("--mentions", "mentions", "mentions with gold entities");
        str("--kb", "kb", "normalized entities file (alternative to --index)");
        str("--index", "index", "index snapshot");
        str("--out", "out", "training pairs output");
        sub->callback([&] { detail::cmd_export_seq2seq(resolve(), out, err); });
        (void)num; (void)dbl; (void)flg; (void)strs; (void)ints;
    }
    {
        auto* sub = app.add_subcommand("export-rerank", "export reranker input representations");
        auto [str, num, dbl, flg, strs, ints] = bind(sub);
        str("--candidates", "candidates", "candidates file written by link");
        str("--kb", "kb", "normalized entities file (alternative to --index)");
        str("--index", "index", "index snapshot");
        str("--out", "out", "representations output");
        sub->callback([&] { detail::cmd_export_rerank(resolve(), out, err); });
        (void)num; (void)dbl; (void)flg; (void)strs; (void)ints;
    }
    {
        auto* sub = app.add_subcommand("query", "search the index directly");
        auto [str, num, dbl, flg, strs, ints] = bind(sub);
        str("--kb", "kb", "normalized entities file (alternative to --index)");
        str("--index", "index", "index snapshot");
        str("--surface", "surface", "query surface form");
        str("--profile-title", "profile_title", "generated profile title");
        str("--profile-desc", "profile_desc", "generated profile description");
        num("-k,--k", "k", "results to return");
        dbl("--w-surface", "w_surface", "surface clause weight");
        dbl("--w-title", "w_title", "generated-title clause weight");
        dbl("--w-desc", "w_desc", "generated-description clause weight");
        dbl("--w-exact", "w_exact", "exact-match bonus");
        sub->callback([&] { detail::cmd_query(resolve(), out, err); });
        (void)flg; (void)strs; (void)ints;
    }

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
        return 0;
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return 2;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace elink::cli
