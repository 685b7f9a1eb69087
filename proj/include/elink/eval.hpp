#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "elink/candidates.hpp"
#include "elink/dictionary.hpp"
#include "elink/fusion.hpp"
#include "elink/gbt.hpp"
#include "elink/profile.hpp"
#include "elink/search_index.hpp"

namespace elink {

enum class Strategy { simple, dictionary, profile_title_only, profile_full, hybrid };

inline const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::simple: return "simple";
        case Strategy::dictionary: return "dictionary";
        case Strategy::profile_title_only: return "profile-title-only";
        case Strategy::profile_full: return "profile-full";
        case Strategy::hybrid: return "hybrid";
    }
    return "?";
}

inline Strategy strategy_from_name(const std::string& name) {
    if (name == "simple") return Strategy::simple;
    if (name == "dictionary") return Strategy::dictionary;
    if (name == "profile-title-only") return Strategy::profile_title_only;
    if (name == "profile-full") return Strategy::profile_full;
    if (name == "hybrid") return Strategy::hybrid;
    throw std::invalid_argument("unknown strategy: " + name);
}

// Fraction of mentions whose gold entity appears in the top k of its result
// list. Mentions whose gold is missing from the KB (or unannotated) are
// excluded from the denominator: no retrieval can reach them, so they bound
// the reranker separately.
inline double recall_at_k(const std::vector<RankedCandidates>& results,
                          const std::vector<std::optional<std::string>>& golds,
                          const EntityStore& store, int k) {
    require_positive_k(k);
    if (results.size() != golds.size())
        throw std::invalid_argument("recall_at_k: results/golds size mismatch");
    int eligible = 0, hit = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (!golds[i] || !store.find(*golds[i])) continue;
        ++eligible;
        int rank = results[i].rank_of(*golds[i]);
        if (rank > 0 && rank <= k) ++hit;
    }
    if (eligible == 0) throw std::invalid_argument("recall_at_k: no mentions with gold in the KB");
    return static_cast<double>(hit) / static_cast<double>(eligible);
}

// End-task accuracy over all mentions: a prediction is correct when it names
// the gold entity, or when it says NIL and the gold is genuinely absent from
// the KB (or the mention has no gold).
inline double accuracy(const std::vector<std::optional<std::string>>& linked,
                       const std::vector<std::optional<std::string>>& golds,
                       const EntityStore& store) {
    if (linked.size() != golds.size())
        throw std::invalid_argument("accuracy: linked/golds size mismatch");
    if (linked.empty()) return 0.0;
    int correct = 0;
    for (std::size_t i = 0; i < linked.size(); ++i) {
        bool gold_in_kb = golds[i] && store.find(*golds[i]);
        if (linked[i]) {
            if (gold_in_kb && *linked[i] == *golds[i]) ++correct;
        } else {
            if (!gold_in_kb) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(linked.size());
}

struct NilMetrics {
    double precision = 1.0;  // vacuously 1 when nothing was predicted NIL
    double recall = 1.0;     // vacuously 1 when no mention is truly NIL
    int predicted = 0;
    int actual = 0;
};

inline NilMetrics nil_metrics(const std::vector<std::optional<std::string>>& linked,
                              const std::vector<std::optional<std::string>>& golds,
                              const EntityStore& store) {
    if (linked.size() != golds.size())
        throw std::invalid_argument("nil_metrics: linked/golds size mismatch");
    int predicted = 0, actual = 0, both = 0;
    for (std::size_t i = 0; i < linked.size(); ++i) {
        bool is_nil_true = !(golds[i] && store.find(*golds[i]));
        bool is_nil_pred = !linked[i];
        if (is_nil_pred) ++predicted;
        if (is_nil_true) ++actual;
        if (is_nil_pred && is_nil_true) ++both;
    }
    NilMetrics m;
    m.predicted = predicted;
    m.actual = actual;
    if (predicted > 0) m.precision = static_cast<double>(both) / predicted;
    if (actual > 0) m.recall = static_cast<double>(both) / actual;
    return m;
}

struct StrategyMetrics {
    std::map<int, double> recall_at;  // k -> recall
};

struct LinkingMetrics {
    double accuracy = 0.0;
    NilMetrics nil;
};

struct MetricsReport {
    int mentions = 0;
    int gold_in_kb = 0;
    int gold_absent = 0;
    std::map<std::string, StrategyMetrics> strategies;
    std::optional<LinkingMetrics> linking;  // present when the hybrid path ran
    nlohmann::json effective_config = nlohmann::json::object();
    double elapsed_seconds = 0.0;  // stderr only; kept out of the report file

    // Deterministic: nlohmann objects serialize with sorted keys, and every
    // value is a pure function of the inputs. Runtime stats stay out.
    nlohmann::json to_json() const {
        nlohmann::json j;
        j["config"] = effective_config;
        j["counts"] = {{"mentions", mentions}, {"gold_in_kb", gold_in_kb}, {"gold_absent", gold_absent}};
        nlohmann::json strat = nlohmann::json::object();
        for (const auto& [name, m] : strategies) {
            nlohmann::json recall = nlohmann::json::object();
            for (const auto& [k, v] : m.recall_at) recall[std::to_string(k)] = v;
            strat[name] = {{"recall", recall}};
        }
        j["strategies"] = strat;
        if (linking) {
            j["linking"] = {{"accuracy", linking->accuracy},
                            {"nil_precision", linking->nil.precision},
                            {"nil_recall", linking->nil.recall},
                            {"nil_predicted", linking->nil.predicted},
                            {"nil_actual", linking->nil.actual}};
        }
        return j;
    }

    void save(const std::filesystem::path& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write report: " + path.string());
        out << to_json().dump(2) << "\n";
    }

    std::string table() const {
        std::ostringstream out;
        std::vector<int> ks;
        for (const auto& [name, m] : strategies)
            for (const auto& [k, v] : m.recall_at)
                if (std::find(ks.begin(), ks.end(), k) == ks.end()) ks.push_back(k);
        std::sort(ks.begin(), ks.end());

        out << "mentions " << mentions << " (gold in KB " << gold_in_kb << ", absent "
            << gold_absent << ")\n";
        out << "strategy";
        for (int k : ks) out << "\trecall@" << k;
        out << "\n";
        out.setf(std::ios::fixed);
        out.precision(4);
        for (const auto& [name, m] : strategies) {
            out << name;
            for (int k : ks) {
                auto it = m.recall_at.find(k);
                out << "\t";
                if (it != m.recall_at.end())
                    out << it->second;
                else
                    out << "-";
            }
            out << "\n";
        }
        if (linking) {
            out << "accuracy\t" << linking->accuracy << "\n";
            out << "nil_precision\t" << linking->nil.precision << " (" << linking->nil.predicted
                << " predicted)\n";
            out << "nil_recall\t" << linking->nil.recall << " (" << linking->nil.actual
                << " actual)\n";
        }
        return out.str();
    }
};

struct ExperimentOptions {
    std::vector<Strategy> strategies{Strategy::simple, Strategy::dictionary,
                                     Strategy::profile_title_only, Strategy::profile_full,
                                     Strategy::hybrid};
    std::vector<int> recall_ks{1, 10, 50, 100};
    FusionParams fusion;
    double nil_threshold = 0.5;
    int jobs = 1;
};

struct ExperimentInputs {
    const SearchIndex* index = nullptr;
    const Dictionary* dict = nullptr;
    const GbtModel* model = nullptr;              // required for hybrid
    const ProfileGenerator* generator = nullptr;  // required for profile/hybrid strategies
    const std::vector<Mention>* mentions = nullptr;
};

namespace detail {

struct MentionOutcome {
    std::map<std::string, int> gold_rank;  // strategy name -> rank of gold (0 = missed)
    std::optional<std::string> linked;     // hybrid decision, when hybrid ran
};

inline RankedCandidates strategy_candidates(Strategy s, const Mention& m,
                                            const ExperimentInputs& in,
                                            const std::optional<EntityProfile>& profile,
                                            const ExperimentOptions& opt) {
    switch (s) {
        case Strategy::simple:
            return in.index->simple_query(m.surface, opt.fusion.profile_k, opt.fusion.weights);
        case Strategy::dictionary:
            return in.dict->candidates(m.surface, opt.fusion.dict_k,
                                       opt.fusion.dict_case_insensitive);
        case Strategy::profile_title_only: {
            if (!profile) return {Source::profile, {}};
            EntityProfile title_only{profile->title, ""};
            return detail::profile_list_for(*in.index, m, title_only, opt.fusion);
        }
        case Strategy::profile_full:
            return detail::profile_list_for(*in.index, m, profile, opt.fusion);
        case Strategy::hybrid: break;  // handled by the caller
    }
    return {Source::hybrid, {}};
}

}  // namespace detail

// Runs every requested strategy over the same mentions and aggregates one
// report. Mentions are evaluated independently (optionally in parallel);
// aggregation walks them in input order, so the report does not depend on
// scheduling.
inline MetricsReport run_experiment(const ExperimentInputs& in, const ExperimentOptions& opt) {
    if (!in.index || !in.dict || !in.mentions)
        throw std::invalid_argument("run_experiment: index, dictionary and mentions are required");
    bool wants_hybrid =
        std::find(opt.strategies.begin(), opt.strategies.end(), Strategy::hybrid) !=
        opt.strategies.end();
    if (wants_hybrid && !in.model)
        throw std::invalid_argument("run_experiment: hybrid strategy requires a fusion model");
    if (in.mentions->empty()) throw std::invalid_argument("run_experiment: no mentions");

    const auto& mentions = *in.mentions;
    const auto started = std::chrono::steady_clock::now();

    std::vector<detail::MentionOutcome> outcomes(mentions.size());
    auto evaluate_one = [&](std::size_t i) {
        const Mention& m = mentions[i];
        std::optional<EntityProfile> profile;
        if (in.generator) profile = in.generator->generate(m);
        detail::MentionOutcome& out = outcomes[i];
        for (Strategy s : opt.strategies) {
            if (s == Strategy::hybrid) {
                auto result = hybrid_candidates(m, *in.dict, *in.index, profile, *in.model,
                                                opt.fusion);
                if (m.gold_entity)
                    out.gold_rank[to_string(s)] = result.ranked.rank_of(*m.gold_entity);
                if (!result.ranked.items.empty() &&
                    result.ranked.items.front().score >= opt.nil_threshold)
                    out.linked = result.ranked.items.front().id;
            } else {
                auto result = detail::strategy_candidates(s, m, in, profile, opt);
                if (m.gold_entity) out.gold_rank[to_string(s)] = result.rank_of(*m.gold_entity);
            }
        }
    };

    int jobs = std::max(1, opt.jobs);
    if (jobs == 1 || mentions.size() < 2) {
        for (std::size_t i = 0; i < mentions.size(); ++i) evaluate_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (std::size_t i = next.fetch_add(1); i < mentions.size(); i = next.fetch_add(1))
                evaluate_one(i);
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    MetricsReport report;
    report.mentions = static_cast<int>(mentions.size());
    std::vector<std::optional<std::string>> golds(mentions.size());
    for (std::size_t i = 0; i < mentions.size(); ++i) {
        golds[i] = mentions[i].gold_entity;
        if (golds[i] && in.index->store().find(*golds[i]))
            ++report.gold_in_kb;
        else
            ++report.gold_absent;
    }
    if (report.gold_in_kb == 0)
        throw std::invalid_argument("run_experiment: no mention has its gold entity in the KB");

    for (Strategy s : opt.strategies) {
        StrategyMetrics metrics;
        const std::string name = to_string(s);
        for (int k : opt.recall_ks) {
            int hit = 0;
            for (std::size_t i = 0; i < mentions.size(); ++i) {
                if (!golds[i] || !in.index->store().find(*golds[i])) continue;
                auto it = outcomes[i].gold_rank.find(name);
                int rank = it == outcomes[i].gold_rank.end() ? 0 : it->second;
                if (rank > 0 && rank <= k) ++hit;
            }
            metrics.recall_at[k] = static_cast<double>(hit) / report.gold_in_kb;
        }
        report.strategies[name] = std::move(metrics);
    }

    if (wants_hybrid) {
        std::vector<std::optional<std::string>> linked(mentions.size());
        for (std::size_t i = 0; i < mentions.size(); ++i) linked[i] = outcomes[i].linked;
        LinkingMetrics lm;
        lm.accuracy = accuracy(linked, golds, in.index->store());
        lm.nil = nil_metrics(linked, golds, in.index->store());
        report.linking = lm;
    }

    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

}  // namespace elink
