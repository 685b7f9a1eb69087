#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "elink/features.hpp"

namespace elink {

struct GbtConfig {
    int rounds = 100;
    int max_depth = 3;
    int min_samples_split = 2;
    double learning_rate = 0.1;
};

struct GbtSample {
    FeatureVector features;
    int label = 0;  // 1 = gold entity, 0 = other candidate
};

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

namespace detail {
inline double softplus(double x) {
    return (x > 0.0 ? x : 0.0) + std::log1p(std::exp(-std::abs(x)));
}

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
}  // namespace detail

// Flat node array: internal nodes carry (feature, threshold, children), leaves
// carry the output value. Leaf values are stored with the learning rate
// already applied.
struct TreeNode {
    bool is_leaf = true;
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;

    double predict(const std::array<double, FeatureVector::count>& x) const {
        int i = 0;
        while (!nodes[i].is_leaf) i = x[nodes[i].feature] < nodes[i].threshold ? nodes[i].left : nodes[i].right;
        return nodes[i].value;
    }
};

// Additive logistic-loss ensemble. raw_score is the log-odds margin;
// score passes it through the sigmoid.
class GbtModel {
  public:
    double base_score = 0.0;
    double learning_rate = 0.1;
    std::vector<RegressionTree> trees;

    double raw_score(const FeatureVector& f) const {
        auto x = f.to_array();
        double s = base_score;
        for (const auto& t : trees) s += t.predict(x);
        return s;
    }

    double score(const FeatureVector& f) const { return sigmoid(raw_score(f)); }

    // Human-diffable tree dump; doubles printed with %.17g so they round-trip.
    void save(const std::filesystem::path& path, const std::string& header = {}) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write model: " + path.string());
        out << "elink.gbt 1\n";
        if (!header.empty()) out << "# " << header << "\n";
        out << "learning_rate " << detail::fmt_double(learning_rate) << "\n";
        out << "base_score " << detail::fmt_double(base_score) << "\n";
        out << "features";
        for (const auto& name : FeatureVector::names()) out << " " << name;
        out << "\n";
        out << "trees " << trees.size() << "\n";
        for (std::size_t t = 0; t < trees.size(); ++t) {
            out << "tree " << t << " nodes " << trees[t].nodes.size() << "\n";
            for (std::size_t i = 0; i < trees[t].nodes.size(); ++i) {
                const auto& n = trees[t].nodes[i];
                if (n.is_leaf) {
                    out << "  node " << i << " leaf " << detail::fmt_double(n.value) << "\n";
                } else {
                    out << "  node " << i << " split " << FeatureVector::names()[n.feature] << " "
                        << detail::fmt_double(n.threshold) << " " << n.left << " " << n.right
                        << "\n";
                }
            }
        }
    }

    static GbtModel load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open model: " + path.string());
        std::string line;
        if (!std::getline(in, line) || line != "elink.gbt 1")
            throw std::runtime_error(path.string() + ": not an elink.gbt model (version 1)");

        auto next_line = [&](std::string& out_line) {
            while (std::getline(in, out_line))
                if (!out_line.empty() && out_line[0] != '#') return true;
            return false;
        };
        auto fail = [&](const std::string& what) -> std::runtime_error {
            return std::runtime_error(path.string() + ": malformed model: " + what);
        };

        GbtModel model;
        std::string key;
        if (!next_line(line)) throw fail("missing learning_rate");
        {
            std::istringstream ss(line);
            if (!(ss >> key >> model.learning_rate) || key != "learning_rate")
                throw fail("expected learning_rate, got: " + line);
        }
        if (!next_line(line)) throw fail("missing base_score");
        {
            std::istringstream ss(line);
            if (!(ss >> key >> model.base_score) || key != "base_score")
                throw fail("expected base_score, got: " + line);
        }
        if (!next_line(line)) throw fail("missing features");
        {
            std::istringstream ss(line);
            ss >> key;
            if (key != "features") throw fail("expected features, got: " + line);
            std::string name;
            int i = 0;
            while (ss >> name) {
                if (i >= FeatureVector::count || name != FeatureVector::names()[i])
                    throw fail("feature list mismatch at: " + name);
                ++i;
            }
            if (i != FeatureVector::count) throw fail("feature list too short");
        }
        std::size_t n_trees = 0;
        if (!next_line(line)) throw fail("missing trees count");
        {
            std::istringstream ss(line);
            if (!(ss >> key >> n_trees) || key != "trees") throw fail("expected trees, got: " + line);
        }
        for (std::size_t t = 0; t < n_trees; ++t) {
            if (!next_line(line)) throw fail("missing tree " + std::to_string(t));
            std::size_t tree_id = 0, n_nodes = 0;
            {
                std::istringstream ss(line);
                std::string nodes_kw;
                if (!(ss >> key >> tree_id >> nodes_kw >> n_nodes) || key != "tree" ||
                    nodes_kw != "nodes" || tree_id != t)
                    throw fail("bad tree header: " + line);
            }
            RegressionTree tree;
            tree.nodes.resize(n_nodes);
            for (std::size_t i = 0; i < n_nodes; ++i) {
                if (!next_line(line)) throw fail("truncated tree " + std::to_string(t));
                std::istringstream ss(line);
                std::size_t node_id = 0;
                std::string kind;
                if (!(ss >> key >> node_id >> kind) || key != "node" || node_id != i)
                    throw fail("bad node line: " + line);
                TreeNode& n = tree.nodes[i];
                if (kind == "leaf") {
                    n.is_leaf = true;
                    if (!(ss >> n.value)) throw fail("bad leaf line: " + line);
                } else if (kind == "split") {
                    n.is_leaf = false;
                    std::string feature_name;
                    if (!(ss >> feature_name >> n.threshold >> n.left >> n.right))
                        throw fail("bad split line: " + line);
                    const auto& names = FeatureVector::names();
                    auto it = std::find(names.begin(), names.end(), feature_name);
                    if (it == names.end()) throw fail("unknown feature: " + feature_name);
                    n.feature = static_cast<int>(it - names.begin());
                    if (n.left < 0 || n.right < 0 || n.left >= static_cast<int>(n_nodes) ||
                        n.right >= static_cast<int>(n_nodes))
                        throw fail("child index out of range: " + line);
                } else {
                    throw fail("unknown node kind: " + kind);
                }
            }
            model.trees.push_back(std::move(tree));
        }
        return model;
    }
};

struct TrainLog {
    // losses[0] is the loss at the base score; losses[r] after round r.
    std::vector<double> losses;
};

namespace detail {

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Best axis-aligned split by squared-error gain on the residuals:
//   gain = (Σ_L r)²/n_L + (Σ_R r)²/n_R − (Σ r)²/n
// Candidate thresholds are midpoints between consecutive distinct feature
// values. Ties resolve to the lower feature index, then lower threshold
// (strictly-greater gain replaces the incumbent).
inline SplitChoice best_split(const std::vector<std::array<double, FeatureVector::count>>& x,
                              const std::vector<double>& residual,
                              const std::vector<int>& node_idx) {
    const int n = static_cast<int>(node_idx.size());
    double total = 0.0;
    for (int i : node_idx) total += residual[i];
    const double parent = total * total / static_cast<double>(n);

    SplitChoice best;
    std::vector<std::pair<double, int>> order(node_idx.size());
    for (int f = 0; f < FeatureVector::count; ++f) {
        for (std::size_t k = 0; k < node_idx.size(); ++k)
            order[k] = {x[node_idx[k]][f], node_idx[k]};
        std::sort(order.begin(), order.end());
        double left_sum = 0.0;
        for (int k = 0; k + 1 < n; ++k) {
            left_sum += residual[order[k].second];
            if (order[k].first == order[k + 1].first) continue;
            const double nl = static_cast<double>(k + 1);
            const double nr = static_cast<double>(n - k - 1);
            const double right_sum = total - left_sum;
            const double gain = left_sum * left_sum / nl + right_sum * right_sum / nr - parent;
            if (gain > best.gain) {
                best.found = true;
                best.feature = f;
                best.threshold = (order[k].first + order[k + 1].first) / 2.0;
                best.gain = gain;
            }
        }
    }
    return best;
}

struct TreeBuilder {
    const std::vector<std::array<double, FeatureVector::count>>& x;
    const std::vector<double>& residual;
    const std::vector<double>& hessian;
    const GbtConfig& config;
    RegressionTree tree;

    static constexpr double leaf_clamp = 10.0;

    int build(const std::vector<int>& node_idx, int depth) {
        int id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        SplitChoice split;
        if (depth < config.max_depth &&
            static_cast<int>(node_idx.size()) >= config.min_samples_split)
            split = best_split(x, residual, node_idx);
        if (!split.found) {
            double sum_r = 0.0, sum_h = 0.0;
            for (int i : node_idx) {
                sum_r += residual[i];
                sum_h += hessian[i];
            }
            // Newton step; the hessian floor and clamp keep near-pure leaves finite.
            double value = sum_r / std::max(sum_h, 1e-12);
            tree.nodes[id].value = std::clamp(value, -leaf_clamp, leaf_clamp);
            return id;
        }
        std::vector<int> left_idx, right_idx;
        for (int i : node_idx)
            (x[i][split.feature] < split.threshold ? left_idx : right_idx).push_back(i);
        tree.nodes[id].is_leaf = false;
        tree.nodes[id].feature = split.feature;
        tree.nodes[id].threshold = split.threshold;
        int left = build(left_idx, depth + 1);
        int right = build(right_idx, depth + 1);
        tree.nodes[id].left = left;
        tree.nodes[id].right = right;
        return id;
    }
};

}  // namespace detail

// Gradient boosting with logistic loss: residual y − p, constant-hessian
// variance-reduction splits, Newton leaf values. Deterministic given sample
// order (no subsampling). Requires at least one sample of each class.
inline GbtModel train_gbt(const std::vector<GbtSample>& samples, const GbtConfig& config = {},
                          TrainLog* log = nullptr) {
    int positives = 0, negatives = 0;
    for (const auto& s : samples) (s.label == 1 ? positives : negatives)++;
    if (positives == 0 || negatives == 0)
        throw std::invalid_argument("train_gbt: need at least one positive and one negative sample");
    if (config.rounds < 1 || config.max_depth < 1 || config.min_samples_split < 2 ||
        config.learning_rate <= 0.0)
        throw std::invalid_argument("train_gbt: invalid config");

    const int n = static_cast<int>(samples.size());
    std::vector<std::array<double, FeatureVector::count>> x(n);
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
        x[i] = samples[i].features.to_array();
        y[i] = static_cast<double>(samples[i].label);
    }

    GbtModel model;
    model.base_score = 0.0;
    model.learning_rate = config.learning_rate;

    std::vector<double> f(n, model.base_score);
    std::vector<int> all_idx(n);
    for (int i = 0; i < n; ++i) all_idx[i] = i;

    auto mean_loss = [&]() {
        double total = 0.0;
        for (int i = 0; i < n; ++i) total += detail::softplus(y[i] > 0.5 ? -f[i] : f[i]);
        return total / static_cast<double>(n);
    };
    if (log) {
        log->losses.clear();
        log->losses.push_back(mean_loss());
    }

    std::vector<double> residual(n), hessian(n);
    for (int round = 0; round < config.rounds; ++round) {
        for (int i = 0; i < n; ++i) {
            double p = sigmoid(f[i]);
            residual[i] = y[i] - p;
            hessian[i] = p * (1.0 - p);
        }
        detail::TreeBuilder builder{x, residual, hessian, config, {}};
        builder.build(all_idx, 0);
        RegressionTree tree = std::move(builder.tree);
        for (auto& node : tree.nodes)
            if (node.is_leaf) node.value *= config.learning_rate;
        for (int i = 0; i < n; ++i) f[i] += tree.predict(x[i]);
        model.trees.push_back(std::move(tree));
        if (log) log->losses.push_back(mean_loss());
    }
    return model;
}

}  // namespace elink
