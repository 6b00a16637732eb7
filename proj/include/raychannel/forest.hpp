// SPDX-License-Identifier: Apache-2.0
//
// raychannel - deterministic multipath radio simulation and LOS/NLOS scenario
// classification toolkit
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "raychannel/features.hpp"
#include "raychannel/rng.hpp"
#include "raychannel/parallel.hpp"

namespace raychannel {

// Binary CART node in a flat array. feature < 0 marks a leaf; leaves carry
// the class counts of the training samples that reached them.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::array<std::int64_t, 2> counts{0, 0}; // [LOS, NLOS]
};

struct Tree {
    std::vector<TreeNode> nodes;
};

struct ForestHyperparams {
    int n_trees = 100;
    int max_depth = 12;
    int min_leaf_samples = 5;
    int features_per_split = 0; // 0 selects ceil(sqrt(active feature count))
    bool bootstrap = true;

    void validate() const {
        if (n_trees < 1)
            throw std::invalid_argument("forest: n_trees must be >= 1");
        if (max_depth < 1)
            throw std::invalid_argument("forest: max_depth must be >= 1");
        if (min_leaf_samples < 1)
            throw std::invalid_argument("forest: min_leaf_samples must be >= 1");
        if (features_per_split < 0)
            throw std::invalid_argument("forest: features_per_split must be >= 0");
    }
};

struct ForestModel {
    ForestHyperparams hyperparams;
    std::uint64_t seed = 0;
    std::vector<std::string> feature_names;
    std::vector<bool> active_features;
    std::vector<double> importances; // nonnegative, sums to 1, 0 on inactive features
    std::vector<Tree> trees;
};

struct EvalReport {
    double accuracy = 0.0;
    std::array<std::array<std::int64_t, 2>, 2> confusion{}; // [actual][predicted]
    std::array<double, 2> precision{0.0, 0.0};
    std::array<double, 2> recall{0.0, 0.0};
    std::int64_t n_test = 0;
};

namespace detail {

// Integer draw in [0, n). Modulo bias is below n / 2^64.
inline std::size_t draw_below(std::mt19937_64 &rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

inline void fisher_yates(std::vector<std::size_t> &v, std::mt19937_64 &rng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[draw_below(rng, i)]);
}

inline double gini(std::int64_t c0, std::int64_t c1) {
    std::int64_t n = c0 + c1;
    if (n == 0)
        return 0.0;
    double p0 = static_cast<double>(c0) / static_cast<double>(n);
    double p1 = static_cast<double>(c1) / static_cast<double>(n);
    return 1.0 - p0 * p0 - p1 * p1;
}

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

class TreeBuilder {
  public:
    TreeBuilder(const std::vector<std::vector<double>> &rows, const std::vector<Label> &labels,
                const std::vector<std::size_t> &active, const ForestHyperparams &hp, std::mt19937_64 &rng,
                std::vector<double> &importance_sink)
        : rows_(rows), labels_(labels), active_(active), hp_(hp), rng_(rng), importances_(importance_sink) {}

    Tree build(std::vector<std::size_t> samples) {
        n_root_ = samples.size();
        tree_.nodes.clear();
        grow(std::move(samples), 0);
        return std::move(tree_);
    }

  private:
    int grow(std::vector<std::size_t> samples, int depth) {
        std::array<std::int64_t, 2> counts{0, 0};
        for (std::size_t i : samples)
            ++counts[static_cast<std::size_t>(labels_[i])];

        int node_index = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();

        bool pure = counts[0] == 0 || counts[1] == 0;
        bool too_small = samples.size() < 2 * static_cast<std::size_t>(hp_.min_leaf_samples);
        SplitChoice split;
        if (!pure && !too_small && depth < hp_.max_depth)
            split = best_split(samples, counts);

        if (split.feature < 0) {
            tree_.nodes[static_cast<std::size_t>(node_index)].counts = counts;
            return node_index;
        }

        importances_[static_cast<std::size_t>(split.feature)] +=
            split.gain * static_cast<double>(samples.size()) / static_cast<double>(n_root_);

        std::vector<std::size_t> left_samples, right_samples;
        for (std::size_t i : samples) {
            if (rows_[i][static_cast<std::size_t>(split.feature)] <= split.threshold)
                left_samples.push_back(i);
            else
                right_samples.push_back(i);
        }
        samples.clear();
        samples.shrink_to_fit();

        int left = grow(std::move(left_samples), depth + 1);
        int right = grow(std::move(right_samples), depth + 1);
        TreeNode &node = tree_.nodes[static_cast<std::size_t>(node_index)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = left;
        node.right = right;
        return node_index;
    }

    // Exhaustive scan over a random feature subset. Candidate features are
    // visited in ascending index order and thresholds in ascending value
    // order with a strict gain comparison, so equal-gain ties resolve to the
    // lowest feature index and then the lowest threshold.
    SplitChoice best_split(const std::vector<std::size_t> &samples, const std::array<std::int64_t, 2> &counts) {
        std::vector<std::size_t> pool = active_;
        std::size_t m = hp_.features_per_split > 0
                            ? std::min(static_cast<std::size_t>(hp_.features_per_split), pool.size())
                            : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(pool.size()))));
        for (std::size_t i = 0; i < m; ++i)
            std::swap(pool[i], pool[i + draw_below(rng_, pool.size() - i)]);
        pool.resize(m);
        std::sort(pool.begin(), pool.end());

        double parent = gini(counts[0], counts[1]);
        auto n = static_cast<double>(samples.size());
        auto min_leaf = static_cast<std::size_t>(hp_.min_leaf_samples);

        SplitChoice best;
        std::vector<std::pair<double, Label>> column(samples.size());
        for (std::size_t f : pool) {
            for (std::size_t k = 0; k < samples.size(); ++k)
                column[k] = {rows_[samples[k]][f], labels_[samples[k]]};
            std::sort(column.begin(), column.end(),
                      [](const auto &a, const auto &b) { return a.first < b.first; });

            std::array<std::int64_t, 2> left{0, 0};
            for (std::size_t k = 0; k + 1 < column.size(); ++k) {
                ++left[static_cast<std::size_t>(column[k].second)];
                std::size_t n_left = k + 1;
                std::size_t n_right = column.size() - n_left;
                if (n_left < min_leaf || n_right < min_leaf)
                    continue;
                if (!(column[k].first < column[k + 1].first))
                    continue;
                std::array<std::int64_t, 2> right{counts[0] - left[0], counts[1] - left[1]};
                double gain = parent - (static_cast<double>(n_left) / n) * gini(left[0], left[1]) -
                              (static_cast<double>(n_right) / n) * gini(right[0], right[1]);
                if (gain > best.gain + 1e-12) {
                    best.feature = static_cast<int>(f);
                    best.threshold = 0.5 * (column[k].first + column[k + 1].first);
                    best.gain = gain;
                }
            }
        }
        return best;
    }

    const std::vector<std::vector<double>> &rows_;
    const std::vector<Label> &labels_;
    const std::vector<std::size_t> &active_;
    const ForestHyperparams &hp_;
    std::mt19937_64 &rng_;
    std::vector<double> &importances_;
    Tree tree_;
    std::size_t n_root_ = 0;
};

} // namespace detail

// Bootstrap-bagged CART ensemble. Each tree draws its resample and its
// per-node feature subsets from an independent stream seeded by the tree
// index, so results do not depend on the number of worker threads.
inline ForestModel train_forest(const std::vector<std::vector<double>> &rows, const std::vector<Label> &labels,
                                const std::vector<std::string> &feature_names, const ForestHyperparams &hp,
                                std::uint64_t seed, std::vector<bool> active = {}) {
    hp.validate();
    if (rows.size() != labels.size())
        throw std::invalid_argument("train_forest: rows and labels differ in length");
    if (rows.size() < 10)
        throw std::invalid_argument("train_forest: need at least 10 rows");
    std::size_t n_features = feature_names.size();
    if (n_features == 0)
        throw std::invalid_argument("train_forest: no features");
    for (const std::vector<double> &r : rows)
        if (r.size() != n_features)
            throw std::invalid_argument("train_forest: row width does not match feature names");
    if (active.empty())
        active.assign(n_features, true);
    if (active.size() != n_features)
        throw std::invalid_argument("train_forest: active mask width does not match feature names");

    std::vector<std::size_t> active_idx;
    for (std::size_t f = 0; f < n_features; ++f)
        if (active[f])
            active_idx.push_back(f);
    if (active_idx.empty())
        throw std::invalid_argument("train_forest: all features masked off");

    bool has0 = false, has1 = false;
    for (Label l : labels) {
        has0 |= l == Label::LOS;
        has1 |= l == Label::NLOS;
    }
    if (!has0 || !has1)
        throw std::invalid_argument("train_forest: training data contains a single class");

    ForestModel model;
    model.hyperparams = hp;
    model.seed = seed;
    model.feature_names = feature_names;
    model.active_features = active;
    model.trees.resize(static_cast<std::size_t>(hp.n_trees));

    std::vector<std::vector<double>> per_tree_importance(model.trees.size(),
                                                         std::vector<double>(n_features, 0.0));
    parallel_for(model.trees.size(), [&](std::size_t t) {
        std::mt19937_64 rng = make_stream(seed, static_cast<std::uint64_t>(t));
        std::vector<std::size_t> sample(rows.size());
        if (hp.bootstrap) {
            for (std::size_t &s : sample)
                s = detail::draw_below(rng, rows.size());
        } else {
            std::iota(sample.begin(), sample.end(), std::size_t{0});
        }
        detail::TreeBuilder builder(rows, labels, active_idx, hp, rng, per_tree_importance[t]);
        model.trees[t] = builder.build(std::move(sample));
    });

    model.importances.assign(n_features, 0.0);
    for (const std::vector<double> &imp : per_tree_importance)
        for (std::size_t f = 0; f < n_features; ++f)
            model.importances[f] += imp[f];
    double total = std::accumulate(model.importances.begin(), model.importances.end(), 0.0);
    if (total > 0.0) {
        for (double &v : model.importances)
            v /= total;
    } else {
        // Stump-free forest (for example on pure-noise data): fall back to a
        // uniform distribution over the active features.
        for (std::size_t f : active_idx)
            model.importances[f] = 1.0 / static_cast<double>(active_idx.size());
    }
    return model;
}

// Leaf majority of one tree, ties toward NLOS.
inline Label predict_tree(const Tree &tree, const std::vector<double> &row) {
    if (tree.nodes.empty())
        throw std::invalid_argument("predict: empty tree");
    std::size_t idx = 0;
    while (tree.nodes[idx].feature >= 0) {
        const TreeNode &node = tree.nodes[idx];
        if (row.at(static_cast<std::size_t>(node.feature)) <= node.threshold)
            idx = static_cast<std::size_t>(node.left);
        else
            idx = static_cast<std::size_t>(node.right);
    }
    const TreeNode &leaf = tree.nodes[idx];
    return leaf.counts[1] >= leaf.counts[0] ? Label::NLOS : Label::LOS;
}

// Majority vote over trees, ties toward NLOS.
inline Label predict(const ForestModel &model, const std::vector<double> &row) {
    if (model.trees.empty())
        throw std::invalid_argument("predict: model has no trees");
    std::int64_t nlos_votes = 0;
    for (const Tree &tree : model.trees)
        nlos_votes += predict_tree(tree, row) == Label::NLOS;
    auto n = static_cast<std::int64_t>(model.trees.size());
    return 2 * nlos_votes >= n ? Label::NLOS : Label::LOS;
}

inline EvalReport evaluate(const ForestModel &model, const std::vector<std::vector<double>> &rows,
                           const std::vector<Label> &labels) {
    if (rows.empty())
        throw std::invalid_argument("evaluate: empty test set");
    if (rows.size() != labels.size())
        throw std::invalid_argument("evaluate: rows and labels differ in length");
    EvalReport report;
    report.n_test = static_cast<std::int64_t>(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto actual = static_cast<std::size_t>(labels[i]);
        auto predicted = static_cast<std::size_t>(predict(model, rows[i]));
        ++report.confusion[actual][predicted];
    }
    report.accuracy =
        static_cast<double>(report.confusion[0][0] + report.confusion[1][1]) / static_cast<double>(report.n_test);
    for (std::size_t c = 0; c < 2; ++c) {
        std::int64_t col = report.confusion[0][c] + report.confusion[1][c];
        std::int64_t row_total = report.confusion[c][0] + report.confusion[c][1];
        report.precision[c] = col > 0 ? static_cast<double>(report.confusion[c][c]) / static_cast<double>(col) : 0.0;
        report.recall[c] =
            row_total > 0 ? static_cast<double>(report.confusion[c][c]) / static_cast<double>(row_total) : 0.0;
    }
    return report;
}

struct RfeStep {
    std::vector<bool> mask;
    int n_features = 0;
    double validation_accuracy = 0.0;
    int dropped_feature = -1; // feature removed after this step, -1 on the last step
};

struct RfeResult {
    std::vector<bool> best_mask;
    std::vector<RfeStep> steps;
};

// Backward elimination: one step per active-feature count from F down to 1.
// Each step trains on a stratified 80 % subset of the given rows, records
// accuracy on the remaining 20 % holdout, then drops the active feature with
// the lowest importance (ties take the lowest index). The returned mask is
// the best-accuracy step among those keeping at least target_k features;
// accuracy ties resolve toward fewer features. The caller's spatial test
// split must not be part of `rows`.
inline RfeResult recursive_feature_elimination(const std::vector<std::vector<double>> &rows,
                                               const std::vector<Label> &labels,
                                               const std::vector<std::string> &feature_names,
                                               const ForestHyperparams &hp, int target_k, std::uint64_t seed) {
    std::size_t n_features = feature_names.size();
    if (target_k < 1 || static_cast<std::size_t>(target_k) > n_features)
        throw std::invalid_argument("recursive_feature_elimination: target_k out of range");
    if (rows.size() != labels.size())
        throw std::invalid_argument("recursive_feature_elimination: rows and labels differ in length");

    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    if (by_class[0].size() < 2 || by_class[1].size() < 2)
        throw std::invalid_argument("recursive_feature_elimination: need at least 2 rows per class");

    std::mt19937_64 holdout_rng = make_stream(seed, 0, 1);
    std::vector<std::size_t> train_idx, val_idx;
    for (std::vector<std::size_t> &cls : by_class) {
        detail::fisher_yates(cls, holdout_rng);
        std::size_t n_val = std::clamp<std::size_t>(cls.size() / 5, 1, cls.size() - 1);
        val_idx.insert(val_idx.end(), cls.begin(), cls.begin() + static_cast<std::ptrdiff_t>(n_val));
        train_idx.insert(train_idx.end(), cls.begin() + static_cast<std::ptrdiff_t>(n_val), cls.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(val_idx.begin(), val_idx.end());

    auto gather = [&](const std::vector<std::size_t> &idx, std::vector<std::vector<double>> &x,
                      std::vector<Label> &y) {
        for (std::size_t i : idx) {
            x.push_back(rows[i]);
            y.push_back(labels[i]);
        }
    };
    std::vector<std::vector<double>> train_x, val_x;
    std::vector<Label> train_y, val_y;
    gather(train_idx, train_x, train_y);
    gather(val_idx, val_x, val_y);

    RfeResult result;
    std::vector<bool> mask(n_features, true);
    for (std::size_t step = 0; step < n_features; ++step) {
        std::uint64_t step_seed = mix_seed(splitmix64(seed), step);
        ForestModel model = train_forest(train_x, train_y, feature_names, hp, step_seed, mask);
        EvalReport report = evaluate(model, val_x, val_y);

        RfeStep record;
        record.mask = mask;
        record.n_features = static_cast<int>(n_features - step);
        record.validation_accuracy = report.accuracy;

        if (record.n_features > 1) {
            int drop = -1;
            double lowest = std::numeric_limits<double>::infinity();
            for (std::size_t f = 0; f < n_features; ++f)
                if (mask[f] && model.importances[f] < lowest) {
                    lowest = model.importances[f];
                    drop = static_cast<int>(f);
                }
            record.dropped_feature = drop;
            mask[static_cast<std::size_t>(drop)] = false;
        }
        result.steps.push_back(std::move(record));
    }

    double best_acc = -1.0;
    for (const RfeStep &s : result.steps)
        if (s.n_features >= target_k && s.validation_accuracy >= best_acc) {
            best_acc = s.validation_accuracy;
            result.best_mask = s.mask;
        }
    return result;
}

namespace detail {

inline nlohmann::json tree_node_to_json(const Tree &tree, int idx) {
    const TreeNode &node = tree.nodes.at(static_cast<std::size_t>(idx));
    if (node.feature < 0)
        return nlohmann::json{{"counts", node.counts}};
    return nlohmann::json{{"f", node.feature},
                          {"t", node.threshold},
                          {"l", tree_node_to_json(tree, node.left)},
                          {"r", tree_node_to_json(tree, node.right)}};
}

inline int tree_node_from_json(const nlohmann::json &j, Tree &tree, std::size_t n_features,
                               const std::vector<bool> &active) {
    if (!j.is_object())
        throw std::invalid_argument("model file: tree node is not an object");
    int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (j.contains("counts")) {
        auto counts = j.at("counts").get<std::array<std::int64_t, 2>>();
        if (counts[0] < 0 || counts[1] < 0)
            throw std::invalid_argument("model file: negative leaf counts");
        tree.nodes[static_cast<std::size_t>(idx)].counts = counts;
        return idx;
    }
    int f = j.at("f").get<int>();
    if (f < 0 || static_cast<std::size_t>(f) >= n_features)
        throw std::invalid_argument("model file: split feature index out of range");
    if (!active[static_cast<std::size_t>(f)])
        throw std::invalid_argument("model file: split on a masked-off feature");
    double t = j.at("t").get<double>();
    if (!std::isfinite(t))
        throw std::invalid_argument("model file: non-finite threshold");
    int left = tree_node_from_json(j.at("l"), tree, n_features, active);
    int right = tree_node_from_json(j.at("r"), tree, n_features, active);
    TreeNode &node = tree.nodes[static_cast<std::size_t>(idx)];
    node.feature = f;
    node.threshold = t;
    node.left = left;
    node.right = right;
    return idx;
}

} // namespace detail

inline nlohmann::json model_to_json(const ForestModel &model) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["type"] = "raychannel_forest";
    j["hyperparams"] = {{"n_trees", model.hyperparams.n_trees},
                        {"max_depth", model.hyperparams.max_depth},
                        {"min_leaf_samples", model.hyperparams.min_leaf_samples},
                        {"features_per_split", model.hyperparams.features_per_split},
                        {"bootstrap", model.hyperparams.bootstrap}};
    j["seed"] = model.seed;
    j["feature_names"] = model.feature_names;
    j["active_features"] = model.active_features;
    j["importances"] = model.importances;
    nlohmann::json trees = nlohmann::json::array();
    for (const Tree &tree : model.trees)
        trees.push_back(detail::tree_node_to_json(tree, 0));
    j["trees"] = std::move(trees);
    return j;
}

inline ForestModel model_from_json(const nlohmann::json &j) {
    try {
        if (j.at("format_version").get<int>() != 1)
            throw std::invalid_argument("model file: unsupported format_version");
        if (j.at("type").get<std::string>() != "raychannel_forest")
            throw std::invalid_argument("model file: unexpected type tag");
        ForestModel model;
        const nlohmann::json &hp = j.at("hyperparams");
        model.hyperparams.n_trees = hp.at("n_trees").get<int>();
        model.hyperparams.max_depth = hp.at("max_depth").get<int>();
        model.hyperparams.min_leaf_samples = hp.at("min_leaf_samples").get<int>();
        model.hyperparams.features_per_split = hp.at("features_per_split").get<int>();
        model.hyperparams.bootstrap = hp.at("bootstrap").get<bool>();
        model.hyperparams.validate();
        model.seed = j.at("seed").get<std::uint64_t>();
        model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        model.active_features = j.at("active_features").get<std::vector<bool>>();
        model.importances = j.at("importances").get<std::vector<double>>();
        std::size_t n_features = model.feature_names.size();
        if (n_features == 0 || model.active_features.size() != n_features ||
            model.importances.size() != n_features)
            throw std::invalid_argument("model file: feature name, mask, and importance lengths disagree");
        for (double v : model.importances)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw std::invalid_argument("model file: importances must be finite and nonnegative");
        const nlohmann::json &trees = j.at("trees");
        if (!trees.is_array() || trees.empty())
            throw std::invalid_argument("model file: trees must be a nonempty array");
        for (const nlohmann::json &tj : trees) {
            Tree tree;
            detail::tree_node_from_json(tj, tree, n_features, model.active_features);
            model.trees.push_back(std::move(tree));
        }
        if (static_cast<int>(model.trees.size()) != model.hyperparams.n_trees)
            throw std::invalid_argument("model file: tree count does not match hyperparams");
        return model;
    } catch (const nlohmann::json::exception &e) {
        throw std::invalid_argument(std::string("model file: ") + e.what());
    }
}

inline void save_model(const ForestModel &model, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open model file for writing: " + path);
    out << model_to_json(model).dump(2) << "\n";
}

inline ForestModel load_model(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception &e) {
        throw std::invalid_argument("model file '" + path + "': " + e.what());
    }
    return model_from_json(j);
}

} // namespace raychannel
