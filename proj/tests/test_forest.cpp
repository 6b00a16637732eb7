// SPDX-License-Identifier: Apache-2.0
//
// Random forest training, prediction, importances, feature elimination and
// model serialization.

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include <raychannel/raychannel.hpp>

using namespace raychannel;

namespace {

std::filesystem::path tmp_file(const std::string &name) {
    std::filesystem::create_directories("test_tmp");
    return std::filesystem::path("test_tmp") / name;
}

struct Table {
    std::vector<std::vector<double>> x;
    std::vector<Label> y;
};

// Cleanly separable two-feature problem: class 1 sits 1 unit above class 0
// on feature 0, feature 1 is noise.
Table separable_data(int n, std::uint64_t seed) {
    Table t;
    std::mt19937_64 rng = make_stream(seed, 0xda7a);
    for (int i = 0; i < n; ++i) {
        bool nlos = i % 2 == 1;
        double u = hash_to_unit(rng()), v = hash_to_unit(rng());
        t.x.push_back({(nlos ? 2.0 : 0.0) + u, v});
        t.y.push_back(nlos ? Label::NLOS : Label::LOS);
    }
    return t;
}

// Overlapping classes: feature 0 carries most of the signal, feature 1 a
// little, feature 2 none.
Table noisy_data(int n, std::uint64_t seed) {
    Table t;
    std::mt19937_64 rng = make_stream(seed, 0x4015e);
    for (int i = 0; i < n; ++i) {
        bool nlos = i % 2 == 1;
        double u = hash_to_unit(rng()), v = hash_to_unit(rng()), w = hash_to_unit(rng());
        double x0 = (nlos ? 1.0 : 0.0) + 1.6 * u;
        double x1 = (nlos ? 0.3 : 0.0) + v;
        t.x.push_back({x0, x1, w});
        t.y.push_back(nlos ? Label::NLOS : Label::LOS);
    }
    return t;
}

const std::vector<std::string> names2 = {"f0", "f1"};
const std::vector<std::string> names3 = {"f0", "f1", "f2"};

Tree leaf_tree(std::int64_t los, std::int64_t nlos) {
    Tree t;
    TreeNode n;
    n.counts = {los, nlos};
    t.nodes.push_back(n);
    return t;
}

ForestModel hand_model(std::vector<Tree> trees) {
    ForestModel m;
    m.hyperparams.n_trees = static_cast<int>(trees.size());
    m.feature_names = names2;
    m.active_features = {true, true};
    m.importances = {0.5, 0.5};
    m.trees = std::move(trees);
    return m;
}

} // namespace

TEST_CASE("a forest fits cleanly separable data perfectly", "[forest]") {
    Table t = separable_data(200, 1);
    ForestHyperparams hp;
    hp.n_trees = 20;
    ForestModel model = train_forest(t.x, t.y, names2, hp, 7);
    EvalReport report = evaluate(model, t.x, t.y);
    CHECK(report.accuracy == 1.0);
    CHECK(report.confusion[0][1] == 0);
    CHECK(report.confusion[1][0] == 0);
    CHECK(report.recall[0] == 1.0);
    CHECK(report.recall[1] == 1.0);

    // The separating feature takes essentially all the importance.
    CHECK(model.importances[0] > 0.9);
}

TEST_CASE("training is deterministic in the seed", "[forest]") {
    Table t = noisy_data(200, 2);
    ForestHyperparams hp;
    hp.n_trees = 15;
    ForestModel a = train_forest(t.x, t.y, names3, hp, 11);
    ForestModel b = train_forest(t.x, t.y, names3, hp, 11);
    CHECK(model_to_json(a).dump() == model_to_json(b).dump());

    ForestModel c = train_forest(t.x, t.y, names3, hp, 12);
    CHECK(model_to_json(a).dump() != model_to_json(c).dump());
}

TEST_CASE("tied votes and tied leaves resolve to NLOS", "[forest]") {
    // One all-LOS tree, one all-NLOS tree: a 1-1 vote.
    ForestModel split_vote = hand_model({leaf_tree(5, 0), leaf_tree(0, 5)});
    CHECK(predict(split_vote, {0.0, 0.0}) == Label::NLOS);

    // A leaf with equal class counts.
    ForestModel tied_leaf = hand_model({leaf_tree(3, 3)});
    CHECK(predict(tied_leaf, {0.0, 0.0}) == Label::NLOS);

    ForestModel los_leaf = hand_model({leaf_tree(4, 1)});
    CHECK(predict(los_leaf, {0.0, 0.0}) == Label::LOS);
}

TEST_CASE("tree traversal takes the left branch on values at the threshold", "[forest]") {
    Tree t;
    TreeNode root;
    root.feature = 0;
    root.threshold = 0.5;
    root.left = 1;
    root.right = 2;
    t.nodes.push_back(root);
    TreeNode left;
    left.counts = {10, 2};
    t.nodes.push_back(left);
    TreeNode right;
    right.counts = {1, 7};
    t.nodes.push_back(right);

    CHECK(predict_tree(t, {0.3, 0.0}) == Label::LOS);
    CHECK(predict_tree(t, {0.5, 0.0}) == Label::LOS); // boundary goes left
    CHECK(predict_tree(t, {0.9, 0.0}) == Label::NLOS);
}

TEST_CASE("a constant model scores the base rate on balanced labels", "[forest]") {
    ForestModel constant = hand_model({leaf_tree(9, 0)});
    std::vector<std::vector<double>> x(10, {0.0, 0.0});
    std::vector<Label> y;
    for (int i = 0; i < 10; ++i)
        y.push_back(i < 5 ? Label::LOS : Label::NLOS);
    EvalReport report = evaluate(constant, x, y);
    CHECK(report.accuracy == 0.5);
    CHECK(report.confusion[0][0] == 5);
    CHECK(report.confusion[1][0] == 5);
    CHECK(report.confusion[0][1] == 0);
    CHECK(report.precision[0] == 0.5);
    CHECK(report.recall[0] == 1.0);
    CHECK(report.precision[1] == 0.0);
    CHECK(report.recall[1] == 0.0);
    CHECK_THROWS_AS(evaluate(constant, {}, {}), std::invalid_argument);
}

TEST_CASE("strictly monotone feature transforms leave the trees equivalent", "[forest]") {
    Table t = noisy_data(240, 3);
    Table cubed = t;
    for (auto &row : cubed.x)
        row[0] = row[0] * row[0] * row[0];

    ForestHyperparams hp;
    hp.n_trees = 12;
    ForestModel a = train_forest(t.x, t.y, names3, hp, 21);
    ForestModel b = train_forest(cubed.x, cubed.y, names3, hp, 21);

    // Same split features, same leaf counts, same topology; only the
    // threshold values move.
    REQUIRE(a.trees.size() == b.trees.size());
    for (std::size_t k = 0; k < a.trees.size(); ++k) {
        REQUIRE(a.trees[k].nodes.size() == b.trees[k].nodes.size());
        for (std::size_t i = 0; i < a.trees[k].nodes.size(); ++i) {
            const TreeNode &na = a.trees[k].nodes[i];
            const TreeNode &nb = b.trees[k].nodes[i];
            CHECK(na.feature == nb.feature);
            CHECK(na.left == nb.left);
            CHECK(na.right == nb.right);
            CHECK(na.counts == nb.counts);
        }
    }
    for (std::size_t i = 0; i < t.x.size(); ++i)
        CHECK(predict(a, t.x[i]) == predict(b, cubed.x[i]));
    for (std::size_t f = 0; f < 3; ++f)
        CHECK(a.importances[f] == Catch::Approx(b.importances[f]).margin(1e-12));
}

TEST_CASE("importances are a distribution and respect the feature mask", "[forest]") {
    Table t = noisy_data(300, 4);
    ForestHyperparams hp;
    hp.n_trees = 30;
    ForestModel full = train_forest(t.x, t.y, names3, hp, 5);
    double total = full.importances[0] + full.importances[1] + full.importances[2];
    CHECK(total == Catch::Approx(1.0).margin(1e-9));
    for (double v : full.importances)
        CHECK(v >= 0.0);

    ForestModel masked = train_forest(t.x, t.y, names3, hp, 5, {true, false, true});
    CHECK(masked.importances[1] == 0.0);
    CHECK(masked.importances[0] + masked.importances[2] == Catch::Approx(1.0).margin(1e-9));
    for (const Tree &tree : masked.trees)
        for (const TreeNode &node : tree.nodes)
            CHECK(node.feature != 1);
}

TEST_CASE("the ensemble does not underperform a single tree", "[forest]") {
    Table train = noisy_data(400, 6);
    Table test = noisy_data(400, 7);

    ForestHyperparams forest_hp;
    forest_hp.n_trees = 25;
    ForestHyperparams tree_hp;
    tree_hp.n_trees = 1;

    double forest_acc = evaluate(train_forest(train.x, train.y, names3, forest_hp, 9), test.x, test.y).accuracy;
    double tree_acc = evaluate(train_forest(train.x, train.y, names3, tree_hp, 9), test.x, test.y).accuracy;
    CHECK(forest_acc >= tree_acc - 0.02);
    CHECK(forest_acc > 0.6); // sanity: the problem is learnable
}

TEST_CASE("training input validation", "[forest]") {
    Table t = separable_data(100, 8);
    ForestHyperparams hp;

    std::vector<Label> one_class(t.y.size(), Label::LOS);
    CHECK_THROWS_AS(train_forest(t.x, one_class, names2, hp, 1), std::invalid_argument);

    std::vector<std::vector<double>> few(t.x.begin(), t.x.begin() + 5);
    std::vector<Label> few_y(t.y.begin(), t.y.begin() + 5);
    CHECK_THROWS_AS(train_forest(few, few_y, names2, hp, 1), std::invalid_argument);

    CHECK_THROWS_AS(train_forest(t.x, t.y, {"f0"}, hp, 1), std::invalid_argument);
    CHECK_THROWS_AS(train_forest(t.x, t.y, names2, hp, 1, {false, false}), std::invalid_argument);
    CHECK_THROWS_AS(train_forest(t.x, t.y, names2, hp, 1, {true}), std::invalid_argument);

    ForestHyperparams bad = hp;
    bad.n_trees = 0;
    CHECK_THROWS_AS(train_forest(t.x, t.y, names2, bad, 1), std::invalid_argument);
    bad = hp;
    bad.min_leaf_samples = 0;
    CHECK_THROWS_AS(train_forest(t.x, t.y, names2, bad, 1), std::invalid_argument);
}

TEST_CASE("feature elimination walks down to one feature", "[forest]") {
    Table t = noisy_data(240, 10);
    ForestHyperparams hp;
    hp.n_trees = 10;

    RfeResult rfe = recursive_feature_elimination(t.x, t.y, names3, hp, 1, 30);
    REQUIRE(rfe.steps.size() == 3);
    CHECK(rfe.steps[0].n_features == 3);
    CHECK(rfe.steps[1].n_features == 2);
    CHECK(rfe.steps[2].n_features == 1);
    CHECK(rfe.steps[2].dropped_feature == -1);

    // Masks shrink by exactly the recorded dropped feature.
    for (std::size_t s = 0; s + 1 < rfe.steps.size(); ++s) {
        int dropped = rfe.steps[s].dropped_feature;
        REQUIRE(dropped >= 0);
        CHECK(rfe.steps[s].mask[static_cast<std::size_t>(dropped)]);
        CHECK_FALSE(rfe.steps[s + 1].mask[static_cast<std::size_t>(dropped)]);
    }

    // Keeping every feature returns the all-true mask.
    RfeResult keep_all = recursive_feature_elimination(t.x, t.y, names3, hp, 3, 30);
    CHECK(keep_all.best_mask == std::vector<bool>(3, true));
}

TEST_CASE("feature elimination discards the noise feature first", "[forest]") {
    ForestHyperparams hp;
    hp.n_trees = 30;
    hp.max_depth = 6;
    int noise_first = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Table t = noisy_data(240, 100 + seed);
        RfeResult rfe = recursive_feature_elimination(t.x, t.y, names3, hp, 1, seed);
        if (rfe.steps[0].dropped_feature == 2)
            ++noise_first;
    }
    CHECK(noise_first >= 4);
}

TEST_CASE("feature elimination input validation", "[forest]") {
    Table t = noisy_data(100, 11);
    ForestHyperparams hp;
    hp.n_trees = 5;
    CHECK_THROWS_AS(recursive_feature_elimination(t.x, t.y, names3, hp, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(recursive_feature_elimination(t.x, t.y, names3, hp, 4, 1), std::invalid_argument);

    std::vector<Label> one_class(t.y.size(), Label::NLOS);
    CHECK_THROWS_AS(recursive_feature_elimination(t.x, one_class, names3, hp, 1, 1), std::invalid_argument);
}

TEST_CASE("models survive a JSON round trip bit for bit", "[forest]") {
    Table t = noisy_data(150, 12);
    ForestHyperparams hp;
    hp.n_trees = 8;
    ForestModel model = train_forest(t.x, t.y, names3, hp, 33, {true, true, false});

    nlohmann::json j = model_to_json(model);
    ForestModel loaded = model_from_json(j);
    CHECK(model_to_json(loaded).dump() == j.dump());
    for (std::size_t i = 0; i < t.x.size(); ++i)
        CHECK(predict(model, t.x[i]) == predict(loaded, t.x[i]));

    auto path = tmp_file("model.json");
    save_model(model, path.string());
    ForestModel from_disk = load_model(path.string());
    CHECK(model_to_json(from_disk).dump() == j.dump());
    CHECK_THROWS_AS(load_model("test_tmp/no_such_model.json"), std::runtime_error);
}

TEST_CASE("model files with inconsistent contents are rejected", "[forest]") {
    Table t = noisy_data(150, 13);
    ForestHyperparams hp;
    hp.n_trees = 3;
    ForestModel model = train_forest(t.x, t.y, names3, hp, 2, {true, true, false});
    nlohmann::json good = model_to_json(model);

    nlohmann::json j = good;
    j["type"] = "something_else";
    CHECK_THROWS_AS(model_from_json(j), std::invalid_argument);

    j = good;
    j["format_version"] = 2;
    CHECK_THROWS_AS(model_from_json(j), std::invalid_argument);

    j = good;
    j["trees"].erase(0);
    CHECK_THROWS_WITH(model_from_json(j), Catch::Matchers::ContainsSubstring("tree count"));

    j = good;
    j["trees"][0] = {{"f", 2}, {"t", 0.5}, {"l", {{"counts", {1, 1}}}}, {"r", {{"counts", {1, 1}}}}};
    CHECK_THROWS_WITH(model_from_json(j), Catch::Matchers::ContainsSubstring("masked-off"));

    j = good;
    j["trees"][0] = {{"f", 9}, {"t", 0.5}, {"l", {{"counts", {1, 1}}}}, {"r", {{"counts", {1, 1}}}}};
    CHECK_THROWS_WITH(model_from_json(j), Catch::Matchers::ContainsSubstring("out of range"));

    j = good;
    j["trees"][0] = {{"counts", {-1, 5}}};
    CHECK_THROWS_WITH(model_from_json(j), Catch::Matchers::ContainsSubstring("negative leaf counts"));

    j = good;
    j["importances"] = {0.5, 0.5};
    CHECK_THROWS_WITH(model_from_json(j), Catch::Matchers::ContainsSubstring("lengths disagree"));

    j = good;
    j["importances"] = {0.5, 0.5, -0.1};
    CHECK_THROWS_AS(model_from_json(j), std::invalid_argument);
}
