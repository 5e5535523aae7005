#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "treelab/synthgen.hpp"
#include "treelab/tree.hpp"

using namespace treelab;

namespace {

DecisionTree leaf_tree(double value) {
    DecisionTree t;
    t.task = Task::kRegression;
    t.p_total = 3;
    TreeNode n;
    n.value = value;
    n.cover = 1;
    t.nodes.push_back(n);
    return t;
}

// stump: x[feature] <= threshold -> left_value else right_value
DecisionTree stump(int feature, double threshold, double left_value, double right_value,
                   int p_total = 6) {
    DecisionTree t;
    t.task = Task::kRegression;
    t.p_total = p_total;
    t.nodes.resize(3);
    t.nodes[0].feature = feature;
    t.nodes[0].threshold = threshold;
    t.nodes[0].left = 1;
    t.nodes[0].right = 2;
    t.nodes[1].value = left_value;
    t.nodes[2].value = right_value;
    for (TreeNode& n : t.nodes) n.cover = 1;
    return t;
}

// The experiment-1 ground truth rebuilt as a learner-side tree.
DecisionTree exp1_tree() {
    const GroundTruthTree g = experiment1_truth();
    DecisionTree t;
    t.task = g.task;
    t.p_total = g.p_total;
    t.nodes.resize(g.nodes.size());
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const GroundTruthNode& src = g.nodes[i];
        TreeNode& dst = t.nodes[i];
        if (src.is_leaf()) {
            dst.value = src.leaf_value;
        } else {
            dst.feature = src.feature;
            dst.threshold = src.threshold;
            dst.missing_goes_left = src.missing_goes_left;
            dst.left = src.left;
            dst.right = src.right;
        }
    }
    return t;
}

}  // namespace

TEST_CASE("impurity: gini and mean squared deviation") {
    CHECK(impurity({0.0, 0.0, 1.0, 1.0}, Task::kClassification) == doctest::Approx(0.5));
    CHECK(impurity({1.0, 1.0, 1.0}, Task::kClassification) == doctest::Approx(0.0));
    CHECK(impurity({1.0, 3.0}, Task::kRegression) == doctest::Approx(1.0));
    CHECK_THROWS_AS(impurity({}, Task::kRegression), std::invalid_argument);
}

TEST_CASE("predict routes rows through splits") {
    const DecisionTree leaf = leaf_tree(2.5);
    CHECK(predict(leaf, DenseRow({0.0, 0.0, 0.0})) == 2.5);
    CHECK(predict(leaf, DenseRow({9.0, 9.0, 9.0})) == 2.5);

    const DecisionTree s = stump(0, 0.5, 1.0, 3.0);
    CHECK(predict(s, DenseRow({0.7, 0, 0, 0, 0, 0})) == 3.0);
    CHECK(predict(s, DenseRow({0.2, 0, 0, 0, 0, 0})) == 1.0);

    // missing follows missing_goes_left
    DenseRow miss({0.0, 0, 0, 0, 0, 0}, {true, false, false, false, false, false});
    CHECK(predict(s, miss) == 1.0);
}

TEST_CASE("classification predict thresholds the probability at 0.5") {
    DecisionTree t = leaf_tree(0.5);
    t.task = Task::kClassification;
    CHECK(predict(t, DenseRow({0, 0, 0})) == 0.0);  // tie resolves to 0
    t.nodes[0].value = 0.51;
    CHECK(predict(t, DenseRow({0, 0, 0})) == 1.0);
}

TEST_CASE("count_splits") {
    CHECK(count_splits(leaf_tree(1.0)) == 0);
    CHECK(count_splits(stump(0, 0.5, 0.0, 1.0)) == 1);
    CHECK(count_splits(exp1_tree()) == 3);
}

TEST_CASE("mdi_importance trivial cases") {
    CHECK(mdi_importance(leaf_tree(1.0)).shares == std::vector<double>{0.0, 0.0, 0.0});

    DecisionTree s = stump(3, 0.5, 0.0, 1.0);
    s.nodes[0].cover = 4;
    s.nodes[0].impurity = 1.0;
    s.nodes[1].cover = 2;
    s.nodes[1].impurity = 0.0;
    s.nodes[2].cover = 2;
    s.nodes[2].impurity = 0.0;
    const ImportanceVector iv = mdi_importance(s);
    CHECK(iv.shares[3] == doctest::Approx(1.0));
    for (int f : {0, 1, 2, 4, 5}) CHECK(iv.shares[static_cast<std::size_t>(f)] == 0.0);
}

TEST_CASE("mdi_importance of the ideal tree on noiseless generated data") {
    // Oracle: analytic variance decomposition of the four-mean mixture.
    // Region masses: P(X6=0, X4<=0.5 or missing) = 0.5*(0.25+0.75*0.5) = 0.3125,
    // its sibling 0.1875; P(X6=1, X5<=0.5) = 0.5*P(round(10x)/10 <= 0.5)
    // = 0.5*0.55 = 0.275, its sibling 0.225.
    const double pa = 0.3125, pb = 0.1875, pc = 0.275, pd = 0.225;
    const double mu = pa * 1 + pb * 2 + pc * 3 + pd * 4;
    const double total = pa * 1 + pb * 4 + pc * 9 + pd * 16 - mu * mu;
    const double ml = (pa * 1 + pb * 2) / 0.5, mr = (pc * 3 + pd * 4) / 0.5;
    const double varl = (pa * 1 + pb * 4) / 0.5 - ml * ml;
    const double varr = (pc * 9 + pd * 16) / 0.5 - mr * mr;
    const double d6 = total - 0.5 * varl - 0.5 * varr;
    const double d4 = 0.5 * varl;  // children of the X4 split are pure
    const double d5 = 0.5 * varr;
    REQUIRE(d4 + d5 + d6 == doctest::Approx(total));
    const double s4 = d4 / total, s5 = d5 / total, s6 = d6 / total;
    // frozen oracle values, for the record
    REQUIRE(s4 == doctest::Approx(0.0889573).epsilon(1e-5));
    REQUIRE(s5 == doctest::Approx(0.0939394).epsilon(1e-5));
    REQUIRE(s6 == doctest::Approx(0.8171033).epsilon(1e-5));

    Rng rng(12345);
    const Exp1Output out = gen_experiment1({100000, 1.0, 12345}, rng);
    // strip the noise: relabel rows with the ground-truth means
    std::vector<FeatureColumn> cols;
    for (std::size_t j = 0; j < out.data.n_features(); ++j) cols.push_back(out.data.column(j));
    Dataset noiseless = make_dataset(std::move(cols), label_with_tree(out.truth, {
        out.data.column(0), out.data.column(1), out.data.column(2),
        out.data.column(3), out.data.column(4), out.data.column(5)}));

    DecisionTree tree = exp1_tree();
    annotate_from_data(tree, noiseless);
    const ImportanceVector iv = mdi_importance(tree);
    CHECK(iv.shares[0] == 0.0);
    CHECK(iv.shares[1] == 0.0);
    CHECK(iv.shares[2] == 0.0);
    CHECK(iv.shares[3] == doctest::Approx(s4).epsilon(0.01 / s4));
    CHECK(iv.shares[4] == doctest::Approx(s5).epsilon(0.01 / s5));
    CHECK(iv.shares[5] == doctest::Approx(s6).epsilon(0.01 / s6));
}

TEST_CASE("mdi telescoping identity on random annotated trees") {
    Rng rng(404);
    for (int rep = 0; rep < 50; ++rep) {
        RandomTreeConfig cfg;
        cfg.seed = rng.next_u64();
        Rng tree_rng(cfg.seed);
        const GroundTruthTree g = gen_random_tree(cfg, tree_rng);
        const std::vector<FeatureColumn> cols = sample_features(400, cfg, tree_rng);
        Dataset data = make_dataset(cols, label_with_tree(g, cols));

        DecisionTree t;
        t.task = g.task;
        t.p_total = g.p_total;
        t.nodes.resize(g.nodes.size());
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            const GroundTruthNode& src = g.nodes[i];
            if (src.is_leaf()) {
                t.nodes[i].value = src.leaf_value;
            } else {
                t.nodes[i].feature = src.feature;
                t.nodes[i].threshold = src.threshold;
                t.nodes[i].left = src.left;
                t.nodes[i].right = src.right;
            }
        }
        annotate_from_data(t, data);

        double delta_sum = 0.0, leaf_sum = 0.0;
        for (const TreeNode& node : t.nodes) {
            if (node.is_leaf()) {
                leaf_sum += static_cast<double>(node.cover) * node.impurity;
            } else {
                const TreeNode& l = t.nodes[node.left];
                const TreeNode& r = t.nodes[node.right];
                delta_sum += static_cast<double>(node.cover) * node.impurity -
                             static_cast<double>(l.cover) * l.impurity -
                             static_cast<double>(r.cover) * r.impurity;
            }
        }
        const double root_total = static_cast<double>(t.nodes[0].cover) * t.nodes[0].impurity;
        CHECK(delta_sum == doctest::Approx(root_total - leaf_sum).epsilon(1e-9));

        const ImportanceVector iv = mdi_importance(t);
        double share_sum = 0.0;
        for (double s : iv.shares) {
            CHECK(s >= 0.0);
            share_sum += s;
        }
        CHECK(share_sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("tree json round trip") {
    DecisionTree t = exp1_tree();
    t.nodes[0].cover = 10;
    t.nodes[0].impurity = 1.25;
    const std::string text = tree_to_json(t);
    const DecisionTree back = tree_from_json(text);
    REQUIRE(back.nodes.size() == t.nodes.size());
    CHECK(back.task == t.task);
    CHECK(back.p_total == t.p_total);
    CHECK(back.nodes[0].feature == 5);
    CHECK(back.nodes[0].cover == 10);
    CHECK(back.nodes[0].impurity == 1.25);
    CHECK(back.nodes[3].value == 1.0);

    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        DenseRow row({rng.uniform01(), rng.uniform01(), rng.uniform01(), rng.uniform01(),
                      rng.uniform01(), rng.bernoulli(0.5) ? 1.0 : 0.0});
        CHECK(predict(back, row) == predict(t, row));
    }
}

TEST_CASE("tree_from_json validates structure") {
    CHECK_THROWS(tree_from_json("{\"task\":\"regression\",\"p_total\":2,\"nodes\":[]}"));
    // child index out of range
    CHECK_THROWS(tree_from_json(
        "{\"task\":\"regression\",\"p_total\":2,\"nodes\":[{\"feature\":0,\"threshold\":0.5,"
        "\"missing_goes_left\":true,\"left\":1,\"right\":7,\"cover\":0,\"impurity\":0}]}"));
}
