#pragma once

#include <string>
#include <vector>

#include "treelab/data.hpp"

namespace treelab {

// Axis-aligned binary tree node. Internal nodes route x[feature] <= threshold
// to the left child; missing values follow missing_goes_left. Leaves carry
// the prediction: the mean for regression, the class-1 probability for
// classification. Every node records cover (training rows reaching it) and
// its impurity on those rows.
struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    bool missing_goes_left = true;
    int left = -1;
    int right = -1;
    std::size_t cover = 0;
    double impurity = 0.0;
    double value = 0.0;  // leaf prediction
    double gain = 0.0;   // regularized split gain; used by boosted trees

    bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
    Task task = Task::kRegression;
    int p_total = 0;
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    const TreeNode& root() const { return nodes[0]; }
};

// Per-feature importance shares: nonnegative, summing to 1, or all zero for
// a splitless model.
struct ImportanceVector {
    std::vector<double> shares;
};

// Gini for classification, mean squared deviation for regression.
double impurity(const std::vector<double>& targets, Task task);

int count_splits(const DecisionTree& tree);

// Routes a row to its leaf and returns the node index.
template <typename Row>
int route_to_leaf(const DecisionTree& tree, const Row& row) {
    int idx = 0;
    while (!tree.nodes[idx].is_leaf()) {
        const TreeNode& node = tree.nodes[idx];
        bool go_left;
        if (row.missing(node.feature)) {
            go_left = node.missing_goes_left;
        } else {
            go_left = row.value(node.feature) <= node.threshold;
        }
        idx = go_left ? node.left : node.right;
    }
    return idx;
}

// Raw leaf value: mean (regression) or class-1 probability (classification).
template <typename Row>
double predict_value(const DecisionTree& tree, const Row& row) {
    return tree.nodes[route_to_leaf(tree, row)].value;
}

// Task-aware prediction; classification returns the majority label,
// 1 iff the class-1 probability exceeds 0.5 (ties resolve to 0).
template <typename Row>
double predict(const DecisionTree& tree, const Row& row) {
    const double v = predict_value(tree, row);
    if (tree.task == Task::kClassification) return v > 0.5 ? 1.0 : 0.0;
    return v;
}

// Cover-weighted impurity decrease accumulated per split feature and
// normalized to shares; the all-zero vector when the tree has no splits.
ImportanceVector mdi_importance(const DecisionTree& tree);

// Sums importance vectors (e.g. across trees) and renormalizes.
ImportanceVector normalize_importance(std::vector<double> totals);

// Recomputes cover, impurity and leaf values of an existing structure from
// the rows of `data` routed through it. Used after structural search.
void annotate_from_data(DecisionTree& tree, const Dataset& data);

// JSON round trip. The document layout is the same one used for ground
// truth trees, plus cover/impurity annotations.
std::string tree_to_json(const DecisionTree& tree);
DecisionTree tree_from_json(const std::string& text);

}  // namespace treelab
