#include "treelab/tree.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace treelab {

double impurity(const std::vector<double>& targets, Task task) {
    if (targets.empty()) throw std::invalid_argument("impurity: empty subset");
    const double n = static_cast<double>(targets.size());
    if (task == Task::kClassification) {
        double c1 = 0.0;
        for (double y : targets) c1 += y;
        const double p1 = c1 / n;
        const double p0 = 1.0 - p1;
        return 1.0 - p0 * p0 - p1 * p1;
    }
    double sum = 0.0, sumsq = 0.0;
    for (double y : targets) {
        sum += y;
        sumsq += y * y;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    return var > 0.0 ? var : 0.0;
}

int count_splits(const DecisionTree& tree) {
    int c = 0;
    for (const TreeNode& node : tree.nodes) c += node.is_leaf() ? 0 : 1;
    return c;
}

ImportanceVector mdi_importance(const DecisionTree& tree) {
    std::vector<double> totals(static_cast<std::size_t>(tree.p_total), 0.0);
    for (const TreeNode& node : tree.nodes) {
        if (node.is_leaf()) continue;
        const TreeNode& l = tree.nodes[node.left];
        const TreeNode& r = tree.nodes[node.right];
        const double delta = static_cast<double>(node.cover) * node.impurity -
                             static_cast<double>(l.cover) * l.impurity -
                             static_cast<double>(r.cover) * r.impurity;
        totals[static_cast<std::size_t>(node.feature)] += delta;
    }
    return normalize_importance(std::move(totals));
}

ImportanceVector normalize_importance(std::vector<double> totals) {
    double sum = 0.0;
    for (double& t : totals) {
        if (t < 0.0) t = 0.0;  // impurity decrease is nonnegative up to rounding
        sum += t;
    }
    if (sum > 0.0) {
        for (double& t : totals) t /= sum;
    }
    return ImportanceVector{std::move(totals)};
}

namespace {

struct NodeStats {
    std::size_t count = 0;
    double sum = 0.0;
    double sumsq = 0.0;
    std::size_t c1 = 0;
};

void annotate_walk(DecisionTree& tree, int idx, const Dataset& data, std::vector<std::size_t>& rows) {
    TreeNode& node = tree.nodes[idx];
    NodeStats s;
    for (std::size_t r : rows) {
        const double y = data.y(r);
        s.count++;
        s.sum += y;
        s.sumsq += y * y;
        if (y == 1.0) s.c1++;
    }
    node.cover = s.count;
    if (s.count == 0) {
        node.impurity = 0.0;
    } else if (data.task() == Task::kClassification) {
        const double p1 = static_cast<double>(s.c1) / static_cast<double>(s.count);
        node.impurity = 1.0 - p1 * p1 - (1.0 - p1) * (1.0 - p1);
    } else {
        const double mean = s.sum / static_cast<double>(s.count);
        const double var = s.sumsq / static_cast<double>(s.count) - mean * mean;
        node.impurity = var > 0.0 ? var : 0.0;
    }
    if (node.is_leaf()) {
        if (s.count > 0) {
            node.value = data.task() == Task::kClassification
                             ? static_cast<double>(s.c1) / static_cast<double>(s.count)
                             : s.sum / static_cast<double>(s.count);
        }
        return;
    }
    std::vector<std::size_t> left_rows, right_rows;
    left_rows.reserve(rows.size());
    right_rows.reserve(rows.size());
    for (std::size_t r : rows) {
        const FeatureColumn& col = data.column(static_cast<std::size_t>(node.feature));
        const bool go_left = col.missing(r) ? node.missing_goes_left : col.value(r) <= node.threshold;
        (go_left ? left_rows : right_rows).push_back(r);
    }
    annotate_walk(tree, node.left, data, left_rows);
    annotate_walk(tree, node.right, data, right_rows);
}

}  // namespace

void annotate_from_data(DecisionTree& tree, const Dataset& data) {
    std::vector<std::size_t> rows(data.n_rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    annotate_walk(tree, 0, data, rows);
}

std::string tree_to_json(const DecisionTree& tree) {
    nlohmann::json doc;
    doc["task"] = tree.task == Task::kClassification ? "classification" : "regression";
    doc["p_total"] = tree.p_total;
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& node : tree.nodes) {
        nlohmann::json j;
        if (node.is_leaf()) {
            j["leaf_value"] = node.value;
        } else {
            j["feature"] = node.feature;
            j["threshold"] = node.threshold;
            j["missing_goes_left"] = node.missing_goes_left;
            j["left"] = node.left;
            j["right"] = node.right;
            if (node.gain != 0.0) j["gain"] = node.gain;
        }
        j["cover"] = node.cover;
        j["impurity"] = node.impurity;
        nodes.push_back(std::move(j));
    }
    doc["nodes"] = std::move(nodes);
    return doc.dump();
}

DecisionTree tree_from_json(const std::string& text) {
    const nlohmann::json doc = nlohmann::json::parse(text);
    DecisionTree tree;
    tree.task = doc.at("task").get<std::string>() == "classification" ? Task::kClassification
                                                                      : Task::kRegression;
    tree.p_total = doc.at("p_total").get<int>();
    for (const nlohmann::json& j : doc.at("nodes")) {
        TreeNode node;
        if (j.contains("feature")) {
            node.feature = j.at("feature").get<int>();
            node.threshold = j.at("threshold").get<double>();
            node.missing_goes_left = j.at("missing_goes_left").get<bool>();
            node.left = j.at("left").get<int>();
            node.right = j.at("right").get<int>();
            if (j.contains("gain")) node.gain = j.at("gain").get<double>();
            if (node.feature >= tree.p_total) throw std::invalid_argument("tree_from_json: feature out of range");
        } else {
            node.value = j.at("leaf_value").get<double>();
        }
        node.cover = j.at("cover").get<std::size_t>();
        node.impurity = j.at("impurity").get<double>();
        tree.nodes.push_back(node);
    }
    if (tree.nodes.empty()) throw std::invalid_argument("tree_from_json: no nodes");
    for (const TreeNode& node : tree.nodes) {
        if (!node.is_leaf()) {
            const int n = static_cast<int>(tree.nodes.size());
            if (node.left < 0 || node.left >= n || node.right < 0 || node.right >= n) {
                throw std::invalid_argument("tree_from_json: child index out of range");
            }
        }
    }
    return tree;
}

}  // namespace treelab
