#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "treelab/data.hpp"
#include "treelab/tree.hpp"

namespace treelab {

struct GBTParams {
    int rounds = 100;
    double eta = 0.3;
    double lambda = 1.0;
    double gamma = 0.0;
    int max_depth = 6;
    double min_child_weight = 1.0;  // minimum hessian sum per child
};

// Second-order boosted ensemble. Trees store unscaled leaf weights
// (-G/(H+lambda)); the margin applies eta once per tree. Split nodes carry
// the regularized gain used for gain_importance.
struct BoostedEnsemble {
    Task task = Task::kRegression;
    int p_total = 0;
    double base_score = 0.0;
    double eta = 0.3;
    double lambda = 1.0;
    std::vector<DecisionTree> trees;
};

// Squared loss (g = margin - y, h = 1, base = target mean) for regression;
// logistic loss on margins (g = p - y, h = p(1-p), base = log-odds) for
// classification. Each round fits one tree by exhaustive second-order-gain
// search; both missing routings are tried where the node has missing rows.
BoostedEnsemble fit_gbt(const Dataset& train, Task task, const GBTParams& params = {});

// Sweeps max_depth 1..10 with default parameters otherwise and returns the
// ensemble minimizing validation loss (MSE / log-loss); ties prefer the
// smaller depth.
BoostedEnsemble fit_gbt_validated(const Dataset& train, const Dataset& valid, Task task);

// Sum of recorded regularized split gains per feature, normalized to shares.
ImportanceVector gain_importance(const BoostedEnsemble& ens);

template <typename Row>
double predict_margin(const BoostedEnsemble& ens, const Row& row) {
    double margin = ens.base_score;
    for (const DecisionTree& tree : ens.trees) {
        margin += ens.eta * predict_value(tree, row);
    }
    return margin;
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Regression: the margin. Classification: label 1 iff sigmoid(margin) > 0.5.
template <typename Row>
double predict(const BoostedEnsemble& ens, const Row& row) {
    const double margin = predict_margin(ens, row);
    if (ens.task == Task::kClassification) return sigmoid(margin) > 0.5 ? 1.0 : 0.0;
    return margin;
}

std::string ensemble_to_json(const BoostedEnsemble& ens);
BoostedEnsemble ensemble_from_json(const std::string& text);

}  // namespace treelab
