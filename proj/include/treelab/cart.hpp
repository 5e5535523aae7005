#pragma once

#include <vector>

#include "treelab/data.hpp"
#include "treelab/tree.hpp"

namespace treelab {

struct GrowLimits {
    std::size_t min_leaf = 1;
    int max_depth = 30;
};

// One entry of the weakest-link pruning sequence. train_error is the raw
// training error of `tree`: misclassification count (classification) or
// SSE (regression).
struct PruneStep {
    double alpha = 0.0;
    DecisionTree tree;
    double train_error = 0.0;
};

// Greedy growing. At every node each feature is scanned over all boundaries
// between consecutive distinct sorted values (threshold = midpoint); when the
// feature has missing entries at the node both missing directions are tried.
// The maximum impurity-decrease split wins; ties resolve to the lowest
// feature index, then the lowest threshold, then missing-left. Recursion
// stops when a node is pure, hits the limits, or no split has positive gain.
DecisionTree grow_cart(const Dataset& train, Task task, GrowLimits limits = {});

// Weakest-link cost-complexity sequence: repeatedly collapses the alive
// internal node minimizing g = (error increase)/(splits removed). Alphas are
// strictly increasing (ties and cascades merge into one step), the first
// step has alpha 0, the last is a single leaf.
std::vector<PruneStep> prune_sequence(const DecisionTree& full_tree, const Dataset& train);

// grow_cart on train, then the pruning-sequence member with minimal
// validation error (misclassification rate / MSE); ties go to fewer splits.
// No refit on merged data: the returned tree is the pruned subtree as-is.
DecisionTree fit_cart_validated(const Dataset& train, const Dataset& valid, Task task,
                                GrowLimits limits = {});

}  // namespace treelab
