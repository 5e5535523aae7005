#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "treelab/data.hpp"
#include "treelab/rng.hpp"
#include "treelab/tree.hpp"

namespace treelab {

// Grid and search settings for the optimized single-tree learner.
struct OptSearchConfig {
    std::vector<int> depth_grid = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<double> cp_grid = {0.0, 0.0001, 0.0005, 0.001, 0.005, 0.01, 0.05, 0.1};
    int restarts = 50;
    std::size_t min_leaf = 1;
    std::uint64_t seed = 0;
};

// Search objective J(T): training error (misclassification count or SSE)
// divided by the best single leaf's error, plus cp per split. A zero
// baseline makes any positive error infinitely bad and J = cp * splits
// otherwise.
double search_objective(const DecisionTree& tree, const Dataset& data, Task task, double cp);

// Coordinate-descent local search: visit nodes in random order, apply the
// best of {collapse to leaf, replace subtree with the error-minimizing
// stump, re-optimize this node's split keeping descendant structure} while
// J improves; one pass with no improvement ends a restart. Restart 0 seeds
// from the depth-capped greedy tree, the rest from random valid trees; the
// best J over restarts wins, so J(returned) <= J(greedy seed) always.
DecisionTree local_search(const Dataset& train, Task task, int depth, double cp, Rng& rng,
                          int restarts = 50, std::size_t min_leaf = 1);

// Runs local_search per (depth, cp) grid cell on its own derived RNG stream
// and selects the tree with minimum validation error (ties prefer fewer
// splits, then the smaller depth); the winner's weakest-link pruning
// sequence then competes under the same rule, trimming splits that do not
// pay for themselves on the validation set. Cell streams make any parallel
// schedule reproduce the sequential result.
DecisionTree fit_oct_validated(const Dataset& train, const Dataset& valid, Task task,
                               const OptSearchConfig& cfg = {});

}  // namespace treelab
