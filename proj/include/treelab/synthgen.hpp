#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "treelab/data.hpp"

namespace treelab {

// Tree used to label synthetic data. Routing matches DecisionTree:
// x[feature] <= threshold goes left, missing follows missing_goes_left.
struct GroundTruthNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    bool missing_goes_left = true;
    int left = -1;
    int right = -1;
    double leaf_value = 0.0;  // label (classification) or mean (regression)

    bool is_leaf() const { return feature < 0; }
};

struct GroundTruthTree {
    Task task = Task::kClassification;
    int p_total = 0;
    std::vector<GroundTruthNode> nodes;      // nodes[0] is the root
    std::vector<int> relevant_features;      // sorted, distinct
    std::uint64_t seed = 0;

    int n_splits() const {
        int c = 0;
        for (const GroundTruthNode& n : nodes) c += n.is_leaf() ? 0 : 1;
        return c;
    }

    template <typename Row>
    double route(const Row& row) const {
        int idx = 0;
        while (!nodes[idx].is_leaf()) {
            const GroundTruthNode& n = nodes[idx];
            const bool go_left = row.missing(n.feature) ? n.missing_goes_left
                                                        : row.value(n.feature) <= n.threshold;
            idx = go_left ? n.left : n.right;
        }
        return nodes[idx].leaf_value;
    }
};

struct Exp1Config {
    std::size_t n = 1000;
    double sigma = 1.0;
    std::uint64_t seed = 0;
};

struct Exp1Output {
    Dataset data;
    GroundTruthTree truth;
    std::vector<double> truth_importance;  // (0, 0, 0, 0.1, 0.1, 0.8)
};

struct RandomTreeConfig {
    int p_total = 7;
    int p_used = 3;
    int max_splits = 15;
    int min_splits = 3;
    // (feature index, number of levels); features not listed stay continuous.
    std::vector<std::pair<int, int>> quantization_levels;
    std::uint64_t seed = 0;
};

// Fixed ground truth of the first experiment: X6 at the root, X4 (missing
// goes left) and X5 below, leaf means 1..4.
GroundTruthTree experiment1_truth();

// X1..X5 ~ U[0,1], 25% of X4 masked, X5 rounded to one digit,
// X6 ~ Bernoulli(0.5); Y = leaf mean + sigma * N(0,1).
Exp1Output gen_experiment1(const Exp1Config& cfg, Rng& rng);

// Random classification tree on p_used of p_total features with
// S ~ Uniform{min_splits..max_splits} splits; sibling leaves never share a
// label; resamples until every chosen feature is used (bounded retries).
GroundTruthTree gen_random_tree(const RandomTreeConfig& cfg, Rng& rng);

// p_total columns of U[0,1] draws; configured columns quantized.
std::vector<FeatureColumn> sample_features(std::size_t n, const RandomTreeConfig& cfg, Rng& rng);

// Each x becomes round_half_up(x*(k-1))/(k-1): at most k levels in [0,1].
FeatureColumn quantize(const FeatureColumn& col, int k);

// Masks exactly round(fraction*n) entries, positions uniform without
// replacement; other entries untouched.
FeatureColumn inject_missing(const FeatureColumn& col, double fraction, Rng& rng);

// Routes every row through the tree; deterministic.
Target label_with_tree(const GroundTruthTree& tree, const std::vector<FeatureColumn>& features);

std::string ground_truth_to_json(const GroundTruthTree& tree);
GroundTruthTree ground_truth_from_json(const std::string& text);

}  // namespace treelab
