#pragma once

#include <bit>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "treelab/data.hpp"
#include "treelab/gbt.hpp"
#include "treelab/tree.hpp"

namespace treelab {

// Additive feature attribution for one row: base_value + sum(phi) equals the
// model's margin prediction (local accuracy, 1e-9).
struct Attribution {
    std::vector<double> phi;
    double base_value = 0.0;
};

namespace detail {

// 1 / (m * C(m-1, k)): the Shapley weight k!(m-1-k)!/m! without factorials.
inline double shapley_weight(std::size_t m, std::size_t k) {
    double binom = 1.0;
    for (std::size_t i = 1; i <= k; ++i) {
        binom *= static_cast<double>(m - k - 1 + i) / static_cast<double>(i);
    }
    return 1.0 / (static_cast<double>(m) * binom);
}

template <typename Row>
double cond_exp_node(const DecisionTree& tree, int idx, const Row& row,
                     const std::vector<bool>& known) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(idx)];
    if (node.is_leaf()) return node.value;
    if (known[static_cast<std::size_t>(node.feature)]) {
        const bool go_left = row.missing(node.feature) ? node.missing_goes_left
                                                       : row.value(node.feature) <= node.threshold;
        return cond_exp_node(tree, go_left ? node.left : node.right, row, known);
    }
    const double cl = static_cast<double>(tree.nodes[static_cast<std::size_t>(node.left)].cover);
    const double cr = static_cast<double>(tree.nodes[static_cast<std::size_t>(node.right)].cover);
    if (cl + cr <= 0.0) throw std::invalid_argument("conditional_expectation: zero-cover node");
    return (cl * cond_exp_node(tree, node.left, row, known) +
            cr * cond_exp_node(tree, node.right, row, known)) /
           (cl + cr);
}

// Per-distinct-feature contraction of the root-to-leaf path: a multiplies
// the row-follows-edge indicators, b the cover fractions.
struct PathEntry {
    int feature;
    double a;
    double b;
};

template <typename Row>
void leaf_shap_walk(const DecisionTree& tree, int idx, const Row& row,
                    std::vector<PathEntry>& path, Attribution& out) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(idx)];
    if (node.is_leaf()) {
        const std::size_t d = path.size();
        double all_b = node.value;
        for (const PathEntry& e : path) all_b *= e.b;
        out.base_value += all_b;
        std::vector<double> coef;
        for (std::size_t j = 0; j < d; ++j) {
            // product of (b_i + a_i t) over i != j, low degree first
            coef.assign(1, 1.0);
            for (std::size_t i = 0; i < d; ++i) {
                if (i == j) continue;
                coef.push_back(0.0);
                for (std::size_t k = coef.size() - 1; k > 0; --k) {
                    coef[k] = coef[k] * path[i].b + coef[k - 1] * path[i].a;
                }
                coef[0] *= path[i].b;
            }
            double s = 0.0;
            for (std::size_t k = 0; k < coef.size(); ++k) s += coef[k] * shapley_weight(d, k);
            out.phi[static_cast<std::size_t>(path[j].feature)] +=
                node.value * (path[j].a - path[j].b) * s;
        }
        return;
    }

    const double cl = static_cast<double>(tree.nodes[static_cast<std::size_t>(node.left)].cover);
    const double cr = static_cast<double>(tree.nodes[static_cast<std::size_t>(node.right)].cover);
    if (cl + cr <= 0.0) throw std::invalid_argument("fast_tree_shap: zero-cover node");
    const bool row_left = row.missing(node.feature) ? node.missing_goes_left
                                                    : row.value(node.feature) <= node.threshold;

    std::size_t slot = path.size();
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (path[i].feature == node.feature) slot = i;
    }
    const bool fresh = slot == path.size();
    if (fresh) path.push_back({node.feature, 1.0, 1.0});
    const PathEntry saved = path[slot];

    path[slot].a = saved.a * (row_left ? 1.0 : 0.0);
    path[slot].b = saved.b * cl / (cl + cr);
    leaf_shap_walk(tree, node.left, row, path, out);

    path[slot].a = saved.a * (row_left ? 0.0 : 1.0);
    path[slot].b = saved.b * cr / (cl + cr);
    leaf_shap_walk(tree, node.right, row, path, out);

    if (fresh) {
        path.pop_back();
    } else {
        path[slot] = saved;
    }
}

}  // namespace detail

// Path-dependent value function v(S): splits on known features follow the
// row (missing uses the node flag); splits on unknown features average both
// children weighted by training cover.
template <typename Row>
double conditional_expectation(const DecisionTree& tree, const Row& row,
                               const std::vector<bool>& known) {
    if (known.size() != static_cast<std::size_t>(tree.p_total)) {
        throw std::invalid_argument("conditional_expectation: subset size mismatch");
    }
    return detail::cond_exp_node(tree, 0, row, known);
}

// Exact Shapley values by subset enumeration (p <= 20). The reference
// oracle for fast_tree_shap.
template <typename Row>
Attribution brute_force_shap(const DecisionTree& tree, const Row& row) {
    const std::size_t p = static_cast<std::size_t>(tree.p_total);
    if (p > 20) throw std::invalid_argument("brute_force_shap: p exceeds enumeration bound");
    std::vector<double> v(std::size_t{1} << p);
    std::vector<bool> known(p);
    for (std::size_t mask = 0; mask < v.size(); ++mask) {
        for (std::size_t j = 0; j < p; ++j) known[j] = (mask >> j) & 1;
        v[mask] = conditional_expectation(tree, row, known);
    }
    Attribution out;
    out.phi.assign(p, 0.0);
    out.base_value = v[0];
    for (std::size_t j = 0; j < p; ++j) {
        const std::size_t bit = std::size_t{1} << j;
        for (std::size_t mask = 0; mask < v.size(); ++mask) {
            if (mask & bit) continue;
            const std::size_t size = static_cast<std::size_t>(std::popcount(mask));
            out.phi[j] += detail::shapley_weight(p, size) * (v[mask | bit] - v[mask]);
        }
    }
    return out;
}

// Enumerates the joint game directly: v(S) is the ensemble margin with the
// per-tree conditional expectations summed before weighting, so Shapley
// linearity is a checkable consequence here rather than an assumption.
template <typename Row>
Attribution brute_force_shap(const BoostedEnsemble& ens, const Row& row) {
    const std::size_t p = static_cast<std::size_t>(ens.p_total);
    if (p > 20) throw std::invalid_argument("brute_force_shap: p exceeds enumeration bound");
    std::vector<double> v(std::size_t{1} << p, ens.base_score);
    std::vector<bool> known(p);
    for (std::size_t mask = 0; mask < v.size(); ++mask) {
        for (std::size_t j = 0; j < p; ++j) known[j] = (mask >> j) & 1;
        for (const DecisionTree& tree : ens.trees) {
            v[mask] += ens.eta * conditional_expectation(tree, row, known);
        }
    }
    Attribution out;
    out.phi.assign(p, 0.0);
    out.base_value = v[0];
    for (std::size_t j = 0; j < p; ++j) {
        const std::size_t bit = std::size_t{1} << j;
        for (std::size_t mask = 0; mask < v.size(); ++mask) {
            if (mask & bit) continue;
            const std::size_t size = static_cast<std::size_t>(std::popcount(mask));
            out.phi[j] += detail::shapley_weight(p, size) * (v[mask | bit] - v[mask]);
        }
    }
    return out;
}

// Polynomial-time tree Shapley values: every leaf's value function is the
// product over its path features of (a_i if in S else b_i), whose Shapley
// values come from one coefficient sweep per feature. Computes exactly the
// quantity brute_force_shap enumerates.
template <typename Row>
Attribution fast_tree_shap(const DecisionTree& tree, const Row& row) {
    Attribution out;
    out.phi.assign(static_cast<std::size_t>(tree.p_total), 0.0);
    std::vector<detail::PathEntry> path;
    detail::leaf_shap_walk(tree, 0, row, path, out);
    return out;
}

template <typename Row>
Attribution fast_tree_shap(const BoostedEnsemble& ens, const Row& row) {
    Attribution out;
    out.phi.assign(static_cast<std::size_t>(ens.p_total), 0.0);
    out.base_value = ens.base_score;
    for (const DecisionTree& tree : ens.trees) {
        const Attribution part = fast_tree_shap(tree, row);
        for (std::size_t j = 0; j < out.phi.size(); ++j) out.phi[j] += ens.eta * part.phi[j];
        out.base_value += ens.eta * part.base_value;
    }
    return out;
}

// Mean |phi| per feature over the rows of `data` (the caller picks the
// evaluation set; experiments use the training rows), normalized to shares.
ImportanceVector shap_importance(const DecisionTree& tree, const Dataset& data);
ImportanceVector shap_importance(const BoostedEnsemble& ens, const Dataset& data);

// Per-row attribution export: header row,feature,phi,base_value; one line
// per (row, feature) in row-major order.
std::string attributions_to_csv(const BoostedEnsemble& ens, const Dataset& data);

}  // namespace treelab
