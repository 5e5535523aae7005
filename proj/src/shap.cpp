#include "treelab/shap.hpp"

#include <cmath>
#include <cstdio>

namespace treelab {

namespace {

template <typename Model>
ImportanceVector importance_impl(const Model& model, const Dataset& data, int p_total) {
    if (data.n_rows() == 0) throw std::invalid_argument("shap_importance: empty data");
    std::vector<double> totals(static_cast<std::size_t>(p_total), 0.0);
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        const Attribution att = fast_tree_shap(model, RowRef{&data, i});
        for (std::size_t j = 0; j < totals.size(); ++j) totals[j] += std::fabs(att.phi[j]);
    }
    // normalization absorbs the 1/n factor of the mean
    return normalize_importance(std::move(totals));
}

}  // namespace

ImportanceVector shap_importance(const DecisionTree& tree, const Dataset& data) {
    return importance_impl(tree, data, tree.p_total);
}

ImportanceVector shap_importance(const BoostedEnsemble& ens, const Dataset& data) {
    return importance_impl(ens, data, ens.p_total);
}

std::string attributions_to_csv(const BoostedEnsemble& ens, const Dataset& data) {
    std::string out = "row,feature,phi,base_value\n";
    char buf[128];
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        const Attribution att = fast_tree_shap(ens, RowRef{&data, i});
        for (std::size_t j = 0; j < att.phi.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%zu,%zu,%.9f,%.9f\n", i, j, att.phi[j],
                          att.base_value);
            out += buf;
        }
    }
    return out;
}

}  // namespace treelab
