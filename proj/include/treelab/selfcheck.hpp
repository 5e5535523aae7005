#pragma once

#include <string>
#include <vector>

namespace treelab {

// Outcome of one oracle suite: a library result recomputed by an
// independent (slow, obviously-correct) method. detail reports the
// measured extremes behind pass/fail.
struct SelfCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

// fast_tree_shap vs subset-enumeration Shapley values on 1000 random
// models and rows (p <= 7), plus local accuracy of every attribution.
SelfCheck check_shap_oracle();

// prune_sequence vs exhaustive pruned-subtree enumeration on 50 trees with
// at most 10 splits: every step minimizes error + alpha * splits at its own
// alpha and across its alpha interval.
SelfCheck check_prune_oracle();

// Every recorded split gain of grow_cart and fit_gbt equals the maximum
// over brute-force candidate enumeration, 30 instances each.
SelfCheck check_gain_oracle();

// local_search hits the exhaustive global optimum over all depth-<=2 trees
// with midpoint thresholds on 30 instances.
SelfCheck check_search_oracle();

// MDI telescoping identity and share normalization on 1000 fitted trees.
SelfCheck check_mdi_oracle();

// All five suites in a fixed order.
std::vector<SelfCheck> run_selfchecks();

}  // namespace treelab
