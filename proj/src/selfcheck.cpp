#include "treelab/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <utility>
#include <vector>

#include "treelab/cart.hpp"
#include "treelab/data.hpp"
#include "treelab/gbt.hpp"
#include "treelab/opt_tree.hpp"
#include "treelab/rng.hpp"
#include "treelab/shap.hpp"
#include "treelab/tree.hpp"

namespace treelab {

namespace {

std::string detail_str(const char* fmt, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), fmt, a, b);
    return buf;
}

// Mixed-texture random table: continuous and quantized features, optional
// missing masks, a weak signal from feature 0 so fits are nontrivial.
Dataset random_dataset(Rng& rng, std::size_t n, std::size_t p, Task task, bool with_missing,
                       bool constant_y = false) {
    std::vector<std::vector<double>> values(p, std::vector<double>(n));
    std::vector<std::vector<bool>> missing(p, std::vector<bool>(n, false));
    for (std::size_t j = 0; j < p; ++j) {
        const bool quantized = rng.bernoulli(0.3);
        const double levels = 2.0 + static_cast<double>(rng.below(8));
        for (std::size_t i = 0; i < n; ++i) {
            const double u = rng.uniform01();
            values[j][i] = quantized ? std::floor(u * levels) / levels : u;
        }
        if (with_missing && rng.bernoulli(0.4)) {
            for (std::size_t i = 0; i < n; ++i) missing[j][i] = rng.bernoulli(0.25);
        }
    }
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double base = values[0][i] > 0.5 ? 1.0 : 0.0;
        if (task == Task::kClassification) {
            y[i] = rng.bernoulli(0.2 + 0.6 * base) ? 1.0 : 0.0;
        } else {
            y[i] = base + rng.normal(0.0, 0.5);
        }
    }
    if (constant_y) {
        std::fill(y.begin(), y.end(), task == Task::kClassification ? 0.0 : 0.42);
    } else if (task == Task::kClassification) {
        // splitless-pure draws are exercised elsewhere; keep both classes
        if (std::count(y.begin(), y.end(), 1.0) == 0) y[0] = 1.0;
        if (std::count(y.begin(), y.end(), 0.0) == 0) y[0] = 0.0;
    }
    std::vector<FeatureColumn> cols;
    cols.reserve(p);
    for (std::size_t j = 0; j < p; ++j) {
        cols.emplace_back(std::move(values[j]), std::move(missing[j]));
    }
    return make_dataset(std::move(cols), Target{task, std::move(y)});
}

// Rows visiting each node (internal nodes included), by routing from the
// root; reproduces the grow-time partition.
std::vector<std::vector<std::size_t>> rows_per_node(const DecisionTree& tree,
                                                    const Dataset& data) {
    std::vector<std::vector<std::size_t>> rows(tree.nodes.size());
    for (std::size_t r = 0; r < data.n_rows(); ++r) {
        int idx = 0;
        for (;;) {
            rows[static_cast<std::size_t>(idx)].push_back(r);
            const TreeNode& node = tree.nodes[static_cast<std::size_t>(idx)];
            if (node.is_leaf()) break;
            const FeatureColumn& col = data.column(static_cast<std::size_t>(node.feature));
            const bool left =
                col.missing(r) ? node.missing_goes_left : col.value(r) <= node.threshold;
            idx = left ? node.left : node.right;
        }
    }
    return rows;
}

struct Stats {
    double n = 0.0, sum = 0.0, sumsq = 0.0, c1 = 0.0;

    void add(double y) {
        n += 1.0;
        sum += y;
        sumsq += y * y;
        c1 += y;
    }
};

Stats stats_of(const Dataset& data, const std::vector<std::size_t>& rows) {
    Stats s;
    for (std::size_t r : rows) s.add(data.y(r));
    return s;
}

// Raw error of the subset as one leaf: misclassification count under the
// majority label (probability ties predict 0) or SSE.
double leaf_error_of(const Stats& s, Task task) {
    if (s.n <= 0.0) return 0.0;
    if (task == Task::kClassification) return s.c1 / s.n > 0.5 ? s.n - s.c1 : s.c1;
    const double sse = s.sumsq - s.sum * s.sum / s.n;
    return sse > 0.0 ? sse : 0.0;
}

// Training error of a tree by routing every row to its leaf.
double tree_error(const DecisionTree& tree, const Dataset& data) {
    const std::vector<std::vector<std::size_t>> rows = rows_per_node(tree, data);
    double err = 0.0;
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        if (!tree.nodes[i].is_leaf()) continue;
        err += leaf_error_of(stats_of(data, rows[i]), tree.task);
    }
    return err;
}

}  // namespace

// ---------------------------------------------------------------------------
// a. fast_tree_shap vs subset enumeration

SelfCheck check_shap_oracle() {
    double max_diff = 0.0;
    double max_local = 0.0;
    for (int i = 0; i < 1000; ++i) {
        Rng rng(mix_seed(9101, static_cast<std::uint64_t>(i)));
        const std::size_t p = 1 + rng.below(7);
        const std::size_t n = 15 + rng.below(35);
        const Task task = i % 2 == 0 ? Task::kRegression : Task::kClassification;
        const Dataset data = random_dataset(rng, n, p, task, i % 3 != 1);

        DecisionTree tree;
        BoostedEnsemble ens;
        const bool use_ensemble = i % 2 == 1;
        if (use_ensemble) {
            GBTParams params;
            params.rounds = 3;
            params.max_depth = 2;
            ens = fit_gbt(data, task, params);
        } else {
            GrowLimits limits;
            limits.min_leaf = 1 + rng.below(3);
            limits.max_depth = 2 + static_cast<int>(rng.below(3));
            tree = grow_cart(data, task, limits);
        }

        DenseRow row{std::vector<double>(p)};
        if (i % 3 == 0) {
            for (std::size_t j = 0; j < p; ++j) {
                row.values[j] = rng.uniform(-0.25, 1.25);
                row.miss[j] = rng.bernoulli(0.15);
            }
        } else {
            const std::size_t r = rng.below(n);
            for (std::size_t j = 0; j < p; ++j) {
                row.miss[j] = data.column(j).missing(r);
                if (!row.miss[j]) row.values[j] = data.column(j).value(r);
            }
        }

        const Attribution fast =
            use_ensemble ? fast_tree_shap(ens, row) : fast_tree_shap(tree, row);
        const Attribution brute =
            use_ensemble ? brute_force_shap(ens, row) : brute_force_shap(tree, row);
        max_diff = std::max(max_diff, std::fabs(fast.base_value - brute.base_value));
        double fast_sum = fast.base_value, brute_sum = brute.base_value;
        for (std::size_t j = 0; j < p; ++j) {
            max_diff = std::max(max_diff, std::fabs(fast.phi[j] - brute.phi[j]));
            fast_sum += fast.phi[j];
            brute_sum += brute.phi[j];
        }
        const double prediction =
            use_ensemble ? predict_margin(ens, row) : predict_value(tree, row);
        max_local = std::max(max_local, std::fabs(fast_sum - prediction));
        max_local = std::max(max_local, std::fabs(brute_sum - prediction));
    }
    SelfCheck out;
    out.name = "shap_fast_vs_brute";
    out.pass = max_diff < 1e-9 && max_local < 1e-9;
    out.detail = detail_str("1000 models: max |fast-brute| %.2e, max local-accuracy gap %.2e",
                            max_diff, max_local);
    return out;
}

// ---------------------------------------------------------------------------
// b. prune_sequence vs exhaustive pruned-subtree enumeration

namespace {

// (error, splits) of every pruned subtree rooted at idx, built from the
// per-node as-leaf errors of the full tree.
std::vector<std::pair<double, int>> enumerate_subtrees(const DecisionTree& tree, int idx,
                                                       const std::vector<double>& as_leaf) {
    std::vector<std::pair<double, int>> out{{as_leaf[static_cast<std::size_t>(idx)], 0}};
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(idx)];
    if (node.is_leaf()) return out;
    const auto left = enumerate_subtrees(tree, node.left, as_leaf);
    const auto right = enumerate_subtrees(tree, node.right, as_leaf);
    for (const auto& [el, sl] : left) {
        for (const auto& [er, sr] : right) {
            out.emplace_back(el + er, sl + sr + 1);
        }
    }
    return out;
}

}  // namespace

SelfCheck check_prune_oracle() {
    double max_excess = 0.0;   // cost of the chosen step above the enumerated optimum
    double max_err_gap = 0.0;  // stored train_error vs routed recomputation
    bool shape_ok = true;
    for (int i = 0; i < 50; ++i) {
        Rng rng(mix_seed(9102, static_cast<std::uint64_t>(i)));
        const Task task = i % 2 == 0 ? Task::kRegression : Task::kClassification;
        const Dataset data = random_dataset(rng, 30 + rng.below(60), 2 + rng.below(3), task,
                                            i % 4 == 0);
        GrowLimits limits;
        limits.min_leaf = 1 + rng.below(3);
        limits.max_depth = 3;  // at most 7 splits, within the <=10 cap
        const DecisionTree full = grow_cart(data, task, limits);

        const std::vector<std::vector<std::size_t>> rows = rows_per_node(full, data);
        std::vector<double> as_leaf(full.nodes.size());
        for (std::size_t k = 0; k < full.nodes.size(); ++k) {
            as_leaf[k] = leaf_error_of(stats_of(data, rows[k]), task);
        }
        const auto all = enumerate_subtrees(full, 0, as_leaf);

        const std::vector<PruneStep> steps = prune_sequence(full, data);
        shape_ok = shape_ok && !steps.empty() && steps.front().alpha == 0.0 &&
                   count_splits(steps.back().tree) == 0;
        for (std::size_t s = 0; s < steps.size(); ++s) {
            if (s > 0) shape_ok = shape_ok && steps[s].alpha > steps[s - 1].alpha;
            const double err = tree_error(steps[s].tree, data);
            max_err_gap = std::max(max_err_gap, std::fabs(err - steps[s].train_error) /
                                                    std::max(1.0, err));
            const int splits = count_splits(steps[s].tree);
            // the step must be optimal at its own alpha and across its interval
            const double next = s + 1 < steps.size() ? steps[s + 1].alpha : steps[s].alpha + 2.0;
            for (const double alpha : {steps[s].alpha, (steps[s].alpha + next) / 2.0}) {
                double best = as_leaf[0];
                for (const auto& [e, sp] : all) best = std::min(best, e + alpha * sp);
                const double cost = err + alpha * splits;
                max_excess = std::max(max_excess, (cost - best) / std::max(1.0, best));
            }
        }
    }
    SelfCheck out;
    out.name = "prune_sequence_optimality";
    out.pass = shape_ok && max_excess < 1e-9 && max_err_gap < 1e-9;
    out.detail = detail_str("50 trees: max relative cost excess %.2e, max train_error gap %.2e",
                            max_excess, max_err_gap);
    if (!shape_ok) out.detail += "; alpha sequence malformed";
    return out;
}

// ---------------------------------------------------------------------------
// c. recorded split gains vs brute-force candidate maxima

namespace {

double weighted_impurity_of(const std::vector<double>& ys, Task task) {
    if (ys.empty()) return 0.0;
    const double n = static_cast<double>(ys.size());
    if (task == Task::kClassification) {
        double c1 = 0.0;
        for (double y : ys) c1 += y;
        return n - (c1 * c1 + (n - c1) * (n - c1)) / n;
    }
    double sum = 0.0;
    for (double y : ys) sum += y;
    const double mean = sum / n;
    double sse = 0.0;
    for (double y : ys) sse += (y - mean) * (y - mean);
    return sse;
}

// Max impurity decrease over every (feature, boundary, missing direction)
// candidate at this node, children rebuilt per candidate.
double cart_gain_oracle(const Dataset& data, const std::vector<std::size_t>& rows, Task task,
                        std::size_t min_leaf) {
    std::vector<double> all_ys;
    for (std::size_t r : rows) all_ys.push_back(data.y(r));
    const double parent = weighted_impurity_of(all_ys, task);

    double best = 0.0;
    for (std::size_t j = 0; j < data.n_features(); ++j) {
        const FeatureColumn& col = data.column(j);
        std::vector<std::pair<double, double>> present;  // (value, y)
        std::vector<double> miss_ys;
        for (std::size_t r : rows) {
            if (col.missing(r)) {
                miss_ys.push_back(data.y(r));
            } else {
                present.emplace_back(col.value(r), data.y(r));
            }
        }
        if (present.size() < 2) continue;
        std::sort(present.begin(), present.end());
        const bool has_missing = !miss_ys.empty();
        for (std::size_t i = 1; i < present.size(); ++i) {
            if (present[i].first == present[i - 1].first) continue;
            for (int dir = 0; dir < (has_missing ? 2 : 1); ++dir) {
                std::vector<double> l, r;
                for (std::size_t k = 0; k < present.size(); ++k) {
                    (k < i ? l : r).push_back(present[k].second);
                }
                for (double y : miss_ys) (dir == 0 ? l : r).push_back(y);
                if (l.size() < min_leaf || r.size() < min_leaf) continue;
                best = std::max(best, parent - weighted_impurity_of(l, task) -
                                          weighted_impurity_of(r, task));
            }
        }
    }
    return best;
}

struct GHo {
    double g = 0.0, h = 0.0;
    std::size_t n = 0;

    void add(double gi, double hi) {
        g += gi;
        h += hi;
        n += 1;
    }
};

double gh_score(const GHo& s, double lambda) { return 0.5 * s.g * s.g / (s.h + lambda); }

// Max regularized second-order gain over every candidate at this node.
double gbt_gain_oracle(const Dataset& data, const std::vector<std::size_t>& rows,
                       const std::vector<double>& g, const std::vector<double>& h,
                       const GBTParams& p) {
    GHo tot;
    for (std::size_t r : rows) tot.add(g[r], h[r]);
    const double parent = gh_score(tot, p.lambda);

    double best = 0.0;
    for (std::size_t j = 0; j < data.n_features(); ++j) {
        const FeatureColumn& col = data.column(j);
        std::vector<std::pair<double, std::size_t>> present;
        GHo miss;
        for (std::size_t r : rows) {
            if (col.missing(r)) {
                miss.add(g[r], h[r]);
            } else {
                present.emplace_back(col.value(r), r);
            }
        }
        std::sort(present.begin(), present.end());
        const bool has_missing = miss.n > 0;
        GHo prefix;
        for (std::size_t i = 1; i < present.size(); ++i) {
            prefix.add(g[present[i - 1].second], h[present[i - 1].second]);
            if (present[i].first == present[i - 1].first) continue;
            for (int dir = 0; dir < (has_missing ? 2 : 1); ++dir) {
                GHo left = prefix;
                if (dir == 0 && has_missing) {
                    left.g += miss.g;
                    left.h += miss.h;
                    left.n += miss.n;
                }
                const GHo right{tot.g - left.g, tot.h - left.h, tot.n - left.n};
                if (left.n == 0 || right.n == 0) continue;
                if (left.h < p.min_child_weight || right.h < p.min_child_weight) continue;
                best = std::max(best, gh_score(left, p.lambda) + gh_score(right, p.lambda) -
                                          parent - p.gamma);
            }
        }
    }
    return best;
}

}  // namespace

SelfCheck check_gain_oracle() {
    double cart_gap = 0.0;
    int cart_splits = 0;
    for (int i = 0; i < 30; ++i) {
        Rng rng(mix_seed(9103, static_cast<std::uint64_t>(i)));
        const Task task = i % 2 == 0 ? Task::kRegression : Task::kClassification;
        const Dataset data =
            random_dataset(rng, 20 + rng.below(30), 1 + rng.below(3), task, i % 3 == 0);
        GrowLimits limits;
        limits.min_leaf = 1 + rng.below(2);
        limits.max_depth = 1 + static_cast<int>(rng.below(4));
        const DecisionTree tree = grow_cart(data, task, limits);
        const auto rows = rows_per_node(tree, data);
        for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
            if (tree.nodes[k].is_leaf()) continue;
            const double oracle = cart_gain_oracle(data, rows[k], task, limits.min_leaf);
            cart_gap = std::max(cart_gap, std::fabs(tree.nodes[k].gain - oracle) /
                                              std::max(1.0, oracle));
            ++cart_splits;
        }
    }

    double gbt_gap = 0.0;
    int gbt_splits = 0;
    for (int i = 0; i < 30; ++i) {
        Rng rng(mix_seed(9104, static_cast<std::uint64_t>(i)));
        const Task task = i % 2 == 0 ? Task::kRegression : Task::kClassification;
        const Dataset data =
            random_dataset(rng, 25 + rng.below(35), 1 + rng.below(3), task, i % 3 == 0);
        GBTParams params;
        params.rounds = 3;
        params.max_depth = 2;
        const BoostedEnsemble ens = fit_gbt(data, task, params);

        const std::size_t n = data.n_rows();
        std::vector<double> margin(n, ens.base_score), g(n), h(n);
        for (const DecisionTree& tree : ens.trees) {
            for (std::size_t r = 0; r < n; ++r) {
                if (task == Task::kClassification) {
                    const double pr = sigmoid(margin[r]);
                    g[r] = pr - data.y(r);
                    h[r] = std::max(pr * (1.0 - pr), 1e-16);
                } else {
                    g[r] = margin[r] - data.y(r);
                    h[r] = 1.0;
                }
            }
            const auto rows = rows_per_node(tree, data);
            for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
                if (tree.nodes[k].is_leaf()) continue;
                const double oracle = gbt_gain_oracle(data, rows[k], g, h, params);
                gbt_gap = std::max(gbt_gap, std::fabs(tree.nodes[k].gain - oracle) /
                                                std::max(1.0, oracle));
                ++gbt_splits;
            }
            for (std::size_t r = 0; r < n; ++r) {
                margin[r] += ens.eta * predict_value(tree, RowRef{&data, r});
            }
        }
    }

    SelfCheck out;
    out.name = "split_gain_brute_force";
    out.pass = cart_gap < 1e-9 && gbt_gap < 1e-9 && cart_splits > 0 && gbt_splits > 0;
    out.detail = detail_str("30+30 instances: cart max gain gap %.2e, gbt max gain gap %.2e",
                            cart_gap, gbt_gap);
    return out;
}

// ---------------------------------------------------------------------------
// d. local_search vs exhaustive depth-<=2 enumeration

namespace {

struct Partition {
    std::vector<std::size_t> left, right;
};

// Every (feature, midpoint boundary, missing direction) split of the subset
// with both sides nonempty.
std::vector<Partition> all_partitions(const Dataset& data, const std::vector<std::size_t>& rows) {
    std::vector<Partition> out;
    for (std::size_t j = 0; j < data.n_features(); ++j) {
        const FeatureColumn& col = data.column(j);
        std::vector<std::pair<double, std::size_t>> present;
        std::vector<std::size_t> miss;
        for (std::size_t r : rows) {
            if (col.missing(r)) {
                miss.push_back(r);
            } else {
                present.emplace_back(col.value(r), r);
            }
        }
        std::sort(present.begin(), present.end());
        const bool has_missing = !miss.empty();
        for (std::size_t i = 1; i < present.size(); ++i) {
            if (present[i].first == present[i - 1].first) continue;
            for (int dir = 0; dir < (has_missing ? 2 : 1); ++dir) {
                Partition part;
                for (std::size_t k = 0; k < present.size(); ++k) {
                    (k < i ? part.left : part.right).push_back(present[k].second);
                }
                for (std::size_t r : miss) (dir == 0 ? part.left : part.right).push_back(r);
                if (part.left.empty() || part.right.empty()) continue;
                out.push_back(std::move(part));
            }
        }
    }
    return out;
}

// Best error + lambda * splits over depth-<=1 trees on the subset.
double side_best(const Dataset& data, const std::vector<std::size_t>& rows, Task task,
                 double lambda) {
    double best = leaf_error_of(stats_of(data, rows), task);
    for (const Partition& part : all_partitions(data, rows)) {
        best = std::min(best, lambda + leaf_error_of(stats_of(data, part.left), task) +
                                  leaf_error_of(stats_of(data, part.right), task));
    }
    return best;
}

}  // namespace

SelfCheck check_search_oracle() {
    double max_gap = 0.0;
    int matched = 0;
    const double cps[4] = {0.0, 0.01, 0.05, 0.2};
    for (int i = 0; i < 30; ++i) {
        const Task task = i % 2 == 0 ? Task::kRegression : Task::kClassification;
        std::optional<Dataset> data;
        double baseline = 0.0;
        // pure draws have no normalizing error; redraw on a shifted stream
        for (int attempt = 0; baseline <= 0.0; ++attempt) {
            Rng rng(mix_seed(9105, static_cast<std::uint64_t>(i * 101 + attempt)));
            data.emplace(random_dataset(rng, 15 + rng.below(26), 1 + rng.below(3), task,
                                        i % 3 == 0));
            std::vector<std::size_t> rows(data->n_rows());
            for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
            baseline = leaf_error_of(stats_of(*data, rows), task);
        }
        const double cp = cps[i % 4];
        const double lambda = cp * baseline;

        std::vector<std::size_t> all(data->n_rows());
        for (std::size_t r = 0; r < all.size(); ++r) all[r] = r;
        double best = baseline;
        for (const Partition& part : all_partitions(*data, all)) {
            best = std::min(best, lambda + side_best(*data, part.left, task, lambda) +
                                      side_best(*data, part.right, task, lambda));
        }
        const double j_opt = best / baseline;

        Rng search_rng(mix_seed(9106, static_cast<std::uint64_t>(i)));
        const DecisionTree found = local_search(*data, task, 2, cp, search_rng);
        const double j_found = search_objective(found, *data, task, cp);
        const double gap = std::fabs(j_found - j_opt) / std::max(1.0, j_opt);
        max_gap = std::max(max_gap, gap);
        if (gap < 1e-9) ++matched;
    }
    SelfCheck out;
    out.name = "local_search_depth2_optimum";
    out.pass = matched == 30;
    out.detail = detail_str("%.0f/30 global optima matched, max |J - J_opt| gap %.2e",
                            static_cast<double>(matched), max_gap);
    return out;
}

// ---------------------------------------------------------------------------
// e. MDI telescoping identity and normalization

SelfCheck check_mdi_oracle() {
    double max_telescope = 0.0;
    double max_share_gap = 0.0;
    bool shape_ok = true;
    for (int i = 0; i < 1000; ++i) {
        Rng rng(mix_seed(9107, static_cast<std::uint64_t>(i)));
        const Task task = i % 2 == 0 ? Task::kRegression : Task::kClassification;
        const std::size_t p = 1 + rng.below(5);
        const Dataset data =
            random_dataset(rng, 20 + rng.below(80), p, task, i % 3 == 0, i % 37 == 0);
        GrowLimits limits;
        limits.min_leaf = 1 + rng.below(4);
        limits.max_depth = 1 + static_cast<int>(rng.below(6));
        const DecisionTree tree = grow_cart(data, task, limits);
        const ImportanceVector imp = mdi_importance(tree);
        shape_ok = shape_ok && imp.shares.size() == p;

        // per-feature cover-weighted impurity decreases from the annotations
        std::vector<double> totals(p, 0.0);
        double leaves = 0.0;
        for (const TreeNode& node : tree.nodes) {
            if (node.is_leaf()) {
                leaves += static_cast<double>(node.cover) * node.impurity;
                continue;
            }
            const TreeNode& l = tree.nodes[static_cast<std::size_t>(node.left)];
            const TreeNode& r = tree.nodes[static_cast<std::size_t>(node.right)];
            totals[static_cast<std::size_t>(node.feature)] +=
                static_cast<double>(node.cover) * node.impurity -
                static_cast<double>(l.cover) * l.impurity -
                static_cast<double>(r.cover) * r.impurity;
        }
        double lhs = 0.0;
        for (double t : totals) lhs += t;
        const double rhs =
            static_cast<double>(tree.root().cover) * tree.root().impurity - leaves;
        max_telescope = std::max(max_telescope, std::fabs(lhs - rhs) / std::max(1.0, std::fabs(rhs)));

        double sum_clamped = 0.0;
        for (double& t : totals) {
            if (t < 0.0) t = 0.0;
            sum_clamped += t;
        }
        double share_sum = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            shape_ok = shape_ok && imp.shares[j] >= 0.0;
            share_sum += imp.shares[j];
            const double expect = sum_clamped > 0.0 ? totals[j] / sum_clamped : 0.0;
            max_share_gap = std::max(max_share_gap, std::fabs(imp.shares[j] - expect));
        }
        if (count_splits(tree) == 0) {
            shape_ok = shape_ok && share_sum == 0.0;
        } else {
            shape_ok = shape_ok && std::fabs(share_sum - 1.0) < 1e-9;
        }
    }
    SelfCheck out;
    out.name = "mdi_telescoping";
    out.pass = shape_ok && max_telescope < 1e-9 && max_share_gap < 1e-9;
    out.detail = detail_str("1000 trees: max telescoping gap %.2e, max share gap %.2e",
                            max_telescope, max_share_gap);
    if (!shape_ok) out.detail += "; share invariants violated";
    return out;
}

std::vector<SelfCheck> run_selfchecks() {
    return {check_shap_oracle(), check_prune_oracle(), check_gain_oracle(),
            check_search_oracle(), check_mdi_oracle()};
}

}  // namespace treelab
