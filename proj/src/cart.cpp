#include "treelab/cart.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace treelab {

namespace {

struct Agg {
    double n = 0.0;
    double sum = 0.0;    // regression: sum of y
    double sumsq = 0.0;  // regression: sum of y^2
    double c1 = 0.0;     // classification: count of label 1

    void add(double y) {
        n += 1.0;
        sum += y;
        sumsq += y * y;
        c1 += y;  // labels are 0/1
    }
    void merge(const Agg& o) {
        n += o.n;
        sum += o.sum;
        sumsq += o.sumsq;
        c1 += o.c1;
    }
    Agg minus(const Agg& o) const { return Agg{n - o.n, sum - o.sum, sumsq - o.sumsq, c1 - o.c1}; }
};

// Cover-weighted impurity: SSE for regression, n * gini for classification.
// The regression form sumsq - sum^2/n matches the boosted learner's
// sum-of-gradients arithmetic, keeping split choices consistent across
// learners on identical data.
double weighted_impurity(const Agg& a, Task task) {
    if (a.n <= 0.0) return 0.0;
    if (task == Task::kClassification) {
        return a.n - (a.c1 * a.c1 + (a.n - a.c1) * (a.n - a.c1)) / a.n;
    }
    const double sse = a.sumsq - a.sum * a.sum / a.n;
    return sse > 0.0 ? sse : 0.0;
}

double leaf_prediction(const Agg& a, Task task) {
    if (a.n <= 0.0) return 0.0;
    return task == Task::kClassification ? a.c1 / a.n : a.sum / a.n;
}

// Raw training error if the node were a leaf: misclassification count under
// the majority label (probability ties predict 0), or SSE.
double leaf_error(const Agg& a, Task task) {
    if (task == Task::kClassification) {
        return a.c1 / a.n > 0.5 ? a.n - a.c1 : a.c1;
    }
    const double sse = a.sumsq - a.sum * a.sum / a.n;
    return sse > 0.0 ? sse : 0.0;
}

struct BestSplit {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    bool missing_goes_left = true;
    double gain = 0.0;
};

// Exhaustive split search over one node's rows. Candidates are iterated in
// (feature asc, threshold asc, missing-left first) order and accepted only on
// strictly greater gain, which realizes the documented tie-breaking. All
// aggregates accumulate in row-label-free orders ((value, y) for the sweep,
// sorted y elsewhere) so the chosen structure is bit-invariant to row
// permutations even where candidate gains tie up to rounding.
BestSplit find_best_split(const Dataset& data, const std::vector<std::size_t>& rows, Task task,
                          std::size_t min_leaf, const Agg& total) {
    BestSplit best;
    const double w_total = weighted_impurity(total, task);
    // floor below which gains are treated as rounding noise (keeps constant
    // targets from splitting on 1e-30 cancellation residue)
    const double gain_floor = 1e-12 * std::max(1.0, w_total);
    if (w_total <= gain_floor) return best;

    const double min_child = static_cast<double>(min_leaf);
    std::vector<std::pair<double, double>> vals;  // (feature value, y)
    std::vector<double> miss_y;
    for (std::size_t j = 0; j < data.n_features(); ++j) {
        const FeatureColumn& col = data.column(j);
        vals.clear();
        miss_y.clear();
        for (std::size_t r : rows) {
            if (col.missing(r)) {
                miss_y.push_back(data.y(r));
            } else {
                vals.emplace_back(col.value(r), data.y(r));
            }
        }
        if (vals.size() < 2) continue;
        std::sort(vals.begin(), vals.end());
        std::sort(miss_y.begin(), miss_y.end());
        Agg miss;
        for (double y : miss_y) miss.add(y);

        const bool has_missing = miss.n > 0.0;
        Agg left;  // non-missing rows strictly below the boundary
        for (std::size_t i = 1; i < vals.size(); ++i) {
            left.add(vals[i - 1].second);
            if (vals[i].first == vals[i - 1].first) continue;
            const double threshold = vals[i - 1].first + (vals[i].first - vals[i - 1].first) / 2.0;
            for (int dir = 0; dir < (has_missing ? 2 : 1); ++dir) {
                const bool miss_left = dir == 0;
                Agg l = left;
                if (miss_left) l.merge(miss);
                const Agg r = total.minus(l);
                if (l.n < min_child || r.n < min_child) continue;
                const double gain = w_total - weighted_impurity(l, task) - weighted_impurity(r, task);
                if (gain > best.gain && gain > gain_floor) {
                    best = {true, static_cast<int>(j), threshold, miss_left, gain};
                }
            }
        }
    }
    return best;
}

void grow_node(DecisionTree& tree, int node_idx, const Dataset& data, Task task,
               const GrowLimits& limits, std::vector<std::size_t> rows, int depth) {
    std::vector<double> ys;
    ys.reserve(rows.size());
    for (std::size_t r : rows) ys.push_back(data.y(r));
    std::sort(ys.begin(), ys.end());
    Agg agg;
    for (double y : ys) agg.add(y);

    TreeNode& node = tree.nodes[static_cast<std::size_t>(node_idx)];
    node.cover = rows.size();
    node.impurity = weighted_impurity(agg, task) / agg.n;
    node.value = leaf_prediction(agg, task);

    if (depth >= limits.max_depth || rows.size() < 2 * limits.min_leaf) return;
    const BestSplit split = find_best_split(data, rows, task, limits.min_leaf, agg);
    if (!split.found) return;

    std::vector<std::size_t> left_rows, right_rows;
    const FeatureColumn& col = data.column(static_cast<std::size_t>(split.feature));
    for (std::size_t r : rows) {
        const bool go_left =
            col.missing(r) ? split.missing_goes_left : col.value(r) <= split.threshold;
        (go_left ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    const int left_idx = static_cast<int>(tree.nodes.size());
    {
        TreeNode& n = tree.nodes[static_cast<std::size_t>(node_idx)];
        n.feature = split.feature;
        n.threshold = split.threshold;
        n.missing_goes_left = split.missing_goes_left;
        n.gain = split.gain;
        n.left = left_idx;
        n.right = left_idx + 1;
    }
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    grow_node(tree, left_idx, data, task, limits, std::move(left_rows), depth + 1);
    grow_node(tree, left_idx + 1, data, task, limits, std::move(right_rows), depth + 1);
}

// Shared machinery of prune_sequence and fit_cart_validated: the collapse
// schedule is computed once; callers either materialize every step or walk
// the steps scoring validation error incrementally.
struct PruneState {
    const DecisionTree* tree = nullptr;
    Task task = Task::kRegression;
    std::vector<int> parent;
    std::vector<Agg> train_agg;
    std::vector<double> leaf_err;  // error if node became a leaf
    std::vector<double> sub_err;   // error of the current pruned subtree
    std::vector<int> splits;       // split count of the current pruned subtree
    std::vector<bool> collapsed;   // node is a leaf in the current pruned tree
    std::vector<bool> dead;        // node sits strictly below a collapsed one

    void init(const DecisionTree& t, const Dataset& train) {
        tree = &t;
        task = t.task;
        const std::size_t m = t.nodes.size();
        parent.assign(m, -1);
        train_agg.assign(m, Agg{});
        leaf_err.assign(m, 0.0);
        sub_err.assign(m, 0.0);
        splits.assign(m, 0);
        collapsed.assign(m, false);
        dead.assign(m, false);
        for (std::size_t i = 0; i < m; ++i) {
            const TreeNode& node = t.nodes[i];
            if (!node.is_leaf()) {
                parent[static_cast<std::size_t>(node.left)] = static_cast<int>(i);
                parent[static_cast<std::size_t>(node.right)] = static_cast<int>(i);
            }
        }
        for (std::size_t r = 0; r < train.n_rows(); ++r) {
            int idx = 0;
            for (;;) {
                train_agg[static_cast<std::size_t>(idx)].add(train.y(r));
                const TreeNode& node = t.nodes[static_cast<std::size_t>(idx)];
                if (node.is_leaf()) break;
                const FeatureColumn& col = train.column(static_cast<std::size_t>(node.feature));
                idx = (col.missing(r) ? node.missing_goes_left : col.value(r) <= node.threshold)
                          ? node.left
                          : node.right;
            }
        }
        init_walk(0);
    }

    void init_walk(int idx) {
        const std::size_t i = static_cast<std::size_t>(idx);
        if (train_agg[i].n > 0.0) leaf_err[i] = leaf_error(train_agg[i], task);
        const TreeNode& node = tree->nodes[i];
        if (node.is_leaf()) {
            sub_err[i] = leaf_err[i];
            splits[i] = 0;
            return;
        }
        init_walk(node.left);
        init_walk(node.right);
        sub_err[i] = sub_err[static_cast<std::size_t>(node.left)] +
                     sub_err[static_cast<std::size_t>(node.right)];
        splits[i] = 1 + splits[static_cast<std::size_t>(node.left)] +
                    splits[static_cast<std::size_t>(node.right)];
    }

    bool alive_internal(std::size_t i) const {
        return !tree->nodes[i].is_leaf() && !collapsed[i] && !dead[i];
    }

    double g_of(std::size_t i) const {
        return (leaf_err[i] - sub_err[i]) / static_cast<double>(splits[i]);
    }

    // Collapses node i and updates ancestor subtree stats; everything below
    // i is marked dead (each node dies at most once over the schedule).
    void collapse(std::size_t i) {
        collapsed[i] = true;
        const double derr = leaf_err[i] - sub_err[i];
        const int dsplits = -splits[i];
        sub_err[i] = leaf_err[i];
        splits[i] = 0;
        for (int a = parent[i]; a >= 0; a = parent[static_cast<std::size_t>(a)]) {
            sub_err[static_cast<std::size_t>(a)] += derr;
            splits[static_cast<std::size_t>(a)] += dsplits;
        }
        std::vector<int> stack{tree->nodes[i].left, tree->nodes[i].right};
        while (!stack.empty()) {
            const std::size_t d = static_cast<std::size_t>(stack.back());
            stack.pop_back();
            if (dead[d]) continue;
            dead[d] = true;
            if (!tree->nodes[d].is_leaf()) {
                stack.push_back(tree->nodes[d].left);
                stack.push_back(tree->nodes[d].right);
            }
        }
    }

    // Collapses every alive internal node with g <= alpha (cascading) and
    // returns whether anything collapsed.
    bool collapse_at(double alpha) {
        bool any = false;
        for (bool again = true; again;) {
            again = false;
            for (std::size_t i = 0; i < collapsed.size(); ++i) {
                if (alive_internal(i) && g_of(i) <= alpha) {
                    collapse(i);
                    any = again = true;
                }
            }
        }
        return any;
    }

    // Minimum g over alive internal nodes; false when the root is a leaf.
    bool min_g(double& out) const {
        bool found = false;
        for (std::size_t i = 0; i < collapsed.size(); ++i) {
            if (!alive_internal(i)) continue;
            const double g = g_of(i);
            if (!found || g < out) {
                out = g;
                found = true;
            }
        }
        return found;
    }

    // Deep-copies the current pruned tree with compacted node indices.
    DecisionTree materialize() const {
        DecisionTree out;
        out.task = tree->task;
        out.p_total = tree->p_total;
        materialize_walk(0, out);
        return out;
    }

    int materialize_walk(int idx, DecisionTree& out) const {
        const std::size_t i = static_cast<std::size_t>(idx);
        const TreeNode& src = tree->nodes[i];
        const int my = static_cast<int>(out.nodes.size());
        out.nodes.push_back(src);
        TreeNode& dst = out.nodes[static_cast<std::size_t>(my)];
        if (src.is_leaf() || collapsed[i]) {
            dst.feature = -1;
            dst.left = dst.right = -1;
            dst.gain = 0.0;
            dst.value = leaf_prediction(train_agg[i], tree->task);
            return my;
        }
        // re-written after the recursive pushes (vector may reallocate)
        const int l = materialize_walk(src.left, out);
        const int r = materialize_walk(src.right, out);
        out.nodes[static_cast<std::size_t>(my)].left = l;
        out.nodes[static_cast<std::size_t>(my)].right = r;
        return my;
    }
};

}  // namespace

DecisionTree grow_cart(const Dataset& train, Task task, GrowLimits limits) {
    if (task != train.task()) throw std::invalid_argument("grow_cart: task mismatch with dataset");
    if (train.n_rows() < 2 * limits.min_leaf) {
        throw std::invalid_argument("grow_cart: fewer than 2*min_leaf rows");
    }
    if (limits.max_depth < 0) throw std::invalid_argument("grow_cart: negative max_depth");
    DecisionTree tree;
    tree.task = task;
    tree.p_total = static_cast<int>(train.n_features());
    tree.nodes.emplace_back();
    std::vector<std::size_t> rows(train.n_rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    grow_node(tree, 0, train, task, limits, std::move(rows), 0);
    return tree;
}

std::vector<PruneStep> prune_sequence(const DecisionTree& full_tree, const Dataset& train) {
    PruneState st;
    st.init(full_tree, train);

    std::vector<PruneStep> steps;
    double alpha = 0.0;
    st.collapse_at(0.0);
    steps.push_back({0.0, st.materialize(), st.sub_err[0]});
    for (;;) {
        double g = 0.0;
        if (!st.min_g(g)) break;
        st.collapse_at(g);
        if (g <= alpha) {
            // rounding pushed a tied g microscopically above the previous
            // alpha; merge into the prior step to keep alphas strictly rising
            steps.back() = {alpha, st.materialize(), st.sub_err[0]};
        } else {
            alpha = g;
            steps.push_back({alpha, st.materialize(), st.sub_err[0]});
        }
    }
    return steps;
}

namespace {

// Validation-side incremental scoring: per-node aggregates of validation
// rows, then each collapse adjusts the total error by (node-as-leaf error)
// minus (current subtree error).
struct ValidScore {
    Task task = Task::kRegression;
    std::vector<Agg> agg;
    std::vector<double> node_err;  // error if the node were a leaf
    std::vector<double> sub_err;

    static double err_as_leaf(const Agg& a, double prediction, Task task) {
        if (a.n <= 0.0) return 0.0;
        if (task == Task::kClassification) {
            return prediction > 0.5 ? a.n - a.c1 : a.c1;
        }
        return a.sumsq - 2.0 * prediction * a.sum + a.n * prediction * prediction;
    }

    void init(const DecisionTree& tree, const Dataset& valid) {
        task = tree.task;
        const std::size_t m = tree.nodes.size();
        agg.assign(m, Agg{});
        node_err.assign(m, 0.0);
        sub_err.assign(m, 0.0);
        for (std::size_t r = 0; r < valid.n_rows(); ++r) {
            int idx = 0;
            for (;;) {
                agg[static_cast<std::size_t>(idx)].add(valid.y(r));
                const TreeNode& node = tree.nodes[static_cast<std::size_t>(idx)];
                if (node.is_leaf()) break;
                const FeatureColumn& col = valid.column(static_cast<std::size_t>(node.feature));
                idx = (col.missing(r) ? node.missing_goes_left : col.value(r) <= node.threshold)
                          ? node.left
                          : node.right;
            }
        }
        init_walk(tree, 0);
    }

    void init_walk(const DecisionTree& tree, int idx) {
        const std::size_t i = static_cast<std::size_t>(idx);
        node_err[i] = err_as_leaf(agg[i], tree.nodes[i].value, task);
        if (tree.nodes[i].is_leaf()) {
            sub_err[i] = node_err[i];
            return;
        }
        init_walk(tree, tree.nodes[i].left);
        init_walk(tree, tree.nodes[i].right);
        sub_err[i] = sub_err[static_cast<std::size_t>(tree.nodes[i].left)] +
                     sub_err[static_cast<std::size_t>(tree.nodes[i].right)];
    }
};

}  // namespace

DecisionTree fit_cart_validated(const Dataset& train, const Dataset& valid, Task task,
                                GrowLimits limits) {
    if (valid.n_features() != train.n_features() || valid.task() != train.task()) {
        throw std::invalid_argument("fit_cart_validated: train/valid schema mismatch");
    }
    const DecisionTree full = grow_cart(train, task, limits);

    PruneState st;
    st.init(full, train);
    ValidScore vs;
    vs.init(full, valid);

    // node.value (train aggregate) is what a collapsed node predicts, so
    // vs.node_err is the validation error of any node treated as a leaf
    const auto step_valid_error = [&]() {
        double total = 0.0;
        std::vector<int> stack{0};
        while (!stack.empty()) {
            const std::size_t i = static_cast<std::size_t>(stack.back());
            stack.pop_back();
            if (full.nodes[i].is_leaf() || st.collapsed[i]) {
                total += vs.node_err[i];
                continue;
            }
            stack.push_back(full.nodes[i].left);
            stack.push_back(full.nodes[i].right);
        }
        return total;
    };

    // walk the schedule recording the validation error of every step;
    // merged (tied-alpha) collapses overwrite the step they extend
    std::vector<double> step_err;
    st.collapse_at(0.0);
    step_err.push_back(step_valid_error());
    double alpha = 0.0;
    for (;;) {
        double g = 0.0;
        if (!st.min_g(g)) break;
        st.collapse_at(g);
        const double err = step_valid_error();
        if (g <= alpha && step_err.size() > 1) {
            step_err.back() = err;
        } else {
            alpha = std::max(alpha, g);
            step_err.push_back(err);
        }
    }
    std::size_t best_step = 0;
    double best_err = step_err[0];
    for (std::size_t s = 1; s < step_err.size(); ++s) {
        if (step_err[s] <= best_err) {  // ties resolve to fewer splits
            best_err = step_err[s];
            best_step = s;
        }
    }

    // replay collapses up to the selected step and materialize
    PruneState replay;
    replay.init(full, train);
    replay.collapse_at(0.0);
    alpha = 0.0;
    std::size_t at = 0;
    while (at < best_step) {
        double g = 0.0;
        if (!replay.min_g(g)) break;
        replay.collapse_at(g);
        if (!(g <= alpha && at > 0)) {
            alpha = std::max(alpha, g);
            ++at;
        }
    }
    return replay.materialize();
}

}  // namespace treelab
