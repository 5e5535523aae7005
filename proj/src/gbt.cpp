#include "treelab/gbt.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>

#include "json.hpp"

namespace treelab {

namespace {

struct GH {
    double g = 0.0;
    double h = 0.0;
    std::size_t n = 0;

    void add(double gi, double hi) {
        g += gi;
        h += hi;
        n += 1;
    }
    void merge(const GH& o) {
        g += o.g;
        h += o.h;
        n += o.n;
    }
    GH minus(const GH& o) const { return GH{g - o.g, h - o.h, n - o.n}; }
};

double leaf_weight(const GH& s, double lambda) { return -s.g / (s.h + lambda); }

// Half of the regularized score -G^2/(H+lambda); gains are differences of
// these, so the parent magnitude also calibrates the rounding floor.
double score(const GH& s, double lambda) { return 0.5 * s.g * s.g / (s.h + lambda); }

// Rows sorted by (value, row) per feature, missing rows listed separately.
struct FeatureOrder {
    std::vector<std::uint32_t> sorted_rows;
    std::vector<std::uint32_t> missing_rows;
};

std::vector<FeatureOrder> presort(const Dataset& data) {
    std::vector<FeatureOrder> order(data.n_features());
    for (std::size_t j = 0; j < data.n_features(); ++j) {
        const FeatureColumn& col = data.column(j);
        FeatureOrder& fo = order[j];
        for (std::size_t r = 0; r < data.n_rows(); ++r) {
            (col.missing(r) ? fo.missing_rows : fo.sorted_rows).push_back(
                static_cast<std::uint32_t>(r));
        }
        std::sort(fo.sorted_rows.begin(), fo.sorted_rows.end(),
                  [&](std::uint32_t a, std::uint32_t b) {
                      const double va = col.value(a), vb = col.value(b);
                      return va < vb || (va == vb && a < b);
                  });
    }
    return order;
}

struct NodeBest {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
    bool missing_goes_left = true;
};

// One boosting round: level-wise growth, one pass per (level, feature) over
// the presorted rows with per-node running prefixes.
DecisionTree train_tree(const Dataset& data, const std::vector<FeatureOrder>& order,
                        const std::vector<double>& g, const std::vector<double>& h,
                        const GBTParams& p) {
    const std::size_t n = data.n_rows();
    DecisionTree tree;
    tree.task = Task::kRegression;  // every boosted tree regresses on (g, h)
    tree.p_total = static_cast<int>(data.n_features());
    tree.nodes.emplace_back();

    std::vector<std::uint32_t> node_of(n, 0);
    std::vector<bool> active{true};  // per node: still part of the frontier

    struct Sweep {
        GH prefix;
        double prev_val = 0.0;
        bool has_prev = false;
    };

    for (int depth = 0; depth < p.max_depth; ++depth) {
        const std::size_t n_nodes = tree.nodes.size();
        std::vector<GH> total(n_nodes);
        for (std::size_t r = 0; r < n; ++r) {
            if (active[node_of[r]]) total[node_of[r]].add(g[r], h[r]);
        }

        bool frontier_nonempty = false;
        for (std::size_t i = 0; i < n_nodes; ++i) frontier_nonempty |= active[i];
        if (!frontier_nonempty) break;

        std::vector<NodeBest> best(n_nodes);
        std::vector<GH> miss(n_nodes);
        std::vector<Sweep> sweep(n_nodes);
        for (std::size_t j = 0; j < data.n_features(); ++j) {
            const FeatureColumn& col = data.column(j);
            std::fill(miss.begin(), miss.end(), GH{});
            std::fill(sweep.begin(), sweep.end(), Sweep{});
            for (std::uint32_t r : order[j].missing_rows) {
                if (active[node_of[r]]) miss[node_of[r]].add(g[r], h[r]);
            }
            for (std::uint32_t r : order[j].sorted_rows) {
                const std::uint32_t nd = node_of[r];
                if (!active[nd]) continue;
                const double v = col.value(r);
                Sweep& st = sweep[nd];
                if (st.has_prev && v > st.prev_val) {
                    const double threshold = st.prev_val + (v - st.prev_val) / 2.0;
                    const GH& tot = total[nd];
                    const double parent = score(tot, p.lambda);
                    const double floor = 1e-12 * std::max(1.0, parent);
                    const bool has_missing = miss[nd].n > 0;
                    for (int dir = 0; dir < (has_missing ? 2 : 1); ++dir) {
                        GH left = st.prefix;
                        if (dir == 0 && has_missing) left.merge(miss[nd]);
                        const GH right = tot.minus(left);
                        if (left.n == 0 || right.n == 0) continue;
                        if (left.h < p.min_child_weight || right.h < p.min_child_weight) continue;
                        const double gain =
                            score(left, p.lambda) + score(right, p.lambda) - parent - p.gamma;
                        if (gain > best[nd].gain && gain > floor) {
                            best[nd] = {gain, static_cast<int>(j), threshold, dir == 0};
                        }
                    }
                }
                st.prefix.add(g[r], h[r]);
                st.prev_val = v;
                st.has_prev = true;
            }
        }

        // realize the chosen splits; unsplit frontier nodes become leaves
        std::vector<int> left_child(n_nodes, -1);
        bool any_split = false;
        for (std::size_t i = 0; i < n_nodes; ++i) {
            if (!active[i]) continue;
            TreeNode& node = tree.nodes[i];
            node.cover = total[i].n;
            node.value = leaf_weight(total[i], p.lambda);
            if (best[i].feature < 0) {
                active[i] = false;
                continue;
            }
            any_split = true;
            node.feature = best[i].feature;
            node.threshold = best[i].threshold;
            node.missing_goes_left = best[i].missing_goes_left;
            node.gain = best[i].gain;
            node.left = static_cast<int>(tree.nodes.size());
            node.right = node.left + 1;
            left_child[i] = node.left;
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            active.push_back(true);
            active.push_back(true);
            active[i] = false;
        }
        if (!any_split) break;

        for (std::size_t r = 0; r < n; ++r) {
            const std::uint32_t nd = node_of[r];
            if (nd >= n_nodes || left_child[nd] < 0) continue;
            const TreeNode& node = tree.nodes[nd];
            const FeatureColumn& col = data.column(static_cast<std::size_t>(node.feature));
            const bool go_left =
                col.missing(r) ? node.missing_goes_left : col.value(r) <= node.threshold;
            node_of[r] = static_cast<std::uint32_t>(go_left ? node.left : node.right);
        }
    }

    // depth cap: finalize any nodes still on the frontier
    std::vector<GH> total(tree.nodes.size());
    for (std::size_t r = 0; r < n; ++r) {
        if (node_of[r] < active.size() && active[node_of[r]]) total[node_of[r]].add(g[r], h[r]);
    }
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        if (i < active.size() && active[i]) {
            tree.nodes[i].cover = total[i].n;
            tree.nodes[i].value = leaf_weight(total[i], p.lambda);
        }
    }
    return tree;
}

double clamp01(double p) { return std::min(1.0 - 1e-12, std::max(1e-12, p)); }

}  // namespace

BoostedEnsemble fit_gbt(const Dataset& train, Task task, const GBTParams& params) {
    if (task != train.task()) throw std::invalid_argument("fit_gbt: task mismatch with dataset");
    if (params.rounds < 1 || params.eta <= 0.0 || params.eta > 1.0 || params.lambda < 0.0 ||
        params.max_depth < 1) {
        throw std::invalid_argument("fit_gbt: invalid params");
    }
    const std::size_t n = train.n_rows();

    BoostedEnsemble ens;
    ens.task = task;
    ens.p_total = static_cast<int>(train.n_features());
    ens.eta = params.eta;
    ens.lambda = params.lambda;
    if (task == Task::kClassification) {
        double c1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) c1 += train.y(i);
        const double p1 = clamp01(c1 / static_cast<double>(n));
        ens.base_score = std::log(p1 / (1.0 - p1));
    } else {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += train.y(i);
        ens.base_score = sum / static_cast<double>(n);
    }

    const std::vector<FeatureOrder> order = presort(train);
    std::vector<double> margin(n, ens.base_score);
    std::vector<double> g(n), h(n);
    for (int round = 0; round < params.rounds; ++round) {
        if (task == Task::kClassification) {
            for (std::size_t i = 0; i < n; ++i) {
                const double p = sigmoid(margin[i]);
                g[i] = p - train.y(i);
                h[i] = std::max(p * (1.0 - p), 1e-16);
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                g[i] = margin[i] - train.y(i);
                h[i] = 1.0;
            }
        }
        DecisionTree tree = train_tree(train, order, g, h, params);
        for (std::size_t i = 0; i < n; ++i) {
            margin[i] += params.eta * predict_value(tree, RowRef{&train, i});
        }
        ens.trees.push_back(std::move(tree));
    }
    return ens;
}

namespace {

double validation_loss(const BoostedEnsemble& ens, const Dataset& valid) {
    double total = 0.0;
    for (std::size_t i = 0; i < valid.n_rows(); ++i) {
        const double m = predict_margin(ens, RowRef{&valid, i});
        if (ens.task == Task::kClassification) {
            const double p = clamp01(sigmoid(m));
            total -= valid.y(i) == 1.0 ? std::log(p) : std::log(1.0 - p);
        } else {
            const double d = m - valid.y(i);
            total += d * d;
        }
    }
    return total / static_cast<double>(valid.n_rows());
}

}  // namespace

BoostedEnsemble fit_gbt_validated(const Dataset& train, const Dataset& valid, Task task) {
    if (valid.n_features() != train.n_features() || valid.task() != train.task()) {
        throw std::invalid_argument("fit_gbt_validated: train/valid schema mismatch");
    }
    BoostedEnsemble best;
    double best_loss = 0.0;
    for (int depth = 1; depth <= 10; ++depth) {
        GBTParams params;
        params.max_depth = depth;
        BoostedEnsemble ens = fit_gbt(train, task, params);
        const double loss = validation_loss(ens, valid);
        if (depth == 1 || loss < best_loss) {  // ties keep the smaller depth
            best_loss = loss;
            best = std::move(ens);
        }
    }
    return best;
}

ImportanceVector gain_importance(const BoostedEnsemble& ens) {
    std::vector<double> totals(static_cast<std::size_t>(ens.p_total), 0.0);
    for (const DecisionTree& tree : ens.trees) {
        for (const TreeNode& node : tree.nodes) {
            if (!node.is_leaf()) totals[static_cast<std::size_t>(node.feature)] += node.gain;
        }
    }
    return normalize_importance(std::move(totals));
}

std::string ensemble_to_json(const BoostedEnsemble& ens) {
    nlohmann::json doc;
    doc["task"] = ens.task == Task::kClassification ? "classification" : "regression";
    doc["p_total"] = ens.p_total;
    doc["base_score"] = ens.base_score;
    doc["eta"] = ens.eta;
    doc["lambda"] = ens.lambda;
    nlohmann::json trees = nlohmann::json::array();
    for (const DecisionTree& tree : ens.trees) {
        trees.push_back(nlohmann::json::parse(tree_to_json(tree)));
    }
    doc["trees"] = std::move(trees);
    return doc.dump();
}

BoostedEnsemble ensemble_from_json(const std::string& text) {
    const nlohmann::json doc = nlohmann::json::parse(text);
    BoostedEnsemble ens;
    ens.task = doc.at("task").get<std::string>() == "classification" ? Task::kClassification
                                                                     : Task::kRegression;
    ens.p_total = doc.at("p_total").get<int>();
    ens.base_score = doc.at("base_score").get<double>();
    ens.eta = doc.at("eta").get<double>();
    ens.lambda = doc.at("lambda").get<double>();
    for (const nlohmann::json& t : doc.at("trees")) {
        ens.trees.push_back(tree_from_json(t.dump()));
    }
    return ens;
}

}  // namespace treelab
