#include "treelab/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace treelab {

namespace {

struct ColsRow {
    const std::vector<FeatureColumn>* cols;
    std::size_t row;

    bool missing(int f) const { return (*cols)[static_cast<std::size_t>(f)].missing(row); }
    double value(int f) const { return (*cols)[static_cast<std::size_t>(f)].value(row); }
};

double round_half_up(double v) { return std::floor(v + 0.5); }

}  // namespace

GroundTruthTree experiment1_truth() {
    GroundTruthTree t;
    t.task = Task::kRegression;
    t.p_total = 6;
    t.relevant_features = {3, 4, 5};
    t.nodes.resize(7);
    // root: X6 = 0 goes left
    t.nodes[0] = {5, 0.5, true, 1, 2, 0.0};
    // X6 = 0: X4 <= 0.5 or missing -> mean 1, else mean 2
    t.nodes[1] = {3, 0.5, true, 3, 4, 0.0};
    // X6 = 1: X5 <= 0.5 -> mean 3, else mean 4
    t.nodes[2] = {4, 0.5, true, 5, 6, 0.0};
    t.nodes[3] = {-1, 0.0, true, -1, -1, 1.0};
    t.nodes[4] = {-1, 0.0, true, -1, -1, 2.0};
    t.nodes[5] = {-1, 0.0, true, -1, -1, 3.0};
    t.nodes[6] = {-1, 0.0, true, -1, -1, 4.0};
    return t;
}

Exp1Output gen_experiment1(const Exp1Config& cfg, Rng& rng) {
    if (cfg.n < 8) throw std::invalid_argument("gen_experiment1: n must be at least 8");
    if (!(cfg.sigma > 0.0)) throw std::invalid_argument("gen_experiment1: sigma must be positive");

    const std::size_t n = cfg.n;
    std::vector<FeatureColumn> cols;
    cols.reserve(6);
    for (int j = 0; j < 4; ++j) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = rng.uniform01();
        cols.emplace_back(std::move(v));
    }
    cols[3] = inject_missing(cols[3], 0.25, rng);
    {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = rng.uniform01();
        cols.emplace_back(quantize(FeatureColumn(std::move(v)), 11));  // one decimal digit
    }
    {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
        cols.emplace_back(std::move(v));
    }

    GroundTruthTree truth = experiment1_truth();
    truth.seed = cfg.seed;
    Target y = label_with_tree(truth, cols);
    for (double& v : y.values) v += cfg.sigma * rng.normal();

    return Exp1Output{make_dataset(std::move(cols), std::move(y)), std::move(truth),
                      {0.0, 0.0, 0.0, 0.1, 0.1, 0.8}};
}

namespace {

// Feasible region of one feature at a node. Continuous features track an
// interval; quantized features track a contiguous index range into the
// k levels i/(k-1).
struct FeatureBox {
    double lo = 0.0;
    double hi = 1.0;
    int lo_idx = 0;
    int hi_idx = 0;
    int k = 0;  // 0 marks a continuous feature

    bool splittable() const {
        if (k > 0) return hi_idx - lo_idx >= 1;
        return hi - lo >= 0.05;
    }
};

struct GrowLeaf {
    int node;
    int depth;
    std::vector<FeatureBox> boxes;  // indexed by position in used feature list
};

int quantization_of(const RandomTreeConfig& cfg, int feature) {
    for (const auto& [f, k] : cfg.quantization_levels) {
        if (f == feature) return k;
    }
    return 0;
}

bool try_grow_tree(const RandomTreeConfig& cfg, Rng& rng, GroundTruthTree& out) {
    const int n_splits = cfg.min_splits + static_cast<int>(rng.below(
                             static_cast<std::uint64_t>(cfg.max_splits - cfg.min_splits + 1)));

    std::vector<int> all(static_cast<std::size_t>(cfg.p_total));
    for (int j = 0; j < cfg.p_total; ++j) all[static_cast<std::size_t>(j)] = j;
    rng.shuffle(all);
    std::vector<int> used(all.begin(), all.begin() + cfg.p_used);
    std::sort(used.begin(), used.end());

    out = GroundTruthTree{};
    out.task = Task::kClassification;
    out.p_total = cfg.p_total;
    out.relevant_features = used;

    out.nodes.push_back(GroundTruthNode{});
    std::vector<GrowLeaf> leaves;
    {
        GrowLeaf root{0, 0, {}};
        for (int f : used) {
            FeatureBox box;
            box.k = quantization_of(cfg, f);
            if (box.k > 0) box.hi_idx = box.k - 1;
            root.boxes.push_back(box);
        }
        leaves.push_back(std::move(root));
    }

    for (int s = 0; s < n_splits; ++s) {
        std::vector<std::size_t> candidates;
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            for (const FeatureBox& box : leaves[i].boxes) {
                if (box.splittable()) {
                    candidates.push_back(i);
                    break;
                }
            }
        }
        if (candidates.empty()) return false;
        const std::size_t pick = candidates[rng.below(candidates.size())];
        GrowLeaf leaf = std::move(leaves[pick]);
        leaves.erase(leaves.begin() + static_cast<std::ptrdiff_t>(pick));

        std::vector<std::size_t> feats;
        for (std::size_t j = 0; j < leaf.boxes.size(); ++j) {
            if (leaf.boxes[j].splittable()) feats.push_back(j);
        }
        const std::size_t fj = feats[rng.below(feats.size())];
        FeatureBox& box = leaf.boxes[fj];

        double threshold;
        FeatureBox left_box = box, right_box = box;
        if (box.k > 0) {
            const int j = box.lo_idx + static_cast<int>(rng.below(
                              static_cast<std::uint64_t>(box.hi_idx - box.lo_idx)));
            const double step = 1.0 / static_cast<double>(box.k - 1);
            threshold = (static_cast<double>(j) + 0.5) * step;
            left_box.hi_idx = j;
            right_box.lo_idx = j + 1;
        } else {
            const double w = box.hi - box.lo;
            threshold = rng.uniform(box.lo + 0.1 * w, box.hi - 0.1 * w);
            left_box.hi = threshold;
            right_box.lo = threshold;
        }

        GroundTruthNode& node = out.nodes[static_cast<std::size_t>(leaf.node)];
        node.feature = used[fj];
        node.threshold = threshold;
        node.missing_goes_left = true;
        node.left = static_cast<int>(out.nodes.size());
        node.right = node.left + 1;
        out.nodes.push_back(GroundTruthNode{});
        out.nodes.push_back(GroundTruthNode{});

        GrowLeaf lchild{node.left, leaf.depth + 1, leaf.boxes};
        lchild.boxes[fj] = left_box;
        GrowLeaf rchild{node.right, leaf.depth + 1, std::move(leaf.boxes)};
        rchild.boxes[fj] = right_box;
        leaves.push_back(std::move(lchild));
        leaves.push_back(std::move(rchild));
    }

    // every designated feature must appear in at least one split
    std::vector<bool> seen(static_cast<std::size_t>(cfg.p_total), false);
    for (const GroundTruthNode& node : out.nodes) {
        if (!node.is_leaf()) seen[static_cast<std::size_t>(node.feature)] = true;
    }
    for (int f : used) {
        if (!seen[static_cast<std::size_t>(f)]) return false;
    }

    // labels: sibling leaves get opposite labels; a leaf whose sibling is
    // internal draws its own coin
    for (GroundTruthNode& node : out.nodes) {
        if (node.is_leaf()) continue;
        GroundTruthNode& l = out.nodes[static_cast<std::size_t>(node.left)];
        GroundTruthNode& r = out.nodes[static_cast<std::size_t>(node.right)];
        if (l.is_leaf() && r.is_leaf()) {
            const double a = rng.bernoulli(0.5) ? 1.0 : 0.0;
            l.leaf_value = a;
            r.leaf_value = 1.0 - a;
        } else if (l.is_leaf()) {
            l.leaf_value = rng.bernoulli(0.5) ? 1.0 : 0.0;
        } else if (r.is_leaf()) {
            r.leaf_value = rng.bernoulli(0.5) ? 1.0 : 0.0;
        }
    }
    return true;
}

}  // namespace

GroundTruthTree gen_random_tree(const RandomTreeConfig& cfg, Rng& rng) {
    if (cfg.min_splits > cfg.max_splits || cfg.min_splits < 1) {
        throw std::invalid_argument("gen_random_tree: invalid split bounds");
    }
    if (cfg.p_used > cfg.p_total || cfg.p_used < 1) {
        throw std::invalid_argument("gen_random_tree: invalid feature counts");
    }
    for (const auto& [f, k] : cfg.quantization_levels) {
        if (k < 2) throw std::invalid_argument("gen_random_tree: quantization needs k >= 2");
        if (f < 0 || f >= cfg.p_total) throw std::invalid_argument("gen_random_tree: quantized feature out of range");
    }
    GroundTruthTree tree;
    for (int attempt = 0; attempt < 1000; ++attempt) {
        if (try_grow_tree(cfg, rng, tree)) {
            tree.seed = cfg.seed;
            return tree;
        }
    }
    throw std::runtime_error("gen_random_tree: no feasible tree after 1000 attempts");
}

std::vector<FeatureColumn> sample_features(std::size_t n, const RandomTreeConfig& cfg, Rng& rng) {
    std::vector<FeatureColumn> cols;
    cols.reserve(static_cast<std::size_t>(cfg.p_total));
    for (int j = 0; j < cfg.p_total; ++j) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = rng.uniform01();
        FeatureColumn col(std::move(v));
        const int k = quantization_of(cfg, j);
        cols.push_back(k > 0 ? quantize(col, k) : std::move(col));
    }
    return cols;
}

FeatureColumn quantize(const FeatureColumn& col, int k) {
    if (k < 2) throw std::invalid_argument("quantize: k must be at least 2");
    std::vector<double> v(col.size());
    for (std::size_t i = 0; i < col.size(); ++i) {
        if (col.missing(i)) throw std::invalid_argument("quantize: missing entries not supported");
        v[i] = round_half_up(col.value(i) * static_cast<double>(k - 1)) / static_cast<double>(k - 1);
    }
    return FeatureColumn(std::move(v));
}

FeatureColumn inject_missing(const FeatureColumn& col, double fraction, Rng& rng) {
    if (!(fraction >= 0.0 && fraction < 1.0)) {
        throw std::invalid_argument("inject_missing: fraction must be in [0,1)");
    }
    const std::size_t n = col.size();
    const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    std::vector<double> v(n);
    std::vector<bool> m(n);
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = col.missing(i);
        v[i] = m[i] ? std::numeric_limits<double>::quiet_NaN() : col.value(i);
    }
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + rng.below(n - i);
        std::swap(idx[i], idx[j]);
        m[idx[i]] = true;
        v[idx[i]] = std::numeric_limits<double>::quiet_NaN();
    }
    return FeatureColumn(std::move(v), std::move(m));
}

Target label_with_tree(const GroundTruthTree& tree, const std::vector<FeatureColumn>& features) {
    if (static_cast<int>(features.size()) != tree.p_total) {
        throw std::invalid_argument("label_with_tree: feature count mismatch");
    }
    const std::size_t n = features.empty() ? 0 : features[0].size();
    Target t;
    t.kind = tree.task;
    t.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        t.values[i] = tree.route(ColsRow{&features, i});
    }
    return t;
}

std::string ground_truth_to_json(const GroundTruthTree& tree) {
    nlohmann::json doc;
    doc["task"] = tree.task == Task::kClassification ? "classification" : "regression";
    doc["p_total"] = tree.p_total;
    doc["relevant_features"] = tree.relevant_features;
    doc["seed"] = tree.seed;
    nlohmann::json nodes = nlohmann::json::array();
    for (const GroundTruthNode& node : tree.nodes) {
        nlohmann::json j;
        if (node.is_leaf()) {
            j["leaf_value"] = node.leaf_value;
        } else {
            j["feature"] = node.feature;
            j["threshold"] = node.threshold;
            j["missing_goes_left"] = node.missing_goes_left;
            j["left"] = node.left;
            j["right"] = node.right;
        }
        nodes.push_back(std::move(j));
    }
    doc["nodes"] = std::move(nodes);
    return doc.dump();
}

GroundTruthTree ground_truth_from_json(const std::string& text) {
    const nlohmann::json doc = nlohmann::json::parse(text);
    GroundTruthTree tree;
    tree.task = doc.at("task").get<std::string>() == "classification" ? Task::kClassification
                                                                      : Task::kRegression;
    tree.p_total = doc.at("p_total").get<int>();
    tree.relevant_features = doc.at("relevant_features").get<std::vector<int>>();
    tree.seed = doc.at("seed").get<std::uint64_t>();
    for (const nlohmann::json& j : doc.at("nodes")) {
        GroundTruthNode node;
        if (j.contains("feature")) {
            node.feature = j.at("feature").get<int>();
            node.threshold = j.at("threshold").get<double>();
            node.missing_goes_left = j.at("missing_goes_left").get<bool>();
            node.left = j.at("left").get<int>();
            node.right = j.at("right").get<int>();
        } else {
            node.leaf_value = j.at("leaf_value").get<double>();
        }
        tree.nodes.push_back(node);
    }
    if (tree.nodes.empty()) throw std::invalid_argument("ground_truth_from_json: no nodes");
    return tree;
}

}  // namespace treelab
