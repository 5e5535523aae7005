#include "treelab/opt_tree.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>

#include "treelab/cart.hpp"

namespace treelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Refitting leaf statistics: error is the misclassification count of the
// majority label or the SSE around the mean, both in raw (unnormalized)
// units.
struct Agg {
    std::size_t n = 0;
    double sum = 0.0;
    double sumsq = 0.0;
    double c1 = 0.0;

    void add(double y) {
        n += 1;
        sum += y;
        sumsq += y * y;
        c1 += y == 1.0 ? 1.0 : 0.0;
    }
    void remove(double y) {
        n -= 1;
        sum -= y;
        sumsq -= y * y;
        c1 -= y == 1.0 ? 1.0 : 0.0;
    }
    Agg minus(const Agg& o) const { return Agg{n - o.n, sum - o.sum, sumsq - o.sumsq, c1 - o.c1}; }
    double err(Task task) const {
        if (n == 0) return 0.0;
        if (task == Task::kClassification) {
            return static_cast<double>(n) - std::max(c1, static_cast<double>(n) - c1);
        }
        return std::max(0.0, sumsq - sum * sum / static_cast<double>(n));
    }
};

struct SplitChoice {
    double err = kInf;  // children error sum; infinity marks "no candidate"
    int feature = -1;
    double threshold = 0.0;
    bool missing_left = true;
};

// Per-feature row ids sorted by (value, row), rows with the feature missing
// excluded. Independent of any tree, so one table serves every restart and
// every grid cell over the same training set.
std::vector<std::vector<std::uint32_t>> sorted_orders(const Dataset& data) {
    std::vector<std::vector<std::uint32_t>> orders(data.n_features());
    for (std::size_t j = 0; j < data.n_features(); ++j) {
        const FeatureColumn& col = data.column(j);
        std::vector<std::uint32_t>& ord = orders[j];
        for (std::uint32_t r = 0; r < data.n_rows(); ++r) {
            if (!col.missing(r)) ord.push_back(r);
        }
        std::sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) {
            const double va = col.value(a), vb = col.value(b);
            return va < vb || (va == vb && a < b);
        });
    }
    return orders;
}

// Mutable tree under local search. Node storage is append-only; replaced
// subtrees are flagged dead. Rows live in one arena partitioned into
// contiguous per-node spans, and each node caches its subtree (error, splits),
// refreshed by rebuild() after an accepted move plus ancestor deltas. A
// clean (non-dirty) node provably has no improving move: a move's value
// depends only on the node's own rows, depth and descendants, all unchanged
// since the last failed evaluation.
class Search {
public:
    Search(const Dataset& data, Task task, int max_depth, double cp, std::size_t min_leaf,
           double baseline, const std::vector<std::vector<std::uint32_t>>& orders)
        : data_(data),
          task_(task),
          max_depth_(max_depth),
          cp_(cp),
          min_leaf_(min_leaf),
          baseline_(baseline),
          orders_(orders) {}

    void seed_from(const DecisionTree& tree) {
        nodes_.clear();
        nodes_.reserve(tree.nodes.size());
        for (const TreeNode& t : tree.nodes) {
            nodes_.push_back({t.feature, t.threshold, t.missing_goes_left, t.left, t.right});
        }
        init_state();
    }

    void seed_random(Rng& rng) {
        nodes_.clear();
        std::vector<std::uint32_t> all(data_.n_rows());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::uint32_t>(i);
        grow_random(std::move(all), max_depth_, rng);
        init_state();
    }

    // Random-order node visits until a full pass accepts no move.
    void run(Rng& rng) {
        while (pass(rng)) {
        }
    }

    double objective() const {
        return norm(err_[0]) + cp_ * static_cast<double>(splits_[0]);
    }

    // Splits whose left or right side carries no training rows collapse to
    // the populated side: error is unchanged and splits only drop, so J
    // never degrades here.
    DecisionTree materialize() const {
        DecisionTree out;
        out.task = task_;
        out.p_total = static_cast<int>(data_.n_features());
        std::vector<std::uint32_t> all(data_.n_rows());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::uint32_t>(i);
        emit(0, all, out);
        return out;
    }

private:
    struct SNode {
        int feature = -1;
        double threshold = 0.0;
        bool missing_left = true;
        int left = -1;
        int right = -1;

        bool is_leaf() const { return feature < 0; }
    };

    double norm(double err) const {
        if (baseline_ > 0.0) return err / baseline_;
        return err > 0.0 ? kInf : 0.0;
    }

    bool row_goes_left(const SNode& node, std::uint32_t r) const {
        const FeatureColumn& col = data_.column(static_cast<std::size_t>(node.feature));
        return col.missing(r) ? node.missing_left : col.value(r) <= node.threshold;
    }

    int route(int idx, std::uint32_t r) const {
        while (!nodes_[static_cast<std::size_t>(idx)].is_leaf()) {
            const SNode& node = nodes_[static_cast<std::size_t>(idx)];
            idx = row_goes_left(node, r) ? node.left : node.right;
        }
        return idx;
    }

    std::size_t span_size(std::size_t ui) const { return end_[ui] - begin_[ui]; }

    bool in_span(std::size_t ui, std::uint32_t r) const {
        return pos_[r] >= begin_[ui] && pos_[r] < end_[ui];
    }

    void grow_slots() {
        const std::size_t want = nodes_.size();
        if (begin_.size() < want) {
            begin_.resize(want, 0);
            end_.resize(want, 0);
            depth_.resize(want, 0);
            parent_.resize(want, -1);
            err_.resize(want, 0.0);
            splits_.resize(want, 0);
            alive_.resize(want, 0);
            dirty_.resize(want, 0);
        }
    }

    // Re-derives the arena partition, depth, parent and cached
    // (error, splits) of the whole subtree at idx from its span. Partition
    // is stable, so every span stays sorted by original row id.
    void rebuild(int idx) {
        const std::size_t ui = static_cast<std::size_t>(idx);
        alive_[ui] = 1;
        dirty_[ui] = 1;
        const SNode node = nodes_[ui];
        if (node.is_leaf()) {
            Agg agg;
            for (std::uint32_t k = begin_[ui]; k < end_[ui]; ++k) agg.add(data_.y(arena_[k]));
            err_[ui] = agg.err(task_);
            splits_[ui] = 0;
            return;
        }
        part_l_.clear();
        part_r_.clear();
        for (std::uint32_t k = begin_[ui]; k < end_[ui]; ++k) {
            const std::uint32_t r = arena_[k];
            (row_goes_left(node, r) ? part_l_ : part_r_).push_back(r);
        }
        std::uint32_t k = begin_[ui];
        for (std::uint32_t r : part_l_) {
            arena_[k] = r;
            pos_[r] = k;
            ++k;
        }
        const std::uint32_t mid = k;
        for (std::uint32_t r : part_r_) {
            arena_[k] = r;
            pos_[r] = k;
            ++k;
        }
        const std::size_t ul = static_cast<std::size_t>(node.left);
        const std::size_t ur = static_cast<std::size_t>(node.right);
        begin_[ul] = begin_[ui];
        end_[ul] = mid;
        begin_[ur] = mid;
        end_[ur] = end_[ui];
        depth_[ul] = depth_[ui] + 1;
        depth_[ur] = depth_[ui] + 1;
        parent_[ul] = idx;
        parent_[ur] = idx;
        rebuild(node.left);
        rebuild(node.right);
        err_[ui] = err_[ul] + err_[ur];
        splits_[ui] = 1 + splits_[ul] + splits_[ur];
    }

    void init_state() {
        const std::size_t n = data_.n_rows();
        arena_.resize(n);
        pos_.resize(n);
        for (std::uint32_t r = 0; r < n; ++r) {
            arena_[r] = r;
            pos_[r] = r;
        }
        leaf_l_.resize(n);
        leaf_r_.resize(n);
        begin_.assign(nodes_.size(), 0);
        end_.assign(nodes_.size(), 0);
        depth_.assign(nodes_.size(), 0);
        parent_.assign(nodes_.size(), -1);
        err_.assign(nodes_.size(), 0.0);
        splits_.assign(nodes_.size(), 0);
        alive_.assign(nodes_.size(), 0);
        dirty_.assign(nodes_.size(), 0);
        end_[0] = static_cast<std::uint32_t>(n);
        rebuild(0);
    }

    void mark_dead(int idx) {
        if (idx < 0) return;
        alive_[static_cast<std::size_t>(idx)] = 0;
        const SNode& node = nodes_[static_cast<std::size_t>(idx)];
        if (!node.is_leaf()) {
            mark_dead(node.left);
            mark_dead(node.right);
        }
    }

    int grow_random(std::vector<std::uint32_t> rows, int depth_left, Rng& rng) {
        const int idx = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        if (depth_left == 0 || rows.size() < 2 * min_leaf_) return idx;

        std::vector<std::size_t> usable;
        for (std::size_t j = 0; j < data_.n_features(); ++j) {
            const FeatureColumn& col = data_.column(j);
            double lo = kInf, hi = -kInf;
            for (std::uint32_t r : rows) {
                if (col.missing(r)) continue;
                lo = std::min(lo, col.value(r));
                hi = std::max(hi, col.value(r));
            }
            if (lo < hi) usable.push_back(j);
        }
        if (usable.empty()) return idx;

        const std::size_t j = usable[rng.below(usable.size())];
        const FeatureColumn& col = data_.column(j);
        double lo = kInf, hi = -kInf;
        for (std::uint32_t r : rows) {
            if (col.missing(r)) continue;
            lo = std::min(lo, col.value(r));
            hi = std::max(hi, col.value(r));
        }
        const double threshold = rng.uniform(lo, hi);
        const bool missing_left = rng.bernoulli(0.5);

        std::vector<std::uint32_t> left, right;
        for (std::uint32_t r : rows) {
            const bool go_left = col.missing(r) ? missing_left : col.value(r) <= threshold;
            (go_left ? left : right).push_back(r);
        }
        if (left.size() < min_leaf_ || right.size() < min_leaf_) return idx;  // infeasible draw

        nodes_[static_cast<std::size_t>(idx)].feature = static_cast<int>(j);
        nodes_[static_cast<std::size_t>(idx)].threshold = threshold;
        nodes_[static_cast<std::size_t>(idx)].missing_left = missing_left;
        const int l = grow_random(std::move(left), depth_left - 1, rng);
        const int r = grow_random(std::move(right), depth_left - 1, rng);
        nodes_[static_cast<std::size_t>(idx)].left = l;
        nodes_[static_cast<std::size_t>(idx)].right = r;
        return idx;
    }

    void collect_alive(int idx, std::vector<int>& out) const {
        out.push_back(idx);
        const SNode& node = nodes_[static_cast<std::size_t>(idx)];
        if (!node.is_leaf()) {
            collect_alive(node.left, out);
            collect_alive(node.right, out);
        }
    }

    // Node rows of feature j in (value, row) order: filter the global order
    // when the span dominates the dataset, sort the span otherwise. Both
    // paths yield the identical sequence.
    void gather_sorted(std::size_t ui, std::size_t j, std::vector<std::uint32_t>& out) const {
        out.clear();
        const FeatureColumn& col = data_.column(j);
        if (8 * span_size(ui) >= data_.n_rows()) {
            for (std::uint32_t r : orders_[j]) {
                if (in_span(ui, r)) out.push_back(r);
            }
            return;
        }
        for (std::uint32_t k = begin_[ui]; k < end_[ui]; ++k) {
            if (!col.missing(arena_[k])) out.push_back(arena_[k]);
        }
        std::sort(out.begin(), out.end(), [&](std::uint32_t a, std::uint32_t b) {
            const double va = col.value(a), vb = col.value(b);
            return va < vb || (va == vb && a < b);
        });
    }

    // Error-minimizing single split of the node's rows; candidate set and
    // tie order (feature asc, threshold asc, missing-left first) mirror the
    // greedy learner's enumeration.
    SplitChoice best_stump(std::size_t ui) {
        SplitChoice best;
        Agg whole;
        for (std::uint32_t k = begin_[ui]; k < end_[ui]; ++k) whole.add(data_.y(arena_[k]));
        for (std::size_t j = 0; j < data_.n_features(); ++j) {
            const FeatureColumn& col = data_.column(j);
            gather_sorted(ui, j, pres_);
            if (pres_.size() < 2) continue;
            Agg miss;
            if (pres_.size() < span_size(ui)) {
                for (std::uint32_t k = begin_[ui]; k < end_[ui]; ++k) {
                    if (col.missing(arena_[k])) miss.add(data_.y(arena_[k]));
                }
            }
            Agg prefix;
            for (std::size_t i = 0; i + 1 < pres_.size(); ++i) {
                prefix.add(data_.y(pres_[i]));
                const double v = col.value(pres_[i]);
                const double next = col.value(pres_[i + 1]);
                if (next <= v) continue;
                const double threshold = v + (next - v) / 2.0;
                const int dirs = miss.n > 0 ? 2 : 1;
                for (int dir = 0; dir < dirs; ++dir) {
                    Agg left = prefix;
                    if (dir == 0 && miss.n > 0) {
                        left.n += miss.n;
                        left.sum += miss.sum;
                        left.sumsq += miss.sumsq;
                        left.c1 += miss.c1;
                    }
                    const Agg right = whole.minus(left);
                    if (left.n < min_leaf_ || right.n < min_leaf_) continue;
                    const double err = left.err(task_) + right.err(task_);
                    if (err < best.err) {
                        best = {err, static_cast<int>(j), threshold, dir == 0};
                    }
                }
            }
        }
        return best;
    }

    // Best replacement split at an internal node keeping both descendant
    // subtrees: rows sweep from their right-subtree leaf into their
    // left-subtree one in sorted order with incremental aggregates. The
    // all-rows-right base state is built once and restored per candidate
    // direction by copying only the touched leaves.
    SplitChoice best_reopt(int idx) {
        const std::size_t ui = static_cast<std::size_t>(idx);
        const SNode node = nodes_[ui];
        const std::size_t m = span_size(ui);
        if (base_.size() < nodes_.size()) base_.resize(nodes_.size());
        if (scratch_.size() < nodes_.size()) scratch_.resize(nodes_.size());

        base_touched_.clear();
        double base_err = 0.0;
        int base_viol = 0;
        for (std::uint32_t k = begin_[ui]; k < end_[ui]; ++k) {
            const std::uint32_t r = arena_[k];
            leaf_l_[r] = route(node.left, r);
            leaf_r_[r] = route(node.right, r);
            Agg& agg = base_[static_cast<std::size_t>(leaf_r_[r])];
            if (agg.n == 0) base_touched_.push_back(leaf_r_[r]);
            agg.add(data_.y(r));
        }
        for (int leaf : base_touched_) {
            base_err += base_[static_cast<std::size_t>(leaf)].err(task_);
            if (undersized(base_[static_cast<std::size_t>(leaf)].n)) base_viol += 1;
        }

        SplitChoice best;
        for (std::size_t j = 0; j < data_.n_features(); ++j) {
            const FeatureColumn& col = data_.column(j);
            gather_sorted(ui, j, pres_);
            if (pres_.size() < 2) continue;
            miss_rows_.clear();
            if (pres_.size() < m) {
                for (std::uint32_t k = begin_[ui]; k < end_[ui]; ++k) {
                    if (col.missing(arena_[k])) miss_rows_.push_back(arena_[k]);
                }
            }
            const int dirs = miss_rows_.empty() ? 1 : 2;
            for (int dir = 0; dir < dirs; ++dir) {
                touched_ = base_touched_;
                for (int leaf : touched_) {
                    scratch_[static_cast<std::size_t>(leaf)] = base_[static_cast<std::size_t>(leaf)];
                }
                double err = base_err;
                viol_ = base_viol;
                if (dir == 0) {
                    for (std::uint32_t r : miss_rows_) {
                        err += move_row(r, leaf_r_[r], leaf_l_[r]);
                    }
                }
                std::size_t n_left = dir == 0 ? miss_rows_.size() : 0;
                for (std::size_t k = 0; k + 1 < pres_.size(); ++k) {
                    const std::uint32_t r = pres_[k];
                    err += move_row(r, leaf_r_[r], leaf_l_[r]);
                    n_left += 1;

                    const double v = col.value(r);
                    const double next = col.value(pres_[k + 1]);
                    if (next <= v) continue;
                    if (n_left < min_leaf_ || m - n_left < min_leaf_) continue;
                    if (viol_ != 0) continue;  // some re-routed leaf is undersized
                    if (err < best.err) {
                        best = {err, static_cast<int>(j), v + (next - v) / 2.0, dir == 0};
                    }
                }
                for (int leaf : touched_) scratch_[static_cast<std::size_t>(leaf)] = Agg{};
            }
        }
        for (int leaf : base_touched_) base_[static_cast<std::size_t>(leaf)] = Agg{};
        return best;
    }

    // Empty leaves collapse away at materialization, but a leaf left with
    // 1..min_leaf-1 rows would break the size constraint.
    bool undersized(std::size_t n) const { return n >= 1 && n < min_leaf_; }

    // Moves one row between working leaf aggregates; returns the error delta
    // and keeps the undersized-leaf count current.
    double move_row(std::uint32_t r, int from_leaf, int to_leaf) {
        const double y = data_.y(r);
        Agg& from = scratch_[static_cast<std::size_t>(from_leaf)];
        double delta = -from.err(task_);
        viol_ -= undersized(from.n) ? 1 : 0;
        from.remove(y);
        viol_ += undersized(from.n) ? 1 : 0;
        delta += from.err(task_);
        Agg& to = scratch_[static_cast<std::size_t>(to_leaf)];
        if (to.n == 0) touched_.push_back(to_leaf);
        delta -= to.err(task_);
        viol_ -= undersized(to.n) ? 1 : 0;
        to.add(y);
        viol_ += undersized(to.n) ? 1 : 0;
        delta += to.err(task_);
        return delta;
    }

    bool pass(Rng& rng) {
        std::vector<int> ids;
        collect_alive(0, ids);
        rng.shuffle(ids);

        bool improved = false;
        for (int id : ids) {
            const std::size_t ui = static_cast<std::size_t>(id);
            if (!alive_[ui] || !dirty_[ui]) continue;
            const bool is_leaf = nodes_[ui].is_leaf();
            const bool can_stump =
                depth_[ui] < max_depth_ && span_size(ui) >= 2 * min_leaf_;
            if (is_leaf && !can_stump) {
                dirty_[ui] = 0;
                continue;
            }

            const double cur_err = err_[ui];
            const int cur_splits = splits_[ui];
            const double cur_val = norm(cur_err) + cp_ * static_cast<double>(cur_splits);

            Agg whole;
            for (std::uint32_t k = begin_[ui]; k < end_[ui]; ++k) whole.add(data_.y(arena_[k]));

            // candidate 1: collapse to a leaf
            double best_val = norm(whole.err(task_));
            int best_kind = 0;
            SplitChoice best_split;

            // candidate 2: best stump in place of the subtree
            if (can_stump) {
                const SplitChoice stump = best_stump(ui);
                if (stump.feature >= 0) {
                    const double val = norm(stump.err) + cp_;
                    if (val < best_val) {
                        best_val = val;
                        best_kind = 1;
                        best_split = stump;
                    }
                }
            }

            // candidate 3: re-optimize this split, descendants fixed
            if (!is_leaf) {
                const SplitChoice reopt = best_reopt(id);
                if (reopt.feature >= 0) {
                    const double val = norm(reopt.err) + cp_ * static_cast<double>(cur_splits);
                    if (val < best_val) {
                        best_val = val;
                        best_kind = 2;
                        best_split = reopt;
                    }
                }
            }

            if (best_val >= cur_val - 1e-11 * (1.0 + std::fabs(cur_val))) {
                dirty_[ui] = 0;  // unchanged rows + subtree → still no move
                continue;
            }

            if (best_kind == 0) {
                mark_dead(nodes_[ui].left);
                mark_dead(nodes_[ui].right);
                nodes_[ui].feature = -1;
                nodes_[ui].left = nodes_[ui].right = -1;
            } else {
                if (best_kind == 1) {
                    mark_dead(nodes_[ui].left);
                    mark_dead(nodes_[ui].right);
                    // append children first: push_back may reallocate nodes_
                    const int l = static_cast<int>(nodes_.size());
                    nodes_.emplace_back();
                    nodes_.emplace_back();
                    grow_slots();
                    nodes_[ui].left = l;
                    nodes_[ui].right = l + 1;
                }
                nodes_[ui].feature = best_split.feature;
                nodes_[ui].threshold = best_split.threshold;
                nodes_[ui].missing_left = best_split.missing_left;
            }
            rebuild(id);
            assert(norm(err_[ui]) + cp_ * static_cast<double>(splits_[ui]) <=
                   cur_val + 1e-9 * (1.0 + std::fabs(cur_val)));
            // ancestors see the subtree's new error and split count and may
            // have gained moves of their own
            const double derr = err_[ui] - cur_err;
            const int dsplits = splits_[ui] - cur_splits;
            for (int p = parent_[ui]; p >= 0; p = parent_[static_cast<std::size_t>(p)]) {
                err_[static_cast<std::size_t>(p)] += derr;
                splits_[static_cast<std::size_t>(p)] += dsplits;
                dirty_[static_cast<std::size_t>(p)] = 1;
            }
            improved = true;
        }
        return improved;
    }

    int emit(int idx, const std::vector<std::uint32_t>& rows, DecisionTree& out) const {
        const SNode& node = nodes_[static_cast<std::size_t>(idx)];
        if (!node.is_leaf()) {
            std::vector<std::uint32_t> left, right;
            for (std::uint32_t r : rows) {
                (row_goes_left(node, r) ? left : right).push_back(r);
            }
            if (left.empty()) return emit(node.right, rows, out);
            if (right.empty()) return emit(node.left, rows, out);
            const int self = static_cast<int>(out.nodes.size());
            out.nodes.emplace_back();
            out.nodes[static_cast<std::size_t>(self)].feature = node.feature;
            out.nodes[static_cast<std::size_t>(self)].threshold = node.threshold;
            out.nodes[static_cast<std::size_t>(self)].missing_goes_left = node.missing_left;
            const int l = emit(node.left, left, out);
            const int r = emit(node.right, right, out);
            out.nodes[static_cast<std::size_t>(self)].left = l;
            out.nodes[static_cast<std::size_t>(self)].right = r;
            return self;
        }
        const int self = static_cast<int>(out.nodes.size());
        out.nodes.emplace_back();
        return self;
    }

    const Dataset& data_;
    Task task_;
    int max_depth_;
    double cp_;
    std::size_t min_leaf_;
    double baseline_;
    const std::vector<std::vector<std::uint32_t>>& orders_;

    std::vector<SNode> nodes_;
    std::vector<std::uint32_t> arena_;
    std::vector<std::uint32_t> pos_;
    std::vector<std::uint32_t> begin_;
    std::vector<std::uint32_t> end_;
    std::vector<int> depth_;
    std::vector<int> parent_;
    std::vector<double> err_;
    std::vector<int> splits_;
    std::vector<char> alive_;
    std::vector<char> dirty_;

    std::vector<std::uint32_t> part_l_;
    std::vector<std::uint32_t> part_r_;
    std::vector<std::uint32_t> pres_;
    std::vector<std::uint32_t> miss_rows_;
    std::vector<int> leaf_l_;
    std::vector<int> leaf_r_;
    std::vector<Agg> base_;
    std::vector<Agg> scratch_;
    std::vector<int> base_touched_;
    std::vector<int> touched_;
    int viol_ = 0;
};

double dataset_baseline(const Dataset& data, Task task) {
    Agg whole;
    for (std::size_t i = 0; i < data.n_rows(); ++i) whole.add(data.y(i));
    return whole.err(task);
}

double validation_error(const DecisionTree& tree, const Dataset& data) {
    double err = 0.0;
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        if (tree.task == Task::kClassification) {
            err += predict(tree, RowRef{&data, i}) != data.y(i) ? 1.0 : 0.0;
        } else {
            const double d = predict_value(tree, RowRef{&data, i}) - data.y(i);
            err += d * d;
        }
    }
    return err;
}

DecisionTree local_search_impl(const Dataset& train, Task task, int depth, double cp, Rng& rng,
                               int restarts, std::size_t min_leaf, double baseline,
                               const DecisionTree& greedy_seed,
                               const std::vector<std::vector<std::uint32_t>>& orders) {
    DecisionTree best;
    double best_j = kInf;
    for (int r = 0; r < restarts; ++r) {
        Search search(train, task, depth, cp, min_leaf, baseline, orders);
        if (r == 0) {
            search.seed_from(greedy_seed);
        } else {
            search.seed_random(rng);
        }
        search.run(rng);
        const double j = search.objective();
        if (j < best_j) {
            best_j = j;
            best = search.materialize();
        }
    }
    annotate_from_data(best, train);
    return best;
}

DecisionTree greedy_truncated(const Dataset& train, Task task, int depth, std::size_t min_leaf) {
    GrowLimits limits;
    limits.min_leaf = min_leaf;
    limits.max_depth = depth;
    return grow_cart(train, task, limits);
}

}  // namespace

double search_objective(const DecisionTree& tree, const Dataset& data, Task task, double cp) {
    if (task != data.task()) throw std::invalid_argument("search_objective: task mismatch");
    const double baseline = dataset_baseline(data, task);
    const double err = validation_error(tree, data);
    double norm;
    if (baseline > 0.0) {
        norm = err / baseline;
    } else {
        norm = err > 0.0 ? kInf : 0.0;
    }
    return norm + cp * static_cast<double>(count_splits(tree));
}

DecisionTree local_search(const Dataset& train, Task task, int depth, double cp, Rng& rng,
                          int restarts, std::size_t min_leaf) {
    if (depth < 1) throw std::invalid_argument("local_search: depth must be at least 1");
    if (restarts < 1) throw std::invalid_argument("local_search: restarts must be at least 1");
    if (min_leaf < 1) throw std::invalid_argument("local_search: min_leaf must be at least 1");
    if (task != train.task()) throw std::invalid_argument("local_search: task mismatch");
    const double baseline = dataset_baseline(train, task);
    const auto orders = sorted_orders(train);
    const DecisionTree greedy_seed = greedy_truncated(train, task, depth, min_leaf);
    return local_search_impl(train, task, depth, cp, rng, restarts, min_leaf, baseline,
                             greedy_seed, orders);
}

DecisionTree fit_oct_validated(const Dataset& train, const Dataset& valid, Task task,
                               const OptSearchConfig& cfg) {
    if (cfg.depth_grid.empty() || cfg.cp_grid.empty()) {
        throw std::invalid_argument("fit_oct_validated: empty grid");
    }
    if (cfg.restarts < 1) throw std::invalid_argument("fit_oct_validated: restarts");
    if (cfg.min_leaf < 1) throw std::invalid_argument("fit_oct_validated: min_leaf");
    if (valid.n_features() != train.n_features() || valid.task() != train.task()) {
        throw std::invalid_argument("fit_oct_validated: train/valid schema mismatch");
    }
    if (task != train.task()) throw std::invalid_argument("fit_oct_validated: task mismatch");

    const double baseline = dataset_baseline(train, task);
    const auto orders = sorted_orders(train);

    DecisionTree best;
    double best_err = kInf;
    int best_splits = 0;
    for (std::size_t di = 0; di < cfg.depth_grid.size(); ++di) {
        const DecisionTree greedy_seed =
            greedy_truncated(train, task, cfg.depth_grid[di], cfg.min_leaf);
        for (std::size_t ci = 0; ci < cfg.cp_grid.size(); ++ci) {
            // independent stream per cell: any parallel schedule reproduces
            // the sequential selection
            Rng rng(mix_seed(mix_seed(cfg.seed, 3100 + di), ci));
            DecisionTree tree =
                local_search_impl(train, task, cfg.depth_grid[di], cfg.cp_grid[ci], rng,
                                  cfg.restarts, cfg.min_leaf, baseline, greedy_seed, orders);
            const double err = validation_error(tree, valid);
            const int splits = count_splits(tree);
            if (err < best_err || (err == best_err && splits < best_splits)) {
                best_err = err;
                best_splits = splits;
                best = std::move(tree);
            }
        }
    }
    // cost-complexity pass over the winner: a split survives only if
    // removing it costs validation error, so decorative splits are trimmed
    for (PruneStep& step : prune_sequence(best, train)) {
        const double err = validation_error(step.tree, valid);
        const int splits = count_splits(step.tree);
        if (err < best_err || (err == best_err && splits < best_splits)) {
            best_err = err;
            best_splits = splits;
            best = std::move(step.tree);
        }
    }
    return best;
}

}  // namespace treelab
