#include "treelab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <thread>
#include <utility>

#include "treelab/cart.hpp"
#include "treelab/opt_tree.hpp"
#include "treelab/shap.hpp"
#include "treelab/synthgen.hpp"

namespace treelab {

namespace {

struct RepData {
    Dataset data;
    GroundTruthTree truth;
};

int experiment_p(int experiment) { return experiment == 1 ? 6 : 7; }

Task experiment_task(int experiment) {
    return experiment == 1 ? Task::kRegression : Task::kClassification;
}

RandomTreeConfig random_tree_config(int experiment, std::uint64_t seed) {
    RandomTreeConfig rt;
    rt.seed = seed;
    if (experiment == 3) {
        // the biased setting rounds the four unused-by-default features to
        // 2, 4, 10 and 20 levels
        rt.quantization_levels = {{3, 2}, {4, 4}, {5, 10}, {6, 20}};
    }
    return rt;
}

RepData generate_rep_data(const ExperimentConfig& cfg, std::size_t n, std::uint64_t rep_seed) {
    if (cfg.experiment == 1) {
        Rng rng(mix_seed(rep_seed, 1));
        Exp1Output out = gen_experiment1({n, cfg.sigma, mix_seed(rep_seed, 1)}, rng);
        return {std::move(out.data), std::move(out.truth)};
    }
    const RandomTreeConfig rt = random_tree_config(cfg.experiment, mix_seed(rep_seed, 1));
    Rng tree_rng(mix_seed(rep_seed, 1));
    GroundTruthTree truth = gen_random_tree(rt, tree_rng);
    Rng feat_rng(mix_seed(rep_seed, 2));
    std::vector<FeatureColumn> cols = sample_features(n, rt, feat_rng);
    Target target = label_with_tree(truth, cols);
    return {make_dataset(std::move(cols), std::move(target)), std::move(truth)};
}

Dataset generate_holdout(const ExperimentConfig& cfg, const GroundTruthTree& truth,
                         std::uint64_t rep_seed) {
    const RandomTreeConfig rt = random_tree_config(cfg.experiment, 0);
    Rng rng(mix_seed(rep_seed, 4));
    std::vector<FeatureColumn> cols = sample_features(cfg.holdout_n, rt, rng);
    Target target = label_with_tree(truth, cols);
    return make_dataset(std::move(cols), std::move(target));
}

bool wants(const std::vector<Method>& methods, Method m) {
    return std::find(methods.begin(), methods.end(), m) != methods.end();
}

// All requested method records of one repetition. Every random stream
// derives from the rep seed, so the slot content is schedule-independent.
// Any failure flags the affected records and never escapes the worker.
std::vector<RepRecord> run_rep(const ExperimentConfig& cfg, const std::vector<Method>& methods,
                               std::size_t n, int rep) {
    std::vector<RepRecord> out;
    out.reserve(methods.size());
    for (Method m : methods) {
        RepRecord rec;
        rec.method = m;
        rec.n = n;
        rec.rep = rep;
        rec.failed = true;
        out.push_back(std::move(rec));
    }

    const std::uint64_t rep_seed = derive_rep_seed(cfg.seed, cfg.experiment, n, rep);
    const Task task = experiment_task(cfg.experiment);
    try {
        const RepData gen = generate_rep_data(cfg, n, rep_seed);
        Rng split_rng(mix_seed(rep_seed, 3));
        const auto [train, valid] = split_train_valid(gen.data, cfg.valid_fraction, split_rng);
        std::optional<Dataset> holdout;
        if (cfg.experiment != 1) holdout = generate_holdout(cfg, gen.truth, rep_seed);

        std::optional<BoostedEnsemble> gbt_model;
        if (wants(methods, Method::kGbt) || wants(methods, Method::kShap)) {
            try {
                gbt_model = fit_gbt_validated(train, valid, task);
            } catch (const std::exception&) {
                // the gbt and shap records stay flagged
            }
        }

        for (RepRecord& rec : out) {
            try {
                switch (rec.method) {
                    case Method::kCart: {
                        const DecisionTree tree = fit_cart_validated(train, valid, task);
                        rec.shares = mdi_importance(tree).shares;
                        if (holdout) rec.holdout = holdout_accuracy(tree, *holdout);
                        break;
                    }
                    case Method::kOct: {
                        OptSearchConfig oc;
                        oc.seed = mix_seed(rep_seed, 5);
                        const DecisionTree tree = fit_oct_validated(train, valid, task, oc);
                        rec.shares = mdi_importance(tree).shares;
                        if (holdout) rec.holdout = holdout_accuracy(tree, *holdout);
                        break;
                    }
                    case Method::kGbt: {
                        if (!gbt_model) throw std::runtime_error("boosted fit failed");
                        rec.shares = gain_importance(*gbt_model).shares;
                        if (holdout) rec.holdout = holdout_accuracy(*gbt_model, *holdout);
                        break;
                    }
                    case Method::kShap: {
                        if (!gbt_model) throw std::runtime_error("boosted fit failed");
                        rec.shares = shap_importance(*gbt_model, train).shares;
                        if (holdout) rec.holdout = holdout_accuracy(*gbt_model, *holdout);
                        break;
                    }
                }
                rec.irrelevant =
                    irrelevant_share(ImportanceVector{rec.shares}, gen.truth.relevant_features);
                rec.failed = false;
            } catch (const std::exception&) {
                rec.failed = true;
                rec.shares.clear();
                rec.irrelevant = 0.0;
                rec.holdout = -1.0;
            }
        }
    } catch (const std::exception&) {
        // generation or split failure: every record stays flagged
    }
    return out;
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.experiment < 1 || cfg.experiment > 3) {
        throw std::invalid_argument("run_experiment: experiment must be 1, 2 or 3");
    }
    if (cfg.n_grid.empty()) throw std::invalid_argument("run_experiment: empty n grid");
    for (std::size_t n : cfg.n_grid) {
        if (n < 8) throw std::invalid_argument("run_experiment: n too small");
    }
    if (cfg.reps < 1) throw std::invalid_argument("run_experiment: reps must be >= 1");
    if (cfg.methods.empty()) throw std::invalid_argument("run_experiment: no methods");
    if (!(cfg.valid_fraction > 0.0 && cfg.valid_fraction < 1.0)) {
        throw std::invalid_argument("run_experiment: valid_fraction outside (0,1)");
    }
    if (cfg.experiment == 1 && !(cfg.sigma > 0.0)) {
        throw std::invalid_argument("run_experiment: sigma must be positive");
    }
    if (cfg.experiment != 1 && cfg.holdout_n < 1) {
        throw std::invalid_argument("run_experiment: holdout_n must be >= 1");
    }
    if (cfg.workers < 1) throw std::invalid_argument("run_experiment: workers must be >= 1");
}

void append_real(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    out += buf;
}

bool trivial_shares(const std::vector<double>& shares) {
    for (double s : shares) {
        if (s != 0.0) return false;
    }
    return true;
}

}  // namespace

std::string method_name(Method method) {
    switch (method) {
        case Method::kCart: return "cart";
        case Method::kOct: return "oct";
        case Method::kGbt: return "gbt";
        case Method::kShap: return "shap";
    }
    return "?";
}

std::optional<Method> parse_method(const std::string& name) {
    if (name == "cart") return Method::kCart;
    if (name == "oct") return Method::kOct;
    if (name == "gbt") return Method::kGbt;
    if (name == "shap") return Method::kShap;
    return std::nullopt;
}

int paper_reps(int experiment) { return experiment == 1 ? 2000 : 100; }

std::uint64_t derive_rep_seed(std::uint64_t master, int experiment, std::size_t n, int rep) {
    std::uint64_t s = mix_seed(master, static_cast<std::uint64_t>(experiment));
    s = mix_seed(s, static_cast<std::uint64_t>(n));
    return mix_seed(s, static_cast<std::uint64_t>(rep));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);

    // canonical method order: records sort by method name
    std::vector<Method> methods = cfg.methods;
    std::sort(methods.begin(), methods.end(), [](Method a, Method b) {
        return method_name(a) < method_name(b);
    });
    methods.erase(std::unique(methods.begin(), methods.end()), methods.end());

    const std::size_t n_tasks = cfg.n_grid.size() * static_cast<std::size_t>(cfg.reps);
    std::vector<std::vector<RepRecord>> slots(n_tasks);
    std::atomic<std::size_t> next{0};
    auto body = [&]() {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= n_tasks) return;
            const std::size_t ni = t / static_cast<std::size_t>(cfg.reps);
            const int rep = static_cast<int>(t % static_cast<std::size_t>(cfg.reps));
            slots[t] = run_rep(cfg, methods, cfg.n_grid[ni], rep);
        }
    };
    const int workers =
        std::min<int>(cfg.workers, static_cast<int>(std::max<std::size_t>(n_tasks, 1)));
    if (workers <= 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(body);
        for (std::thread& th : pool) th.join();
    }

    ExperimentResult result;
    result.cfg = cfg;
    result.cfg.methods = methods;
    result.p_total = experiment_p(cfg.experiment);
    result.records.reserve(n_tasks * methods.size());
    for (std::vector<RepRecord>& slot : slots) {
        for (RepRecord& rec : slot) result.records.push_back(std::move(rec));
    }
    std::sort(result.records.begin(), result.records.end(),
              [](const RepRecord& a, const RepRecord& b) {
                  const std::string ma = method_name(a.method), mb = method_name(b.method);
                  if (ma != mb) return ma < mb;
                  if (a.n != b.n) return a.n < b.n;
                  return a.rep < b.rep;
              });

    std::size_t failed = 0;
    for (const RepRecord& rec : result.records) failed += rec.failed ? 1 : 0;
    if (failed * 100 > result.records.size()) {
        throw std::runtime_error("run_experiment: more than 1% of records failed");
    }
    return result;
}

double irrelevant_share(const ImportanceVector& imp, const std::vector<int>& relevant) {
    double outside = 0.0;
    for (std::size_t j = 0; j < imp.shares.size(); ++j) {
        const double s = imp.shares[j];
        if (s < 0.0) throw std::invalid_argument("irrelevant_share: negative share");
        if (std::find(relevant.begin(), relevant.end(), static_cast<int>(j)) == relevant.end()) {
            outside += s;
        }
    }
    return std::min(outside, 1.0);
}

double holdout_accuracy(const DecisionTree& tree, const Dataset& test) {
    if (tree.task != Task::kClassification || test.task() != Task::kClassification) {
        throw std::invalid_argument("holdout_accuracy: classification only");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < test.n_rows(); ++i) {
        hits += predict(tree, RowRef{&test, i}) == test.y(i) ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(test.n_rows());
}

double holdout_accuracy(const BoostedEnsemble& ens, const Dataset& test) {
    if (ens.task != Task::kClassification || test.task() != Task::kClassification) {
        throw std::invalid_argument("holdout_accuracy: classification only");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < test.n_rows(); ++i) {
        hits += predict(ens, RowRef{&test, i}) == test.y(i) ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(test.n_rows());
}

std::vector<SummaryRow> aggregate(const ExperimentResult& result) {
    if (result.records.empty()) throw std::invalid_argument("aggregate: no records");
    const std::size_t p = static_cast<std::size_t>(result.p_total);

    std::vector<SummaryRow> rows;
    std::size_t i = 0;
    while (i < result.records.size()) {
        const Method method = result.records[i].method;
        const std::size_t n = result.records[i].n;
        std::vector<double> mean(p, 0.0), m2(p, 0.0);
        double irr = 0.0, acc = 0.0;
        int k = 0, acc_k = 0;
        for (; i < result.records.size() && result.records[i].method == method &&
               result.records[i].n == n;
             ++i) {
            const RepRecord& rec = result.records[i];
            if (rec.failed) continue;
            if (!result.cfg.aggregate_trivial && trivial_shares(rec.shares)) continue;
            k += 1;
            for (std::size_t j = 0; j < p; ++j) {
                // Welford keeps the per-feature variance for the standard error
                const double d = rec.shares[j] - mean[j];
                mean[j] += d / static_cast<double>(k);
                m2[j] += d * (rec.shares[j] - mean[j]);
            }
            irr += rec.irrelevant;
            if (rec.holdout >= 0.0) {
                acc += rec.holdout;
                acc_k += 1;
            }
        }
        if (k == 0) continue;
        for (std::size_t j = 0; j < p; ++j) {
            SummaryRow row;
            row.method = method;
            row.n = n;
            row.feature = static_cast<int>(j) + 1;
            row.mean_share = mean[j];
            row.se_share =
                k > 1 ? std::sqrt(m2[j] / static_cast<double>(k - 1)) /
                            std::sqrt(static_cast<double>(k))
                      : 0.0;
            row.mean_irrelevant = irr / static_cast<double>(k);
            row.mean_holdout = acc_k > 0 ? acc / static_cast<double>(acc_k) : -1.0;
            row.reps_used = k;
            rows.push_back(row);
        }
    }
    return rows;
}

std::string results_to_csv(const ExperimentResult& result) {
    std::string out =
        "experiment,method,n,sigma,rep,feature,importance_share,irrelevant_share,"
        "holdout_accuracy\n";
    char buf[64];
    for (const RepRecord& rec : result.records) {
        for (int j = 0; j < result.p_total; ++j) {
            std::snprintf(buf, sizeof(buf), "%d,%s,%zu,", result.cfg.experiment,
                          method_name(rec.method).c_str(), rec.n);
            out += buf;
            if (result.cfg.experiment == 1) append_real(out, result.cfg.sigma);
            std::snprintf(buf, sizeof(buf), ",%d,%d,", rec.rep, j + 1);
            out += buf;
            if (!rec.failed) append_real(out, rec.shares[static_cast<std::size_t>(j)]);
            out += ',';
            if (!rec.failed) append_real(out, rec.irrelevant);
            out += ',';
            if (!rec.failed && rec.holdout >= 0.0) append_real(out, rec.holdout);
            out += '\n';
        }
    }
    return out;
}

std::string summary_to_csv(const ExperimentResult& result) {
    std::string out =
        "experiment,method,n,sigma,feature,mean_importance_share,se_importance_share,"
        "mean_irrelevant_share,mean_holdout_accuracy\n";
    char buf[64];
    for (const SummaryRow& row : aggregate(result)) {
        std::snprintf(buf, sizeof(buf), "%d,%s,%zu,", result.cfg.experiment,
                      method_name(row.method).c_str(), row.n);
        out += buf;
        if (result.cfg.experiment == 1) append_real(out, result.cfg.sigma);
        std::snprintf(buf, sizeof(buf), ",%d,", row.feature);
        out += buf;
        append_real(out, row.mean_share);
        out += ',';
        append_real(out, row.se_share);
        out += ',';
        append_real(out, row.mean_irrelevant);
        out += ',';
        if (row.mean_holdout >= 0.0) append_real(out, row.mean_holdout);
        out += '\n';
    }
    return out;
}

}  // namespace treelab
