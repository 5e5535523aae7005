#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "treelab/data.hpp"
#include "treelab/gbt.hpp"
#include "treelab/tree.hpp"

namespace treelab {

enum class Method { kCart, kOct, kGbt, kShap };

// Stable lowercase names used in CSVs and on the command line.
std::string method_name(Method method);
std::optional<Method> parse_method(const std::string& name);

struct ExperimentConfig {
    int experiment = 1;  // 1: regression importance; 2: no-bias classification;
                         // 3: biased (quantized) classification
    std::vector<std::size_t> n_grid = {100, 200, 300, 400, 500, 1000, 5000};
    double sigma = 1.0;  // experiment 1 only
    int reps = 1;
    std::vector<Method> methods = {Method::kCart, Method::kOct, Method::kGbt, Method::kShap};
    double valid_fraction = 0.25;
    std::size_t holdout_n = 50000;  // experiments 2-3 only
    std::uint64_t seed = 0;
    int workers = 1;
    bool aggregate_trivial = true;  // keep all-zero (splitless) fits in the means
};

// The paper's repetition counts: 2000 for experiment 1, 100 for 2-3.
int paper_reps(int experiment);

// One fitted method on one generated dataset.
struct RepRecord {
    Method method = Method::kCart;
    std::size_t n = 0;
    int rep = 0;
    bool failed = false;
    std::vector<double> shares;        // empty when failed
    double irrelevant = 0.0;
    double holdout = -1.0;             // negative marks "not applicable"
};

struct ExperimentResult {
    ExperimentConfig cfg;
    int p_total = 0;
    std::vector<RepRecord> records;  // sorted by (method name, n, rep)
};

// Seed of one repetition; every random stream inside the rep derives from
// it, so a rep's outcome is independent of scheduling.
std::uint64_t derive_rep_seed(std::uint64_t master, int experiment, std::size_t n, int rep);

// Runs the full repetition grid on a bounded worker pool. Each (n, rep)
// task writes one preallocated slot, so the merged record order and every
// value are identical for any worker count. A method failure flags its
// record and the run continues; more than 1% failed records is an error.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Total share assigned outside the relevant set.
double irrelevant_share(const ImportanceVector& imp, const std::vector<int>& relevant);

// Fraction of correctly classified rows.
double holdout_accuracy(const DecisionTree& tree, const Dataset& test);
double holdout_accuracy(const BoostedEnsemble& ens, const Dataset& test);

struct SummaryRow {
    Method method = Method::kCart;
    std::size_t n = 0;
    int feature = 0;  // 1-based, matching the X1..Xp naming
    double mean_share = 0.0;
    double se_share = 0.0;
    double mean_irrelevant = 0.0;
    double mean_holdout = -1.0;
    int reps_used = 0;
};

// Per (method, n, feature) means and standard errors over non-failed
// (optionally non-trivial) records, in record order.
std::vector<SummaryRow> aggregate(const ExperimentResult& result);

// One line per (record, feature):
// experiment,method,n,sigma,rep,feature,importance_share,irrelevant_share,holdout_accuracy
// Reals carry 6 decimals, inapplicable fields stay empty, lines end in LF.
std::string results_to_csv(const ExperimentResult& result);

// Same layout keyed by (method, n, feature) with mean_/se_ columns.
std::string summary_to_csv(const ExperimentResult& result);

}  // namespace treelab
