#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "treelab/harness.hpp"

using namespace treelab;

namespace {

// Minimal classification dataset: one feature, labels follow x > 0.5.
Dataset binary_data(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = rng.uniform01();
        y[i] = x[i] > 0.5 ? 1.0 : 0.0;
    }
    std::vector<FeatureColumn> cols;
    cols.emplace_back(std::move(x));
    return make_dataset(std::move(cols), Target{Task::kClassification, std::move(y)});
}

DecisionTree single_leaf_classifier(double label) {
    DecisionTree tree;
    tree.task = Task::kClassification;
    tree.p_total = 1;
    tree.nodes.emplace_back();
    tree.nodes[0].value = label;
    return tree;
}

RepRecord record_of(Method m, std::size_t n, int rep, std::vector<double> shares,
                    double irrelevant, double holdout) {
    RepRecord rec;
    rec.method = m;
    rec.n = n;
    rec.rep = rep;
    rec.shares = std::move(shares);
    rec.irrelevant = irrelevant;
    rec.holdout = holdout;
    return rec;
}

}  // namespace

TEST_CASE("method names round-trip") {
    for (Method m : {Method::kCart, Method::kOct, Method::kGbt, Method::kShap}) {
        CHECK(parse_method(method_name(m)) == m);
    }
    CHECK(!parse_method("boost").has_value());
    CHECK(paper_reps(1) == 2000);
    CHECK(paper_reps(2) == 100);
    CHECK(paper_reps(3) == 100);
}

TEST_CASE("single-rep single-method run produces one six-share record") {
    ExperimentConfig cfg;
    cfg.experiment = 1;
    cfg.n_grid = {100};
    cfg.reps = 1;
    cfg.methods = {Method::kCart};
    cfg.seed = 5;
    const ExperimentResult res = run_experiment(cfg);
    REQUIRE(res.records.size() == 1);
    REQUIRE(res.p_total == 6);
    const RepRecord& rec = res.records[0];
    CHECK(!rec.failed);
    REQUIRE(rec.shares.size() == 6);
    double sum = 0.0;
    for (double s : rec.shares) {
        CHECK(s >= 0.0);
        sum += s;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rec.holdout < 0.0);  // regression experiment has no holdout accuracy
}

TEST_CASE("irrelevant_share sums exactly the complement of the relevant set") {
    CHECK(irrelevant_share(ImportanceVector{{0.0, 0.0, 0.0, 0.1, 0.1, 0.8}}, {3, 4, 5}) == 0.0);
    const double uniform = 1.0 / 7.0;
    CHECK(irrelevant_share(ImportanceVector{std::vector<double>(7, uniform)}, {0, 1, 2}) ==
          doctest::Approx(4.0 / 7.0));
    CHECK(irrelevant_share(ImportanceVector{{0.5, 0.5}}, {}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(irrelevant_share(ImportanceVector{{-0.1, 1.1}}, {0}),
                    std::invalid_argument);
}

TEST_CASE("holdout_accuracy counts exact label matches") {
    const Dataset test = binary_data(200, 61);
    DecisionTree stump;
    stump.task = Task::kClassification;
    stump.p_total = 1;
    stump.nodes.resize(3);
    stump.nodes[0].feature = 0;
    stump.nodes[0].threshold = 0.5;
    stump.nodes[0].left = 1;
    stump.nodes[0].right = 2;
    stump.nodes[1].value = 0.0;
    stump.nodes[2].value = 1.0;
    CHECK(holdout_accuracy(stump, test) == 1.0);

    const DecisionTree constant = single_leaf_classifier(1.0);
    double ones = 0.0;
    for (std::size_t i = 0; i < test.n_rows(); ++i) ones += test.y(i);
    CHECK(holdout_accuracy(constant, test) ==
          doctest::Approx(ones / static_cast<double>(test.n_rows())));

    std::vector<FeatureColumn> cols;
    cols.emplace_back(std::vector<double>{0.1, 0.9});
    const Dataset reg = make_dataset(std::move(cols), Target{Task::kRegression, {1.0, 2.0}});
    CHECK_THROWS_AS(holdout_accuracy(constant, reg), std::invalid_argument);
}

TEST_CASE("aggregate means, standard errors and trivial-record handling") {
    ExperimentResult res;
    res.cfg.experiment = 2;
    res.cfg.reps = 2;
    res.p_total = 2;
    res.records.push_back(record_of(Method::kCart, 100, 0, {0.2, 0.8}, 0.2, 0.9));
    res.records.push_back(record_of(Method::kCart, 100, 1, {0.4, 0.6}, 0.4, 0.7));

    const std::vector<SummaryRow> rows = aggregate(res);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].feature == 1);
    CHECK(rows[0].mean_share == doctest::Approx(0.3));
    // k=2: se = |a-b|/2
    CHECK(rows[0].se_share == doctest::Approx(0.1));
    CHECK(rows[1].mean_share == doctest::Approx(0.7));
    CHECK(rows[0].mean_irrelevant == doctest::Approx(0.3));
    CHECK(rows[0].mean_holdout == doctest::Approx(0.8));
    CHECK(rows[0].reps_used == 2);

    // a failed record never enters the mean
    RepRecord failed = record_of(Method::kCart, 100, 2, {}, 0.0, -1.0);
    failed.failed = true;
    res.records.push_back(failed);
    CHECK(aggregate(res)[0].reps_used == 2);

    // an all-zero record counts by default and drops when configured out
    res.records.pop_back();
    res.records.push_back(record_of(Method::kCart, 100, 2, {0.0, 0.0}, 0.0, 0.5));
    CHECK(aggregate(res)[0].reps_used == 3);
    CHECK(aggregate(res)[0].mean_share == doctest::Approx(0.2));
    res.cfg.aggregate_trivial = false;
    CHECK(aggregate(res)[0].reps_used == 2);
    CHECK(aggregate(res)[0].mean_share == doctest::Approx(0.3));
}

TEST_CASE("worker count never changes the results csv") {
    ExperimentConfig cfg;
    cfg.experiment = 2;
    cfg.n_grid = {100};
    cfg.reps = 3;
    cfg.seed = 7;
    cfg.holdout_n = 500;
    cfg.workers = 1;
    const std::string serial = results_to_csv(run_experiment(cfg));
    cfg.workers = 4;
    const std::string parallel = results_to_csv(run_experiment(cfg));
    CHECK(serial == parallel);
    CHECK(serial.find("\r") == std::string::npos);
}

TEST_CASE("results csv carries the pinned header and empty inapplicable fields") {
    ExperimentConfig cfg;
    cfg.experiment = 1;
    cfg.n_grid = {100};
    cfg.reps = 1;
    cfg.methods = {Method::kCart};
    cfg.seed = 5;
    const ExperimentResult res = run_experiment(cfg);
    const std::string csv = results_to_csv(res);
    CHECK(csv.rfind("experiment,method,n,sigma,rep,feature,importance_share,irrelevant_share,"
                    "holdout_accuracy\n", 0) == 0);
    // six feature rows, each ending with the empty holdout field
    std::size_t lines = 0, pos = csv.find('\n');
    while ((pos = csv.find('\n', pos + 1)) != std::string::npos) {
        ++lines;
        CHECK(csv[pos - 1] == ',');
    }
    CHECK(lines == 6);
    CHECK(csv.find("1,cart,100,1.000000,0,1,") != std::string::npos);

    const std::string summary = summary_to_csv(res);
    CHECK(summary.rfind("experiment,method,n,sigma,feature,mean_importance_share,"
                        "se_importance_share,mean_irrelevant_share,mean_holdout_accuracy\n",
                        0) == 0);
}

TEST_CASE("run_experiment validates its configuration") {
    ExperimentConfig cfg;
    cfg.n_grid = {100};
    cfg.reps = 1;
    cfg.experiment = 4;
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
    cfg.experiment = 1;
    cfg.n_grid = {};
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
    cfg.n_grid = {4};
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
    cfg.n_grid = {100};
    cfg.reps = 0;
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
    cfg.reps = 1;
    cfg.methods = {};
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
    cfg.methods = {Method::kCart};
    cfg.valid_fraction = 1.0;
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
    cfg.valid_fraction = 0.25;
    cfg.sigma = 0.0;
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
    cfg.sigma = 1.0;
    cfg.workers = 0;
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
}
