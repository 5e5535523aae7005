#include <algorithm>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "treelab/data.hpp"

using namespace treelab;

namespace {

Target regr(std::vector<double> v) { return Target{Task::kRegression, std::move(v)}; }

}  // namespace

TEST_CASE("make_dataset accepts consistent columns") {
    std::vector<FeatureColumn> cols;
    cols.emplace_back(std::vector<double>{1.0, 2.0, 3.0});
    cols.emplace_back(std::vector<double>{4.0, 5.0, 6.0});
    const Dataset d = make_dataset(std::move(cols), regr({0.1, 0.2, 0.3}));
    CHECK(d.n_rows() == 3);
    CHECK(d.n_features() == 2);
}

TEST_CASE("make_dataset rejects a length mismatch, naming the column") {
    std::vector<FeatureColumn> cols;
    cols.emplace_back(std::vector<double>{1.0, 2.0, 3.0});
    cols.emplace_back(std::vector<double>{4.0, 5.0, 6.0, 7.0});
    try {
        make_dataset(std::move(cols), regr({0.0, 0.0, 0.0}));
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("column 1") != std::string::npos);
    }
}

TEST_CASE("make_dataset rejects non-binary classification labels") {
    std::vector<FeatureColumn> cols;
    cols.emplace_back(std::vector<double>{1.0, 2.0});
    CHECK_THROWS_AS(make_dataset(std::move(cols), Target{Task::kClassification, {0.0, 0.5}}),
                    std::invalid_argument);
}

TEST_CASE("masked entries are never surfaced as numbers") {
    FeatureColumn col({1.0, 2.0, 3.0}, {false, true, false});
    CHECK(col.missing(1));
    CHECK(!col.at(1).has_value());
    CHECK(col.at(2).value() == 3.0);
    CHECK(col.missing_count() == 1);
}

TEST_CASE("split_train_valid produces the documented sizes") {
    Rng rng(1);
    std::vector<double> ys;
    for (int i = 0; i < 100; ++i) ys.push_back(static_cast<double>(i));
    std::vector<FeatureColumn> cols;
    cols.emplace_back(ys);
    const Dataset d = make_dataset(std::move(cols), regr(ys));

    const auto [train, valid] = split_train_valid(d, 0.25, rng);
    CHECK(train.n_rows() == 75);
    CHECK(valid.n_rows() == 25);

    // multiset union of the parts equals the input rows
    std::vector<double> seen;
    for (std::size_t i = 0; i < train.n_rows(); ++i) seen.push_back(train.y(i));
    for (std::size_t i = 0; i < valid.n_rows(); ++i) seen.push_back(valid.y(i));
    std::sort(seen.begin(), seen.end());
    CHECK(seen == ys);
}

TEST_CASE("split_train_valid rounds the validation size") {
    Rng rng(2);
    std::vector<FeatureColumn> cols;
    cols.emplace_back(std::vector<double>{1.0, 2.0, 3.0, 4.0});
    const Dataset d = make_dataset(std::move(cols), regr({1.0, 2.0, 3.0, 4.0}));
    const auto [train, valid] = split_train_valid(d, 0.25, rng);
    CHECK(train.n_rows() == 3);
    CHECK(valid.n_rows() == 1);
}

TEST_CASE("split_train_valid is deterministic for a fixed seed") {
    std::vector<double> ys;
    for (int i = 0; i < 40; ++i) ys.push_back(static_cast<double>(i) * 0.5);
    std::vector<FeatureColumn> cols;
    cols.emplace_back(ys);
    const Dataset d = make_dataset(std::move(cols), regr(ys));

    Rng a(77), b(77);
    const auto [ta, va] = split_train_valid(d, 0.25, a);
    const auto [tb, vb] = split_train_valid(d, 0.25, b);
    REQUIRE(ta.n_rows() == tb.n_rows());
    for (std::size_t i = 0; i < ta.n_rows(); ++i) CHECK(ta.y(i) == tb.y(i));
    for (std::size_t i = 0; i < va.n_rows(); ++i) CHECK(va.y(i) == vb.y(i));
}

TEST_CASE("split_train_valid carries missing masks through") {
    std::vector<double> vals(20, 1.0);
    std::vector<bool> mask(20, false);
    mask[3] = mask[11] = mask[19] = true;
    std::vector<FeatureColumn> cols;
    cols.emplace_back(vals, mask);
    const Dataset d = make_dataset(std::move(cols), regr(std::vector<double>(20, 0.0)));
    Rng rng(9);
    const auto [train, valid] = split_train_valid(d, 0.25, rng);
    CHECK(train.column(0).missing_count() + valid.column(0).missing_count() == 3);
}

TEST_CASE("split_train_valid rejects degenerate fractions") {
    std::vector<FeatureColumn> cols;
    cols.emplace_back(std::vector<double>{1.0, 2.0, 3.0});
    const Dataset d = make_dataset(std::move(cols), regr({1.0, 2.0, 3.0}));
    Rng rng(3);
    CHECK_THROWS_AS(split_train_valid(d, 0.05, rng), std::invalid_argument);
    CHECK_THROWS_AS(split_train_valid(d, 1.5, rng), std::invalid_argument);
}

TEST_CASE("unique_value_count") {
    CHECK(unique_value_count(FeatureColumn({0.1, 0.1, 0.2})) == 2);
    FeatureColumn all_missing({1.0, 2.0}, {true, true});
    CHECK(unique_value_count(all_missing) == 0);
}

TEST_CASE("csv dump encodes missing as empty fields") {
    std::vector<FeatureColumn> cols;
    cols.emplace_back(std::vector<double>{1.5, 2.0}, std::vector<bool>{false, true});
    cols.emplace_back(std::vector<double>{0.25, 2.0});
    const Dataset d = make_dataset(std::move(cols), regr({1.0, 2.0}));
    CHECK(d.to_csv() == "x1,x2,y\n1.5,0.25,1\n,2,2\n");
}
