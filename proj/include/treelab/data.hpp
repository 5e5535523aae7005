#pragma once

#include <cassert>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "treelab/rng.hpp"

namespace treelab {

enum class Task { kRegression, kClassification };

// One numeric feature column with an explicit missing-value mask. Masked
// entries are never surfaced as numbers: value() asserts and at() returns
// nullopt. The stored payload behind a masked slot is NaN.
class FeatureColumn {
public:
    FeatureColumn() = default;
    explicit FeatureColumn(std::vector<double> values)
        : values_(std::move(values)), missing_(values_.size(), false) {}
    FeatureColumn(std::vector<double> values, std::vector<bool> missing);

    std::size_t size() const { return values_.size(); }
    bool missing(std::size_t i) const { return missing_[i]; }
    double value(std::size_t i) const {
        assert(!missing_[i]);
        return values_[i];
    }
    std::optional<double> at(std::size_t i) const {
        if (missing_[i]) return std::nullopt;
        return values_[i];
    }
    std::size_t missing_count() const;

    void set_missing(std::size_t i) {
        missing_[i] = true;
        values_[i] = std::numeric_limits<double>::quiet_NaN();
    }

private:
    std::vector<double> values_;
    std::vector<bool> missing_;
};

struct Target {
    Task kind = Task::kRegression;
    std::vector<double> values;  // classification targets are 0.0 / 1.0

    std::size_t size() const { return values.size(); }
};

// Immutable column-oriented table. Learners scan one feature at a time
// during split search, so columns are the unit of storage.
class Dataset {
public:
    Dataset(std::vector<FeatureColumn> columns, Target target);

    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_features() const { return columns_.size(); }
    Task task() const { return target_.kind; }
    const FeatureColumn& column(std::size_t j) const { return columns_[j]; }
    const Target& target() const { return target_; }
    double y(std::size_t i) const { return target_.values[i]; }

    // Row extraction preserving the given order. Used by the shuffle split.
    Dataset take_rows(const std::vector<std::size_t>& rows) const;

    // CSV dump: header x1,...,xp,y; missing encoded as an empty field.
    std::string to_csv() const;

private:
    std::vector<FeatureColumn> columns_;
    Target target_;
    std::size_t n_rows_ = 0;
};

Dataset make_dataset(std::vector<FeatureColumn> columns, Target target);

// Disjoint row partition by uniform shuffle; validation gets
// round(valid_fraction * n) rows. Returns (train, valid).
std::pair<Dataset, Dataset> split_train_valid(const Dataset& data, double valid_fraction, Rng& rng);

// Number of distinct non-missing values; 0 for an all-missing column.
std::size_t unique_value_count(const FeatureColumn& col);

// Lightweight row view over a Dataset, used by tree routing.
struct RowRef {
    const Dataset* data;
    std::size_t row;

    bool missing(int feature) const { return data->column(static_cast<std::size_t>(feature)).missing(row); }
    double value(int feature) const { return data->column(static_cast<std::size_t>(feature)).value(row); }
};

// Standalone row for tests and single predictions.
struct DenseRow {
    std::vector<double> values;
    std::vector<bool> miss;

    explicit DenseRow(std::vector<double> v) : values(std::move(v)), miss(values.size(), false) {}
    DenseRow(std::vector<double> v, std::vector<bool> m) : values(std::move(v)), miss(std::move(m)) {}

    bool missing(int feature) const { return miss[static_cast<std::size_t>(feature)]; }
    double value(int feature) const { return values[static_cast<std::size_t>(feature)]; }
};

}  // namespace treelab
