#include "treelab/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace treelab {

FeatureColumn::FeatureColumn(std::vector<double> values, std::vector<bool> missing)
    : values_(std::move(values)), missing_(std::move(missing)) {
    if (values_.size() != missing_.size()) {
        throw std::invalid_argument("FeatureColumn: values and missing mask differ in length");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (missing_[i]) values_[i] = std::numeric_limits<double>::quiet_NaN();
    }
}

std::size_t FeatureColumn::missing_count() const {
    std::size_t c = 0;
    for (bool m : missing_) c += m ? 1 : 0;
    return c;
}

Dataset::Dataset(std::vector<FeatureColumn> columns, Target target)
    : columns_(std::move(columns)), target_(std::move(target)) {
    if (columns_.empty()) throw std::invalid_argument("Dataset: need at least one column");
    n_rows_ = columns_[0].size();
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        if (columns_[j].size() != n_rows_) {
            throw std::invalid_argument("Dataset: column " + std::to_string(j) +
                                        " has length " + std::to_string(columns_[j].size()) +
                                        ", expected " + std::to_string(n_rows_));
        }
    }
    if (target_.size() != n_rows_) {
        throw std::invalid_argument("Dataset: target length " + std::to_string(target_.size()) +
                                    " does not match row count " + std::to_string(n_rows_));
    }
    if (target_.kind == Task::kClassification) {
        for (double v : target_.values) {
            if (v != 0.0 && v != 1.0) {
                throw std::invalid_argument("Dataset: classification labels must be 0 or 1");
            }
        }
    }
}

Dataset Dataset::take_rows(const std::vector<std::size_t>& rows) const {
    std::vector<FeatureColumn> cols;
    cols.reserve(columns_.size());
    for (const FeatureColumn& col : columns_) {
        std::vector<double> v(rows.size());
        std::vector<bool> m(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            m[i] = col.missing(rows[i]);
            v[i] = m[i] ? std::numeric_limits<double>::quiet_NaN() : col.value(rows[i]);
        }
        cols.emplace_back(std::move(v), std::move(m));
    }
    Target t;
    t.kind = target_.kind;
    t.values.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) t.values[i] = target_.values[rows[i]];
    return Dataset(std::move(cols), std::move(t));
}

std::string Dataset::to_csv() const {
    std::string out;
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        out += "x" + std::to_string(j + 1) + ",";
    }
    out += "y\n";
    char buf[64];
    for (std::size_t i = 0; i < n_rows_; ++i) {
        for (const FeatureColumn& col : columns_) {
            if (!col.missing(i)) {
                std::snprintf(buf, sizeof(buf), "%.17g", col.value(i));
                out += buf;
            }
            out += ',';
        }
        std::snprintf(buf, sizeof(buf), "%.17g", target_.values[i]);
        out += buf;
        out += '\n';
    }
    return out;
}

Dataset make_dataset(std::vector<FeatureColumn> columns, Target target) {
    return Dataset(std::move(columns), std::move(target));
}

std::pair<Dataset, Dataset> split_train_valid(const Dataset& data, double valid_fraction, Rng& rng) {
    const std::size_t n = data.n_rows();
    if (!(valid_fraction > 0.0 && valid_fraction < 1.0)) {
        throw std::invalid_argument("split_train_valid: fraction must be in (0,1)");
    }
    const auto n_valid = static_cast<std::size_t>(std::llround(valid_fraction * static_cast<double>(n)));
    if (n_valid < 1 || n_valid >= n) {
        throw std::invalid_argument("split_train_valid: degenerate split sizes");
    }
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    rng.shuffle(idx);
    std::vector<std::size_t> train_rows(idx.begin(), idx.end() - static_cast<std::ptrdiff_t>(n_valid));
    std::vector<std::size_t> valid_rows(idx.end() - static_cast<std::ptrdiff_t>(n_valid), idx.end());
    return {data.take_rows(train_rows), data.take_rows(valid_rows)};
}

std::size_t unique_value_count(const FeatureColumn& col) {
    std::vector<double> v;
    v.reserve(col.size());
    for (std::size_t i = 0; i < col.size(); ++i) {
        if (!col.missing(i)) v.push_back(col.value(i));
    }
    std::sort(v.begin(), v.end());
    return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

}  // namespace treelab
