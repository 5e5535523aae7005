#pragma once

#include <string>
#include <vector>

#include "treelab/harness.hpp"

namespace treelab {

// One curve of a chart: a method's per-feature share (feature >= 1) or its
// irrelevant share (feature == 0).
struct SeriesKey {
    Method method = Method::kCart;
    int feature = 0;
};

struct PlotSpec {
    std::string title;
    std::vector<std::size_t> x_grid;  // labeled tick positions (the n grid)
    std::vector<SeriesKey> series;    // nonempty
};

// Self-contained SVG line chart: linear axes, y fixed to [0,1], one
// polyline per series, legend naming each series. Identical inputs yield
// identical bytes. Missing (series, n) points raise an error naming them.
std::string render_line_chart(const PlotSpec& spec, const std::vector<SummaryRow>& summary);

struct ParsedSummary {
    int experiment = 0;
    std::string sigma_label;  // empty when the sigma column was empty
    std::vector<SummaryRow> rows;
};

// Inverse of summary_to_csv for the fields the charts need.
ParsedSummary parse_summary_csv(const std::string& text);

}  // namespace treelab
