#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "treelab/report.hpp"

using namespace treelab;

namespace {

SummaryRow row_of(Method m, std::size_t n, int feature, double share, double irrelevant) {
    SummaryRow row;
    row.method = m;
    row.n = n;
    row.feature = feature;
    row.mean_share = share;
    row.mean_irrelevant = irrelevant;
    return row;
}

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
    std::size_t count = 0;
    for (std::size_t pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + needle.size())) {
        ++count;
    }
    return count;
}

// points attribute of the first polyline
std::string polyline_points(const std::string& svg) {
    const std::size_t open = svg.find("<polyline points=\"");
    REQUIRE(open != std::string::npos);
    const std::size_t start = open + std::string("<polyline points=\"").size();
    const std::size_t close = svg.find('"', start);
    REQUIRE(close != std::string::npos);
    return svg.substr(start, close - start);
}

}  // namespace

TEST_CASE("a single series renders exactly one polyline with two vertices") {
    std::vector<SummaryRow> summary = {row_of(Method::kCart, 100, 1, 0.5, 0.0),
                                       row_of(Method::kCart, 200, 1, 0.25, 0.0)};
    PlotSpec spec;
    spec.title = "share of X1";
    spec.x_grid = {100, 200};
    spec.series = {{Method::kCart, 1}};
    const std::string svg = render_line_chart(spec, summary);

    CHECK(count_occurrences(svg, "<polyline") == 1);
    const std::string points = polyline_points(svg);
    CHECK(count_occurrences(points, ",") == 2);  // two x,y pairs
    // plot box x in [60,550], y in [40,390]: y = 390 - 350*v, x spans the grid
    CHECK(points == "60.00,215.00 550.00,302.50");
    CHECK(svg.find("cart X1") != std::string::npos);  // legend entry
}

TEST_CASE("identical inputs render byte-identical SVGs") {
    std::vector<SummaryRow> summary;
    for (std::size_t n : {100, 500, 1000}) {
        summary.push_back(row_of(Method::kCart, n, 1, 0.4, 0.2));
        summary.push_back(row_of(Method::kCart, n, 2, 0.6, 0.2));
        summary.push_back(row_of(Method::kGbt, n, 1, 0.3, 0.5));
        summary.push_back(row_of(Method::kGbt, n, 2, 0.7, 0.5));
    }
    PlotSpec spec;
    spec.title = "comparison";
    spec.x_grid = {100, 500, 1000};
    spec.series = {{Method::kCart, 1}, {Method::kCart, 2}, {Method::kGbt, 1},
                   {Method::kGbt, 0}};
    const std::string first = render_line_chart(spec, summary);
    const std::string second = render_line_chart(spec, summary);
    CHECK(first == second);
    CHECK(count_occurrences(first, "<polyline") == spec.series.size());
    CHECK(first.find("gbt irrelevant") != std::string::npos);
}

TEST_CASE("a feature-0 series plots the irrelevant share, not the feature share") {
    // share 1.0 vs irrelevant 0.0 land at opposite plot edges (y=40 vs y=390)
    std::vector<SummaryRow> summary = {row_of(Method::kOct, 100, 1, 1.0, 0.0),
                                       row_of(Method::kOct, 200, 1, 1.0, 0.0)};
    PlotSpec spec;
    spec.title = "irrelevant";
    spec.x_grid = {100, 200};
    spec.series = {{Method::kOct, 0}};
    const std::string svg = render_line_chart(spec, summary);
    CHECK(polyline_points(svg) == "60.00,390.00 550.00,390.00");
}

TEST_CASE("missing series points raise an error naming them") {
    std::vector<SummaryRow> summary = {row_of(Method::kCart, 100, 1, 0.5, 0.0)};
    PlotSpec spec;
    spec.title = "t";
    spec.x_grid = {100, 200};
    spec.series = {{Method::kCart, 1}, {Method::kOct, 1}};
    try {
        render_line_chart(spec, summary);
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        const std::string what = e.what();
        CHECK(what.find("cart X1@n=200") != std::string::npos);
        CHECK(what.find("oct X1@n=100") != std::string::npos);
        CHECK(what.find("oct X1@n=200") != std::string::npos);
    }

    PlotSpec no_series;
    no_series.title = "t";
    no_series.x_grid = {100};
    CHECK_THROWS_AS(render_line_chart(no_series, summary), std::invalid_argument);
}

TEST_CASE("parse_summary_csv round-trips summary_to_csv output") {
    ExperimentConfig cfg;
    cfg.experiment = 1;
    cfg.n_grid = {100};
    cfg.sigma = 1.0;
    cfg.reps = 2;
    cfg.methods = {Method::kCart};
    cfg.seed = 99;
    const ExperimentResult result = run_experiment(cfg);
    const std::vector<SummaryRow> expected = aggregate(result);
    const std::string csv = summary_to_csv(result);

    const ParsedSummary parsed = parse_summary_csv(csv);
    CHECK(parsed.experiment == 1);
    CHECK(parsed.sigma_label == "1.000000");
    REQUIRE(parsed.rows.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(parsed.rows[i].method == expected[i].method);
        CHECK(parsed.rows[i].n == expected[i].n);
        CHECK(parsed.rows[i].feature == expected[i].feature);
        // values pass through a 6-decimal print
        CHECK(parsed.rows[i].mean_share == doctest::Approx(expected[i].mean_share).epsilon(1e-5));
        CHECK(parsed.rows[i].mean_irrelevant ==
              doctest::Approx(expected[i].mean_irrelevant).epsilon(1e-5));
        CHECK(parsed.rows[i].mean_holdout < 0.0);  // exp 1 has no holdout column
    }

    // the parsed rows feed straight back into the renderer
    PlotSpec spec;
    spec.title = "exp1";
    spec.x_grid = cfg.n_grid;
    spec.series = {{Method::kCart, 1}, {Method::kCart, 6}, {Method::kCart, 0}};
    CHECK(count_occurrences(render_line_chart(spec, parsed.rows), "<polyline") == 3);
}

TEST_CASE("parse_summary_csv rejects malformed input") {
    CHECK_THROWS_AS(parse_summary_csv(""), std::invalid_argument);
    CHECK_THROWS_AS(parse_summary_csv("not,a,summary,header\n"), std::invalid_argument);
    const std::string header =
        "experiment,method,n,sigma,feature,mean_importance_share,se_importance_share,"
        "mean_irrelevant_share,mean_holdout_accuracy\n";
    CHECK_THROWS_AS(parse_summary_csv(header + "2,bogus,100,,1,0.1,0.0,0.2,0.9\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_summary_csv(header + "2,cart,100,,1,0.1\n"), std::invalid_argument);

    const ParsedSummary ok = parse_summary_csv(header + "2,cart,100,,1,0.1,0.0,0.2,0.9\n");
    CHECK(ok.experiment == 2);
    CHECK(ok.sigma_label.empty());
    REQUIRE(ok.rows.size() == 1);
    CHECK(ok.rows[0].mean_holdout == doctest::Approx(0.9));
}
