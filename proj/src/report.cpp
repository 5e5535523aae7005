#include "treelab/report.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace treelab {

namespace {

constexpr double kWidth = 720.0, kHeight = 440.0;
constexpr double kLeft = 60.0, kRight = 550.0;   // plot box x range
constexpr double kTop = 40.0, kBottom = 390.0;   // plot box y range

const char* kPalette[12] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                            "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                            "#bcbd22", "#17becf", "#aec7e8", "#ffbb78"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string series_label(const SeriesKey& key) {
    if (key.feature == 0) return method_name(key.method) + " irrelevant";
    return method_name(key.method) + " X" + std::to_string(key.feature);
}

double series_value(const SeriesKey& key, const SummaryRow& row) {
    return key.feature == 0 ? row.mean_irrelevant : row.mean_share;
}

// Splits one CSV line; empty trailing fields survive.
std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

}  // namespace

std::string render_line_chart(const PlotSpec& spec, const std::vector<SummaryRow>& summary) {
    if (spec.series.empty()) throw std::invalid_argument("render_line_chart: no series");
    if (spec.x_grid.empty()) throw std::invalid_argument("render_line_chart: empty x grid");

    std::vector<std::size_t> grid = spec.x_grid;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    const double x_lo = static_cast<double>(grid.front());
    const double x_hi = static_cast<double>(grid.back());
    const auto x_of = [&](std::size_t n) {
        if (x_hi == x_lo) return (kLeft + kRight) / 2.0;
        return kLeft + (static_cast<double>(n) - x_lo) / (x_hi - x_lo) * (kRight - kLeft);
    };
    const auto y_of = [](double v) { return kBottom - v * (kBottom - kTop); };

    // resolve every point up front so absences fail before any output
    std::vector<std::vector<double>> values(spec.series.size());
    std::string missing;
    for (std::size_t s = 0; s < spec.series.size(); ++s) {
        const SeriesKey& key = spec.series[s];
        for (std::size_t n : grid) {
            const int want_feature = key.feature == 0 ? 1 : key.feature;
            const SummaryRow* hit = nullptr;
            for (const SummaryRow& row : summary) {
                if (row.method == key.method && row.n == n && row.feature == want_feature) {
                    hit = &row;
                    break;
                }
            }
            if (!hit) {
                if (!missing.empty()) missing += ", ";
                missing += series_label(key) + "@n=" + std::to_string(n);
                continue;
            }
            values[s].push_back(series_value(key, *hit));
        }
    }
    if (!missing.empty()) {
        throw std::invalid_argument("render_line_chart: missing series points: " + missing);
    }

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" +
           fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) + "\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) +
           "\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fmt((kLeft + kRight) / 2.0) +
           "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">" +
           spec.title + "</text>\n";

    // axes
    svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kBottom) + "\" x2=\"" + fmt(kRight) +
           "\" y2=\"" + fmt(kBottom) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(kLeft) +
           "\" y2=\"" + fmt(kBottom) + "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 5; ++t) {
        const double v = static_cast<double>(t) / 5.0;
        const double y = y_of(v);
        svg += "<line x1=\"" + fmt(kLeft - 4.0) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(kLeft) +
               "\" y2=\"" + fmt(y) + "\" stroke=\"black\"/>\n";
        char label[16];
        std::snprintf(label, sizeof(label), "%.1f", v);
        svg += "<text x=\"" + fmt(kLeft - 8.0) + "\" y=\"" + fmt(y + 3.0) +
               "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" + label +
               "</text>\n";
    }
    for (std::size_t n : grid) {
        const double x = x_of(n);
        svg += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(kBottom) + "\" x2=\"" + fmt(x) +
               "\" y2=\"" + fmt(kBottom + 4.0) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(kBottom + 16.0) +
               "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">" +
               std::to_string(n) + "</text>\n";
    }

    for (std::size_t s = 0; s < spec.series.size(); ++s) {
        const char* color = kPalette[s % 12];
        const char* dash = s >= 12 ? " stroke-dasharray=\"6,3\"" : "";
        std::string points;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            if (!points.empty()) points += ' ';
            points += fmt(x_of(grid[g])) + "," + fmt(y_of(values[s][g]));
        }
        svg += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"1.5\"" + dash + "/>\n";
        const double ly = 60.0 + 14.0 * static_cast<double>(s);
        svg += "<line x1=\"560\" y1=\"" + fmt(ly) + "\" x2=\"582\" y2=\"" + fmt(ly) +
               "\" stroke=\"" + color + "\" stroke-width=\"1.5\"" + dash + "/>\n";
        svg += "<text x=\"588\" y=\"" + fmt(ly + 3.0) +
               "\" font-family=\"sans-serif\" font-size=\"9\">" + series_label(spec.series[s]) +
               "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

ParsedSummary parse_summary_csv(const std::string& text) {
    const std::string header =
        "experiment,method,n,sigma,feature,mean_importance_share,se_importance_share,"
        "mean_irrelevant_share,mean_holdout_accuracy";
    ParsedSummary out;
    std::size_t pos = 0;
    bool first = true;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        const std::string line = text.substr(pos, nl - pos);
        pos = nl + 1;
        if (line.empty()) continue;
        if (first) {
            if (line != header) {
                throw std::invalid_argument("parse_summary_csv: unexpected header");
            }
            first = false;
            continue;
        }
        const std::vector<std::string> f = split_fields(line);
        if (f.size() != 9) throw std::invalid_argument("parse_summary_csv: bad field count");
        out.experiment = std::stoi(f[0]);
        const auto method = parse_method(f[1]);
        if (!method) throw std::invalid_argument("parse_summary_csv: unknown method " + f[1]);
        out.sigma_label = f[3];
        SummaryRow row;
        row.method = *method;
        row.n = static_cast<std::size_t>(std::stoull(f[2]));
        row.feature = std::stoi(f[4]);
        row.mean_share = std::stod(f[5]);
        row.se_share = std::stod(f[6]);
        row.mean_irrelevant = std::stod(f[7]);
        row.mean_holdout = f[8].empty() ? -1.0 : std::stod(f[8]);
        out.rows.push_back(row);
    }
    if (first) throw std::invalid_argument("parse_summary_csv: empty input");
    return out;
}

}  // namespace treelab
