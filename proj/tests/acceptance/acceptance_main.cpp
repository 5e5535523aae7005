// End-to-end release gate: reruns the benchmark protocols at desk scale and
// checks the published reference numbers, orderings, oracle suites, and the
// worker-count determinism contract. Prints one line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "treelab/harness.hpp"
#include "treelab/report.hpp"
#include "treelab/selfcheck.hpp"

namespace fs = std::filesystem;
using namespace treelab;

namespace {

struct Criterion {
    bool pass = false;
    std::string detail;
};

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

const SummaryRow& row_of(const std::vector<SummaryRow>& summary, Method m, std::size_t n,
                         int feature) {
    for (const SummaryRow& row : summary) {
        if (row.method == m && row.n == n && row.feature == feature) return row;
    }
    throw std::runtime_error("missing summary row " + method_name(m) + " n=" +
                             std::to_string(n) + " X" + std::to_string(feature));
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[240];
    std::snprintf(buf, sizeof(buf), pattern, a, b, c);
    return buf;
}

// ---- criterion 1: experiment-1 low-noise importance shares ----------------

Criterion criterion1(const std::vector<SummaryRow>& s1, double runtime_s) {
    // reference means, rounded to 1e-4; desk-scale tolerance 0.02
    const double cart_ref[6] = {0.0001, 0.0001, 0.0001, 0.1006, 0.1062, 0.7930};
    const double oct_ref[6] = {0.0001, 0.0001, 0.0001, 0.1005, 0.1061, 0.7932};
    const double tol = 0.02;
    const double noise_cap = 0.005;  // X1..X3 must stay essentially zero
    const double runtime_cap_s = 3600.0;

    double max_dev = 0.0, max_noise = 0.0;
    bool ok = true;
    for (int f = 1; f <= 6; ++f) {
        const double cart = row_of(s1, Method::kCart, 5000, f).mean_share;
        const double oct = row_of(s1, Method::kOct, 5000, f).mean_share;
        max_dev = std::max({max_dev, std::fabs(cart - cart_ref[f - 1]),
                            std::fabs(oct - oct_ref[f - 1])});
        if (f <= 3) max_noise = std::max({max_noise, cart, oct});
    }
    ok = ok && max_dev <= tol && max_noise < noise_cap && runtime_s < runtime_cap_s;

    Criterion out;
    out.pass = ok;
    out.detail = fmt("max |share-ref| %.4f (tol 0.02), max X1-X3 share %.4f (cap 0.005), ",
                     max_dev, max_noise) +
                 fmt("runtime %.0fs (cap 3600s)", runtime_s);
    return out;
}

// ---- criterion 2: high-noise X6 dominance ---------------------------------

Criterion criterion2(const std::vector<SummaryRow>& s2) {
    const double x6_ref = 0.79, x6_tol = 0.03, noise_cap = 0.01;
    double max_noise = 0.0;
    const double cart6 = row_of(s2, Method::kCart, 5000, 6).mean_share;
    const double oct6 = row_of(s2, Method::kOct, 5000, 6).mean_share;
    for (int f = 1; f <= 3; ++f) {
        max_noise = std::max({max_noise, row_of(s2, Method::kCart, 5000, f).mean_share,
                              row_of(s2, Method::kOct, 5000, f).mean_share});
    }
    Criterion out;
    out.pass = std::fabs(cart6 - x6_ref) <= x6_tol && std::fabs(oct6 - x6_ref) <= x6_tol &&
               max_noise < noise_cap;
    out.detail = fmt("X6 share cart %.4f, oct %.4f (ref 0.79 tol 0.03), ", cart6, oct6) +
                 fmt("max X1-X3 share %.4f (cap 0.01)", max_noise);
    return out;
}

// ---- criterion 3: boosting and shap leak importance onto noise ------------

Criterion criterion3(const std::vector<SummaryRow>& s1) {
    const double gbt_floor = 0.002, shap_floor = 0.02;
    bool ok = true;
    double min_gbt = 1.0, min_shap = 1.0;
    for (int f = 1; f <= 3; ++f) {
        const double gbt = row_of(s1, Method::kGbt, 5000, f).mean_share;
        const double shap = row_of(s1, Method::kShap, 5000, f).mean_share;
        const double cart = row_of(s1, Method::kCart, 5000, f).mean_share;
        const double oct = row_of(s1, Method::kOct, 5000, f).mean_share;
        min_gbt = std::min(min_gbt, gbt);
        min_shap = std::min(min_shap, shap);
        ok = ok && gbt > gbt_floor && shap > shap_floor;
        ok = ok && gbt > cart && gbt > oct && shap > cart && shap > oct;
    }
    for (const Method m : {Method::kCart, Method::kOct, Method::kGbt, Method::kShap}) {
        const double x6 = row_of(s1, m, 5000, 6).mean_share;
        for (int f = 1; f <= 5; ++f) ok = ok && x6 > row_of(s1, m, 5000, f).mean_share;
    }
    Criterion out;
    out.pass = ok;
    out.detail = fmt("min X1-X3 share gbt %.4f (floor 0.002), shap %.4f (floor 0.02), ",
                     min_gbt, min_shap) +
                 "both above cart/oct per feature, X6 argmax for all methods";
    return out;
}

// ---- criterion 4: out-of-sample accuracy ----------------------------------

Criterion criterion4(const std::vector<SummaryRow>& s2, const std::vector<std::size_t>& grid) {
    struct Ref {
        Method m;
        double at500, at5000;
    };
    const Ref refs[3] = {{Method::kOct, 0.9826, 0.9984},
                         {Method::kCart, 0.9675, 0.9966},
                         {Method::kGbt, 0.9795, 0.9981}};
    const double tol = 0.03;
    bool ok = true;
    double max_dev = 0.0;
    for (const Ref& ref : refs) {
        const double a500 = row_of(s2, ref.m, 500, 1).mean_holdout;
        const double a5000 = row_of(s2, ref.m, 5000, 1).mean_holdout;
        max_dev = std::max({max_dev, std::fabs(a500 - ref.at500), std::fabs(a5000 - ref.at5000)});
    }
    ok = ok && max_dev <= tol;
    bool dominance = true;
    for (const std::size_t n : grid) {
        dominance = dominance && row_of(s2, Method::kOct, n, 1).mean_holdout >=
                                     row_of(s2, Method::kCart, n, 1).mean_holdout;
    }
    Criterion out;
    out.pass = ok && dominance;
    out.detail = fmt("max |accuracy-ref| %.4f (tol 0.03), ", max_dev) +
                 std::string(dominance ? "oct >= cart at every n" : "oct < cart somewhere");
    return out;
}

// ---- criterion 5: irrelevant-share ordering and bias susceptibility -------

Criterion criterion5(const std::vector<SummaryRow>& s2, const std::vector<SummaryRow>& s3) {
    bool ordering = true;
    for (const auto& summary : {s2, s3}) {
        for (const std::size_t n : {std::size_t{100}, std::size_t{500}, std::size_t{1000}}) {
            const double oct = row_of(summary, Method::kOct, n, 1).mean_irrelevant;
            const double cart = row_of(summary, Method::kCart, n, 1).mean_irrelevant;
            const double gbt = row_of(summary, Method::kGbt, n, 1).mean_irrelevant;
            ordering = ordering && oct < cart && cart < gbt;
        }
    }
    const double cart2 = row_of(s2, Method::kCart, 100, 1).mean_irrelevant;
    const double cart3 = row_of(s3, Method::kCart, 100, 1).mean_irrelevant;
    const double oct2 = row_of(s2, Method::kOct, 100, 1).mean_irrelevant;
    const double oct3 = row_of(s3, Method::kOct, 100, 1).mean_irrelevant;
    const bool bias = cart3 > cart2 && std::fabs(oct3 - oct2) < 0.02;

    Criterion out;
    out.pass = ordering && bias;
    out.detail = std::string(ordering ? "oct < cart < gbt at all six points" : "ordering broken") +
                 fmt("; cart irrelevant at n=100: %.4f -> %.4f under quantization, ", cart2,
                     cart3) +
                 fmt("oct %.4f -> %.4f (drift cap 0.02)", oct2, oct3);
    return out;
}

// ---- criterion 6: oracle suites -------------------------------------------

Criterion criterion6() {
    const double t0 = now_seconds();
    const std::vector<SelfCheck> checks = run_selfchecks();
    const double elapsed = now_seconds() - t0;
    bool ok = elapsed < 300.0;
    std::string failed;
    for (const SelfCheck& c : checks) {
        if (!c.pass) {
            ok = false;
            failed += " " + c.name;
        }
    }
    Criterion out;
    out.pass = ok;
    out.detail = fmt("5 suites in %.1fs (cap 300s)", elapsed) +
                 (failed.empty() ? std::string(", all pass") : "; failed:" + failed);
    return out;
}

}  // namespace

int main() {
    std::setvbuf(stdout, nullptr, _IONBF, 0);
    const fs::path out_root = "acceptance_out";
    fs::remove_all(out_root);
    fs::create_directories(out_root);

    // ---- run 1: experiment 1, sigma 1, all methods (criteria 1 and 3) ----
    std::printf("run 1/5: exp1 sigma=1 n=5000 reps=50 seed=42\n");
    ExperimentConfig cfg1;
    cfg1.experiment = 1;
    cfg1.n_grid = {5000};
    cfg1.sigma = 1.0;
    cfg1.reps = 50;
    cfg1.seed = 42;
    cfg1.workers = 8;
    const double t1 = now_seconds();
    const std::vector<SummaryRow> s1 = aggregate(run_experiment(cfg1));
    const double runtime1 = now_seconds() - t1;
    std::printf("  done in %.0fs\n", runtime1);

    // ---- run 2: experiment 1, sigma 2 (criterion 2) ----
    std::printf("run 2/5: exp1 sigma=2 n=5000 reps=50 seed=42\n");
    ExperimentConfig cfg2 = cfg1;
    cfg2.sigma = 2.0;
    cfg2.methods = {Method::kCart, Method::kOct};
    const std::vector<SummaryRow> s2 = aggregate(run_experiment(cfg2));
    std::printf("  done at t=%.0fs\n", now_seconds());

    // ---- runs 3 and 4: exp2 desk via the CLI, 1 vs 8 workers (4, 5, 7) ----
    const std::string bin = TREELAB_BIN;
    const fs::path dir_w1 = out_root / "exp2_w1";
    const fs::path dir_w8 = out_root / "exp2_w8";
    std::printf("run 3/5: %s exp2 --preset desk --seed 7 --workers 1\n", bin.c_str());
    int rc = std::system(
        (bin + " exp2 --preset desk --seed 7 --workers 1 --out " + dir_w1.string()).c_str());
    if (rc != 0) {
        std::printf("exp2 workers=1 run failed (%d)\n", rc);
        return 1;
    }
    std::printf("run 4/5: same with --workers 8 (t=%.0fs)\n", now_seconds());
    rc = std::system(
        (bin + " exp2 --preset desk --seed 7 --workers 8 --out " + dir_w8.string()).c_str());
    if (rc != 0) {
        std::printf("exp2 workers=8 run failed (%d)\n", rc);
        return 1;
    }
    const std::string results_w1 = read_file(dir_w1 / "exp2_results.csv");
    const std::string results_w8 = read_file(dir_w8 / "exp2_results.csv");
    const ParsedSummary exp2 = parse_summary_csv(read_file(dir_w1 / "exp2_summary.csv"));
    const std::vector<std::size_t> exp2_grid = {100, 200, 300, 400, 500, 1000, 5000};

    // ---- run 5: experiment 3 at the small-n grid (criterion 5) ----
    std::printf("run 5/5: exp3 n={100,500,1000} reps=25 seed=7 (t=%.0fs)\n", now_seconds());
    ExperimentConfig cfg3;
    cfg3.experiment = 3;
    cfg3.n_grid = {100, 500, 1000};
    cfg3.reps = 25;
    cfg3.seed = 7;
    cfg3.methods = {Method::kCart, Method::kOct, Method::kGbt};
    cfg3.workers = 8;
    const std::vector<SummaryRow> s3 = aggregate(run_experiment(cfg3));
    std::printf("  done at t=%.0fs\n", now_seconds());

    Criterion results[7];
    results[0] = criterion1(s1, runtime1);
    results[1] = criterion2(s2);
    results[2] = criterion3(s1);
    results[3] = criterion4(exp2.rows, exp2_grid);
    results[4] = criterion5(exp2.rows, s3);
    results[5] = criterion6();
    results[6].pass = results_w1 == results_w8 && !results_w1.empty();
    results[6].detail = fmt("results CSVs %.0f bytes, workers 1 vs 8 ",
                            static_cast<double>(results_w1.size())) +
                        (results[6].pass ? "byte-identical" : "DIFFER");

    static const char* names[7] = {
        "table-1 importance shares (exp1 sigma=1)",
        "table-2 X6 dominance (exp1 sigma=2)",
        "gbt/shap noise leakage and X6 argmax",
        "table-3 holdout accuracies (exp2)",
        "irrelevant-share ordering and bias shift (exp2/exp3)",
        "oracle suites under 5 minutes",
        "worker-count determinism (exp2 desk seed 7)",
    };
    int failures = 0;
    for (int i = 0; i < 7; ++i) {
        std::printf("[%s] criterion %d, %s: %s\n", results[i].pass ? "PASS" : "FAIL", i + 1,
                    names[i], results[i].detail.c_str());
        failures += results[i].pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
