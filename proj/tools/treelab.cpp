#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "treelab/harness.hpp"
#include "treelab/report.hpp"
#include "treelab/selfcheck.hpp"

namespace fs = std::filesystem;
using namespace treelab;

namespace {

// Bad flags, config keys, or values: reported as usage (exit 1), unlike
// run-level failures (exit 2).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExpFlags {
    std::vector<std::size_t> n_grid;
    double sigma = 1.0;
    int reps = 0;
    std::vector<std::string> methods;
    std::uint64_t seed = 0;
    std::string out = "results";
    std::string preset;
    int workers = 1;
    std::string config_path;
};

CLI::App* add_experiment(CLI::App& app, int experiment, const char* desc, ExpFlags& flags) {
    const std::string name = "exp" + std::to_string(experiment);
    CLI::App* cmd = app.add_subcommand(name, desc);
    cmd->add_option("--n-grid", flags.n_grid, "training sample sizes (comma separated)")
        ->delimiter(',');
    if (experiment == 1) {
        cmd->add_option("--sigma", flags.sigma, "label noise standard deviation");
    }
    cmd->add_option("--reps", flags.reps, "repetitions per sample size");
    cmd->add_option("--methods", flags.methods, "subset of cart,oct,gbt,shap")->delimiter(',');
    cmd->add_option("--seed", flags.seed, "master seed");
    cmd->add_option("--out", flags.out, "output directory");
    cmd->add_option("--preset", flags.preset,
                    "repetition scale: desk (50/25) or paper (2000/100)")
        ->check(CLI::IsMember({"desk", "paper"}));
    cmd->add_option("--workers", flags.workers, "parallel workers (env TREELAB_WORKERS)");
    cmd->add_option("--config", flags.config_path,
                    "key=value file mirroring the flags; flags take precedence");
    return cmd;
}

std::string trim(const std::string& s) {
    const std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream stream(s);
    std::string field;
    while (std::getline(stream, field, ',')) out.push_back(trim(field));
    return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    std::stringstream stream(value);
    T parsed{};
    stream >> parsed;
    if (stream.fail() || !stream.eof()) {
        throw UsageError("config key '" + key + "': cannot parse '" + value + "'");
    }
    return parsed;
}

// key=value per line, # comments, blank lines ignored. Keys mirror the
// long flags. Keys already given as flags are skipped; the rest are
// applied and recorded in `applied`.
void apply_config(const CLI::App* cmd, int experiment, ExpFlags& flags,
                  std::vector<std::string>& applied) {
    std::ifstream in(flags.config_path);
    if (!in) throw UsageError("cannot open config file " + flags.config_path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError("config line " + std::to_string(line_no) + ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        const bool known =
            key == "n-grid" || (key == "sigma" && experiment == 1) || key == "reps" ||
            key == "methods" || key == "seed" || key == "out" || key == "preset" ||
            key == "workers";
        if (!known) throw UsageError("config key '" + key + "' does not mirror a flag");
        if (cmd->count("--" + key) > 0) continue;  // flags take precedence
        if (key == "n-grid") {
            flags.n_grid.clear();
            for (const std::string& field : split_commas(value)) {
                flags.n_grid.push_back(parse_number<std::size_t>(key, field));
            }
        } else if (key == "sigma") {
            flags.sigma = parse_number<double>(key, value);
        } else if (key == "reps") {
            flags.reps = parse_number<int>(key, value);
        } else if (key == "methods") {
            flags.methods = split_commas(value);
        } else if (key == "seed") {
            flags.seed = parse_number<std::uint64_t>(key, value);
        } else if (key == "out") {
            flags.out = value;
        } else if (key == "preset") {
            if (value != "desk" && value != "paper") {
                throw UsageError("config key 'preset': expected desk or paper");
            }
            flags.preset = value;
        } else {
            flags.workers = parse_number<int>(key, value);
        }
        applied.push_back(key);
    }
}

bool was_set(const CLI::App* cmd, const std::vector<std::string>& applied, const char* key) {
    if (cmd->count(std::string("--") + key) > 0) return true;
    return std::find(applied.begin(), applied.end(), key) != applied.end();
}

// --workers beats the config file beats TREELAB_WORKERS beats 1.
int resolve_workers(const CLI::App* cmd, const std::vector<std::string>& applied,
                    const ExpFlags& flags) {
    if (was_set(cmd, applied, "workers")) return flags.workers;
    const char* env = std::getenv("TREELAB_WORKERS");
    if (env == nullptr || *env == '\0') return 1;
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || parsed < 1) {
        throw UsageError(std::string("invalid TREELAB_WORKERS value: ") + env);
    }
    return static_cast<int>(parsed);
}

int desk_reps(int experiment) { return experiment == 1 ? 50 : 25; }

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path.string());
    std::cout << "wrote " << path.string() << "\n";
}

int run_experiment_cmd(const CLI::App* cmd, int experiment, ExpFlags& flags) {
    std::vector<std::string> applied;
    if (!flags.config_path.empty()) apply_config(cmd, experiment, flags, applied);

    ExperimentConfig cfg;
    cfg.experiment = experiment;
    if (!flags.n_grid.empty()) cfg.n_grid = flags.n_grid;
    cfg.sigma = flags.sigma;
    cfg.seed = flags.seed;
    cfg.workers = resolve_workers(cmd, applied, flags);
    if (was_set(cmd, applied, "reps")) {
        cfg.reps = flags.reps;
    } else if (flags.preset == "desk") {
        cfg.reps = desk_reps(experiment);
    } else {
        cfg.reps = paper_reps(experiment);
    }
    if (!flags.methods.empty()) {
        cfg.methods.clear();
        for (const std::string& name : flags.methods) {
            const std::optional<Method> m = parse_method(name);
            if (!m) {
                throw UsageError("unknown method '" + name + "' (expected cart,oct,gbt,shap)");
            }
            cfg.methods.push_back(*m);
        }
    }

    const ExperimentResult result = run_experiment(cfg);
    fs::create_directories(flags.out);
    const std::string stem = "exp" + std::to_string(experiment);
    write_file(fs::path(flags.out) / (stem + "_results.csv"), results_to_csv(result));
    write_file(fs::path(flags.out) / (stem + "_summary.csv"), summary_to_csv(result));
    return 0;
}

// "1.000000" -> "_sigma1"; empty label -> no tag
std::string sigma_tag(const std::string& label) {
    if (label.empty()) return "";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "_sigma%g", std::stod(label));
    return buf;
}

int run_plot_cmd(const std::string& in, const std::string& out_dir) {
    std::ifstream in_file(in, std::ios::binary);
    if (!in_file) throw std::runtime_error("cannot open " + in);
    std::stringstream buffer;
    buffer << in_file.rdbuf();
    const ParsedSummary summary = parse_summary_csv(buffer.str());

    std::vector<std::size_t> grid;
    std::vector<Method> methods;
    int p = 0;
    for (const SummaryRow& row : summary.rows) {
        if (std::find(grid.begin(), grid.end(), row.n) == grid.end()) grid.push_back(row.n);
        if (std::find(methods.begin(), methods.end(), row.method) == methods.end()) {
            methods.push_back(row.method);
        }
        p = std::max(p, row.feature);
    }
    std::sort(grid.begin(), grid.end());
    const std::string stem = "exp" + std::to_string(summary.experiment);
    const std::string tag = sigma_tag(summary.sigma_label);

    PlotSpec importance;
    importance.title = stem + tag + " mean importance share by feature";
    importance.x_grid = grid;
    for (const Method m : methods) {
        for (int f = 1; f <= p; ++f) importance.series.push_back({m, f});
    }
    PlotSpec irrelevant;
    irrelevant.title = stem + tag + " mean irrelevant importance share";
    irrelevant.x_grid = grid;
    for (const Method m : methods) irrelevant.series.push_back({m, 0});

    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / (stem + "_importance" + tag + ".svg"),
               render_line_chart(importance, summary.rows));
    write_file(fs::path(out_dir) / (stem + "_irrelevant" + tag + ".svg"),
               render_line_chart(irrelevant, summary.rows));
    return 0;
}

int run_selftest_cmd() {
    int code = 0;
    for (const SelfCheck& check : run_selfchecks()) {
        std::printf("%-28s %s  %s\n", check.name.c_str(), check.pass ? "PASS" : "FAIL",
                    check.detail.c_str());
        if (!check.pass) code = 2;
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synthetic benchmarks for tree learners and importance measures"};
    app.require_subcommand(1);

    ExpFlags flags1, flags2, flags3;
    CLI::App* exp1 = add_experiment(app, 1, "regression importance benchmark", flags1);
    CLI::App* exp2 = add_experiment(app, 2, "classification benchmark, continuous features",
                                    flags2);
    CLI::App* exp3 = add_experiment(app, 3, "classification benchmark, quantized features",
                                    flags3);

    std::string plot_in, plot_out = "figs";
    CLI::App* plot = app.add_subcommand("plot", "render SVG charts from a summary CSV");
    plot->add_option("--in", plot_in, "summary CSV path")->required();
    plot->add_option("--out", plot_out, "output directory");

    CLI::App* selftest =
        app.add_subcommand("selftest", "run the oracle suites and report pass/fail");

    try {
        app.parse(argc, argv);
        if (app.got_subcommand(exp1)) return run_experiment_cmd(exp1, 1, flags1);
        if (app.got_subcommand(exp2)) return run_experiment_cmd(exp2, 2, flags2);
        if (app.got_subcommand(exp3)) return run_experiment_cmd(exp3, 3, flags3);
        if (app.got_subcommand(plot)) return run_plot_cmd(plot_in, plot_out);
        if (app.got_subcommand(selftest)) return run_selftest_cmd();
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
