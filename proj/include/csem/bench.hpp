#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "csem/conformal.hpp"
#include "csem/imperative.hpp"
#include "csem/models.hpp"

namespace csem {

// ============================================================================
// Configuration
// ============================================================================

struct ExperimentConfig {
    std::string suite = "mnist"; // mnist | detection | imperative
    double epsilon = 0.1;
    double delta = 0.05;
    SplitPolicy policy;
    int n_cal = 2000;
    int n_test = 5000;
    double eta = 0.2;
    int trials = 25;
    uint64_t seed = 20240801;
    std::vector<std::string> semantics = {"direct", "compositional", "full"};
    std::string abstract_mode = "interval"; // interval | set
    std::vector<std::string> programs;      // empty: whole suite
    bool optimize_ml_free = true;
    int64_t unroll_limit = 10000;
    bool include_binarized = true; // detection suite only
    SceneGenConfig scene;
};

// Strict parse: unknown keys are rejected.
ExperimentConfig parse_config(const std::string& json_text);
std::string config_to_json(const ExperimentConfig& cfg);

// ============================================================================
// Reports
// ============================================================================

struct ReportRow {
    std::string program;
    std::string semantics;
    double coverage = 0.0;
    double coverage_std = 0.0;
    double avg_size = 0.0;
    double size_std = 0.0;
    double runtime_sec = 0.0; // mean seconds per test evaluation
    int64_t empty_meets = 0;
    int64_t warnings = 0;
    double uncertain_fraction = -1.0; // boolean outputs only; -1 when n/a
    bool failed = false;
    std::string error;
};

struct RunReport {
    ExperimentConfig config;
    std::vector<ReportRow> rows;
    // Mean avg-size ratio of each semantics against full, over programs where
    // both are defined.
    std::map<std::string, double> size_ratio_vs_full;
    bool any_failed = false;
};

// The JSON form excludes runtimes so identical configs produce byte-identical
// documents; runtimes are reported in the CSV and text forms.
std::string report_to_json(const RunReport& report);
std::string report_to_csv(const RunReport& report);
std::string report_to_text(const RunReport& report);
void emit_report(const RunReport& report, const std::string& format, const std::string& path);

// ============================================================================
// Program library
// ============================================================================

struct BenchProgram {
    std::string name;
    std::string sexpr;    // functional DSL form
    std::string imp_text; // while-language form (exclusive with sexpr)
    std::string out_var;  // imperative output variable
    bool binarized = false;
    int header = 0; // leading digits in the input lists
};

// The category table every benchmark shares: person, car.
const CatTable& bench_cats();

std::vector<BenchProgram> mnist_suite();
std::vector<BenchProgram> detection_suite(bool include_binarized);
std::vector<BenchProgram> imperative_suite();

// ============================================================================
// Execution
// ============================================================================

// Seeded shuffle then prefix split; trial t passes seed + t.
void split_indices(int n_total, int n_cal, int n_test, uint64_t seed, std::vector<int>& cal,
                   std::vector<int>& test);

RunReport run_suite(const ExperimentConfig& cfg);

// Runs the compositional semantics under the interval and set abstractions
// and reports paired sizes and runtimes ("compositional-interval" /
// "compositional-set" rows). Set-mode violations of the per-example
// containment invariant are counted in the row warnings.
RunReport compare_abstract_modes(const ExperimentConfig& cfg);

} // namespace csem
