#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "csem/bench.hpp"
#include "csem/demos.hpp"
#include "csem/rng.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) csem::fail(csem::ErrorKind::Io, "cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::optional<uint64_t> seed, const std::string& format) {
    csem::ExperimentConfig cfg;
    try {
        cfg = csem::parse_config(config_path.empty() ? "{}" : read_file(config_path));
        if (seed) cfg.seed = *seed;
    } catch (const std::exception& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return 2;
    }

    csem::RunReport report = csem::run_suite(cfg);

    std::filesystem::create_directories(out_dir);
    auto path = [&](const char* name) { return (std::filesystem::path(out_dir) / name).string(); };
    if (format.empty() || format == "json") csem::emit_report(report, "json", path("report.json"));
    if (format.empty() || format == "csv") csem::emit_report(report, "csv", path("report.csv"));
    if (format.empty() || format == "text") csem::emit_report(report, "text", path("report.txt"));

    std::cout << csem::report_to_text(report);
    std::cout << "\nreports written to " << out_dir << "\n";
    return report.any_failed ? 1 : 0;
}

int cmd_demo() {
    std::cout << csem::describe(csem::run_count_query_demo()) << "\n";
    std::cout << csem::describe(csem::run_loop_demo());
    return 0;
}

// Standalone property checks, a lighter-weight mirror of the test suites.
int cmd_oracle_check(uint64_t seed, int iterations) {
    using namespace csem;
    Rng rng(seed);
    int failures = 0;
    auto check = [&](bool ok, const char* what) {
        if (!ok) {
            ++failures;
            std::cout << "FAIL " << what << "\n";
        }
    };

    // Galois: alpha(v) contains v for random scalars and lists.
    for (int i = 0; i < iterations; ++i) {
        Value v(rng.next_int(-50, 50));
        check(gamma_contains(alpha(v), v), "alpha containment (int)");
        ListV list;
        int len = static_cast<int>(rng.next_int(0, 5));
        for (int j = 0; j < len; ++j) list.elems.push_back(Value(rng.next_int(-9, 9)));
        Value lv(list);
        check(gamma_contains(alpha(lv), lv), "alpha containment (list)");
    }

    // Interval transformer soundness against brute force.
    for (int i = 0; i < iterations; ++i) {
        auto iv = [&] {
            int64_t lo = rng.next_int(-8, 8);
            return Interval(lo, lo + rng.next_int(0, 5));
        };
        Interval a = iv(), b = iv();
        Interval sum = interval_add(a, b), dif = interval_sub(a, b), prd = interval_mul(a, b);
        for (int64_t x = a.lo; x <= a.hi; ++x) {
            for (int64_t y = b.lo; y <= b.hi; ++y) {
                check(sum.contains(x + y), "interval add soundness");
                check(dif.contains(x - y), "interval sub soundness");
                check(prd.contains(x * y), "interval mul soundness");
            }
        }
    }

    // PAC threshold: allowed error count is monotone in n at fixed delta.
    for (double delta : {0.01, 0.05, 0.2}) {
        int64_t prev = -1;
        for (int n : {50, 200, 1000}) {
            std::vector<double> scores;
            for (int i = 0; i < n; ++i) scores.push_back(rng.next_double());
            auto cp = pac_calibrate(scores, 0.1, delta);
            check(cp.k_allowed >= prev, "pac k monotone in n");
            prev = cp.k_allowed;
        }
    }

    std::cout << (failures == 0 ? "all oracle checks passed\n" : "oracle checks FAILED\n");
    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"conformal semantics benchmark harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string format;
    std::optional<uint64_t> seed;

    auto* run = app.add_subcommand("run", "run a benchmark suite from a JSON config");
    run->add_option("--config", config_path, "path to the experiment config JSON");
    run->add_option("--out", out_dir, "output directory for reports");
    uint64_t seed_val = 0;
    auto* seed_opt = run->add_option("--seed", seed_val, "override the config seed");
    run->add_option("--format", format, "emit a single format: json, csv, or text");

    auto* demo = app.add_subcommand("demo", "print the worked walkthrough examples");
    auto* oracle = app.add_subcommand("oracle-check", "run standalone property oracles");
    uint64_t oracle_seed = 7;
    int oracle_iters = 2000;
    oracle->add_option("--seed", oracle_seed, "oracle seed");
    oracle->add_option("--iterations", oracle_iters, "iterations per property");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (*seed_opt) seed = seed_val;
            return cmd_run(config_path, out_dir, seed, format);
        }
        if (demo->parsed()) return cmd_demo();
        if (oracle->parsed()) return cmd_oracle_check(oracle_seed, oracle_iters);
    } catch (const csem::Error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return ex.kind() == csem::ErrorKind::Config ? 2 : 1;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
