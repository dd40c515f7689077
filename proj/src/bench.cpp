#include "csem/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "csem/rng.hpp"

namespace csem {

using nlohmann::json;

// ============================================================================
// Configuration
// ============================================================================

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) {
            if (it.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok) fail(ErrorKind::Config, "unknown key '" + it.key() + "' in " + where);
    }
}

SplitPolicy parse_policy(const json& j) {
    reject_unknown(j, {"type", "epsilon0", "epsilon1", "weights"}, "split_policy");
    std::string type = j.value("type", "even");
    if (type == "even") return SplitPolicy::even();
    if (type == "single_split") {
        return SplitPolicy::single_split(j.at("epsilon0").get<double>(),
                                         j.at("epsilon1").get<double>());
    }
    if (type == "weighted") {
        return SplitPolicy::weighted(j.at("weights").get<std::vector<double>>());
    }
    fail(ErrorKind::Config, "unknown split policy '" + type + "'");
}

json policy_to_json(const SplitPolicy& p) {
    switch (p.kind) {
    case SplitPolicy::Kind::Even: return {{"type", "even"}};
    case SplitPolicy::Kind::SingleSplit:
        return {{"type", "single_split"}, {"epsilon0", p.eps0}, {"epsilon1", p.eps1}};
    case SplitPolicy::Kind::Weighted: return {{"type", "weighted"}, {"weights", p.weights}};
    }
    return {};
}

} // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j = json::parse(json_text);
    reject_unknown(j,
                   {"suite", "epsilon", "delta", "split_policy", "n_cal", "n_test", "eta",
                    "trials", "seed", "semantics", "abstract_mode", "programs",
                    "optimize_ml_free", "unroll_limit", "include_binarized", "scene"},
                   "config");
    ExperimentConfig cfg;
    cfg.suite = j.value("suite", cfg.suite);
    if (cfg.suite != "mnist" && cfg.suite != "detection" && cfg.suite != "imperative") {
        fail(ErrorKind::Config, "unknown suite '" + cfg.suite + "'");
    }
    cfg.epsilon = j.value("epsilon", cfg.epsilon);
    cfg.delta = j.value("delta", cfg.delta);
    if (j.contains("split_policy")) cfg.policy = parse_policy(j.at("split_policy"));
    cfg.n_cal = j.value("n_cal", cfg.n_cal);
    cfg.n_test = j.value("n_test", cfg.n_test);
    cfg.eta = j.value("eta", cfg.eta);
    cfg.trials = j.value("trials", cfg.trials);
    if (cfg.trials < 1) fail(ErrorKind::Config, "trials must be at least 1");
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("semantics")) cfg.semantics = j.at("semantics").get<std::vector<std::string>>();
    for (const auto& s : cfg.semantics) {
        if (s != "direct" && s != "compositional" && s != "full") {
            fail(ErrorKind::Config, "unknown semantics '" + s + "'");
        }
    }
    cfg.abstract_mode = j.value("abstract_mode", cfg.abstract_mode);
    if (cfg.abstract_mode != "interval" && cfg.abstract_mode != "set") {
        fail(ErrorKind::Config, "abstract_mode must be interval or set");
    }
    if (j.contains("programs")) cfg.programs = j.at("programs").get<std::vector<std::string>>();
    cfg.optimize_ml_free = j.value("optimize_ml_free", cfg.optimize_ml_free);
    cfg.unroll_limit = j.value("unroll_limit", cfg.unroll_limit);
    cfg.include_binarized = j.value("include_binarized", cfg.include_binarized);
    if (j.contains("scene")) {
        const json& s = j.at("scene");
        reject_unknown(s,
                       {"width", "height", "max_objects", "mean_objects", "p_person",
                        "center_sigma", "miss_rate", "spurious_rate", "correct_logit",
                        "logit_sigma"},
                       "scene");
        cfg.scene.width = s.value("width", cfg.scene.width);
        cfg.scene.height = s.value("height", cfg.scene.height);
        cfg.scene.max_objects = s.value("max_objects", cfg.scene.max_objects);
        cfg.scene.mean_objects = s.value("mean_objects", cfg.scene.mean_objects);
        cfg.scene.p_person = s.value("p_person", cfg.scene.p_person);
        cfg.scene.center_sigma = s.value("center_sigma", cfg.scene.center_sigma);
        cfg.scene.miss_rate = s.value("miss_rate", cfg.scene.miss_rate);
        cfg.scene.spurious_rate = s.value("spurious_rate", cfg.scene.spurious_rate);
        cfg.scene.correct_logit = s.value("correct_logit", cfg.scene.correct_logit);
        cfg.scene.logit_sigma = s.value("logit_sigma", cfg.scene.logit_sigma);
    }
    return cfg;
}

namespace {

json config_json(const ExperimentConfig& cfg) {
    return json{{"suite", cfg.suite},
                {"epsilon", cfg.epsilon},
                {"delta", cfg.delta},
                {"split_policy", policy_to_json(cfg.policy)},
                {"n_cal", cfg.n_cal},
                {"n_test", cfg.n_test},
                {"eta", cfg.eta},
                {"trials", cfg.trials},
                {"seed", cfg.seed},
                {"semantics", cfg.semantics},
                {"abstract_mode", cfg.abstract_mode},
                {"programs", cfg.programs},
                {"optimize_ml_free", cfg.optimize_ml_free},
                {"unroll_limit", cfg.unroll_limit},
                {"include_binarized", cfg.include_binarized},
                {"scene",
                 {{"width", cfg.scene.width},
                  {"height", cfg.scene.height},
                  {"max_objects", cfg.scene.max_objects},
                  {"mean_objects", cfg.scene.mean_objects},
                  {"p_person", cfg.scene.p_person},
                  {"center_sigma", cfg.scene.center_sigma},
                  {"miss_rate", cfg.scene.miss_rate},
                  {"spurious_rate", cfg.scene.spurious_rate},
                  {"correct_logit", cfg.scene.correct_logit},
                  {"logit_sigma", cfg.scene.logit_sigma}}}};
}

} // namespace

std::string config_to_json(const ExperimentConfig& cfg) { return config_json(cfg).dump(2); }

// ============================================================================
// Program library
// ============================================================================

const CatTable& bench_cats() {
    static const CatTable table = [] {
        CatTable t;
        t.intern("person");
        t.intern("car");
        return t;
    }();
    return table;
}

std::vector<BenchProgram> mnist_suite() {
    std::vector<BenchProgram> out;
    auto dsl = [&](std::string name, std::string sexpr) {
        out.push_back(BenchProgram{std::move(name), std::move(sexpr), "", "", false, 0});
    };
    dsl("sum_of_list", "(foldr add (digits X) 0)");
    dsl("sum_less_than_7", "(foldr add (filter (lam d (lt d 7)) (digits X)) 0)");
    dsl("max_of_list", "(foldr max (digits X) 0)");
    dsl("count_less_than_6", "(foldr add (map (lam d 1) (filter (lam d (lt d 6)) (digits X))) 0)");
    dsl("count_equal_2", "(foldr add (map (lam d 1) (filter (lam d (eq d 2)) (digits X))) 0)");
    dsl("count_between_3_8",
        "(foldr add (map (lam d 1) (filter (lam d (and (ge d 3) (le d 8))) (digits X))) 0)");
    dsl("max_pair_sum",
        "(foldr max (map (lam q (add (fst q) (snd q))) (pairs (digits X))) 0)");
    dsl("max_pair_diff",
        "(foldr max (map (lam q (absdiff (fst q) (snd q))) (pairs (digits X))) 0)");
    out.push_back(BenchProgram{
        "sum_first_k", "",
        "k := mlread x 0; i := const 1; s := const 0; b := le i k; "
        "while b { v := mlread x i; s := add s v; i := add i 1; b := le i k }",
        "s", false, 1});
    out.push_back(BenchProgram{
        "sum_until_gt_5", "",
        "s := const 0; i := const 0; n := len x; b := lt i n; "
        "while b { v := mlread x i; s := add s v; i := add i 1; p := le v 5; q := lt i n; "
        "b := and p q }",
        "s", false, 0});
    return out;
}

std::vector<BenchProgram> imperative_suite() {
    auto all = mnist_suite();
    std::vector<BenchProgram> out;
    for (auto& p : all) {
        if (!p.imp_text.empty()) out.push_back(std::move(p));
    }
    return out;
}

std::vector<BenchProgram> detection_suite(bool include_binarized) {
    const std::string l1 =
        "(add (absdiff (x (fst q)) (x (snd q))) (absdiff (y (fst q)) (y (snd q))))";
    const std::string people = "(filter (lam d (cat= d person)) (detect X))";
    const std::string cars = "(filter (lam d (cat= d car)) (detect X))";
    auto count = [](const std::string& list) {
        return "(foldr add (map (lam q 1) " + list + ") 0)";
    };
    auto count_d = [](const std::string& list) {
        return "(foldr add (map (lam d 1) " + list + ") 0)";
    };

    std::vector<BenchProgram> base;
    auto dsl = [&](std::string name, std::string sexpr) {
        base.push_back(BenchProgram{std::move(name), std::move(sexpr), "", "", false, 0});
    };
    dsl("count_objects", count_d("(detect X)"));
    dsl("count_near_left", count_d("(filter (lam d (le (x d) 100)) (detect X))"));
    dsl("count_near_right", count_d("(filter (lam d (ge (x d) 540)) (detect X))"));
    dsl("count_near_top", count_d("(filter (lam d (le (y d) 100)) (detect X))"));
    dsl("count_near_bottom", count_d("(filter (lam d (ge (y d) 380)) (detect X))"));
    dsl("count_person_car_pairs_100",
        count("(filter (lam q (le " + l1 + " 100)) (product " + people + " " + cars + "))"));
    dsl("count_person_left_of_car",
        count("(filter (lam q (and (lt (x (fst q)) (x (snd q))) (le " + l1 +
              " 100))) (product " + people + " " + cars + "))"));
    dsl("count_person_right_of_car",
        count("(filter (lam q (and (gt (x (fst q)) (x (snd q))) (le " + l1 +
              " 100))) (product " + people + " " + cars + "))"));
    dsl("count_person_below_car",
        count("(filter (lam q (and (gt (y (fst q)) (y (snd q))) (le " + l1 +
              " 100))) (product " + people + " " + cars + "))"));
    dsl("count_person_above_car",
        count("(filter (lam q (and (lt (y (fst q)) (y (snd q))) (le " + l1 +
              " 100))) (product " + people + " " + cars + "))"));
    dsl("max_dist_two_people",
        "(foldr max (map (lam q " + l1 + ") (pairs " + people + ")) 0)");
    dsl("max_dist_person_car",
        "(foldr max (map (lam q " + l1 + ") (product " + people + " " + cars + ")) 0)");

    std::vector<BenchProgram> out = base;
    if (include_binarized) {
        for (const auto& p : base) {
            BenchProgram b = p;
            b.name = p.name + "_ge";
            bool distance = p.name.rfind("max_dist", 0) == 0;
            b.sexpr = "(ge " + p.sexpr + (distance ? " 500)" : " 3)");
            b.binarized = true;
            out.push_back(std::move(b));
        }
    }
    return out;
}

// ============================================================================
// Split
// ============================================================================

void split_indices(int n_total, int n_cal, int n_test, uint64_t seed, std::vector<int>& cal,
                   std::vector<int>& test) {
    if (n_cal + n_test > n_total) fail(ErrorKind::Config, "split sizes exceed the dataset");
    std::vector<int> idx(static_cast<size_t>(n_total));
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (int i = n_total - 1; i > 0; --i) {
        int j = static_cast<int>(rng.next_below(static_cast<uint64_t>(i + 1)));
        std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
    }
    cal.assign(idx.begin(), idx.begin() + n_cal);
    test.assign(idx.begin() + n_cal, idx.begin() + n_cal + n_test);
}

// ============================================================================
// Measurement
// ============================================================================

namespace {

struct RowAccum {
    std::vector<double> trial_coverage;
    double size_sum = 0.0, size_sq = 0.0;
    int64_t n_sizes = 0;
    int64_t uncertain = 0;
    int64_t bool_outputs = 0;
    int64_t empty_meets = 0, warnings = 0;
    double runtime_sum = 0.0;
    int64_t n_evals = 0;

    void add_size(double s) {
        size_sum += s;
        size_sq += s * s;
        ++n_sizes;
    }
    void add_output(const AbstractValue& out) {
        if (out.is_bool()) {
            ++bool_outputs;
            if (out.as_bool() == Kleene::Top) ++uncertain;
        }
        add_size(gamma_size(out, bench_cats().size()));
    }

    ReportRow finish(const std::string& program, const std::string& semantics) const {
        ReportRow row;
        row.program = program;
        row.semantics = semantics;
        double csum = 0.0;
        for (double c : trial_coverage) csum += c;
        double cmean = trial_coverage.empty() ? 0.0 : csum / trial_coverage.size();
        double cvar = 0.0;
        for (double c : trial_coverage) cvar += (c - cmean) * (c - cmean);
        row.coverage = cmean;
        row.coverage_std =
            trial_coverage.size() > 1 ? std::sqrt(cvar / (trial_coverage.size() - 1)) : 0.0;
        if (n_sizes > 0) {
            double mean = size_sum / n_sizes;
            double var = size_sq / n_sizes - mean * mean;
            row.avg_size = mean;
            row.size_std = var > 0 ? std::sqrt(var) : 0.0;
        }
        row.empty_meets = empty_meets;
        row.warnings = warnings;
        if (bool_outputs > 0) {
            row.uncertain_fraction = static_cast<double>(uncertain) / bool_outputs;
        }
        row.runtime_sec = n_evals > 0 ? runtime_sum / n_evals : 0.0;
        return row;
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct SemanticsSel {
    bool direct = false, comp = false, full = false;
};

SemanticsSel select_semantics(const std::vector<std::string>& names) {
    SemanticsSel s;
    for (const auto& n : names) {
        if (n == "direct") s.direct = true;
        if (n == "compositional") s.comp = true;
        if (n == "full") s.full = true;
    }
    return s;
}

// Runs one DSL benchmark program over all trials; appends one row per
// selected semantics.
void run_dsl_program(const ExperimentConfig& cfg, const BenchProgram& bp,
                     const MLOracle& oracle, Comp ml_comp, int n_total,
                     std::vector<ReportRow>& rows) {
    Program prog = parse_program(bp.sexpr, PrimType::integer(), bench_cats());
    TypeInfo info = typecheck(prog);
    OracleMap oracles{{ml_comp, &oracle}};
    AbstractMode mode =
        cfg.abstract_mode == "set" ? AbstractMode::SetMode : AbstractMode::Interval;

    SemanticsSel sel = select_semantics(cfg.semantics);
    RowAccum acc_direct, acc_comp, acc_full;

    for (int t = 0; t < cfg.trials; ++t) {
        std::vector<int> cal_idx, test_idx;
        split_indices(n_total, cfg.n_cal, cfg.n_test, cfg.seed + static_cast<uint64_t>(t),
                      cal_idx, test_idx);
        std::vector<ProgInput> cal;
        cal.reserve(cal_idx.size());
        for (int i : cal_idx) cal.push_back(ProgInput::of_ref(i));

        ConformalPipeline pipe(prog, info, oracles, mode, bench_cats().size());
        pipe.calibrate(cal, cfg.epsilon, cfg.delta, cfg.policy);

        int64_t cov_direct = 0, cov_comp = 0, cov_full = 0;
        for (int i : test_idx) {
            ProgInput x = ProgInput::of_ref(i);
            auto t0 = Clock::now();
            ConformalPipeline::Outputs out = pipe.evaluate(x);
            double dt = seconds_since(t0);
            if (sel.direct) {
                cov_direct += gamma_contains(out.direct, out.ground_truth) ? 1 : 0;
                acc_direct.add_output(out.direct);
                acc_direct.runtime_sum += dt;
                ++acc_direct.n_evals;
            }
            if (sel.comp) {
                cov_comp += gamma_contains(out.compositional, out.ground_truth) ? 1 : 0;
                acc_comp.add_output(out.compositional);
                acc_comp.runtime_sum += dt;
                ++acc_comp.n_evals;
            }
            if (sel.full) {
                cov_full += gamma_contains(out.full, out.ground_truth) ? 1 : 0;
                acc_full.add_output(out.full);
                acc_full.empty_meets += out.empty_meets;
                acc_full.warnings += out.warnings;
                acc_full.runtime_sum += dt;
                ++acc_full.n_evals;
            }
        }
        double denom = static_cast<double>(test_idx.size());
        if (sel.direct) acc_direct.trial_coverage.push_back(cov_direct / denom);
        if (sel.comp) acc_comp.trial_coverage.push_back(cov_comp / denom);
        if (sel.full) acc_full.trial_coverage.push_back(cov_full / denom);
    }

    if (sel.direct) rows.push_back(acc_direct.finish(bp.name, "direct"));
    if (sel.comp) rows.push_back(acc_comp.finish(bp.name, "compositional"));
    if (sel.full) rows.push_back(acc_full.finish(bp.name, "full"));
}

void run_imp_program(const ExperimentConfig& cfg, const BenchProgram& bp,
                     const DigitListDataset& data, std::vector<ReportRow>& rows) {
    if (cfg.abstract_mode == "set") {
        fail(ErrorKind::Config, "the while-language pipeline runs interval abstractions only");
    }
    ImpProgram prog = parse_imperative(bp.imp_text);
    ImpOptions base;
    base.skip_ml_free = cfg.optimize_ml_free;
    base.unroll_limit = cfg.unroll_limit;

    SemanticsSel sel = select_semantics(cfg.semantics);
    RowAccum acc_direct, acc_comp, acc_full;

    ImpPipeline pipe(prog, &data, bp.out_var);
    int n_total = static_cast<int>(data.lists.size());
    for (int t = 0; t < cfg.trials; ++t) {
        std::vector<int> cal_idx, test_idx;
        split_indices(n_total, cfg.n_cal, cfg.n_test, cfg.seed + static_cast<uint64_t>(t),
                      cal_idx, test_idx);
        std::vector<ExampleRef> cal;
        cal.reserve(cal_idx.size());
        for (int i : cal_idx) cal.push_back(ExampleRef{i});
        pipe.calibrate(cal, cfg.epsilon, cfg.delta, cfg.policy, base);

        int64_t cov_direct = 0, cov_comp = 0, cov_full = 0;
        for (int i : test_idx) {
            auto t0 = Clock::now();
            ImpPipeline::Outputs out = pipe.evaluate(ExampleRef{i});
            double dt = seconds_since(t0);
            Value gt(out.ground_truth);
            if (sel.direct) {
                cov_direct += gamma_contains(out.direct, gt) ? 1 : 0;
                acc_direct.add_output(out.direct);
                acc_direct.runtime_sum += dt;
                ++acc_direct.n_evals;
            }
            if (sel.comp) {
                cov_comp += gamma_contains(out.compositional, gt) ? 1 : 0;
                acc_comp.add_output(out.compositional);
                acc_comp.runtime_sum += dt;
                ++acc_comp.n_evals;
            }
            if (sel.full) {
                cov_full += gamma_contains(out.full, gt) ? 1 : 0;
                acc_full.add_output(out.full);
                acc_full.empty_meets += out.empty_meets;
                acc_full.warnings += out.warnings;
                acc_full.runtime_sum += dt;
                ++acc_full.n_evals;
            }
        }
        double denom = static_cast<double>(test_idx.size());
        if (sel.direct) acc_direct.trial_coverage.push_back(cov_direct / denom);
        if (sel.comp) acc_comp.trial_coverage.push_back(cov_comp / denom);
        if (sel.full) acc_full.trial_coverage.push_back(cov_full / denom);
    }

    if (sel.direct) rows.push_back(acc_direct.finish(bp.name, "direct"));
    if (sel.comp) rows.push_back(acc_comp.finish(bp.name, "compositional"));
    if (sel.full) rows.push_back(acc_full.finish(bp.name, "full"));
}

bool wanted(const ExperimentConfig& cfg, const BenchProgram& bp) {
    if (cfg.programs.empty()) return true;
    return std::find(cfg.programs.begin(), cfg.programs.end(), bp.name) != cfg.programs.end();
}

void finish_report(RunReport& report) {
    // Mean per-program ratio of each semantics' average size to full's.
    std::map<std::string, std::pair<double, int>> ratio;
    for (const auto& row : report.rows) {
        if (row.failed || row.semantics == "full") continue;
        for (const auto& full_row : report.rows) {
            if (full_row.program == row.program && full_row.semantics == "full" &&
                !full_row.failed && full_row.avg_size > 0.0) {
                auto& [sum, count] = ratio[row.semantics];
                sum += row.avg_size / full_row.avg_size;
                ++count;
            }
        }
    }
    for (const auto& [name, rc] : ratio) {
        if (rc.second > 0) report.size_ratio_vs_full[name] = rc.first / rc.second;
    }
    for (const auto& row : report.rows) {
        if (row.failed) report.any_failed = true;
    }
}

} // namespace

RunReport run_suite(const ExperimentConfig& cfg) {
    RunReport report;
    report.config = cfg;

    if (cfg.suite == "mnist" || cfg.suite == "imperative") {
        auto programs = cfg.suite == "mnist" ? mnist_suite() : imperative_suite();
        // One list dataset per input shape: the loop-free programs share one;
        // programs with a header block get their own.
        int n_total = cfg.n_cal + cfg.n_test;
        DigitListDataset shared =
            gen_digit_lists(n_total, cfg.eta, derive_seed(cfg.seed, 100), 4, 10, 0);
        DigitListDataset with_header =
            gen_digit_lists(n_total, cfg.eta, derive_seed(cfg.seed, 101), 10, 10, 1);
        for (const auto& bp : programs) {
            if (!wanted(cfg, bp)) continue;
            if (cfg.abstract_mode == "set" && !bp.imp_text.empty()) continue;
            const DigitListDataset& data = bp.header > 0 ? with_header : shared;
            try {
                if (!bp.imp_text.empty()) {
                    run_imp_program(cfg, bp, data, report.rows);
                } else {
                    DigitListOracle oracle(&data);
                    run_dsl_program(cfg, bp, oracle, Comp::MlDigits, n_total, report.rows);
                }
            } catch (const std::exception& ex) {
                ReportRow row;
                row.program = bp.name;
                row.semantics = "-";
                row.failed = true;
                row.error = ex.what();
                report.rows.push_back(std::move(row));
            }
        }
    } else {
        auto programs = detection_suite(cfg.include_binarized);
        int n_total = cfg.n_cal + cfg.n_test;
        SceneDataset data =
            gen_scene_dataset(n_total, cfg.scene, derive_seed(cfg.seed, 102), bench_cats().size());
        DetectOracle oracle(&data);
        for (const auto& bp : programs) {
            if (!wanted(cfg, bp)) continue;
            try {
                run_dsl_program(cfg, bp, oracle, Comp::MlDetect, n_total, report.rows);
            } catch (const std::exception& ex) {
                ReportRow row;
                row.program = bp.name;
                row.semantics = "-";
                row.failed = true;
                row.error = ex.what();
                report.rows.push_back(std::move(row));
            }
        }
    }

    finish_report(report);
    return report;
}

RunReport compare_abstract_modes(const ExperimentConfig& cfg) {
    if (cfg.suite != "mnist") {
        fail(ErrorKind::Config, "abstract-mode comparison needs the finite-domain suite");
    }
    RunReport report;
    report.config = cfg;

    int n_total = cfg.n_cal + cfg.n_test;
    DigitListDataset data =
        gen_digit_lists(n_total, cfg.eta, derive_seed(cfg.seed, 100), 4, 10, 0);
    DigitListOracle oracle(&data);
    OracleMap oracles{{Comp::MlDigits, &oracle}};

    for (const auto& bp : mnist_suite()) {
        if (!bp.imp_text.empty()) continue; // loop-free programs only
        if (!wanted(cfg, bp)) continue;
        try {
            Program prog = parse_program(bp.sexpr, PrimType::integer(), bench_cats());
            TypeInfo info = typecheck(prog);
            RowAccum acc_iv, acc_set;
            int64_t containment_violations = 0;

            for (int t = 0; t < cfg.trials; ++t) {
                std::vector<int> cal_idx, test_idx;
                split_indices(n_total, cfg.n_cal, cfg.n_test,
                              cfg.seed + static_cast<uint64_t>(t), cal_idx, test_idx);
                std::vector<ProgInput> cal;
                for (int i : cal_idx) cal.push_back(ProgInput::of_ref(i));

                ConformalPipeline pipe_iv(prog, info, oracles, AbstractMode::Interval,
                                          bench_cats().size());
                ConformalPipeline pipe_set(prog, info, oracles, AbstractMode::SetMode,
                                           bench_cats().size());
                pipe_iv.calibrate(cal, cfg.epsilon, cfg.delta, cfg.policy);
                pipe_set.calibrate(cal, cfg.epsilon, cfg.delta, cfg.policy);

                int64_t cov_iv = 0, cov_set = 0;
                for (int i : test_idx) {
                    ProgInput x = ProgInput::of_ref(i);
                    Value gt = eval_ground_truth(prog, x, oracles);

                    auto t0 = Clock::now();
                    AbstractValue iv = pipe_iv.eval_compositional_only(x);
                    double dt_iv = seconds_since(t0);
                    t0 = Clock::now();
                    AbstractValue sv = pipe_set.eval_compositional_only(x);
                    double dt_set = seconds_since(t0);

                    cov_iv += gamma_contains(iv, gt) ? 1 : 0;
                    cov_set += gamma_contains(sv, gt) ? 1 : 0;
                    acc_iv.add_output(iv);
                    acc_set.add_output(sv);
                    acc_iv.runtime_sum += dt_iv;
                    acc_set.runtime_sum += dt_set;
                    ++acc_iv.n_evals;
                    ++acc_set.n_evals;

                    // The exact finite sets must sit inside the interval hulls.
                    if (iv.is_interval() && sv.is_intset()) {
                        for (int64_t v : sv.as_intset().vals) {
                            if (!iv.as_interval().contains(v)) {
                                ++containment_violations;
                                break;
                            }
                        }
                    }
                }
                double denom = static_cast<double>(test_idx.size());
                acc_iv.trial_coverage.push_back(cov_iv / denom);
                acc_set.trial_coverage.push_back(cov_set / denom);
            }

            ReportRow row_iv = acc_iv.finish(bp.name, "compositional-interval");
            ReportRow row_set = acc_set.finish(bp.name, "compositional-set");
            row_set.warnings += containment_violations;
            report.rows.push_back(std::move(row_iv));
            report.rows.push_back(std::move(row_set));
        } catch (const std::exception& ex) {
            ReportRow row;
            row.program = bp.name;
            row.semantics = "-";
            row.failed = true;
            row.error = ex.what();
            report.rows.push_back(std::move(row));
        }
    }

    for (const auto& row : report.rows) {
        if (row.failed) report.any_failed = true;
    }
    return report;
}

// ============================================================================
// Report emission
// ============================================================================

namespace {

json row_json(const ReportRow& r) {
    json j{{"program", r.program},
           {"semantics", r.semantics},
           {"coverage", r.coverage},
           {"coverage_std", r.coverage_std},
           {"avg_size", r.avg_size},
           {"size_std", r.size_std},
           {"empty_meets", r.empty_meets},
           {"warnings", r.warnings},
           {"failed", r.failed},
           {"error", r.error}};
    if (r.uncertain_fraction >= 0.0) {
        j["uncertain_fraction"] = r.uncertain_fraction;
    }
    return j;
}

} // namespace

std::string report_to_json(const RunReport& report) {
    json j;
    j["schema_version"] = 1;
    j["config"] = config_json(report.config);
    j["rows"] = json::array();
    for (const auto& r : report.rows) j["rows"].push_back(row_json(r));
    j["summary"] = {{"size_ratio_vs_full", report.size_ratio_vs_full},
                    {"any_failed", report.any_failed}};
    return j.dump(2) + "\n";
}

std::string report_to_csv(const RunReport& report) {
    std::ostringstream os;
    os << "program,semantics,avg_size,size_std,coverage,coverage_std,runtime\n";
    for (const auto& r : report.rows) {
        os << r.program << "," << r.semantics << "," << r.avg_size << "," << r.size_std << ","
           << r.coverage << "," << r.coverage_std << "," << r.runtime_sec << "\n";
    }
    return os.str();
}

std::string report_to_text(const RunReport& report) {
    std::ostringstream os;
    os << "suite: " << report.config.suite << "  epsilon: " << report.config.epsilon
       << "  trials: " << report.config.trials << "\n\n";

    auto line = [&](const std::string& a, const std::string& b, const std::string& c,
                    const std::string& d, const std::string& e) {
        os << a;
        os << std::string(a.size() < 36 ? 36 - a.size() : 1, ' ') << b;
        os << std::string(b.size() < 26 ? 26 - b.size() : 1, ' ') << c;
        os << std::string(c.size() < 20 ? 20 - c.size() : 1, ' ') << d;
        os << std::string(d.size() < 20 ? 20 - d.size() : 1, ' ') << e << "\n";
    };
    line("program", "semantics", "avg size +- std", "coverage +- std", "runtime (s)");
    auto fmt = [](double v, double s) {
        std::ostringstream o;
        o.setf(std::ios::fixed);
        o.precision(3);
        o << v << " +- " << s;
        return o.str();
    };
    for (const auto& r : report.rows) {
        if (r.failed) {
            line(r.program, "-", "FAILED: " + r.error, "", "");
            continue;
        }
        std::ostringstream rt;
        rt << r.runtime_sec;
        line(r.program, r.semantics, fmt(r.avg_size, r.size_std),
             fmt(r.coverage, r.coverage_std), rt.str());
    }
    if (!report.size_ratio_vs_full.empty()) {
        os << "\nset size / our set size:";
        for (const auto& [name, ratio] : report.size_ratio_vs_full) {
            os.setf(std::ios::fixed);
            os.precision(2);
            os << "  " << name << " " << ratio << "x";
        }
        os << "  full 1.00x\n";
    }
    return os.str();
}

void emit_report(const RunReport& report, const std::string& format, const std::string& path) {
    std::string body;
    if (format == "json") {
        body = report_to_json(report);
    } else if (format == "csv") {
        body = report_to_csv(report);
    } else if (format == "text") {
        body = report_to_text(report);
    } else {
        fail(ErrorKind::Config, "unknown report format '" + format + "'");
    }
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Io, "cannot open " + path + " for writing");
    out << body;
    if (!out) fail(ErrorKind::Io, "failed writing " + path);
}

} // namespace csem
