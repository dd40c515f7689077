#include <doctest.h>

#include <set>

#include "csem/bench.hpp"
#include "csem/demos.hpp"

using namespace csem;

namespace {

ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.n_cal = 120;
    cfg.n_test = 80;
    cfg.trials = 2;
    cfg.seed = 5150;
    return cfg;
}

} // namespace

TEST_CASE("split is seeded, disjoint, and sized as configured") {
    std::vector<int> cal1, test1, cal2, test2;
    split_indices(1000, 300, 500, 42, cal1, test1);
    split_indices(1000, 300, 500, 42, cal2, test2);
    CHECK(cal1 == cal2);
    CHECK(test1 == test2);
    CHECK(cal1.size() == 300);
    CHECK(test1.size() == 500);

    std::set<int> seen(cal1.begin(), cal1.end());
    for (int i : test1) CHECK(seen.insert(i).second);

    std::vector<int> cal3, test3;
    split_indices(1000, 300, 500, 43, cal3, test3);
    CHECK(cal3 != cal1);

    CHECK_THROWS_AS(split_indices(100, 80, 30, 1, cal1, test1), Error);
}

TEST_CASE("config parsing is strict") {
    ExperimentConfig cfg = parse_config(R"({"suite":"mnist","epsilon":0.2,"trials":3})");
    CHECK(cfg.suite == "mnist");
    CHECK(cfg.epsilon == doctest::Approx(0.2));
    CHECK(cfg.trials == 3);

    ExperimentConfig split = parse_config(
        R"({"split_policy":{"type":"single_split","epsilon0":0.005,"epsilon1":0.095}})");
    CHECK(split.policy.kind == SplitPolicy::Kind::SingleSplit);
    CHECK(split.policy.eps0 == doctest::Approx(0.005));

    CHECK_THROWS_AS(parse_config(R"({"unknown_key":1})"), Error);
    CHECK_THROWS_AS(parse_config(R"({"suite":"bogus"})"), Error);
    CHECK_THROWS_AS(parse_config(R"({"semantics":["bogus"]})"), Error);
    CHECK_THROWS_AS(parse_config(R"({"scene":{"bogus":1}})"), Error);
    CHECK_THROWS_AS(parse_config(R"({"trials":0})"), Error);
}

TEST_CASE("suite definitions") {
    auto mnist = mnist_suite();
    CHECK(mnist.size() == 10);
    int imperative = 0;
    for (const auto& p : mnist) {
        if (!p.imp_text.empty()) ++imperative;
    }
    CHECK(imperative == 2);

    CHECK(detection_suite(false).size() == 12);
    CHECK(detection_suite(true).size() == 24);

    // every DSL program in both suites parses and typechecks
    for (const auto& p : mnist) {
        if (p.imp_text.empty()) {
            Program prog = parse_program(p.sexpr, PrimType::integer(), bench_cats());
            CHECK(typecheck(prog).root_type == PrimType::integer());
        } else {
            ImpProgram prog = parse_imperative(p.imp_text);
            CHECK(prog.var_id(p.out_var) >= 0);
        }
    }
    for (const auto& p : detection_suite(true)) {
        Program prog = parse_program(p.sexpr, PrimType::list(PrimType::det()), bench_cats());
        TypeInfo info = typecheck(prog);
        CHECK(info.root_type == (p.binarized ? PrimType::boolean() : PrimType::integer()));
        CHECK(info.ml_sites.size() == 1);
    }
}

TEST_CASE("run_suite on a tiny mnist config") {
    ExperimentConfig cfg = tiny_config();
    cfg.programs = {"sum_of_list", "count_less_than_6", "sum_until_gt_5"};
    RunReport report = run_suite(cfg);
    REQUIRE(report.rows.size() == 9); // 3 programs x 3 semantics
    for (const auto& row : report.rows) {
        CHECK_FALSE(row.failed);
        CHECK(row.coverage >= 0.0);
        CHECK(row.coverage <= 1.0);
        CHECK(row.avg_size >= 1.0);
    }
    CHECK(report.size_ratio_vs_full.count("direct") == 1);
    CHECK(report.size_ratio_vs_full.count("compositional") == 1);
}

TEST_CASE("reports are deterministic and round trip") {
    ExperimentConfig cfg = tiny_config();
    cfg.programs = {"sum_of_list"};
    RunReport a = run_suite(cfg);
    RunReport b = run_suite(cfg);
    CHECK(report_to_json(a) == report_to_json(b));

    // CSV has one line per row plus the header
    std::string csv = report_to_csv(a);
    size_t lines = std::count(csv.begin(), csv.end(), '\n');
    CHECK(lines == a.rows.size() + 1);
    CHECK(csv.rfind("program,semantics,avg_size,size_std,coverage,coverage_std,runtime", 0) == 0);

    // the text summary carries the ratio row
    std::string text = report_to_text(a);
    CHECK(text.find("set size / our set size") != std::string::npos);

    // runtimes stay out of the JSON document
    CHECK(report_to_json(a).find("runtime") == std::string::npos);
}

TEST_CASE("detection smoke run") {
    ExperimentConfig cfg;
    cfg.suite = "detection";
    cfg.n_cal = 150;
    cfg.n_test = 100;
    cfg.trials = 1;
    cfg.policy = SplitPolicy::single_split(0.005, 0.095);
    cfg.programs = {"count_objects", "count_objects_ge", "max_dist_two_people"};
    RunReport report = run_suite(cfg);
    REQUIRE(report.rows.size() == 9);
    for (const auto& row : report.rows) {
        CHECK_FALSE(row.failed);
        if (row.program == "count_objects_ge") {
            CHECK(row.uncertain_fraction >= 0.0);
        }
    }
}

TEST_CASE("binarized outputs report the uncertain fraction") {
    ExperimentConfig cfg;
    cfg.suite = "detection";
    cfg.n_cal = 120;
    cfg.n_test = 60;
    cfg.trials = 1;
    cfg.programs = {"count_objects_ge"};
    cfg.semantics = {"compositional"};
    RunReport report = run_suite(cfg);
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].uncertain_fraction >= 0.0);
    CHECK(report.rows[0].uncertain_fraction <= 1.0);
    // binarized outputs have size 1 or 2
    CHECK(report.rows[0].avg_size >= 1.0);
    CHECK(report.rows[0].avg_size <= 2.0);
}

TEST_CASE("compare_abstract_modes: set sizes never exceed interval sizes") {
    ExperimentConfig cfg = tiny_config();
    cfg.programs = {"sum_of_list", "max_pair_sum"};
    RunReport report = compare_abstract_modes(cfg);
    REQUIRE(report.rows.size() == 4);
    for (size_t i = 0; i < report.rows.size(); i += 2) {
        const ReportRow& iv = report.rows[i];
        const ReportRow& sv = report.rows[i + 1];
        CHECK(iv.semantics == "compositional-interval");
        CHECK(sv.semantics == "compositional-set");
        CHECK(sv.avg_size <= iv.avg_size + 1e-9);
        CHECK(sv.warnings == 0); // no containment violations
        CHECK(sv.coverage <= iv.coverage + 1e-9);
    }
}

TEST_CASE("worked walkthroughs reproduce the published values") {
    CountQueryDemo d = run_count_query_demo();
    CHECK(d.ground_truth == 2);
    CHECK(d.standard == 1);
    CHECK(d.direct == AbstractValue(Interval(0, 2)));
    CHECK(d.compositional == AbstractValue(Interval(1, 3)));
    CHECK(d.full == AbstractValue(Interval(1, 2)));
}
