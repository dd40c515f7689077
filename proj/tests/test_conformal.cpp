#include <doctest.h>

#include <cmath>

#include "csem/conformal.hpp"
#include "generators.hpp"
#include "toy_oracle.hpp"

using namespace csem;
using namespace csem::testgen;

namespace {

const CatTable& cats() {
    static const CatTable t = [] {
        CatTable c;
        c.intern("person");
        c.intern("car");
        return c;
    }();
    return t;
}

Value int_list(std::vector<int64_t> xs) {
    ListV l;
    for (int64_t x : xs) l.elems.push_back(Value(x));
    return Value(std::move(l));
}

// Builds a toy dataset: per example, the truth list; predictions deviate per
// element by a bounded integer noise term; abstract outputs are intervals of
// the given radius around the predictions (covering truth whenever the radius
// is at least the noise).
ToyOracle make_noisy_oracle(Rng& rng, int n, int noise, int radius) {
    ToyOracle o;
    for (int i = 0; i < n; ++i) {
        int len = static_cast<int>(rng.next_int(3, 6));
        std::vector<int64_t> truth, pred;
        ListA abs;
        for (int j = 0; j < len; ++j) {
            int64_t t = rng.next_int(0, 9);
            int64_t p = std::clamp<int64_t>(t + rng.next_int(-noise, noise), 0, 9);
            truth.push_back(t);
            pred.push_back(p);
            abs.entries.emplace_back(
                AbstractValue(Interval(std::max<int64_t>(0, p - radius),
                                       std::min<int64_t>(9, p + radius))),
                Kleene::True);
        }
        o.examples.push_back({int_list(truth), int_list(pred), AbstractValue(std::move(abs))});
    }
    return o;
}

std::vector<ProgInput> refs(int from, int to) {
    std::vector<ProgInput> out;
    for (int i = from; i < to; ++i) out.push_back(ProgInput::of_ref(i));
    return out;
}

} // namespace

TEST_CASE("direct predictor emission") {
    DirectPredictor radius2{DirectPredictor::Kind::IntRadius, false, 2, false, 0, {}};
    CHECK(radius2.emit(Value(int64_t{4}), AbstractMode::Interval) ==
          AbstractValue(Interval(2, 6)));
    CHECK(radius2.emit(Value(int64_t{4}), AbstractMode::SetMode) ==
          AbstractValue(IntSet({2, 3, 4, 5, 6})));

    DirectPredictor radius0{DirectPredictor::Kind::IntRadius, false, 0, false, 0, {}};
    CHECK(radius0.emit(Value(int64_t{7}), AbstractMode::Interval) ==
          AbstractValue(Interval(7, 7)));

    DirectPredictor full{DirectPredictor::Kind::IntRadius, true, 0, false, 0, {}};
    AbstractValue wide = full.emit(Value(int64_t{0}), AbstractMode::Interval);
    CHECK(wide.as_interval().lo == -kFullSetRadius);
    CHECK(wide.as_interval().hi == kFullSetRadius);

    DirectPredictor exact_bool{DirectPredictor::Kind::DiscreteBool, false, 0, true, 0, {}};
    CHECK(exact_bool.emit(Value(true), AbstractMode::Interval) == AbstractValue(Kleene::True));
    DirectPredictor top_bool{DirectPredictor::Kind::DiscreteBool, false, 0, false, 0, {}};
    CHECK(top_bool.emit(Value(true), AbstractMode::Interval) == AbstractValue(Kleene::Top));

    DirectPredictor det{};
    CHECK(det.emit(Value(int64_t{3}), AbstractMode::Interval) == AbstractValue(Interval(3, 3)));
}

TEST_CASE("pipeline: deterministic program has exact direct semantics") {
    Program p = parse_program("(add (mul X 2) 1)", PrimType::integer(), cats());
    TypeInfo info = typecheck(p);
    ConformalPipeline pipe(p, info, {}, AbstractMode::Interval);
    std::vector<ProgInput> cal;
    for (int i = 0; i < 10; ++i) cal.push_back(ProgInput::of_value(Value(int64_t{i})));
    pipe.calibrate(cal, 0.1, 0.05, SplitPolicy::even());

    auto out = pipe.evaluate(ProgInput::of_value(Value(int64_t{5})));
    CHECK(out.ground_truth.as_int() == 11);
    CHECK(out.direct == AbstractValue(Interval(11, 11)));
    CHECK(out.compositional == AbstractValue(Interval(11, 11)));
    CHECK(out.full == AbstractValue(Interval(11, 11)));
    CHECK(out.empty_meets == 0);
}

TEST_CASE("pipeline: direct radius tracks the standard-vs-truth error") {
    Rng rng(401);
    // noise <= 1 per element, lists of length <= 6: |sum_std - sum_gt| <= 6
    ToyOracle oracle = make_noisy_oracle(rng, 600, 1, 1);
    OracleMap oracles{{Comp::MlDigits, &oracle}};
    Program p = parse_program("(foldr add (digits X) 0)", PrimType::integer(), cats());
    TypeInfo info = typecheck(p);
    ConformalPipeline pipe(p, info, oracles, AbstractMode::Interval);
    pipe.calibrate(refs(0, 500), 0.1, 0.05, SplitPolicy::even());

    for (int i = 500; i < 600; ++i) {
        auto out = pipe.evaluate(ProgInput::of_ref(i));
        const Interval& d = out.direct.as_interval();
        int64_t std_val = out.standard.as_int();
        // symmetric around the standard value, radius at most the worst error
        CHECK(d.lo == std_val - (d.hi - std_val));
        CHECK(d.hi - std_val <= 6);
        // compositional covers truth by construction (radius = noise)
        CHECK(gamma_contains(out.compositional, out.ground_truth));
    }
}

TEST_CASE("pipeline: full output sits inside both operands of its meets") {
    Rng rng(402);
    ToyOracle oracle = make_noisy_oracle(rng, 400, 2, 2);
    OracleMap oracles{{Comp::MlDigits, &oracle}};
    const char* programs[] = {
        "(foldr add (digits X) 0)",
        "(foldr max (digits X) 0)",
        "(foldr add (map (lam d 1) (filter (lam d (lt d 6)) (digits X))) 0)",
    };
    for (const char* text : programs) {
        Program p = parse_program(text, PrimType::integer(), cats());
        TypeInfo info = typecheck(p);
        ConformalPipeline pipe(p, info, oracles, AbstractMode::Interval);
        pipe.calibrate(refs(0, 300), 0.1, 0.05, SplitPolicy::even());
        for (int i = 300; i < 400; ++i) {
            auto out = pipe.evaluate(ProgInput::of_ref(i));
            if (out.empty_meets == 0) {
                ProgInput x = ProgInput::of_ref(i);
                CHECK(leq(out.full, pipe.eval_compositional_full_budget(x)));
                auto rd = pipe.root_direct_share(out.standard);
                REQUIRE(rd.has_value());
                CHECK(leq(out.full, *rd));
            }
        }
    }
}

TEST_CASE("pipeline: empty meets are diagnosed, not fatal") {
    // Abstract site outputs far from the truth make the compositional value
    // disjoint from the (tight) direct prediction.
    ToyOracle oracle;
    for (int i = 0; i < 60; ++i) {
        ListA abs;
        abs.entries.emplace_back(AbstractValue(Interval(90, 99)), Kleene::True);
        oracle.examples.push_back(
            {int_list({3}), int_list({3}), AbstractValue(std::move(abs))});
    }
    OracleMap oracles{{Comp::MlDigits, &oracle}};
    Program p = parse_program("(foldr add (digits X) 0)", PrimType::integer(), cats());
    TypeInfo info = typecheck(p);
    ConformalPipeline pipe(p, info, oracles, AbstractMode::Interval);
    pipe.calibrate(refs(0, 50), 0.2, 0.1, SplitPolicy::even());

    auto out = pipe.evaluate(ProgInput::of_ref(55));
    CHECK(out.empty_meets == 1);
    // the full value falls back to the direct prediction
    CHECK(out.full == out.direct);
}

TEST_CASE("pipeline: boolean root uses the discrete scoring cases") {
    Rng rng(403);
    // zero noise: the standard semantics always agrees with ground truth, so
    // the discrete direct predictor is exact (score 1 everywhere, tau > 0)
    ToyOracle oracle = make_noisy_oracle(rng, 300, 0, 0);
    OracleMap oracles{{Comp::MlDigits, &oracle}};
    Program p =
        parse_program("(ge (foldr add (digits X) 0) 10)", PrimType::integer(), cats());
    TypeInfo info = typecheck(p);
    ConformalPipeline pipe(p, info, oracles, AbstractMode::Interval);
    pipe.calibrate(refs(0, 200), 0.1, 0.05, SplitPolicy::even());

    auto out = pipe.evaluate(ProgInput::of_ref(250));
    CHECK(out.direct == AbstractValue(kleene_of(out.standard.as_bool())));
    CHECK(gamma_contains(out.full, out.ground_truth));
}

TEST_CASE("pipeline: noisy boolean root degrades to top") {
    Rng rng(404);
    // Large noise: the standard count disagrees often, pushing the discrete
    // predictor to the full set.
    ToyOracle oracle = make_noisy_oracle(rng, 300, 4, 4);
    OracleMap oracles{{Comp::MlDigits, &oracle}};
    Program p =
        parse_program("(ge (foldr add (digits X) 0) 20)", PrimType::integer(), cats());
    TypeInfo info = typecheck(p);
    ConformalPipeline pipe(p, info, oracles, AbstractMode::Interval);
    pipe.calibrate(refs(0, 200), 0.1, 0.05, SplitPolicy::even());
    auto out = pipe.evaluate(ProgInput::of_ref(222));
    CHECK(out.direct == AbstractValue(Kleene::Top));
}

TEST_CASE("pipeline: coverage on a larger toy run") {
    Rng rng(405);
    ToyOracle oracle = make_noisy_oracle(rng, 1500, 2, 2);
    OracleMap oracles{{Comp::MlDigits, &oracle}};
    Program p = parse_program("(foldr add (digits X) 0)", PrimType::integer(), cats());
    TypeInfo info = typecheck(p);
    ConformalPipeline pipe(p, info, oracles, AbstractMode::Interval);
    pipe.calibrate(refs(0, 1000), 0.1, 0.05, SplitPolicy::even());

    int covered_direct = 0, covered_comp = 0, covered_full = 0;
    const int n_test = 500;
    for (int i = 1000; i < 1000 + n_test; ++i) {
        auto out = pipe.evaluate(ProgInput::of_ref(i));
        covered_direct += gamma_contains(out.direct, out.ground_truth) ? 1 : 0;
        covered_comp += gamma_contains(out.compositional, out.ground_truth) ? 1 : 0;
        covered_full += gamma_contains(out.full, out.ground_truth) ? 1 : 0;
    }
    // comp covers by construction; direct and full must clear the floor
    CHECK(covered_comp == n_test);
    CHECK(covered_direct >= static_cast<int>(n_test * 0.87));
    CHECK(covered_full >= static_cast<int>(n_test * 0.87));
}

TEST_CASE("single-split policy leaves the sites the stated share") {
    Rng rng(406);
    ToyOracle oracle = make_noisy_oracle(rng, 200, 1, 1);
    OracleMap oracles{{Comp::MlDigits, &oracle}};
    Program p = parse_program("(foldr add (digits X) 0)", PrimType::integer(), cats());
    TypeInfo info = typecheck(p);
    ConformalPipeline pipe(p, info, oracles, AbstractMode::Interval);
    pipe.calibrate(refs(0, 150), 0.1, 0.05, SplitPolicy::single_split(0.005, 0.095));
    CHECK(pipe.budget().direct_pool == doctest::Approx(0.005));
    CHECK(pipe.budget().ml_eps.at(0) == doctest::Approx(0.095));
}

TEST_CASE("direct_score case table") {
    // integer ranges: distance from the standard value
    CHECK(direct_score(PrimType::integer(), Value(int64_t{4}), Value(int64_t{7})) == -3.0);
    CHECK(direct_score(PrimType::integer(), Value(int64_t{4}), Value(int64_t{4})) == 0.0);
    // discrete ranges: the standard value is the only output scoring one
    CHECK(direct_score(PrimType::boolean(), Value(true), Value(true)) == 1.0);
    CHECK(direct_score(PrimType::boolean(), Value(true), Value(false)) == 0.0);
    CHECK(direct_score(PrimType::category(), Value(Cat{0}), Value(Cat{0}), 2) == 1.0);
    CHECK(direct_score(PrimType::category(), Value(Cat{0}), Value(Cat{1}), 2) == 0.0);
    // impossible outputs score -1
    CHECK(direct_score(PrimType::category(), Value(Cat{0}), Value(Cat{5}), 2) == -1.0);
    // list ranges have no scalar score
    CHECK_THROWS_AS(direct_score(PrimType::list(PrimType::integer()), Value(int64_t{0}),
                                 Value(int64_t{0})),
                    Error);
}
