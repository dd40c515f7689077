#include "csem/demos.hpp"

#include <sstream>

namespace csem {

namespace {

// Fixture conformal detector: two sure person boxes and three possible ones,
// with one sure and two possible boxes inside the 300px band.
class FixtureDetections : public CalibratedML {
public:
    AbstractValue abstract_output(ExampleRef, int*) const override {
        Cat person = *bench_cats().lookup("person");
        auto det = [&](int64_t xlo, int64_t xhi, int64_t ylo, int64_t yhi, Kleene flag) {
            TupleA t;
            t.elems = {AbstractValue(CatSet::single(person)),
                       AbstractValue(Interval(xlo, xhi)), AbstractValue(Interval(ylo, yhi))};
            return std::make_pair(AbstractValue(std::move(t)), flag);
        };
        ListA list;
        list.entries.push_back(det(60, 140, 180, 240, Kleene::True));   // sure, inside
        list.entries.push_back(det(380, 470, 100, 180, Kleene::True));  // sure, outside
        list.entries.push_back(det(120, 220, 200, 280, Kleene::Top));   // possible, inside
        list.entries.push_back(det(200, 290, 300, 380, Kleene::Top));   // possible, inside
        list.entries.push_back(det(420, 520, 220, 300, Kleene::Top));   // possible, outside
        return AbstractValue(std::move(list));
    }
};

// Fixture scene: two people inside the band (the detector misses one), one
// person and one car outside it.
class FixtureSceneOracle : public MLOracle {
public:
    Value ground_truth(ExampleRef) const override {
        Cat person = *bench_cats().lookup("person");
        Cat car = *bench_cats().lookup("car");
        ListV out;
        out.elems = {det(person, 100, 210), det(person, 170, 240), det(person, 420, 140),
                     det(car, 470, 260)};
        return Value(std::move(out));
    }
    Value predict(ExampleRef) const override {
        Cat person = *bench_cats().lookup("person");
        Cat car = *bench_cats().lookup("car");
        ListV out;
        out.elems = {det(person, 104, 206), det(person, 424, 138), det(car, 462, 255)};
        return Value(std::move(out));
    }
    double score_output(ExampleRef x, const Value& y) const override {
        return y == predict(x) ? 1.0 : 0.0;
    }
    std::unique_ptr<CalibratedML> calibrate(const std::vector<ExampleRef>&, double, double,
                                            AbstractMode) const override {
        return std::make_unique<FixtureDetections>();
    }

private:
    static Value det(Cat c, int64_t x, int64_t y) {
        TupleV t;
        t.elems = {Value(c), Value(x), Value(y)};
        return Value(std::move(t));
    }
};

} // namespace

CountQueryDemo run_count_query_demo() {
    const std::string text =
        "(foldr add (map (lam d 1) (filter (lam d (and (cat= d person) (le (x d) 300))) "
        "(detect X))) 0)";
    Program prog = parse_program(text, PrimType::integer(), bench_cats());
    TypeInfo info = typecheck(prog);
    FixtureSceneOracle oracle;
    OracleMap oracles{{Comp::MlDetect, &oracle}};
    ProgInput x = ProgInput::of_ref(0);

    CountQueryDemo d;
    d.ground_truth = eval_ground_truth(prog, x, oracles).as_int();
    d.standard = eval_standard(prog, x, oracles).as_int();

    FixtureDetections fixture;
    std::vector<const CalibratedML*> preds{&fixture};
    d.compositional = eval_compositional(prog, info, x, preds, AbstractMode::Interval);

    // Fixture calibration outcome: a direct radius of one around the standard
    // value.
    DirectPredictor direct;
    direct.kind = DirectPredictor::Kind::IntRadius;
    direct.radius = 1;
    d.direct = direct.emit(Value(d.standard), AbstractMode::Interval);

    auto m = meet(d.direct, d.compositional);
    d.full = m ? *m : d.direct;
    return d;
}

LoopDemo run_loop_demo() {
    LoopDemo d;
    d.program = parse_imperative(
        "k := const 0; v := const 0; b := le v 5; "
        "while b { v := mlread x k; k := add k 1; b := le v 5 }");
    d.k_var = d.program.var_id("k");
    d.v_var = d.program.var_id("v");

    // Current input reads 3 then 9; calibration stores read [7,2] and
    // [4,8,1]. Scores are one-hot: only the true labels matter here.
    auto one_hot = [](int label) {
        DigitInstance inst;
        inst.true_label = label;
        inst.scores.fill(0.0);
        inst.scores[static_cast<size_t>(label)] = 1.0;
        return inst;
    };
    static const DigitListDataset data = [&] {
        DigitListDataset d;
        d.lists.push_back({one_hot(3), one_hot(9)});
        d.lists.push_back({one_hot(7), one_hot(2)});
        d.lists.push_back({one_hot(4), one_hot(8), one_hot(1)});
        return d;
    }();

    ImpOptions opt;
    opt.eps = 0.1;
    opt.skip_ml_free = true;
    opt.loop_trace = &d.trace;
    // Fixed prediction intervals per ML instance, as in the worked example.
    opt.ml_override = [](int instance, double) -> std::optional<Interval> {
        if (instance == 0) return Interval(3, 6);
        if (instance == 1) return Interval(8, 9);
        return Interval(0, 9);
    };

    JointState st;
    st.abs_enabled = true;
    st.abs = std::vector<Interval>(d.program.vars.size(), Interval::point(0));
    st.cal = {std::vector<int64_t>(d.program.vars.size(), 0),
              std::vector<int64_t>(d.program.vars.size(), 0)};
    st.cur = ExampleRef{0};
    st.cal_refs = {ExampleRef{1}, ExampleRef{2}};
    st.data = &data;

    d.result = eval_imperative_conformal(d.program, std::move(st), opt);
    return d;
}

std::string describe(const CountQueryDemo& d) {
    std::ostringstream os;
    os << "count query over the fixture scene\n";
    os << "  ground truth    = " << d.ground_truth << "\n";
    os << "  standard        = " << d.standard << "\n";
    os << "  direct          = " << to_string(d.direct) << "\n";
    os << "  compositional   = " << to_string(d.compositional) << "\n";
    os << "  full (meet)     = " << to_string(d.full) << "\n";
    return os.str();
}

std::string describe(const LoopDemo& d) {
    std::ostringstream os;
    os << "read-until-large loop, fixed prediction intervals (3,6) then (8,9)\n";
    auto show_store = [&](const AbsStore& abs) {
        if (!abs) return std::string("_|_");
        std::ostringstream s;
        s << "{k=" << to_string(AbstractValue((*abs)[static_cast<size_t>(d.k_var)]))
          << ", v=" << to_string(AbstractValue((*abs)[static_cast<size_t>(d.v_var)])) << "}";
        return s.str();
    };
    auto show_cal = [&](const ConcStore& c) {
        if (!c) return std::string("_|_");
        std::ostringstream s;
        s << "{k=" << (*c)[static_cast<size_t>(d.k_var)]
          << ", v=" << (*c)[static_cast<size_t>(d.v_var)] << "}";
        return s.str();
    };
    for (const auto& step : d.trace) {
        os << "  after iteration " << step.iteration << " (eps " << step.eps_body
           << "): abs " << show_store(step.abs);
        for (size_t i = 0; i < step.cal.size(); ++i) {
            os << "  cal" << (i + 1) << " " << show_cal(step.cal[i]);
        }
        os << "\n";
    }
    os << "  final: abs " << show_store(d.result.abs);
    for (size_t i = 0; i < d.result.cal.size(); ++i) {
        os << "  cal" << (i + 1) << " " << show_cal(d.result.cal[i]);
    }
    os << "\n";
    return os.str();
}

} // namespace csem
