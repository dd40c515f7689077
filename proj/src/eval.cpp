#include "csem/eval.hpp"

#include <algorithm>

namespace csem {

// ============================================================================
// Concrete evaluation (ground truth / standard)
// ============================================================================

namespace {

struct ConcreteEval {
    const ProgInput& input;
    const OracleMap& oracles;
    bool ground_truth;
    NodeRecorder* rec;

    const MLOracle& oracle_for(Comp c) {
        auto it = oracles.find(c);
        if (it == oracles.end() || !it->second) {
            fail(ErrorKind::OracleUnavailable,
                 std::string("no oracle registered for component ") + comp_name(c));
        }
        return *it->second;
    }

    Value record(const Expr& e, Value v) {
        if (rec && rec->want && (*rec->want)[static_cast<size_t>(e.id)]) {
            (*rec->out)[static_cast<size_t>(e.id)] = v;
        }
        return v;
    }

    Value apply_fn(const Expr& fe, const std::vector<Value>& args) {
        if (fe.node == Expr::Node::Lambda) {
            return eval(*fe.args[0], &args[0]);
        }
        switch (fe.comp) {
        case Comp::Add: return Value(checked_add(args[0].as_int(), args[1].as_int()));
        case Comp::Sub: return Value(checked_sub(args[0].as_int(), args[1].as_int()));
        case Comp::Mul: return Value(checked_mul(args[0].as_int(), args[1].as_int()));
        case Comp::Min: return Value(std::min(args[0].as_int(), args[1].as_int()));
        case Comp::Max: return Value(std::max(args[0].as_int(), args[1].as_int()));
        case Comp::And: return Value(args[0].as_bool() && args[1].as_bool());
        case Comp::Or: return Value(args[0].as_bool() || args[1].as_bool());
        default: fail(ErrorKind::Type, "bad combinator function");
        }
    }

    Value eval(const Expr& e, const Value* bound) {
        switch (e.node) {
        case Expr::Node::Input:
            if (!input.plain) {
                fail(ErrorKind::Type, "raw program input used outside an ML component");
            }
            return *input.plain;
        case Expr::Node::BoundVar:
            return *bound;
        case Expr::Node::IntConst:
            return Value(e.int_val);
        case Expr::Node::BoolConst:
            return Value(e.bool_val);
        case Expr::Node::CatConst:
            return Value(e.cat_val);
        case Expr::Node::PrimFn:
        case Expr::Node::Lambda:
            fail(ErrorKind::Type, "function value outside a combinator");
        case Expr::Node::Apply:
            break;
        }

        switch (e.comp) {
        case Comp::MlDigits:
        case Comp::MlDetect: {
            const MLOracle& o = oracle_for(e.comp);
            if (!input.ref.valid()) {
                fail(ErrorKind::OracleUnavailable, "ML component needs a dataset-backed input");
            }
            return record(e, ground_truth ? o.ground_truth(input.ref) : o.predict(input.ref));
        }
        case Comp::Add: case Comp::Sub: case Comp::Mul:
        case Comp::Min: case Comp::Max: case Comp::AbsDiff: {
            int64_t a = eval(*e.args[0], bound).as_int();
            int64_t b = eval(*e.args[1], bound).as_int();
            int64_t r = 0;
            switch (e.comp) {
            case Comp::Add: r = checked_add(a, b); break;
            case Comp::Sub: r = checked_sub(a, b); break;
            case Comp::Mul: r = checked_mul(a, b); break;
            case Comp::Min: r = std::min(a, b); break;
            case Comp::Max: r = std::max(a, b); break;
            default: r = a >= b ? checked_sub(a, b) : checked_sub(b, a); break;
            }
            return record(e, Value(r));
        }
        case Comp::Eq: case Comp::Le: case Comp::Lt: case Comp::Ge: case Comp::Gt: {
            int64_t a = eval(*e.args[0], bound).as_int();
            int64_t b = eval(*e.args[1], bound).as_int();
            bool r = false;
            switch (e.comp) {
            case Comp::Eq: r = a == b; break;
            case Comp::Le: r = a <= b; break;
            case Comp::Lt: r = a < b; break;
            case Comp::Ge: r = a >= b; break;
            default: r = a > b; break;
            }
            return record(e, Value(r));
        }
        case Comp::And: {
            bool a = eval(*e.args[0], bound).as_bool();
            bool b = eval(*e.args[1], bound).as_bool();
            return record(e, Value(a && b));
        }
        case Comp::Or: {
            bool a = eval(*e.args[0], bound).as_bool();
            bool b = eval(*e.args[1], bound).as_bool();
            return record(e, Value(a || b));
        }
        case Comp::Not:
            return record(e, Value(!eval(*e.args[0], bound).as_bool()));
        case Comp::CatEq: {
            Value v = eval(*e.args[0], bound);
            Cat a = v.is_tuple() ? v.as_tuple().elems.at(0).as_cat() : v.as_cat();
            return record(e, Value(a == e.args[1]->cat_val));
        }
        case Comp::ProjCat: case Comp::ProjX: case Comp::ProjY: {
            Value t = eval(*e.args[0], bound);
            size_t idx = e.comp == Comp::ProjCat ? 0 : (e.comp == Comp::ProjX ? 1 : 2);
            return record(e, t.as_tuple().elems.at(idx));
        }
        case Comp::Fst: case Comp::Snd: {
            Value t = eval(*e.args[0], bound);
            return record(e, t.as_tuple().elems.at(e.comp == Comp::Fst ? 0 : 1));
        }
        case Comp::Map: {
            Value xs = eval(*e.args[1], bound);
            ListV out;
            out.elems.reserve(xs.as_list().elems.size());
            for (const auto& v : xs.as_list().elems) {
                out.elems.push_back(apply_fn(*e.args[0], {v}));
            }
            return record(e, Value(std::move(out)));
        }
        case Comp::Filter: {
            Value xs = eval(*e.args[1], bound);
            ListV out;
            for (const auto& v : xs.as_list().elems) {
                if (apply_fn(*e.args[0], {v}).as_bool()) out.elems.push_back(v);
            }
            return record(e, Value(std::move(out)));
        }
        case Comp::Foldr: {
            Value xs = eval(*e.args[1], bound);
            Value acc = eval(*e.args[2], bound);
            const auto& elems = xs.as_list().elems;
            for (size_t i = elems.size(); i > 0; --i) {
                acc = apply_fn(*e.args[0], {elems[i - 1], acc});
            }
            return record(e, acc);
        }
        case Comp::Product: {
            Value a = eval(*e.args[0], bound);
            Value b = eval(*e.args[1], bound);
            ListV out;
            for (const auto& va : a.as_list().elems) {
                for (const auto& vb : b.as_list().elems) {
                    out.elems.push_back(Value(TupleV{{va, vb}}));
                }
            }
            return record(e, Value(std::move(out)));
        }
        case Comp::Pairs: {
            Value a = eval(*e.args[0], bound);
            const auto& elems = a.as_list().elems;
            ListV out;
            for (size_t i = 0; i < elems.size(); ++i) {
                for (size_t j = 0; j < elems.size(); ++j) {
                    if (i != j) out.elems.push_back(Value(TupleV{{elems[i], elems[j]}}));
                }
            }
            return record(e, Value(std::move(out)));
        }
        case Comp::Len: {
            Value a = eval(*e.args[0], bound);
            return record(e, Value(static_cast<int64_t>(a.as_list().elems.size())));
        }
        }
        fail(ErrorKind::Type, "unknown component");
    }
};

} // namespace

Value eval_ground_truth(const Program& p, const ProgInput& x, const OracleMap& oracles,
                        NodeRecorder* rec) {
    ConcreteEval ev{x, oracles, true, rec};
    return ev.eval(*p.root, nullptr);
}

Value eval_standard(const Program& p, const ProgInput& x, const OracleMap& oracles,
                    NodeRecorder* rec) {
    ConcreteEval ev{x, oracles, false, rec};
    return ev.eval(*p.root, nullptr);
}

// ============================================================================
// Abstract evaluation
// ============================================================================

AbstractValue abstract_of_value(const Value& v, AbstractMode mode) {
    if (mode == AbstractMode::Interval) return alpha(v);
    if (v.is_int()) return AbstractValue(IntSet::single(v.as_int()));
    if (v.is_bool()) return AbstractValue(kleene_of(v.as_bool()));
    if (v.is_cat()) return AbstractValue(CatSet::single(v.as_cat()));
    if (v.is_tuple()) {
        TupleA t;
        for (const auto& e : v.as_tuple().elems) t.elems.push_back(abstract_of_value(e, mode));
        return AbstractValue(std::move(t));
    }
    ListA l;
    for (const auto& e : v.as_list().elems) {
        l.entries.emplace_back(abstract_of_value(e, mode), Kleene::True);
    }
    return AbstractValue(std::move(l));
}

namespace {

struct AbstractEval {
    const TypeInfo& info;
    const ProgInput& input;
    const std::vector<AbstractValue>& sites;
    AbstractMode mode;
    const MeetHook* hook;

    AbstractValue finish(const Expr& e, AbstractValue v) {
        if (hook) return (*hook)(e, std::move(v));
        return v;
    }

    AbstractFn make_fn(const Expr& fe) {
        if (fe.node == Expr::Node::Lambda) {
            return AbstractFn{1, [this, &fe](const std::vector<AbstractValue>& args) {
                                  return eval(*fe.args[0], &args[0]);
                              }};
        }
        Comp c = fe.comp;
        return AbstractFn{2, [c](const std::vector<AbstractValue>& args) -> AbstractValue {
                              switch (c) {
                              case Comp::Add: return num_arith(ArithOp::Add, args[0], args[1]);
                              case Comp::Sub: return num_arith(ArithOp::Sub, args[0], args[1]);
                              case Comp::Mul: return num_arith(ArithOp::Mul, args[0], args[1]);
                              case Comp::Min: return num_arith(ArithOp::Min, args[0], args[1]);
                              case Comp::Max: return num_arith(ArithOp::Max, args[0], args[1]);
                              case Comp::And:
                                  return AbstractValue(
                                      kleene_and(args[0].as_bool(), args[1].as_bool()));
                              case Comp::Or:
                                  return AbstractValue(
                                      kleene_or(args[0].as_bool(), args[1].as_bool()));
                              default: fail(ErrorKind::Type, "bad combinator function");
                              }
                          }};
    }

    AbstractValue eval(const Expr& e, const AbstractValue* bound) {
        switch (e.node) {
        case Expr::Node::Input:
            if (!input.plain) {
                fail(ErrorKind::Type, "raw program input used outside an ML component");
            }
            return abstract_of_value(*input.plain, mode);
        case Expr::Node::BoundVar:
            return *bound;
        case Expr::Node::IntConst:
            return mode == AbstractMode::Interval ? AbstractValue(Interval::point(e.int_val))
                                                  : AbstractValue(IntSet::single(e.int_val));
        case Expr::Node::BoolConst:
            return AbstractValue(kleene_of(e.bool_val));
        case Expr::Node::CatConst:
            return AbstractValue(CatSet::single(e.cat_val));
        case Expr::Node::PrimFn:
        case Expr::Node::Lambda:
            fail(ErrorKind::Type, "function value outside a combinator");
        case Expr::Node::Apply:
            break;
        }

        switch (e.comp) {
        case Comp::MlDigits:
        case Comp::MlDetect: {
            int site = info.nodes[static_cast<size_t>(e.id)].ml_site;
            return finish(e, sites.at(static_cast<size_t>(site)));
        }
        case Comp::Add: case Comp::Sub: case Comp::Mul:
        case Comp::Min: case Comp::Max: case Comp::AbsDiff: {
            static constexpr ArithOp ops[] = {ArithOp::Add, ArithOp::Sub, ArithOp::Mul,
                                              ArithOp::Min, ArithOp::Max, ArithOp::AbsDiff};
            AbstractValue a = eval(*e.args[0], bound);
            AbstractValue b = eval(*e.args[1], bound);
            return finish(e, num_arith(ops[static_cast<int>(e.comp)], a, b));
        }
        case Comp::Eq: case Comp::Le: case Comp::Lt: case Comp::Ge: case Comp::Gt: {
            static constexpr CmpOp ops[] = {CmpOp::Eq, CmpOp::Le, CmpOp::Lt, CmpOp::Ge, CmpOp::Gt};
            AbstractValue a = eval(*e.args[0], bound);
            AbstractValue b = eval(*e.args[1], bound);
            int idx = static_cast<int>(e.comp) - static_cast<int>(Comp::Eq);
            return finish(e, AbstractValue(num_cmp(ops[idx], a, b)));
        }
        case Comp::And: {
            Kleene a = eval(*e.args[0], bound).as_bool();
            Kleene b = eval(*e.args[1], bound).as_bool();
            return finish(e, AbstractValue(kleene_and(a, b)));
        }
        case Comp::Or: {
            Kleene a = eval(*e.args[0], bound).as_bool();
            Kleene b = eval(*e.args[1], bound).as_bool();
            return finish(e, AbstractValue(kleene_or(a, b)));
        }
        case Comp::Not:
            return finish(e, AbstractValue(kleene_not(eval(*e.args[0], bound).as_bool())));
        case Comp::CatEq: {
            AbstractValue v = eval(*e.args[0], bound);
            CatSet s = v.is_tuple() ? v.as_tuple().elems.at(0).as_catset() : v.as_catset();
            return finish(e, AbstractValue(catset_eq(s, e.args[1]->cat_val)));
        }
        case Comp::ProjCat: case Comp::ProjX: case Comp::ProjY: {
            AbstractValue t = eval(*e.args[0], bound);
            size_t idx = e.comp == Comp::ProjCat ? 0 : (e.comp == Comp::ProjX ? 1 : 2);
            return finish(e, t.as_tuple().elems.at(idx));
        }
        case Comp::Fst: case Comp::Snd: {
            AbstractValue t = eval(*e.args[0], bound);
            return finish(e, t.as_tuple().elems.at(e.comp == Comp::Fst ? 0 : 1));
        }
        case Comp::Map: {
            AbstractValue xs = eval(*e.args[1], bound);
            AbstractFn f = make_fn(*e.args[0]);
            return finish(e, AbstractValue(map_abstract(f, xs.as_list())));
        }
        case Comp::Filter: {
            AbstractValue xs = eval(*e.args[1], bound);
            AbstractFn f = make_fn(*e.args[0]);
            return finish(e, AbstractValue(filter_abstract(f, xs.as_list())));
        }
        case Comp::Foldr: {
            AbstractValue xs = eval(*e.args[1], bound);
            AbstractValue init = eval(*e.args[2], bound);
            AbstractFn f = make_fn(*e.args[0]);
            return finish(e, foldr_abstract(f, xs.as_list(), init));
        }
        case Comp::Product: {
            AbstractValue a = eval(*e.args[0], bound);
            AbstractValue b = eval(*e.args[1], bound);
            return finish(e, AbstractValue(product_abstract(a.as_list(), b.as_list())));
        }
        case Comp::Pairs: {
            AbstractValue a = eval(*e.args[0], bound);
            return finish(e, AbstractValue(pairs_abstract(a.as_list())));
        }
        case Comp::Len: {
            AbstractValue a = eval(*e.args[0], bound);
            // Entry count bounds: sure entries are always present, Top entries
            // may or may not be.
            int64_t total = static_cast<int64_t>(a.as_list().entries.size());
            int64_t sure = 0;
            for (const auto& [elem, flag] : a.as_list().entries) {
                if (flag == Kleene::True) ++sure;
            }
            if (mode == AbstractMode::Interval) {
                return finish(e, AbstractValue(Interval(sure, total)));
            }
            std::vector<int64_t> counts;
            for (int64_t n = sure; n <= total; ++n) counts.push_back(n);
            return finish(e, AbstractValue(IntSet(std::move(counts))));
        }
        }
        fail(ErrorKind::Type, "unknown component");
    }
};

} // namespace

AbstractValue eval_abstract(const Program& p, const TypeInfo& info, const ProgInput& x,
                            const std::vector<AbstractValue>& site_outputs, AbstractMode mode,
                            const MeetHook* hook) {
    AbstractEval ev{info, x, site_outputs, mode, hook};
    return ev.eval(*p.root, nullptr);
}

AbstractValue eval_compositional(const Program& p, const TypeInfo& info, const ProgInput& x,
                                 const std::vector<const CalibratedML*>& predictors,
                                 AbstractMode mode) {
    std::vector<AbstractValue> outs;
    outs.reserve(predictors.size());
    for (const CalibratedML* pred : predictors) {
        if (!pred) fail(ErrorKind::OracleUnavailable, "missing predictor for ML site");
        outs.push_back(pred->abstract_output(x.ref, nullptr));
    }
    return eval_abstract(p, info, x, outs, mode, nullptr);
}

} // namespace csem
