#include "csem/imperative.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

namespace csem {

// ============================================================================
// Parsing
// ============================================================================

int ImpProgram::var_id(const std::string& name) const {
    for (size_t i = 0; i < vars.size(); ++i) {
        if (vars[i] == name) return static_cast<int>(i);
    }
    fail(ErrorKind::Parse, "unknown variable '" + name + "'");
}

namespace {

const std::map<std::string, ImpOp>& imp_op_table() {
    static const std::map<std::string, ImpOp> table = {
        {"const", ImpOp::Const}, {"add", ImpOp::Add}, {"sub", ImpOp::Sub},
        {"mul", ImpOp::Mul},     {"min", ImpOp::Min}, {"max", ImpOp::Max},
        {"le", ImpOp::Le},       {"lt", ImpOp::Lt},   {"ge", ImpOp::Ge},
        {"gt", ImpOp::Gt},       {"eq", ImpOp::Eq},   {"and", ImpOp::And},
        {"or", ImpOp::Or},       {"not", ImpOp::Not}, {"len", ImpOp::Len},
        {"mlread", ImpOp::MlRead},
    };
    return table;
}

int imp_arity(ImpOp op) {
    switch (op) {
    case ImpOp::Const: return 1;
    case ImpOp::Not: return 1;
    case ImpOp::Len: return 0;  // after the input-list token
    case ImpOp::MlRead: return 1;
    default: return 2;
    }
}

struct ImpParser {
    std::vector<std::string> tokens;
    size_t pos = 0;
    std::vector<std::string> vars;

    explicit ImpParser(const std::string& text) {
        std::string cur;
        auto flush = [&] {
            if (!cur.empty()) {
                tokens.push_back(cur);
                cur.clear();
            }
        };
        for (char c : text) {
            if (std::isspace(static_cast<unsigned char>(c))) {
                flush();
            } else if (c == ';' || c == '{' || c == '}') {
                flush();
                tokens.push_back(std::string(1, c));
            } else {
                cur += c;
            }
        }
        flush();
    }

    const std::string& peek() {
        static const std::string end = "";
        return pos < tokens.size() ? tokens[pos] : end;
    }
    std::string next() {
        if (pos >= tokens.size()) fail(ErrorKind::Parse, "unexpected end of program");
        return tokens[pos++];
    }
    void expect(const std::string& t) {
        std::string got = next();
        if (got != t) fail(ErrorKind::Parse, "expected '" + t + "', got '" + got + "'");
    }

    int var(const std::string& name) {
        if (name.empty() || name == "x" || imp_op_table().count(name)) {
            fail(ErrorKind::Parse, "bad variable name '" + name + "'");
        }
        for (size_t i = 0; i < vars.size(); ++i) {
            if (vars[i] == name) return static_cast<int>(i);
        }
        vars.push_back(name);
        return static_cast<int>(vars.size() - 1);
    }

    ImpOperand operand() {
        std::string t = next();
        ImpOperand o;
        if (!t.empty() && (std::isdigit(static_cast<unsigned char>(t[0])) ||
                           (t[0] == '-' && t.size() > 1))) {
            o.literal = true;
            o.lit = std::stoll(t);
        } else {
            o.var = var(t);
        }
        return o;
    }

    ImpStmtPtr assign(const std::string& target) {
        auto s = std::make_shared<ImpStmt>();
        s->kind = ImpStmt::Kind::Assign;
        s->target = var(target);
        std::string opname = next();
        auto it = imp_op_table().find(opname);
        if (it == imp_op_table().end()) fail(ErrorKind::Parse, "unknown op '" + opname + "'");
        s->op = it->second;
        if (s->op == ImpOp::MlRead || s->op == ImpOp::Len) expect("x");
        if (s->op == ImpOp::Const) {
            ImpOperand o = operand();
            if (!o.literal) fail(ErrorKind::Parse, "const expects a literal");
            s->operands.push_back(o);
        } else {
            for (int i = 0; i < imp_arity(s->op); ++i) s->operands.push_back(operand());
        }
        s->has_ml = s->op == ImpOp::MlRead;
        return s;
    }

    ImpStmtPtr stmt() {
        std::string t = next();
        if (t == "if" || t == "while") {
            auto s = std::make_shared<ImpStmt>();
            s->kind = t == "if" ? ImpStmt::Kind::If : ImpStmt::Kind::While;
            s->guard = var(next());
            expect("{");
            s->body = sequence("}");
            expect("}");
            s->has_ml = s->body->has_ml;
            return s;
        }
        expect(":=");
        return assign(t);
    }

    // Right-nested sequence up to (not consuming) the given closer.
    ImpStmtPtr sequence(const std::string& closer) {
        ImpStmtPtr head = stmt();
        if (peek() == ";") {
            next();
            if (peek() == closer || peek().empty()) return head; // trailing ';'
            auto s = std::make_shared<ImpStmt>();
            s->kind = ImpStmt::Kind::Seq;
            s->first = head;
            s->second = sequence(closer);
            s->has_ml = s->first->has_ml || s->second->has_ml;
            return s;
        }
        return head;
    }
};

} // namespace

ImpProgram parse_imperative(const std::string& text) {
    ImpParser p(text);
    ImpProgram prog;
    prog.root = p.sequence("");
    if (p.pos != p.tokens.size()) fail(ErrorKind::Parse, "trailing tokens after program");
    prog.vars = std::move(p.vars);
    return prog;
}

// ============================================================================
// Store helpers
// ============================================================================

namespace {

bool conc_guard(const std::vector<int64_t>& sigma, int var) {
    int64_t v = sigma[static_cast<size_t>(var)];
    if (v != 0 && v != 1) fail(ErrorKind::Type, "non-boolean guard value");
    return v == 1;
}

Kleene abs_guard(const std::vector<Interval>& sigma, int var) {
    const Interval& iv = sigma[static_cast<size_t>(var)];
    if (iv.lo < 0 || iv.hi > 1) fail(ErrorKind::Type, "non-boolean abstract guard");
    if (iv.lo == 1) return Kleene::True;
    if (iv.hi == 0) return Kleene::False;
    return Kleene::Top;
}

} // namespace

ConcStore iota_filter(bool b, const ConcStore& sigma, int var) {
    if (!sigma) return std::nullopt;
    return conc_guard(*sigma, var) == b ? sigma : std::nullopt;
}

AbsStore iota_filter_abs(bool b, const AbsStore& sigma, int var) {
    if (!sigma) return std::nullopt;
    Kleene g = abs_guard(*sigma, var);
    if (g == Kleene::Top || g == kleene_of(b)) return sigma;
    return std::nullopt;
}

ConcStore join_store(const ConcStore& a, const ConcStore& b) {
    if (!a) return b;
    if (!b) return a;
    // Concrete joins only combine a value with bottom: exactly one branch is
    // taken per store.
    fail(ErrorKind::Type, "join of two live concrete stores");
}

AbsStore join_store_abs(const AbsStore& a, const AbsStore& b) {
    if (!a) return b;
    if (!b) return a;
    if (a->size() != b->size()) fail(ErrorKind::Type, "store size mismatch");
    std::vector<Interval> out;
    out.reserve(a->size());
    for (size_t i = 0; i < a->size(); ++i) {
        out.push_back(Interval(std::min((*a)[i].lo, (*b)[i].lo),
                               std::max((*a)[i].hi, (*b)[i].hi)));
    }
    return out;
}

bool leq_store_abs(const AbsStore& a, const AbsStore& b) {
    if (!a) return true;
    if (!b) return false;
    if (a->size() != b->size()) fail(ErrorKind::Type, "store size mismatch");
    for (size_t i = 0; i < a->size(); ++i) {
        if ((*a)[i].lo < (*b)[i].lo || (*a)[i].hi > (*b)[i].hi) return false;
    }
    return true;
}

// ============================================================================
// Concrete semantics
// ============================================================================

namespace {

int64_t read_operand(const std::vector<int64_t>& sigma, const ImpOperand& o) {
    return o.literal ? o.lit : sigma[static_cast<size_t>(o.var)];
}

int digit_at(const std::vector<DigitInstance>& digits, int64_t k, bool ground_truth) {
    if (k < 0 || k >= static_cast<int64_t>(digits.size())) {
        fail(ErrorKind::OracleUnavailable, "digit index out of range");
    }
    const DigitInstance& d = digits[static_cast<size_t>(k)];
    return ground_truth ? d.true_label : d.predicted();
}

int64_t conc_apply(ImpOp op, const std::vector<ImpOperand>& ops,
                   const std::vector<int64_t>& sigma, const ImpConcreteCtx& ctx) {
    auto a = [&] { return read_operand(sigma, ops[0]); };
    auto b = [&] { return read_operand(sigma, ops[1]); };
    switch (op) {
    case ImpOp::Const: return ops[0].lit;
    case ImpOp::Add: return checked_add(a(), b());
    case ImpOp::Sub: return checked_sub(a(), b());
    case ImpOp::Mul: return checked_mul(a(), b());
    case ImpOp::Min: return std::min(a(), b());
    case ImpOp::Max: return std::max(a(), b());
    case ImpOp::Le: return a() <= b() ? 1 : 0;
    case ImpOp::Lt: return a() < b() ? 1 : 0;
    case ImpOp::Ge: return a() >= b() ? 1 : 0;
    case ImpOp::Gt: return a() > b() ? 1 : 0;
    case ImpOp::Eq: return a() == b() ? 1 : 0;
    case ImpOp::And: return (a() == 1 && b() == 1) ? 1 : 0;
    case ImpOp::Or: return (a() == 1 || b() == 1) ? 1 : 0;
    case ImpOp::Not: return a() == 1 ? 0 : 1;
    case ImpOp::Len:
        if (!ctx.digits) fail(ErrorKind::OracleUnavailable, "no input list bound");
        return static_cast<int64_t>(ctx.digits->size());
    case ImpOp::MlRead:
        if (!ctx.digits) fail(ErrorKind::OracleUnavailable, "no input list bound");
        return digit_at(*ctx.digits, a(), ctx.ground_truth);
    }
    fail(ErrorKind::Type, "unknown op");
}

ConcStore conc_eval(const ImpStmt& s, ConcStore sigma, const ImpConcreteCtx& ctx) {
    if (!sigma) return std::nullopt; // components return bottom iff given bottom
    switch (s.kind) {
    case ImpStmt::Kind::Assign: {
        (*sigma)[static_cast<size_t>(s.target)] = conc_apply(s.op, s.operands, *sigma, ctx);
        return sigma;
    }
    case ImpStmt::Kind::Seq:
        return conc_eval(*s.second, conc_eval(*s.first, std::move(sigma), ctx), ctx);
    case ImpStmt::Kind::If: {
        ConcStore t = conc_eval(*s.body, iota_filter(true, sigma, s.guard), ctx);
        return join_store(t, iota_filter(false, sigma, s.guard));
    }
    case ImpStmt::Kind::While: {
        for (int64_t it = 0; it <= ctx.iteration_limit; ++it) {
            if (!sigma) return std::nullopt;
            if (!conc_guard(*sigma, s.guard)) return sigma;
            sigma = conc_eval(*s.body, std::move(sigma), ctx);
        }
        fail(ErrorKind::Nontermination, "while loop exceeded the iteration limit");
    }
    }
    fail(ErrorKind::Type, "bad statement");
}

} // namespace

ConcStore eval_imperative_concrete(const ImpProgram& p, ConcStore sigma,
                                   const ImpConcreteCtx& ctx) {
    return conc_eval(*p.root, std::move(sigma), ctx);
}

// ============================================================================
// Conformal semantics
// ============================================================================

namespace {

Interval abs_operand(const std::vector<Interval>& sigma, const ImpOperand& o) {
    return o.literal ? Interval::point(o.lit) : sigma[static_cast<size_t>(o.var)];
}

Interval kleene_to_interval(Kleene k) {
    switch (k) {
    case Kleene::True: return Interval(1, 1);
    case Kleene::False: return Interval(0, 0);
    case Kleene::Top: return Interval(0, 1);
    }
    fail(ErrorKind::Type, "bad kleene");
}

Kleene interval_to_kleene(const Interval& iv) {
    if (iv.lo < 0 || iv.hi > 1) fail(ErrorKind::Type, "non-boolean abstract value");
    if (iv.lo == 1) return Kleene::True;
    if (iv.hi == 0) return Kleene::False;
    return Kleene::Top;
}

struct ConformalEngine {
    const ImpProgram& prog;
    const ImpOptions& opt;
    const DigitListDataset* data;
    ExampleRef cur;
    const std::vector<ExampleRef>& cal_refs;

    int instance = 0;
    int warnings = 0;
    int64_t unrolls = 0;

    struct St {
        bool abs_enabled;
        AbsStore abs;
        std::vector<ConcStore> cal;
    };

    const std::vector<DigitInstance>& list_of(ExampleRef r) const {
        return data->lists.at(static_cast<size_t>(r.index));
    }

    // Ground-truth update of one calibration store.
    void cal_assign(const ImpStmt& s, ConcStore& sigma, ExampleRef ref) const {
        if (!sigma) return;
        ImpConcreteCtx ctx{&list_of(ref), true, opt.unroll_limit};
        (*sigma)[static_cast<size_t>(s.target)] = conc_apply_pub(s, *sigma, ctx);
    }

    static int64_t conc_apply_pub(const ImpStmt& s, const std::vector<int64_t>& sigma,
                                  const ImpConcreteCtx& ctx);

    Interval ml_prediction(double tau, const std::vector<Interval>& sigma,
                           const ImpOperand& idx) {
        const std::vector<DigitInstance>& list = list_of(cur);
        Interval krange = abs_operand(sigma, idx);
        int64_t lo = std::max<int64_t>(0, krange.lo);
        int64_t hi = std::min<int64_t>(static_cast<int64_t>(list.size()) - 1, krange.hi);
        if (lo > hi) {
            ++warnings;
            return Interval(0, 9);
        }
        std::optional<Interval> out;
        for (int64_t k = lo; k <= hi; ++k) {
            Interval s = classifier_conformal(list[static_cast<size_t>(k)], tau);
            out = out ? Interval(std::min(out->lo, s.lo), std::max(out->hi, s.hi)) : s;
        }
        return *out;
    }

    void ml_assign(const ImpStmt& s, St& st, double eps) {
        const int inst = instance++;

        // Threshold: from the override fixture, the recorded schedule, or a
        // live calibration over the surviving stores.
        double tau = -std::numeric_limits<double>::infinity();
        std::optional<Interval> forced;
        if (opt.ml_override) forced = opt.ml_override(inst, eps);
        if (!forced) {
            if (opt.playback) {
                if (static_cast<size_t>(inst) < opt.playback->taus.size()) {
                    tau = opt.playback->taus[static_cast<size_t>(inst)];
                    if (opt.playback->survivors[static_cast<size_t>(inst)] == 0) ++warnings;
                } else {
                    ++warnings; // beyond the calibrated horizon: full set
                }
            } else {
                std::vector<double> scores;
                for (size_t i = 0; i < st.cal.size(); ++i) {
                    if (!st.cal[i]) continue;
                    const auto& list = list_of(cal_refs[i]);
                    int64_t k = read_operand(*st.cal[i], s.operands[0]);
                    if (k < 0 || k >= static_cast<int64_t>(list.size())) {
                        fail(ErrorKind::OracleUnavailable, "digit index out of range");
                    }
                    const DigitInstance& d = list[static_cast<size_t>(k)];
                    scores.push_back(d.scores[static_cast<size_t>(d.true_label)]);
                }
                if (scores.empty() || eps <= 0.0 || eps >= 1.0) {
                    // Degenerate calibration: the predictor falls back to the
                    // full set; the run stays valid but vacuous at this site.
                    ++warnings;
                } else {
                    double delta = opt.delta * (eps / opt.eps);
                    delta = std::min(std::max(delta, 1e-12), 1.0 - 1e-12);
                    tau = pac_calibrate(scores, eps, delta).tau;
                }
                if (opt.record_schedule) {
                    opt.record_schedule->taus.push_back(tau);
                    opt.record_schedule->survivors.push_back(static_cast<int>(scores.size()));
                }
            }
        }

        if (st.abs_enabled && st.abs) {
            Interval out = forced ? *forced : ml_prediction(tau, *st.abs, s.operands[0]);
            (*st.abs)[static_cast<size_t>(s.target)] = out;
        }
        for (size_t i = 0; i < st.cal.size(); ++i) cal_assign(s, st.cal[i], cal_refs[i]);
    }

    void plain_assign(const ImpStmt& s, St& st) {
        if (st.abs_enabled && st.abs) {
            std::vector<Interval>& sigma = *st.abs;
            Interval r = Interval::point(0);
            switch (s.op) {
            case ImpOp::Const: r = Interval::point(s.operands[0].lit); break;
            case ImpOp::Add:
                r = interval_add(abs_operand(sigma, s.operands[0]),
                                 abs_operand(sigma, s.operands[1]));
                break;
            case ImpOp::Sub:
                r = interval_sub(abs_operand(sigma, s.operands[0]),
                                 abs_operand(sigma, s.operands[1]));
                break;
            case ImpOp::Mul:
                r = interval_mul(abs_operand(sigma, s.operands[0]),
                                 abs_operand(sigma, s.operands[1]));
                break;
            case ImpOp::Min:
                r = interval_min(abs_operand(sigma, s.operands[0]),
                                 abs_operand(sigma, s.operands[1]));
                break;
            case ImpOp::Max:
                r = interval_max(abs_operand(sigma, s.operands[0]),
                                 abs_operand(sigma, s.operands[1]));
                break;
            case ImpOp::Le: case ImpOp::Lt: case ImpOp::Ge: case ImpOp::Gt: case ImpOp::Eq: {
                static constexpr CmpOp cmp[] = {CmpOp::Le, CmpOp::Lt, CmpOp::Ge, CmpOp::Gt,
                                                CmpOp::Eq};
                int idx = static_cast<int>(s.op) - static_cast<int>(ImpOp::Le);
                r = kleene_to_interval(cmp_result(cmp[idx], sigma, s));
                break;
            }
            case ImpOp::And:
                r = kleene_to_interval(
                    kleene_and(interval_to_kleene(abs_operand(sigma, s.operands[0])),
                               interval_to_kleene(abs_operand(sigma, s.operands[1]))));
                break;
            case ImpOp::Or:
                r = kleene_to_interval(
                    kleene_or(interval_to_kleene(abs_operand(sigma, s.operands[0])),
                              interval_to_kleene(abs_operand(sigma, s.operands[1]))));
                break;
            case ImpOp::Not:
                r = kleene_to_interval(
                    kleene_not(interval_to_kleene(abs_operand(sigma, s.operands[0]))));
                break;
            case ImpOp::Len:
                r = Interval::point(static_cast<int64_t>(list_of(cur).size()));
                break;
            case ImpOp::MlRead:
                fail(ErrorKind::Type, "unreachable");
            }
            sigma[static_cast<size_t>(s.target)] = r;
        }
        for (size_t i = 0; i < st.cal.size(); ++i) cal_assign(s, st.cal[i], cal_refs[i]);
    }

    Kleene cmp_result(CmpOp c, const std::vector<Interval>& sigma, const ImpStmt& s) const {
        return interval_cmp(c, abs_operand(sigma, s.operands[0]),
                            abs_operand(sigma, s.operands[1]));
    }

    // Splits a sequence's epsilon between its two sides.
    std::pair<double, double> seq_split(const ImpStmt& s, double eps) const {
        if (opt.skip_ml_free) {
            bool a = s.first->has_ml;
            bool b = s.second->has_ml;
            if (a && !b) return {eps, 0.0};
            if (!a && b) return {0.0, eps};
        }
        return {eps / 2.0, eps / 2.0};
    }

    St filter(const St& st, bool b, int guard) const {
        St out;
        out.abs_enabled = st.abs_enabled;
        out.abs = st.abs_enabled ? iota_filter_abs(b, st.abs, guard) : std::nullopt;
        out.cal.reserve(st.cal.size());
        for (const auto& c : st.cal) out.cal.push_back(iota_filter(b, c, guard));
        return out;
    }

    static bool any_live(const St& st) {
        if (st.abs_enabled && st.abs) return true;
        for (const auto& c : st.cal) {
            if (c) return true;
        }
        return false;
    }

    void join_into(St& acc, const St& st) const {
        if (acc.abs_enabled) acc.abs = join_store_abs(acc.abs, st.abs);
        for (size_t i = 0; i < acc.cal.size(); ++i) acc.cal[i] = join_store(acc.cal[i], st.cal[i]);
    }

    void eval(const ImpStmt& s, St& st, double eps) {
        switch (s.kind) {
        case ImpStmt::Kind::Assign:
            if (s.op == ImpOp::MlRead) {
                ml_assign(s, st, eps);
            } else {
                plain_assign(s, st);
            }
            return;
        case ImpStmt::Kind::Seq: {
            auto [e1, e2] = seq_split(s, eps);
            eval(*s.first, st, e1);
            eval(*s.second, st, e2);
            return;
        }
        case ImpStmt::Kind::If: {
            St taken = filter(st, true, s.guard);
            St skipped = filter(st, false, s.guard);
            if (any_live(taken)) eval(*s.body, taken, eps);
            join_into(taken, skipped);
            st = std::move(taken);
            return;
        }
        case ImpStmt::Kind::While: {
            St exit;
            exit.abs_enabled = st.abs_enabled;
            exit.abs = std::nullopt;
            exit.cal.assign(st.cal.size(), std::nullopt);

            double eps_rem = eps;
            AbsStore prev_exit_abs = std::nullopt;
            for (int64_t m = 0;; ++m) {
                join_into(exit, filter(st, false, s.guard));
                // Exit states grow as an ascending chain under the join.
                if (exit.abs_enabled && !leq_store_abs(prev_exit_abs, exit.abs)) {
                    fail(ErrorKind::Type, "loop exit chain is not ascending");
                }
                prev_exit_abs = exit.abs;

                St cont = filter(st, true, s.guard);
                if (!any_live(cont)) break;
                if (m >= opt.unroll_limit) {
                    fail(ErrorKind::Nontermination, "loop unrolling exceeded the limit");
                }
                ++unrolls;
                double eps_body = eps_rem / 2.0;
                eval(*s.body, cont, eps_body);
                eps_rem /= 2.0;
                st = std::move(cont);
                if (opt.loop_trace) {
                    opt.loop_trace->push_back(
                        ImpTraceStep{static_cast<int>(m + 1), st.abs, st.cal, eps_body});
                }
            }
            st = std::move(exit);
            return;
        }
        }
        fail(ErrorKind::Type, "bad statement");
    }
};

int64_t ConformalEngine::conc_apply_pub(const ImpStmt& s, const std::vector<int64_t>& sigma,
                                        const ImpConcreteCtx& ctx) {
    return conc_apply(s.op, s.operands, sigma, ctx);
}

} // namespace

JointResult eval_imperative_conformal(const ImpProgram& p, JointState state,
                                      const ImpOptions& opt) {
    if (state.cal.size() != state.cal_refs.size()) {
        fail(ErrorKind::Config, "calibration stores and inputs must align");
    }
    ConformalEngine eng{p, opt, state.data, state.cur, state.cal_refs};
    ConformalEngine::St st{state.abs_enabled, std::move(state.abs), std::move(state.cal)};
    eng.eval(*p.root, st, opt.eps);
    JointResult out;
    out.abs = std::move(st.abs);
    out.cal = std::move(st.cal);
    out.warnings = eng.warnings;
    out.unrolls = eng.unrolls;
    return out;
}

// ============================================================================
// Benchmark pipeline
// ============================================================================

ImpPipeline::ImpPipeline(const ImpProgram& p, const DigitListDataset* data, std::string out_var)
    : prog_(p), data_(data), out_var_(p.var_id(out_var)) {}

int64_t ImpPipeline::concrete_out(ExampleRef x, bool ground_truth) const {
    ImpConcreteCtx ctx{&data_->lists.at(static_cast<size_t>(x.index)), ground_truth,
                       base_.unroll_limit};
    ConcStore sigma = std::vector<int64_t>(prog_.vars.size(), 0);
    ConcStore out = eval_imperative_concrete(prog_, std::move(sigma), ctx);
    if (!out) fail(ErrorKind::Nontermination, "program evaluated to the bottom store");
    return (*out)[static_cast<size_t>(out_var_)];
}

AbstractValue ImpPipeline::abstract_out(ExampleRef x, const MlSchedule& sched, double eps,
                                        int* warnings) const {
    ImpOptions opt = base_;
    opt.eps = eps;
    opt.playback = &sched;
    JointState st;
    st.abs_enabled = true;
    st.abs = std::vector<Interval>(prog_.vars.size(), Interval::point(0));
    st.cur = x;
    st.data = data_;
    JointResult r = eval_imperative_conformal(prog_, std::move(st), opt);
    if (warnings) *warnings += r.warnings;
    if (!r.abs) fail(ErrorKind::Nontermination, "abstract store evaluated to bottom");
    return AbstractValue((*r.abs)[static_cast<size_t>(out_var_)]);
}

void ImpPipeline::calibrate(const std::vector<ExampleRef>& cal, double eps, double delta,
                            const SplitPolicy& policy, const ImpOptions& base) {
    if (cal.empty()) fail(ErrorKind::Config, "empty calibration set");
    base_ = base;
    base_.delta = delta;
    calib_warnings_ = 0;

    // Budget: the conformal machinery plays the role of the single ML "site";
    // the direct predictor around the output takes the direct pool.
    EpsilonBudget budget = allocate_epsilon(1, eps, delta, policy);
    eps_comp_ = eps;
    eps_full_mach_ = budget.ml_eps.at(0);

    auto record = [&](double machinery_eps, MlSchedule& sched) {
        sched = MlSchedule{};
        ImpOptions opt = base_;
        opt.eps = machinery_eps;
        opt.record_schedule = &sched;
        JointState st;
        st.abs_enabled = false;
        st.cal.reserve(cal.size());
        for (ExampleRef r : cal) {
            (void)r;
            st.cal.push_back(std::vector<int64_t>(prog_.vars.size(), 0));
        }
        st.cal_refs = cal;
        st.data = data_;
        JointResult res = eval_imperative_conformal(prog_, std::move(st), opt);
        calib_warnings_ += res.warnings;
    };
    record(eps_comp_, sched_comp_);
    record(eps_full_mach_, sched_full_);

    // Direct predictors around the standard-semantics output.
    std::vector<Value> sv, gv;
    sv.reserve(cal.size());
    gv.reserve(cal.size());
    for (ExampleRef r : cal) {
        sv.push_back(Value(concrete_out(r, false)));
        gv.push_back(Value(concrete_out(r, true)));
    }
    auto calibrate_direct = [&](double e, double d) {
        DirectPredictor dp;
        dp.kind = DirectPredictor::Kind::IntRadius;
        std::vector<double> scores(sv.size());
        for (size_t i = 0; i < sv.size(); ++i) {
            scores[i] = -std::abs(static_cast<double>(gv[i].as_int() - sv[i].as_int()));
        }
        ConformalPredictor cp = pac_calibrate(std::move(scores), e, d);
        if (cp.full_set()) {
            dp.full = true;
        } else {
            dp.radius = std::max<int64_t>(0, static_cast<int64_t>(std::ceil(-cp.tau)));
        }
        return dp;
    };
    direct_solo_ = calibrate_direct(eps, delta);
    if (budget.direct_pool > 0.0) {
        direct_share_ = calibrate_direct(budget.direct_pool, budget.direct_delta);
    } else {
        direct_share_.kind = DirectPredictor::Kind::IntRadius;
        direct_share_.full = true;
    }
}

AbstractValue ImpPipeline::machinery_operand(ExampleRef x) const {
    return abstract_out(x, sched_full_, eps_full_mach_, nullptr);
}

AbstractValue ImpPipeline::direct_operand(int64_t standard_value) const {
    return direct_share_.emit(Value(standard_value), AbstractMode::Interval);
}

ImpPipeline::Outputs ImpPipeline::evaluate(ExampleRef x) const {
    Outputs out;
    out.ground_truth = concrete_out(x, true);
    out.standard = concrete_out(x, false);

    Value std_val(out.standard);
    out.direct = direct_solo_.emit(std_val, AbstractMode::Interval);
    out.compositional = abstract_out(x, sched_comp_, eps_comp_, &out.warnings);

    AbstractValue machinery = abstract_out(x, sched_full_, eps_full_mach_, &out.warnings);
    AbstractValue direct_part = direct_share_.emit(std_val, AbstractMode::Interval);
    auto m = meet(machinery, direct_part);
    if (!m) {
        ++out.empty_meets;
        out.full = direct_part;
    } else {
        out.full = *m;
    }
    return out;
}

} // namespace csem
