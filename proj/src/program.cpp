#include "csem/program.hpp"

#include <cctype>
#include <map>
#include <sstream>

namespace csem {

std::string to_string(const PrimType& t) {
    switch (t.kind) {
    case TypeKind::Bool: return "bool";
    case TypeKind::Int: return "int";
    case TypeKind::Cat: return "cat";
    case TypeKind::Tuple: {
        std::string s = "(";
        for (size_t i = 0; i < t.args.size(); ++i) {
            if (i) s += " x ";
            s += to_string(t.args[i]);
        }
        return s + ")";
    }
    case TypeKind::List: return "list " + to_string(t.elem());
    }
    return "?";
}

bool is_ml_component(Comp c) { return c == Comp::MlDigits || c == Comp::MlDetect; }

const char* comp_name(Comp c) {
    switch (c) {
    case Comp::Add: return "add";
    case Comp::Sub: return "sub";
    case Comp::Mul: return "mul";
    case Comp::Min: return "min";
    case Comp::Max: return "max";
    case Comp::AbsDiff: return "absdiff";
    case Comp::Eq: return "eq";
    case Comp::Le: return "le";
    case Comp::Lt: return "lt";
    case Comp::Ge: return "ge";
    case Comp::Gt: return "gt";
    case Comp::And: return "and";
    case Comp::Or: return "or";
    case Comp::Not: return "not";
    case Comp::CatEq: return "cat=";
    case Comp::ProjCat: return "cat";
    case Comp::ProjX: return "x";
    case Comp::ProjY: return "y";
    case Comp::Fst: return "fst";
    case Comp::Snd: return "snd";
    case Comp::Map: return "map";
    case Comp::Filter: return "filter";
    case Comp::Foldr: return "foldr";
    case Comp::Product: return "product";
    case Comp::Pairs: return "pairs";
    case Comp::Len: return "len";
    case Comp::MlDigits: return "digits";
    case Comp::MlDetect: return "detect";
    }
    return "?";
}

// ============================================================================
// Parser
// ============================================================================

namespace {

const std::map<std::string, Comp>& comp_table() {
    static const std::map<std::string, Comp> table = {
        {"add", Comp::Add},       {"sub", Comp::Sub},     {"mul", Comp::Mul},
        {"min", Comp::Min},       {"max", Comp::Max},     {"absdiff", Comp::AbsDiff},
        {"eq", Comp::Eq},         {"le", Comp::Le},       {"lt", Comp::Lt},
        {"ge", Comp::Ge},         {"gt", Comp::Gt},       {"and", Comp::And},
        {"or", Comp::Or},         {"not", Comp::Not},     {"cat=", Comp::CatEq},
        {"cat", Comp::ProjCat},   {"x", Comp::ProjX},     {"y", Comp::ProjY},
        {"fst", Comp::Fst},       {"snd", Comp::Snd},     {"map", Comp::Map},
        {"filter", Comp::Filter}, {"foldr", Comp::Foldr}, {"product", Comp::Product},
        {"pairs", Comp::Pairs},   {"len", Comp::Len},     {"digits", Comp::MlDigits},
        {"detect", Comp::MlDetect},
    };
    return table;
}

struct Tokenizer {
    explicit Tokenizer(const std::string& s) : src(s) {}

    std::string next() {
        skip_ws();
        if (pos >= src.size()) fail(ErrorKind::Parse, "unexpected end of program text");
        char c = src[pos];
        if (c == '(' || c == ')') {
            ++pos;
            return std::string(1, c);
        }
        size_t start = pos;
        while (pos < src.size() && !std::isspace(static_cast<unsigned char>(src[pos])) &&
               src[pos] != '(' && src[pos] != ')') {
            ++pos;
        }
        return src.substr(start, pos - start);
    }

    bool at_end() {
        skip_ws();
        return pos >= src.size();
    }

    void skip_ws() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }

    const std::string& src;
    size_t pos = 0;
};

bool is_int_literal(const std::string& t) {
    if (t.empty()) return false;
    size_t i = (t[0] == '-') ? 1 : 0;
    if (i == t.size()) return false;
    for (; i < t.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
    }
    return true;
}

struct Parser {
    Parser(const std::string& text, const CatTable& cats) : tok(text), cats(cats) {}

    std::shared_ptr<Expr> make(Expr::Node node) {
        auto e = std::make_shared<Expr>();
        e->node = node;
        e->id = next_id++;
        return e;
    }

    std::shared_ptr<Expr> atom(const std::string& t) {
        if (t == "X") return make(Expr::Node::Input);
        if (t == "true" || t == "false") {
            auto e = make(Expr::Node::BoolConst);
            e->bool_val = (t == "true");
            return e;
        }
        if (is_int_literal(t)) {
            auto e = make(Expr::Node::IntConst);
            e->int_val = std::stoll(t);
            return e;
        }
        for (const auto& name : scope) {
            if (name == t) {
                if (name != scope.back()) {
                    fail(ErrorKind::Parse, "lambda body may only use the innermost bound variable");
                }
                auto e = make(Expr::Node::BoundVar);
                e->var_name = t;
                return e;
            }
        }
        if (auto c = cats.lookup(t)) {
            auto e = make(Expr::Node::CatConst);
            e->cat_val = *c;
            return e;
        }
        if (auto it = comp_table().find(t); it != comp_table().end()) {
            auto e = make(Expr::Node::PrimFn);
            e->comp = it->second;
            return e;
        }
        fail(ErrorKind::Parse, "unknown token '" + t + "'");
    }

    std::shared_ptr<Expr> expr() {
        std::string t = tok.next();
        if (t == ")") fail(ErrorKind::Parse, "unexpected ')'");
        if (t != "(") return atom(t);

        std::string head = tok.next();
        if (head == "lam") {
            std::string var = tok.next();
            if (var == "(" || var == ")" || is_int_literal(var)) {
                fail(ErrorKind::Parse, "lam expects a variable name");
            }
            auto e = make(Expr::Node::Lambda);
            e->var_name = var;
            scope.push_back(var);
            e->args.push_back(expr());
            scope.pop_back();
            expect_close();
            return e;
        }
        auto it = comp_table().find(head);
        if (it == comp_table().end()) fail(ErrorKind::Parse, "unknown component '" + head + "'");
        auto e = make(Expr::Node::Apply);
        e->comp = it->second;
        while (true) {
            tok.skip_ws();
            if (tok.pos < tok.src.size() && tok.src[tok.pos] == ')') {
                ++tok.pos;
                break;
            }
            e->args.push_back(expr());
        }
        return e;
    }

    void expect_close() {
        std::string t = tok.next();
        if (t != ")") fail(ErrorKind::Parse, "expected ')'");
    }

    Tokenizer tok;
    const CatTable& cats;
    std::vector<std::string> scope;
    int next_id = 0;
};

void print_expr(std::ostringstream& os, const Expr& e, const CatTable& cats) {
    switch (e.node) {
    case Expr::Node::Input: os << "X"; return;
    case Expr::Node::BoundVar: os << e.var_name; return;
    case Expr::Node::IntConst: os << e.int_val; return;
    case Expr::Node::BoolConst: os << (e.bool_val ? "true" : "false"); return;
    case Expr::Node::CatConst: os << cats.name(e.cat_val); return;
    case Expr::Node::PrimFn: os << comp_name(e.comp); return;
    case Expr::Node::Lambda:
        os << "(lam " << e.var_name << " ";
        print_expr(os, *e.args[0], cats);
        os << ")";
        return;
    case Expr::Node::Apply:
        os << "(" << comp_name(e.comp);
        for (const auto& a : e.args) {
            os << " ";
            print_expr(os, *a, cats);
        }
        os << ")";
        return;
    }
}

} // namespace

Program parse_program(const std::string& text, PrimType input_type, const CatTable& cats) {
    Parser p(text, cats);
    Program prog;
    prog.root = p.expr();
    if (!p.tok.at_end()) fail(ErrorKind::Parse, "trailing tokens after program");
    prog.input_type = std::move(input_type);
    prog.n_nodes = p.next_id;
    return prog;
}

std::string to_string(const Program& p, const CatTable& cats) {
    std::ostringstream os;
    print_expr(os, *p.root, cats);
    return os.str();
}

// ============================================================================
// Typecheck
// ============================================================================

namespace {

struct Checker {
    const Program& prog;
    TypeInfo info;

    PrimType set(const Expr& e, PrimType t, bool has_ml) {
        info.nodes[static_cast<size_t>(e.id)].type = t;
        info.nodes[static_cast<size_t>(e.id)].has_ml = has_ml;
        return t;
    }

    // bound: type of the innermost lambda variable, null outside lambdas
    PrimType check(const Expr& e, const PrimType* bound) {
        switch (e.node) {
        case Expr::Node::Input:
            if (bound) fail(ErrorKind::Type, "program input cannot appear under a lambda");
            return set(e, prog.input_type, false);
        case Expr::Node::BoundVar:
            if (!bound) fail(ErrorKind::Type, "unbound variable '" + e.var_name + "'");
            return set(e, *bound, false);
        case Expr::Node::IntConst:
            return set(e, PrimType::integer(), false);
        case Expr::Node::BoolConst:
            return set(e, PrimType::boolean(), false);
        case Expr::Node::CatConst:
            return set(e, PrimType::category(), false);
        case Expr::Node::PrimFn:
            fail(ErrorKind::Type, "bare component reference outside a combinator");
        case Expr::Node::Lambda:
            fail(ErrorKind::Type, "lambda outside a combinator argument position");
        case Expr::Node::Apply:
            return check_apply(e, bound);
        }
        fail(ErrorKind::Type, "bad node");
    }

    void need_args(const Expr& e, size_t n) {
        if (e.args.size() != n) {
            fail(ErrorKind::Type, std::string(comp_name(e.comp)) + ": expected " +
                                      std::to_string(n) + " arguments, got " +
                                      std::to_string(e.args.size()));
        }
    }

    PrimType want(const Expr& arg, const PrimType* bound, const PrimType& t, const char* who) {
        PrimType got = check(arg, bound);
        if (got != t) {
            fail(ErrorKind::Type, std::string(who) + ": expected " + to_string(t) + ", got " +
                                      to_string(got));
        }
        return got;
    }

    bool subtree_ml(const Expr& e) const {
        return info.nodes[static_cast<size_t>(e.id)].has_ml ||
               (e.node == Expr::Node::Apply && is_ml_component(e.comp));
    }

    // Typechecks a combinator function argument (lambda or primitive) against
    // the given argument types; returns the result type.
    PrimType check_fn(const Expr& fe, const std::vector<PrimType>& arg_types, const char* who) {
        if (fe.node == Expr::Node::Lambda) {
            if (arg_types.size() != 1) {
                fail(ErrorKind::Type, std::string(who) + ": lambda functions are unary");
            }
            PrimType r = check(*fe.args[0], &arg_types[0]);
            info.nodes[static_cast<size_t>(fe.id)].type = r;
            return r;
        }
        if (fe.node != Expr::Node::PrimFn) {
            fail(ErrorKind::Type, std::string(who) + ": expected a lambda or primitive function");
        }
        PrimType r = prim_fn_result(fe.comp, arg_types, who);
        info.nodes[static_cast<size_t>(fe.id)].type = r;
        return r;
    }

    static PrimType prim_fn_result(Comp c, const std::vector<PrimType>& args, const char* who) {
        auto all_int = [&] {
            for (const auto& a : args) {
                if (a != PrimType::integer()) return false;
            }
            return true;
        };
        auto all_bool = [&] {
            for (const auto& a : args) {
                if (a != PrimType::boolean()) return false;
            }
            return true;
        };
        switch (c) {
        case Comp::Add: case Comp::Sub: case Comp::Mul:
        case Comp::Min: case Comp::Max: case Comp::AbsDiff:
            if (args.size() != 2 || !all_int()) {
                fail(ErrorKind::Type, std::string(who) + ": " + comp_name(c) +
                                          " needs two int arguments");
            }
            return PrimType::integer();
        case Comp::And: case Comp::Or:
            if (args.size() != 2 || !all_bool()) {
                fail(ErrorKind::Type, std::string(who) + ": " + comp_name(c) +
                                          " needs two bool arguments");
            }
            return PrimType::boolean();
        default:
            fail(ErrorKind::Type, std::string(who) + ": component " + comp_name(c) +
                                      " cannot be used as a combinator function");
        }
    }

    PrimType check_apply(const Expr& e, const PrimType* bound) {
        switch (e.comp) {
        case Comp::Add: case Comp::Sub: case Comp::Mul:
        case Comp::Min: case Comp::Max: case Comp::AbsDiff: {
            need_args(e, 2);
            want(*e.args[0], bound, PrimType::integer(), comp_name(e.comp));
            want(*e.args[1], bound, PrimType::integer(), comp_name(e.comp));
            return set(e, PrimType::integer(), subtree_ml(*e.args[0]) || subtree_ml(*e.args[1]));
        }
        case Comp::Eq: case Comp::Le: case Comp::Lt: case Comp::Ge: case Comp::Gt: {
            need_args(e, 2);
            want(*e.args[0], bound, PrimType::integer(), comp_name(e.comp));
            want(*e.args[1], bound, PrimType::integer(), comp_name(e.comp));
            return set(e, PrimType::boolean(), subtree_ml(*e.args[0]) || subtree_ml(*e.args[1]));
        }
        case Comp::And: case Comp::Or: {
            need_args(e, 2);
            want(*e.args[0], bound, PrimType::boolean(), comp_name(e.comp));
            want(*e.args[1], bound, PrimType::boolean(), comp_name(e.comp));
            return set(e, PrimType::boolean(), subtree_ml(*e.args[0]) || subtree_ml(*e.args[1]));
        }
        case Comp::Not: {
            need_args(e, 1);
            want(*e.args[0], bound, PrimType::boolean(), "not");
            return set(e, PrimType::boolean(), subtree_ml(*e.args[0]));
        }
        case Comp::CatEq: {
            need_args(e, 2);
            PrimType lt = check(*e.args[0], bound);
            // Accepts a category or a detection (whose category is compared).
            if (lt != PrimType::category() && lt != PrimType::det()) {
                fail(ErrorKind::Type, "cat= expects a category or detection, got " + to_string(lt));
            }
            if (e.args[1]->node != Expr::Node::CatConst) {
                fail(ErrorKind::Type, "cat= expects a category constant on the right");
            }
            check(*e.args[1], bound);
            return set(e, PrimType::boolean(), subtree_ml(*e.args[0]));
        }
        case Comp::ProjCat: case Comp::ProjX: case Comp::ProjY: {
            need_args(e, 1);
            PrimType t = check(*e.args[0], bound);
            if (t != PrimType::det()) {
                fail(ErrorKind::Type, std::string(comp_name(e.comp)) +
                                          " expects a detection, got " + to_string(t));
            }
            return set(e, e.comp == Comp::ProjCat ? PrimType::category() : PrimType::integer(),
                       subtree_ml(*e.args[0]));
        }
        case Comp::Fst: case Comp::Snd: {
            need_args(e, 1);
            PrimType t = check(*e.args[0], bound);
            if (t.kind != TypeKind::Tuple || t.args.size() != 2) {
                fail(ErrorKind::Type, std::string(comp_name(e.comp)) + " expects a pair");
            }
            return set(e, e.comp == Comp::Fst ? t.args[0] : t.args[1], subtree_ml(*e.args[0]));
        }
        case Comp::Map: {
            need_args(e, 2);
            PrimType lt = check(*e.args[1], bound);
            if (lt.kind != TypeKind::List) fail(ErrorKind::Type, "map expects a list");
            PrimType rt = check_fn(*e.args[0], {lt.elem()}, "map");
            return set(e, PrimType::list(rt), subtree_ml(*e.args[1]));
        }
        case Comp::Filter: {
            need_args(e, 2);
            PrimType lt = check(*e.args[1], bound);
            if (lt.kind != TypeKind::List) fail(ErrorKind::Type, "filter expects a list");
            PrimType rt = check_fn(*e.args[0], {lt.elem()}, "filter");
            if (rt != PrimType::boolean()) {
                fail(ErrorKind::Type, "filter function must return bool");
            }
            return set(e, lt, subtree_ml(*e.args[1]));
        }
        case Comp::Foldr: {
            need_args(e, 3);
            PrimType lt = check(*e.args[1], bound);
            if (lt.kind != TypeKind::List) fail(ErrorKind::Type, "foldr expects a list");
            PrimType acc = check(*e.args[2], bound);
            PrimType rt = check_fn(*e.args[0], {lt.elem(), acc}, "foldr");
            if (rt != acc) fail(ErrorKind::Type, "foldr function must return the accumulator type");
            return set(e, acc, subtree_ml(*e.args[1]) || subtree_ml(*e.args[2]));
        }
        case Comp::Product: {
            need_args(e, 2);
            PrimType a = check(*e.args[0], bound);
            PrimType b = check(*e.args[1], bound);
            if (a.kind != TypeKind::List || b.kind != TypeKind::List) {
                fail(ErrorKind::Type, "product expects two lists");
            }
            return set(e, PrimType::list(PrimType::tuple({a.elem(), b.elem()})),
                       subtree_ml(*e.args[0]) || subtree_ml(*e.args[1]));
        }
        case Comp::Pairs: {
            need_args(e, 1);
            PrimType a = check(*e.args[0], bound);
            if (a.kind != TypeKind::List) fail(ErrorKind::Type, "pairs expects a list");
            return set(e, PrimType::list(PrimType::tuple({a.elem(), a.elem()})),
                       subtree_ml(*e.args[0]));
        }
        case Comp::Len: {
            need_args(e, 1);
            PrimType a = check(*e.args[0], bound);
            if (a.kind != TypeKind::List) fail(ErrorKind::Type, "len expects a list");
            return set(e, PrimType::integer(), subtree_ml(*e.args[0]));
        }
        case Comp::MlDigits: case Comp::MlDetect: {
            need_args(e, 1);
            if (e.args[0]->node != Expr::Node::Input) {
                fail(ErrorKind::Type, "machine learning components apply to the program input");
            }
            check(*e.args[0], bound);
            // Repeated applications of one component to the input are the
            // same prediction set, so they share a site (and its budget).
            int site = -1;
            for (size_t s = 0; s < info.ml_sites.size(); ++s) {
                if (info.ml_sites[s]->comp == e.comp) {
                    site = static_cast<int>(s);
                    break;
                }
            }
            if (site < 0) {
                site = static_cast<int>(info.ml_sites.size());
                info.ml_sites.push_back(&e);
            }
            info.nodes[static_cast<size_t>(e.id)].ml_site = site;
            PrimType out = e.comp == Comp::MlDigits ? PrimType::list(PrimType::integer())
                                                    : PrimType::list(PrimType::det());
            return set(e, out, true);
        }
        }
        fail(ErrorKind::Type, "unknown component");
    }
};

} // namespace

TypeInfo typecheck(const Program& p) {
    Checker c{p, {}};
    c.info.nodes.resize(static_cast<size_t>(p.n_nodes));
    c.info.root_type = c.check(*p.root, nullptr);
    return c.info;
}

} // namespace csem
