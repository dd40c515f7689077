#pragma once

#include <memory>
#include <string>
#include <vector>

#include "csem/abstract_value.hpp"

namespace csem {

// ============================================================================
// Primitive types
// ============================================================================

enum class TypeKind { Bool, Int, Cat, Tuple, List };

struct PrimType {
    TypeKind kind = TypeKind::Int;
    std::vector<PrimType> args; // Tuple: components; List: one element type

    static PrimType boolean() { return {TypeKind::Bool, {}}; }
    static PrimType integer() { return {TypeKind::Int, {}}; }
    static PrimType category() { return {TypeKind::Cat, {}}; }
    static PrimType tuple(std::vector<PrimType> elems) { return {TypeKind::Tuple, std::move(elems)}; }
    static PrimType list(PrimType elem) { return {TypeKind::List, {std::move(elem)}}; }
    // A detection: category plus the (x, y) center.
    static PrimType det() { return tuple({category(), integer(), integer()}); }

    const PrimType& elem() const { return args.at(0); }
    friend bool operator==(const PrimType& a, const PrimType& b) {
        return a.kind == b.kind && a.args == b.args;
    }
    friend bool operator!=(const PrimType& a, const PrimType& b) { return !(a == b); }
};

std::string to_string(const PrimType& t);

// ============================================================================
// AST
// ============================================================================

enum class Comp {
    Add, Sub, Mul, Min, Max, AbsDiff,
    Eq, Le, Lt, Ge, Gt,
    And, Or, Not,
    CatEq,
    ProjCat, ProjX, ProjY, Fst, Snd,
    Map, Filter, Foldr, Product, Pairs, Len,
    MlDigits, MlDetect,
};

bool is_ml_component(Comp c);
const char* comp_name(Comp c);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Node { Input, BoundVar, IntConst, BoolConst, CatConst, PrimFn, Lambda, Apply };

    Node node = Node::Input;
    int id = -1; // assigned at parse; dense within a Program

    Comp comp = Comp::Add;      // Apply, PrimFn
    int64_t int_val = 0;        // IntConst
    bool bool_val = false;      // BoolConst
    Cat cat_val{};              // CatConst
    std::string var_name;       // BoundVar, Lambda
    std::vector<ExprPtr> args;  // Apply children; Lambda body at args[0]
};

struct Program {
    ExprPtr root;
    PrimType input_type = PrimType::integer();
    int n_nodes = 0;
};

// Parses the S-expression program syntax, e.g.
//   (foldr add (map (lam d 1) (filter (lam d (le (x d) 300)) (detect X))) 0)
// Category names are resolved against the table.
Program parse_program(const std::string& text, PrimType input_type, const CatTable& cats);

std::string to_string(const Program& p, const CatTable& cats);

// ============================================================================
// Typecheck
// ============================================================================

struct NodeInfo {
    PrimType type;
    bool has_ml = false; // an ML component occurs in this subtree
    int ml_site = -1;    // site index when this node is itself an ML component
};

struct TypeInfo {
    std::vector<NodeInfo> nodes;       // indexed by Expr::id
    std::vector<const Expr*> ml_sites; // indexed by site
    PrimType root_type;
};

// Checks arities, kinds, and the combinator shapes; assigns ML site indices.
TypeInfo typecheck(const Program& p);

} // namespace csem
