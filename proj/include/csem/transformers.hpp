#pragma once

#include <functional>
#include <vector>

#include "csem/abstract_value.hpp"

namespace csem {

enum class ArithOp { Add, Sub, Mul, Min, Max, AbsDiff };
enum class CmpOp { Ge, Gt, Eq, Le, Lt };

// ============================================================================
// Interval transformers
// ============================================================================

Interval interval_add(const Interval& a, const Interval& b);
// The sound subtraction (l1 - u2, u1 - l2); see the brute-force oracle tests.
Interval interval_sub(const Interval& a, const Interval& b);
// Hull of the four endpoint products; exact for integer intervals.
Interval interval_mul(const Interval& a, const Interval& b);
Interval interval_min(const Interval& a, const Interval& b);
Interval interval_max(const Interval& a, const Interval& b);
Interval interval_absdiff(const Interval& a, const Interval& b);

Interval interval_arith(ArithOp op, const Interval& a, const Interval& b);

// Three-valued comparison; definite only when every concrete pair agrees.
Kleene interval_cmp(CmpOp op, const Interval& a, const Interval& b);

// ============================================================================
// Explicit-set transformers (set-valued abstract mode)
// ============================================================================

IntSet intset_arith(ArithOp op, const IntSet& a, const IntSet& b);
Kleene intset_cmp(CmpOp op, const IntSet& a, const IntSet& b);

// Dispatch over whichever integer representation the operands use; mixing
// representations is a type error.
AbstractValue num_arith(ArithOp op, const AbstractValue& a, const AbstractValue& b);
Kleene num_cmp(CmpOp op, const AbstractValue& a, const AbstractValue& b);

// ============================================================================
// Boolean transformers (Kleene three-valued logic)
// ============================================================================

Kleene kleene_and(Kleene a, Kleene b);
Kleene kleene_or(Kleene a, Kleene b);
Kleene kleene_not(Kleene a);

// ============================================================================
// Category transformers
// ============================================================================

// cat-equality against a fixed category constant.
Kleene catset_eq(CatSet s, Cat c);

// ============================================================================
// List combinators
// ============================================================================

// A function on abstract values; total and deterministic on kind-correct
// arguments.
struct AbstractFn {
    int arity;
    std::function<AbstractValue(const std::vector<AbstractValue>&)> apply;

    AbstractValue operator()(const AbstractValue& x) const { return apply({x}); }
    AbstractValue operator()(const AbstractValue& x, const AbstractValue& y) const {
        return apply({x, y});
    }
};

// Applies f elementwise, preserving flags and order.
ListA map_abstract(const AbstractFn& f, const ListA& xs);

// Drops entries with f(a) = false#, keeps the rest with flag b /\ f(a).
ListA filter_abstract(const AbstractFn& f, const ListA& xs);

// Right fold; Top-flagged entries contribute the join of the include and
// exclude cases. The accumulator kind must support join.
AbstractValue foldr_abstract(const AbstractFn& f, const ListA& xs, const AbstractValue& init);

// Cross product of two abstract lists in row-major order; pair flags are
// conjoined.
ListA product_abstract(const ListA& a, const ListA& b);

// Ordered pairs of distinct entries of one list, row-major with the diagonal
// removed.
ListA pairs_abstract(const ListA& a);

} // namespace csem
