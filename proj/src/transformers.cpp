#include "csem/transformers.hpp"

#include <algorithm>

namespace csem {

// ============================================================================
// Interval transformers
// ============================================================================

Interval interval_add(const Interval& a, const Interval& b) {
    return Interval(checked_add(a.lo, b.lo), checked_add(a.hi, b.hi));
}

Interval interval_sub(const Interval& a, const Interval& b) {
    return Interval(checked_sub(a.lo, b.hi), checked_sub(a.hi, b.lo));
}

Interval interval_mul(const Interval& a, const Interval& b) {
    int64_t p1 = checked_mul(a.lo, b.lo);
    int64_t p2 = checked_mul(a.lo, b.hi);
    int64_t p3 = checked_mul(a.hi, b.lo);
    int64_t p4 = checked_mul(a.hi, b.hi);
    return Interval(std::min(std::min(p1, p2), std::min(p3, p4)),
                    std::max(std::max(p1, p2), std::max(p3, p4)));
}

Interval interval_min(const Interval& a, const Interval& b) {
    return Interval(std::min(a.lo, b.lo), std::min(a.hi, b.hi));
}

Interval interval_max(const Interval& a, const Interval& b) {
    return Interval(std::max(a.lo, b.lo), std::max(a.hi, b.hi));
}

Interval interval_absdiff(const Interval& a, const Interval& b) {
    Interval d = interval_sub(a, b);
    if (d.lo >= 0) return d;
    if (d.hi <= 0) return Interval(-d.hi, -d.lo);
    return Interval(0, std::max(-d.lo, d.hi));
}

Interval interval_arith(ArithOp op, const Interval& a, const Interval& b) {
    switch (op) {
    case ArithOp::Add: return interval_add(a, b);
    case ArithOp::Sub: return interval_sub(a, b);
    case ArithOp::Mul: return interval_mul(a, b);
    case ArithOp::Min: return interval_min(a, b);
    case ArithOp::Max: return interval_max(a, b);
    case ArithOp::AbsDiff: return interval_absdiff(a, b);
    }
    fail(ErrorKind::Type, "unknown arithmetic op");
}

namespace {

Kleene cmp_from_bounds(CmpOp op, int64_t amin, int64_t amax, int64_t bmin, int64_t bmax,
                       bool a_single, bool b_single) {
    switch (op) {
    case CmpOp::Ge:
        if (amin >= bmax) return Kleene::True;
        if (amax < bmin) return Kleene::False;
        return Kleene::Top;
    case CmpOp::Gt:
        if (amin > bmax) return Kleene::True;
        if (amax <= bmin) return Kleene::False;
        return Kleene::Top;
    case CmpOp::Eq:
        if (a_single && b_single && amin == bmin) return Kleene::True;
        if (amax < bmin || amin > bmax) return Kleene::False;
        return Kleene::Top;
    case CmpOp::Le:
        return cmp_from_bounds(CmpOp::Ge, bmin, bmax, amin, amax, b_single, a_single);
    case CmpOp::Lt:
        return cmp_from_bounds(CmpOp::Gt, bmin, bmax, amin, amax, b_single, a_single);
    }
    fail(ErrorKind::Type, "unknown comparison op");
}

} // namespace

Kleene interval_cmp(CmpOp op, const Interval& a, const Interval& b) {
    return cmp_from_bounds(op, a.lo, a.hi, b.lo, b.hi, a.singleton(), b.singleton());
}

// ============================================================================
// Explicit-set transformers
// ============================================================================

namespace {
constexpr size_t kIntSetPairCap = 1u << 22; // guards pathological cross products
}

IntSet intset_arith(ArithOp op, const IntSet& a, const IntSet& b) {
    if (a.size() * b.size() > kIntSetPairCap) {
        fail(ErrorKind::EnumerationOverflow, "set-mode cardinality exceeds cap");
    }
    std::vector<int64_t> out;
    out.reserve(a.size() * b.size());
    for (int64_t x : a.vals) {
        for (int64_t y : b.vals) {
            int64_t r;
            switch (op) {
            case ArithOp::Add: r = checked_add(x, y); break;
            case ArithOp::Sub: r = checked_sub(x, y); break;
            case ArithOp::Mul: r = checked_mul(x, y); break;
            case ArithOp::Min: r = std::min(x, y); break;
            case ArithOp::Max: r = std::max(x, y); break;
            case ArithOp::AbsDiff: r = x >= y ? checked_sub(x, y) : checked_sub(y, x); break;
            default: fail(ErrorKind::Type, "unknown arithmetic op");
            }
            out.push_back(r);
        }
    }
    return IntSet(std::move(out));
}

Kleene intset_cmp(CmpOp op, const IntSet& a, const IntSet& b) {
    if (a.empty() || b.empty()) fail(ErrorKind::Type, "comparison on empty set");
    bool a_single = a.size() == 1;
    bool b_single = b.size() == 1;
    return cmp_from_bounds(op, a.min(), a.max(), b.min(), b.max(), a_single, b_single);
}

AbstractValue num_arith(ArithOp op, const AbstractValue& a, const AbstractValue& b) {
    if (a.is_interval() && b.is_interval()) {
        return AbstractValue(interval_arith(op, a.as_interval(), b.as_interval()));
    }
    if (a.is_intset() && b.is_intset()) {
        return AbstractValue(intset_arith(op, a.as_intset(), b.as_intset()));
    }
    fail(ErrorKind::Type, "arithmetic expects two integer abstractions of the same mode");
}

Kleene num_cmp(CmpOp op, const AbstractValue& a, const AbstractValue& b) {
    if (a.is_interval() && b.is_interval()) {
        return interval_cmp(op, a.as_interval(), b.as_interval());
    }
    if (a.is_intset() && b.is_intset()) {
        return intset_cmp(op, a.as_intset(), b.as_intset());
    }
    fail(ErrorKind::Type, "comparison expects two integer abstractions of the same mode");
}

// ============================================================================
// Boolean transformers
// ============================================================================

Kleene kleene_and(Kleene a, Kleene b) {
    if (a == Kleene::False || b == Kleene::False) return Kleene::False;
    if (a == Kleene::True && b == Kleene::True) return Kleene::True;
    return Kleene::Top;
}

Kleene kleene_or(Kleene a, Kleene b) {
    if (a == Kleene::True || b == Kleene::True) return Kleene::True;
    if (a == Kleene::False && b == Kleene::False) return Kleene::False;
    return Kleene::Top;
}

Kleene kleene_not(Kleene a) {
    switch (a) {
    case Kleene::True: return Kleene::False;
    case Kleene::False: return Kleene::True;
    case Kleene::Top: return Kleene::Top;
    }
    fail(ErrorKind::Type, "bad kleene value");
}

Kleene catset_eq(CatSet s, Cat c) {
    if (s.empty()) fail(ErrorKind::Type, "category equality on empty set");
    if (!s.contains(c)) return Kleene::False;
    if (s.count() == 1) return Kleene::True;
    return Kleene::Top;
}

// ============================================================================
// List combinators
// ============================================================================

ListA map_abstract(const AbstractFn& f, const ListA& xs) {
    if (f.arity != 1) fail(ErrorKind::Type, "map expects a unary function");
    ListA out;
    out.entries.reserve(xs.entries.size());
    for (const auto& [a, b] : xs.entries) {
        out.entries.emplace_back(f(a), b);
    }
    return out;
}

ListA filter_abstract(const AbstractFn& f, const ListA& xs) {
    if (f.arity != 1) fail(ErrorKind::Type, "filter expects a unary function");
    ListA out;
    for (const auto& [a, b] : xs.entries) {
        AbstractValue r = f(a);
        Kleene keep = r.as_bool();
        if (keep == Kleene::False) continue;
        out.entries.emplace_back(a, kleene_and(b, keep));
    }
    return out;
}

AbstractValue foldr_abstract(const AbstractFn& f, const ListA& xs, const AbstractValue& init) {
    if (f.arity != 2) fail(ErrorKind::Type, "foldr expects a binary function");
    AbstractValue acc = init;
    for (size_t i = xs.entries.size(); i > 0; --i) {
        const auto& [a, b] = xs.entries[i - 1];
        AbstractValue applied = f(a, acc);
        if (b == Kleene::True) {
            acc = std::move(applied);
        } else {
            acc = join(acc, applied);
        }
    }
    return acc;
}

ListA product_abstract(const ListA& a, const ListA& b) {
    ListA out;
    out.entries.reserve(a.entries.size() * b.entries.size());
    for (const auto& [ea, fa] : a.entries) {
        for (const auto& [eb, fb] : b.entries) {
            TupleA t;
            t.elems = {ea, eb};
            out.entries.emplace_back(AbstractValue(std::move(t)), kleene_and(fa, fb));
        }
    }
    return out;
}

ListA pairs_abstract(const ListA& a) {
    ListA out;
    const size_t n = a.entries.size();
    if (n > 1) out.entries.reserve(n * (n - 1));
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            TupleA t;
            t.elems = {a.entries[i].first, a.entries[j].first};
            out.entries.emplace_back(AbstractValue(std::move(t)),
                                     kleene_and(a.entries[i].second, a.entries[j].second));
        }
    }
    return out;
}

} // namespace csem
