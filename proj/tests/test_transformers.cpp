#include <doctest.h>

#include <algorithm>
#include <functional>

#include "csem/transformers.hpp"
#include "generators.hpp"

using namespace csem;
using namespace csem::testgen;

namespace {

AbstractValue iv(int64_t lo, int64_t hi) { return AbstractValue(Interval(lo, hi)); }

int64_t conc_arith(ArithOp op, int64_t x, int64_t y) {
    switch (op) {
    case ArithOp::Add: return x + y;
    case ArithOp::Sub: return x - y;
    case ArithOp::Mul: return x * y;
    case ArithOp::Min: return std::min(x, y);
    case ArithOp::Max: return std::max(x, y);
    case ArithOp::AbsDiff: return x >= y ? x - y : y - x;
    }
    return 0;
}

bool conc_cmp(CmpOp op, int64_t x, int64_t y) {
    switch (op) {
    case CmpOp::Ge: return x >= y;
    case CmpOp::Gt: return x > y;
    case CmpOp::Eq: return x == y;
    case CmpOp::Le: return x <= y;
    case CmpOp::Lt: return x < y;
    }
    return false;
}

AbstractFn add_fn() {
    return AbstractFn{2, [](const std::vector<AbstractValue>& a) {
                          return num_arith(ArithOp::Add, a[0], a[1]);
                      }};
}

} // namespace

// ============================================================================
// Frozen examples
// ============================================================================

TEST_CASE("interval arithmetic examples") {
    CHECK(interval_add(Interval(1, 2), Interval(3, 4)) == Interval(4, 6));
    // brute force over the 4 concrete pairs: differences {-3,-2,-1}
    CHECK(interval_sub(Interval(1, 2), Interval(3, 4)) == Interval(-3, -1));
    // endpoint products {-8,-6,3,4}
    CHECK(interval_mul(Interval(-2, 1), Interval(3, 4)) == Interval(-8, 4));
    CHECK(interval_min(Interval(1, 5), Interval(2, 3)) == Interval(1, 3));
    CHECK(interval_max(Interval(1, 5), Interval(2, 3)) == Interval(2, 5));
}

TEST_CASE("interval comparison examples") {
    CHECK(interval_cmp(CmpOp::Ge, Interval(5, 7), Interval(1, 4)) == Kleene::True);
    CHECK(interval_cmp(CmpOp::Eq, Interval(3, 3), Interval(3, 3)) == Kleene::True);
    CHECK(interval_cmp(CmpOp::Gt, Interval(1, 5), Interval(3, 4)) == Kleene::Top);
    CHECK(interval_cmp(CmpOp::Ge, Interval(0, 1), Interval(5, 6)) == Kleene::False);
    CHECK(interval_cmp(CmpOp::Eq, Interval(0, 1), Interval(5, 6)) == Kleene::False);
    CHECK(interval_cmp(CmpOp::Le, Interval(0, 1), Interval(5, 6)) == Kleene::True);
    CHECK(interval_cmp(CmpOp::Lt, Interval(5, 6), Interval(0, 1)) == Kleene::False);
}

TEST_CASE("kleene logic tables") {
    CHECK(kleene_and(Kleene::Top, Kleene::False) == Kleene::False);
    CHECK(kleene_and(Kleene::Top, Kleene::True) == Kleene::Top);
    CHECK(kleene_and(Kleene::Top, Kleene::Top) == Kleene::Top);
    CHECK(kleene_or(Kleene::Top, Kleene::True) == Kleene::True);
    CHECK(kleene_or(Kleene::Top, Kleene::False) == Kleene::Top);
    CHECK(kleene_or(Kleene::Top, Kleene::Top) == Kleene::Top);
    CHECK(kleene_not(Kleene::Top) == Kleene::Top);
    CHECK(kleene_not(Kleene::True) == Kleene::False);
    CHECK(kleene_and(Kleene::True, Kleene::True) == Kleene::True);
    CHECK(kleene_or(Kleene::False, Kleene::False) == Kleene::False);
}

TEST_CASE("map preserves flags and order") {
    ListA xs;
    xs.entries.emplace_back(iv(2, 3), Kleene::True);
    xs.entries.emplace_back(iv(5, 5), Kleene::Top);
    AbstractFn plus_one{1, [](const std::vector<AbstractValue>& a) {
                            return num_arith(ArithOp::Add, a[0], AbstractValue(Interval(1, 1)));
                        }};
    ListA out = map_abstract(plus_one, xs);
    REQUIRE(out.entries.size() == 2);
    CHECK(out.entries[0].first == iv(3, 4));
    CHECK(out.entries[0].second == Kleene::True);
    CHECK(out.entries[1].first == iv(6, 6));
    CHECK(out.entries[1].second == Kleene::Top);

    CHECK(map_abstract(plus_one, ListA{}).entries.empty());
}

TEST_CASE("filter drops false, conjoins flags") {
    AbstractFn ge3{1, [](const std::vector<AbstractValue>& a) {
                       return AbstractValue(
                           num_cmp(CmpOp::Ge, a[0], AbstractValue(Interval(3, 3))));
                   }};
    ListA xs;
    xs.entries.emplace_back(iv(5, 5), Kleene::True);
    xs.entries.emplace_back(iv(1, 1), Kleene::True);
    ListA out = filter_abstract(ge3, xs);
    REQUIRE(out.entries.size() == 1);
    CHECK(out.entries[0].first == iv(5, 5));
    CHECK(out.entries[0].second == Kleene::True);

    ListA straddle;
    straddle.entries.emplace_back(iv(2, 4), Kleene::True);
    out = filter_abstract(ge3, straddle);
    REQUIRE(out.entries.size() == 1);
    CHECK(out.entries[0].second == Kleene::Top);

    ListA maybe;
    maybe.entries.emplace_back(iv(2, 4), Kleene::Top);
    out = filter_abstract(ge3, maybe);
    REQUIRE(out.entries.size() == 1);
    CHECK(out.entries[0].second == Kleene::Top);
}

TEST_CASE("foldr examples") {
    ListA sure;
    sure.entries.emplace_back(iv(1, 1), Kleene::True);
    sure.entries.emplace_back(iv(2, 2), Kleene::True);
    CHECK(foldr_abstract(add_fn(), sure, iv(0, 0)) == iv(3, 3));

    ListA maybe;
    maybe.entries.emplace_back(iv(1, 1), Kleene::Top);
    CHECK(foldr_abstract(add_fn(), maybe, iv(0, 0)) == iv(0, 1));

    ListA mixed;
    mixed.entries.emplace_back(iv(1, 2), Kleene::Top);
    mixed.entries.emplace_back(iv(3, 3), Kleene::True);
    CHECK(foldr_abstract(add_fn(), mixed, iv(0, 0)) == iv(3, 5));

    CHECK(foldr_abstract(add_fn(), ListA{}, iv(7, 7)) == iv(7, 7));
}

TEST_CASE("overflow in interval endpoints raises") {
    Interval big(std::numeric_limits<int64_t>::max() - 1, std::numeric_limits<int64_t>::max());
    CHECK_THROWS_AS(interval_add(big, Interval(2, 2)), Error);
    CHECK_THROWS_AS(interval_mul(big, big), Error);
}

// ============================================================================
// Brute-force soundness and exactness oracles
// ============================================================================

TEST_CASE("interval transformer soundness and hull exactness") {
    Rng rng(201);
    const ArithOp ops[] = {ArithOp::Add, ArithOp::Sub, ArithOp::Mul,
                           ArithOp::Min, ArithOp::Max, ArithOp::AbsDiff};
    for (int i = 0; i < 10000; ++i) {
        Interval a = small_interval(rng);
        Interval b = small_interval(rng);
        for (ArithOp op : ops) {
            Interval out = interval_arith(op, a, b);
            int64_t seen_min = std::numeric_limits<int64_t>::max();
            int64_t seen_max = std::numeric_limits<int64_t>::min();
            for (int64_t x = a.lo; x <= a.hi; ++x) {
                for (int64_t y = b.lo; y <= b.hi; ++y) {
                    int64_t r = conc_arith(op, x, y);
                    CHECK(out.contains(r));
                    seen_min = std::min(seen_min, r);
                    seen_max = std::max(seen_max, r);
                }
            }
            // minimal sound hull
            CHECK(out.lo == seen_min);
            CHECK(out.hi == seen_max);
        }
    }
}

TEST_CASE("comparison transformer soundness and minimality") {
    Rng rng(202);
    const CmpOp ops[] = {CmpOp::Ge, CmpOp::Gt, CmpOp::Eq, CmpOp::Le, CmpOp::Lt};
    for (int i = 0; i < 10000; ++i) {
        Interval a = small_interval(rng);
        Interval b = small_interval(rng);
        for (CmpOp op : ops) {
            Kleene out = interval_cmp(op, a, b);
            bool saw_true = false, saw_false = false;
            for (int64_t x = a.lo; x <= a.hi; ++x) {
                for (int64_t y = b.lo; y <= b.hi; ++y) {
                    (conc_cmp(op, x, y) ? saw_true : saw_false) = true;
                }
            }
            Kleene exact = saw_true && saw_false ? Kleene::Top
                           : saw_true           ? Kleene::True
                                                : Kleene::False;
            CHECK(out == exact);
        }
    }
}

TEST_CASE("kleene operators are sound and minimal for three-valued truth") {
    auto concretize = [](Kleene k) {
        std::vector<bool> out;
        if (k != Kleene::False) out.push_back(true);
        if (k != Kleene::True) out.push_back(false);
        return out;
    };
    const Kleene all[] = {Kleene::False, Kleene::True, Kleene::Top};
    for (Kleene a : all) {
        for (Kleene b : all) {
            bool saw_t = false, saw_f = false;
            for (bool x : concretize(a)) {
                for (bool y : concretize(b)) {
                    ((x && y) ? saw_t : saw_f) = true;
                }
            }
            Kleene exact = saw_t && saw_f ? Kleene::Top : saw_t ? Kleene::True : Kleene::False;
            CHECK(kleene_and(a, b) == exact);

            saw_t = saw_f = false;
            for (bool x : concretize(a)) {
                for (bool y : concretize(b)) {
                    ((x || y) ? saw_t : saw_f) = true;
                }
            }
            exact = saw_t && saw_f ? Kleene::Top : saw_t ? Kleene::True : Kleene::False;
            CHECK(kleene_or(a, b) == exact);
        }
        bool saw_t = false, saw_f = false;
        for (bool x : concretize(a)) {
            (!x ? saw_t : saw_f) = true;
        }
        Kleene exact = saw_t && saw_f ? Kleene::Top : saw_t ? Kleene::True : Kleene::False;
        CHECK(kleene_not(a) == exact);
    }
}

TEST_CASE("monotonicity of binary interval transformers") {
    Rng rng(203);
    const ArithOp ops[] = {ArithOp::Add, ArithOp::Sub, ArithOp::Mul,
                           ArithOp::Min, ArithOp::Max, ArithOp::AbsDiff};
    auto widen = [&](const Interval& x) {
        return Interval(x.lo - rng.next_int(0, 3), x.hi + rng.next_int(0, 3));
    };
    for (int i = 0; i < 10000; ++i) {
        Interval a = small_interval(rng);
        Interval b = small_interval(rng);
        Interval aw = widen(a);
        Interval bw = widen(b);
        for (ArithOp op : ops) {
            CHECK(leq(AbstractValue(interval_arith(op, a, b)),
                      AbstractValue(interval_arith(op, aw, bw))));
        }
    }
}

TEST_CASE("foldr covers every flag-consistent concrete fold") {
    Rng rng(204);
    for (int i = 0; i < 1500; ++i) {
        AbstractValue xs = random_int_list(rng, 5, 2);
        AbstractValue result = foldr_abstract(add_fn(), xs.as_list(), iv(0, 0));
        for (const Value& v : gamma_enumerate(xs, 1 << 14)) {
            int64_t sum = 0;
            for (const Value& e : v.as_list().elems) sum += e.as_int();
            CHECK(gamma_contains(result, Value(sum)));
        }
    }
}

TEST_CASE("set-mode transformers match exact images") {
    Rng rng(205);
    const ArithOp ops[] = {ArithOp::Add, ArithOp::Sub, ArithOp::Mul,
                           ArithOp::Min, ArithOp::Max, ArithOp::AbsDiff};
    for (int i = 0; i < 3000; ++i) {
        auto gen_set = [&] {
            std::vector<int64_t> vals;
            int n = static_cast<int>(rng.next_int(1, 5));
            for (int j = 0; j < n; ++j) vals.push_back(rng.next_int(-9, 9));
            return IntSet(std::move(vals));
        };
        IntSet a = gen_set(), b = gen_set();
        for (ArithOp op : ops) {
            IntSet out = intset_arith(op, a, b);
            std::vector<int64_t> expect;
            for (int64_t x : a.vals) {
                for (int64_t y : b.vals) expect.push_back(conc_arith(op, x, y));
            }
            CHECK(out == IntSet(std::move(expect)));
        }
        for (CmpOp op : {CmpOp::Ge, CmpOp::Gt, CmpOp::Eq, CmpOp::Le, CmpOp::Lt}) {
            Kleene out = intset_cmp(op, a, b);
            bool saw_t = false, saw_f = false;
            for (int64_t x : a.vals) {
                for (int64_t y : b.vals) {
                    (conc_cmp(op, x, y) ? saw_t : saw_f) = true;
                }
            }
            // definite verdicts must be correct; Top must be a real mix for
            // the orders, and at least sound for equality
            if (out == Kleene::True) CHECK((saw_t && !saw_f));
            if (out == Kleene::False) CHECK((saw_f && !saw_t));
            if (saw_t && saw_f) CHECK(out == Kleene::Top);
        }
    }
}

TEST_CASE("product and pairs combinators") {
    ListA a;
    a.entries.emplace_back(iv(1, 1), Kleene::True);
    a.entries.emplace_back(iv(2, 2), Kleene::Top);
    ListA b;
    b.entries.emplace_back(iv(5, 5), Kleene::True);

    ListA prod = product_abstract(a, b);
    REQUIRE(prod.entries.size() == 2);
    CHECK(prod.entries[0].second == Kleene::True);
    CHECK(prod.entries[1].second == Kleene::Top);
    CHECK(prod.entries[0].first.as_tuple().elems[0] == iv(1, 1));
    CHECK(prod.entries[0].first.as_tuple().elems[1] == iv(5, 5));

    ListA prs = pairs_abstract(a);
    REQUIRE(prs.entries.size() == 2); // (0,1) and (1,0)
    CHECK(prs.entries[0].first.as_tuple().elems[0] == iv(1, 1));
    CHECK(prs.entries[0].first.as_tuple().elems[1] == iv(2, 2));
    CHECK(prs.entries[0].second == Kleene::Top);
}

TEST_CASE("product soundness against concrete cross products") {
    Rng rng(206);
    for (int i = 0; i < 800; ++i) {
        AbstractValue a = random_int_list(rng, 3, 1);
        AbstractValue b = random_int_list(rng, 3, 1);
        AbstractValue prod(product_abstract(a.as_list(), b.as_list()));
        for (const Value& va : gamma_enumerate(a, 512)) {
            for (const Value& vb : gamma_enumerate(b, 512)) {
                ListV cross;
                for (const Value& x : va.as_list().elems) {
                    for (const Value& y : vb.as_list().elems) {
                        cross.elems.push_back(Value(TupleV{{x, y}}));
                    }
                }
                CHECK(gamma_contains(prod, Value(std::move(cross))));
            }
        }
    }
}

TEST_CASE("pairs soundness against concrete distinct pairs") {
    Rng rng(207);
    for (int i = 0; i < 800; ++i) {
        AbstractValue a = random_int_list(rng, 3, 1);
        AbstractValue prs(pairs_abstract(a.as_list()));
        for (const Value& va : gamma_enumerate(a, 512)) {
            const auto& elems = va.as_list().elems;
            ListV cross;
            for (size_t x = 0; x < elems.size(); ++x) {
                for (size_t y = 0; y < elems.size(); ++y) {
                    if (x != y) cross.elems.push_back(Value(TupleV{{elems[x], elems[y]}}));
                }
            }
            CHECK(gamma_contains(prs, Value(std::move(cross))));
        }
    }
}
