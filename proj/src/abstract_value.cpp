#include "csem/abstract_value.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace csem {

// ============================================================================
// Concrete value accessors
// ============================================================================

bool Value::as_bool() const {
    if (!is_bool()) fail(ErrorKind::Type, "expected bool value");
    return std::get<bool>(v);
}
int64_t Value::as_int() const {
    if (!is_int()) fail(ErrorKind::Type, "expected int value");
    return std::get<int64_t>(v);
}
Cat Value::as_cat() const {
    if (!is_cat()) fail(ErrorKind::Type, "expected cat value");
    return std::get<Cat>(v);
}
const TupleV& Value::as_tuple() const {
    if (!is_tuple()) fail(ErrorKind::Type, "expected tuple value");
    return std::get<TupleV>(v);
}
const ListV& Value::as_list() const {
    if (!is_list()) fail(ErrorKind::Type, "expected list value");
    return std::get<ListV>(v);
}

bool operator==(const Value& a, const Value& b) {
    if (a.v.index() != b.v.index()) return false;
    if (a.is_bool()) return a.as_bool() == b.as_bool();
    if (a.is_int()) return a.as_int() == b.as_int();
    if (a.is_cat()) return a.as_cat() == b.as_cat();
    if (a.is_tuple()) return a.as_tuple().elems == b.as_tuple().elems;
    return a.as_list().elems == b.as_list().elems;
}

bool operator<(const Value& a, const Value& b) {
    if (a.v.index() != b.v.index()) return a.v.index() < b.v.index();
    if (a.is_bool()) return a.as_bool() < b.as_bool();
    if (a.is_int()) return a.as_int() < b.as_int();
    if (a.is_cat()) return a.as_cat() < b.as_cat();
    const auto& ae = a.is_tuple() ? a.as_tuple().elems : a.as_list().elems;
    const auto& be = b.is_tuple() ? b.as_tuple().elems : b.as_list().elems;
    return std::lexicographical_compare(ae.begin(), ae.end(), be.begin(), be.end());
}

std::string to_string(const Value& v) {
    std::ostringstream os;
    if (v.is_bool()) {
        os << (v.as_bool() ? "true" : "false");
    } else if (v.is_int()) {
        os << v.as_int();
    } else if (v.is_cat()) {
        os << "cat:" << v.as_cat().id;
    } else {
        const auto& elems = v.is_tuple() ? v.as_tuple().elems : v.as_list().elems;
        os << (v.is_tuple() ? "(" : "[");
        for (size_t i = 0; i < elems.size(); ++i) {
            if (i) os << ", ";
            os << to_string(elems[i]);
        }
        os << (v.is_tuple() ? ")" : "]");
    }
    return os.str();
}

// ============================================================================
// Abstract value accessors
// ============================================================================

IntSet::IntSet(std::vector<int64_t> v) : vals(std::move(v)) {
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
}

bool IntSet::contains(int64_t n) const {
    return std::binary_search(vals.begin(), vals.end(), n);
}

Kleene AbstractValue::as_bool() const {
    if (!is_bool()) fail(ErrorKind::Type, "expected abstract bool");
    return std::get<Kleene>(v);
}
const Interval& AbstractValue::as_interval() const {
    if (!is_interval()) fail(ErrorKind::Type, "expected interval");
    return std::get<Interval>(v);
}
CatSet AbstractValue::as_catset() const {
    if (!is_catset()) fail(ErrorKind::Type, "expected category set");
    return std::get<CatSet>(v);
}
const TupleA& AbstractValue::as_tuple() const {
    if (!is_tuple()) fail(ErrorKind::Type, "expected abstract tuple");
    return std::get<TupleA>(v);
}
const ListA& AbstractValue::as_list() const {
    if (!is_list()) fail(ErrorKind::Type, "expected abstract list");
    return std::get<ListA>(v);
}
const IntSet& AbstractValue::as_intset() const {
    if (!is_intset()) fail(ErrorKind::Type, "expected integer set");
    return std::get<IntSet>(v);
}

bool operator==(const AbstractValue& a, const AbstractValue& b) {
    if (a.v.index() != b.v.index()) return false;
    if (a.is_bottom()) return true;
    if (a.is_bool()) return a.as_bool() == b.as_bool();
    if (a.is_interval()) return a.as_interval() == b.as_interval();
    if (a.is_catset()) return a.as_catset() == b.as_catset();
    if (a.is_intset()) return a.as_intset() == b.as_intset();
    if (a.is_tuple()) return a.as_tuple().elems == b.as_tuple().elems;
    const auto& ae = a.as_list().entries;
    const auto& be = b.as_list().entries;
    if (ae.size() != be.size()) return false;
    for (size_t i = 0; i < ae.size(); ++i) {
        if (ae[i].second != be[i].second || !(ae[i].first == be[i].first)) return false;
    }
    return true;
}

std::string to_string(const AbstractValue& a) {
    std::ostringstream os;
    if (a.is_bottom()) {
        os << "_|_";
    } else if (a.is_bool()) {
        switch (a.as_bool()) {
        case Kleene::True: os << "true#"; break;
        case Kleene::False: os << "false#"; break;
        case Kleene::Top: os << "top"; break;
        }
    } else if (a.is_interval()) {
        os << "(" << a.as_interval().lo << "," << a.as_interval().hi << ")";
    } else if (a.is_catset()) {
        os << "{cats:" << a.as_catset().bits << "}";
    } else if (a.is_intset()) {
        os << "{";
        const auto& s = a.as_intset().vals;
        for (size_t i = 0; i < s.size(); ++i) {
            if (i) os << ",";
            os << s[i];
        }
        os << "}";
    } else if (a.is_tuple()) {
        os << "(";
        const auto& es = a.as_tuple().elems;
        for (size_t i = 0; i < es.size(); ++i) {
            if (i) os << ", ";
            os << to_string(es[i]);
        }
        os << ")";
    } else {
        os << "[";
        const auto& es = a.as_list().entries;
        for (size_t i = 0; i < es.size(); ++i) {
            if (i) os << ", ";
            os << "(" << to_string(es[i].first) << ",";
            os << to_string(AbstractValue(es[i].second)) << ")";
        }
        os << "]";
    }
    return os.str();
}

ListA make_list(std::vector<std::pair<AbstractValue, Kleene>> entries) {
    ListA out;
    out.entries.reserve(entries.size());
    for (auto& e : entries) {
        if (e.second == Kleene::False) continue;
        out.entries.push_back(std::move(e));
    }
    return out;
}

// ============================================================================
// alpha / gamma
// ============================================================================

AbstractValue alpha(const Value& v) {
    if (v.is_bool()) return AbstractValue(kleene_of(v.as_bool()));
    if (v.is_int()) return AbstractValue(Interval::point(v.as_int()));
    if (v.is_cat()) return AbstractValue(CatSet::single(v.as_cat()));
    if (v.is_tuple()) {
        TupleA t;
        t.elems.reserve(v.as_tuple().elems.size());
        for (const auto& e : v.as_tuple().elems) t.elems.push_back(alpha(e));
        return AbstractValue(std::move(t));
    }
    ListA l;
    l.entries.reserve(v.as_list().elems.size());
    for (const auto& e : v.as_list().elems) l.entries.emplace_back(alpha(e), Kleene::True);
    return AbstractValue(std::move(l));
}

bool gamma_contains(const AbstractValue& a, const Value& v) {
    if (a.is_bottom()) return false;
    if (a.is_bool()) {
        if (!v.is_bool()) fail(ErrorKind::Type, "gamma_contains: kind mismatch (bool)");
        Kleene k = a.as_bool();
        return k == Kleene::Top || k == kleene_of(v.as_bool());
    }
    if (a.is_interval()) {
        if (!v.is_int()) fail(ErrorKind::Type, "gamma_contains: kind mismatch (int)");
        return a.as_interval().contains(v.as_int());
    }
    if (a.is_intset()) {
        if (!v.is_int()) fail(ErrorKind::Type, "gamma_contains: kind mismatch (int)");
        return a.as_intset().contains(v.as_int());
    }
    if (a.is_catset()) {
        if (!v.is_cat()) fail(ErrorKind::Type, "gamma_contains: kind mismatch (cat)");
        return a.as_catset().contains(v.as_cat());
    }
    if (a.is_tuple()) {
        if (!v.is_tuple()) fail(ErrorKind::Type, "gamma_contains: kind mismatch (tuple)");
        const auto& ae = a.as_tuple().elems;
        const auto& ve = v.as_tuple().elems;
        if (ae.size() != ve.size()) return false;
        for (size_t i = 0; i < ae.size(); ++i) {
            if (!gamma_contains(ae[i], ve[i])) return false;
        }
        return true;
    }
    if (!v.is_list()) fail(ErrorKind::Type, "gamma_contains: kind mismatch (list)");

    // Subsequence DP. dp[i][j] = the first i concrete elements can be matched
    // into the first j abstract entries such that matched entries have flag
    // != False and skipped entries have flag != True.
    const auto& entries = a.as_list().entries;
    const auto& elems = v.as_list().elems;
    const size_t h = elems.size();
    const size_t k = entries.size();
    std::vector<char> dp(h + 1, 0);
    dp[0] = 1;
    for (size_t j = 1; j <= k; ++j) {
        const auto& [ej, fj] = entries[j - 1];
        const bool may_skip = (fj != Kleene::True);
        const bool may_match = (fj != Kleene::False);
        for (size_t i = std::min(h, j); i + 1 > 0; --i) {
            bool ok = may_skip && dp[i];
            if (!ok && i > 0 && may_match && dp[i - 1] && gamma_contains(ej, elems[i - 1])) {
                ok = true;
            }
            dp[i] = ok ? 1 : 0;
            if (i == 0) break;
        }
    }
    return dp[h] != 0;
}

namespace {

void enumerate_into(const AbstractValue& a, size_t cap, std::set<Value>& out, int n_cats);

void enumerate_list_rec(const std::vector<std::pair<AbstractValue, Kleene>>& entries, size_t idx,
                        std::vector<Value>& prefix, size_t cap, std::set<Value>& out,
                        int n_cats) {
    if (idx == entries.size()) {
        if (out.size() >= cap) fail(ErrorKind::EnumerationOverflow, "gamma enumeration exceeds cap");
        out.insert(Value(ListV{prefix}));
        return;
    }
    const auto& [elem, flag] = entries[idx];
    if (flag != Kleene::True) {
        enumerate_list_rec(entries, idx + 1, prefix, cap, out, n_cats);
    }
    std::set<Value> elem_vals;
    enumerate_into(elem, cap, elem_vals, n_cats);
    for (const auto& ev : elem_vals) {
        prefix.push_back(ev);
        enumerate_list_rec(entries, idx + 1, prefix, cap, out, n_cats);
        prefix.pop_back();
    }
}

void enumerate_into(const AbstractValue& a, size_t cap, std::set<Value>& out, int n_cats) {
    if (a.is_bottom()) fail(ErrorKind::Type, "cannot enumerate bottom");
    if (a.is_bool()) {
        Kleene k = a.as_bool();
        if (k != Kleene::False) out.insert(Value(true));
        if (k != Kleene::True) out.insert(Value(false));
        return;
    }
    if (a.is_interval()) {
        const auto& iv = a.as_interval();
        // Width check before looping; the difference can overflow when the
        // caller hands in a sentinel-wide interval.
        if (iv.lo < 0 && iv.hi > 0 &&
            static_cast<uint64_t>(iv.hi) + static_cast<uint64_t>(-(iv.lo + 1)) + 1 > cap) {
            fail(ErrorKind::EnumerationOverflow, "gamma enumeration exceeds cap");
        }
        for (int64_t n = iv.lo;; ++n) {
            if (out.size() >= cap) fail(ErrorKind::EnumerationOverflow, "gamma enumeration exceeds cap");
            out.insert(Value(n));
            if (n == iv.hi) break;
        }
        return;
    }
    if (a.is_intset()) {
        for (int64_t n : a.as_intset().vals) {
            if (out.size() >= cap) fail(ErrorKind::EnumerationOverflow, "gamma enumeration exceeds cap");
            out.insert(Value(n));
        }
        return;
    }
    if (a.is_catset()) {
        for (int id = 0; id < 64; ++id) {
            if (a.as_catset().contains(Cat{id})) out.insert(Value(Cat{id}));
        }
        return;
    }
    if (a.is_tuple()) {
        const auto& elems = a.as_tuple().elems;
        std::vector<std::vector<Value>> parts;
        parts.reserve(elems.size());
        for (const auto& e : elems) {
            std::set<Value> s;
            enumerate_into(e, cap, s, n_cats);
            parts.emplace_back(s.begin(), s.end());
        }
        std::vector<size_t> idx(parts.size(), 0);
        while (true) {
            TupleV t;
            t.elems.reserve(parts.size());
            for (size_t i = 0; i < parts.size(); ++i) t.elems.push_back(parts[i][idx[i]]);
            if (out.size() >= cap) fail(ErrorKind::EnumerationOverflow, "gamma enumeration exceeds cap");
            out.insert(Value(std::move(t)));
            size_t i = 0;
            for (; i < parts.size(); ++i) {
                if (++idx[i] < parts[i].size()) break;
                idx[i] = 0;
            }
            if (i == parts.size()) break;
            if (parts.empty()) break;
        }
        return;
    }
    std::vector<Value> prefix;
    enumerate_list_rec(a.as_list().entries, 0, prefix, cap, out, n_cats);
}

} // namespace

std::vector<Value> gamma_enumerate(const AbstractValue& a, size_t cap) {
    std::set<Value> out;
    enumerate_into(a, cap, out, 64);
    return std::vector<Value>(out.begin(), out.end());
}

double gamma_size(const AbstractValue& a, int n_cats) {
    if (a.is_bool()) return a.as_bool() == Kleene::Top ? 2.0 : 1.0;
    if (a.is_interval()) {
        const auto& iv = a.as_interval();
        return static_cast<double>(iv.hi) - static_cast<double>(iv.lo) + 1.0;
    }
    if (a.is_intset()) return static_cast<double>(a.as_intset().size());
    if (a.is_catset()) return static_cast<double>(a.as_catset().count());
    if (a.is_tuple()) {
        double p = 1.0;
        for (const auto& e : a.as_tuple().elems) p *= gamma_size(e, n_cats);
        return p;
    }
    fail(ErrorKind::Type, "no finite size metric for this abstract kind");
}

// ============================================================================
// Lattice operations
// ============================================================================

Kleene kleene_join(Kleene a, Kleene b) { return a == b ? a : Kleene::Top; }

AbstractValue join(const AbstractValue& a, const AbstractValue& b) {
    if (a.is_bottom()) return b;
    if (b.is_bottom()) return a;
    if (a.v.index() != b.v.index()) fail(ErrorKind::Type, "join: incompatible kinds");
    if (a.is_bool()) return AbstractValue(kleene_join(a.as_bool(), b.as_bool()));
    if (a.is_interval()) {
        return AbstractValue(Interval(std::min(a.as_interval().lo, b.as_interval().lo),
                                      std::max(a.as_interval().hi, b.as_interval().hi)));
    }
    if (a.is_intset()) {
        std::vector<int64_t> merged = a.as_intset().vals;
        merged.insert(merged.end(), b.as_intset().vals.begin(), b.as_intset().vals.end());
        return AbstractValue(IntSet(std::move(merged)));
    }
    if (a.is_catset()) return AbstractValue(CatSet(a.as_catset().bits | b.as_catset().bits));
    if (a.is_tuple()) {
        const auto& ae = a.as_tuple().elems;
        const auto& be = b.as_tuple().elems;
        if (ae.size() != be.size()) fail(ErrorKind::Type, "join: tuple arity mismatch");
        TupleA t;
        t.elems.reserve(ae.size());
        for (size_t i = 0; i < ae.size(); ++i) t.elems.push_back(join(ae[i], be[i]));
        return AbstractValue(std::move(t));
    }
    // List join is only defined when entries align pairwise; anything else is
    // rejected rather than silently widened.
    const auto& ae = a.as_list().entries;
    const auto& be = b.as_list().entries;
    if (ae.size() != be.size()) {
        fail(ErrorKind::UnsupportedJoin, "join: abstract lists of different lengths");
    }
    ListA l;
    l.entries.reserve(ae.size());
    for (size_t i = 0; i < ae.size(); ++i) {
        l.entries.emplace_back(join(ae[i].first, be[i].first),
                               kleene_join(ae[i].second, be[i].second));
    }
    return AbstractValue(std::move(l));
}

std::optional<AbstractValue> meet(const AbstractValue& a, const AbstractValue& b) {
    if (a.is_bottom() || b.is_bottom()) return AbstractValue(Bottom{});
    if (a.v.index() != b.v.index()) fail(ErrorKind::Type, "meet: incompatible kinds");
    if (a.is_bool()) {
        Kleene x = a.as_bool();
        Kleene y = b.as_bool();
        if (x == Kleene::Top) return AbstractValue(y);
        if (y == Kleene::Top) return AbstractValue(x);
        if (x == y) return AbstractValue(x);
        return std::nullopt;
    }
    if (a.is_interval()) {
        int64_t lo = std::max(a.as_interval().lo, b.as_interval().lo);
        int64_t hi = std::min(a.as_interval().hi, b.as_interval().hi);
        if (lo > hi) return std::nullopt;
        return AbstractValue(Interval(lo, hi));
    }
    if (a.is_intset()) {
        std::vector<int64_t> out;
        for (int64_t n : a.as_intset().vals) {
            if (b.as_intset().contains(n)) out.push_back(n);
        }
        if (out.empty()) return std::nullopt;
        return AbstractValue(IntSet(std::move(out)));
    }
    if (a.is_catset()) {
        CatSet c(a.as_catset().bits & b.as_catset().bits);
        if (c.empty()) return std::nullopt;
        return AbstractValue(c);
    }
    if (a.is_tuple()) {
        const auto& ae = a.as_tuple().elems;
        const auto& be = b.as_tuple().elems;
        if (ae.size() != be.size()) fail(ErrorKind::Type, "meet: tuple arity mismatch");
        TupleA t;
        t.elems.reserve(ae.size());
        for (size_t i = 0; i < ae.size(); ++i) {
            auto m = meet(ae[i], be[i]);
            if (!m) return std::nullopt;
            t.elems.push_back(std::move(*m));
        }
        return AbstractValue(std::move(t));
    }
    fail(ErrorKind::Type, "meet: unsupported on abstract lists");
}

bool leq(const AbstractValue& a, const AbstractValue& b) {
    if (a.is_bottom()) return true;
    if (b.is_bottom()) return false;
    if (a.v.index() != b.v.index()) fail(ErrorKind::Type, "leq: incompatible kinds");
    if (a.is_bool()) {
        return a.as_bool() == b.as_bool() || b.as_bool() == Kleene::Top;
    }
    if (a.is_interval()) {
        return a.as_interval().lo >= b.as_interval().lo && a.as_interval().hi <= b.as_interval().hi;
    }
    if (a.is_intset()) {
        for (int64_t n : a.as_intset().vals) {
            if (!b.as_intset().contains(n)) return false;
        }
        return true;
    }
    if (a.is_catset()) return (a.as_catset().bits & ~b.as_catset().bits) == 0;
    if (a.is_tuple()) {
        const auto& ae = a.as_tuple().elems;
        const auto& be = b.as_tuple().elems;
        if (ae.size() != be.size()) fail(ErrorKind::Type, "leq: tuple arity mismatch");
        for (size_t i = 0; i < ae.size(); ++i) {
            if (!leq(ae[i], be[i])) return false;
        }
        return true;
    }
    // Sufficient pairwise check; only exercised by the fixpoint stabilization
    // test, which never compares lists of different shapes.
    const auto& ae = a.as_list().entries;
    const auto& be = b.as_list().entries;
    if (ae.size() != be.size()) return false;
    for (size_t i = 0; i < ae.size(); ++i) {
        if (!leq(ae[i].first, be[i].first)) return false;
        Kleene fa = ae[i].second;
        Kleene fb = be[i].second;
        if (!(fa == fb || fb == Kleene::Top)) return false;
    }
    return true;
}

} // namespace csem
