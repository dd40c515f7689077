#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "csem/errors.hpp"

namespace csem {

// ============================================================================
// Concrete values
// ============================================================================

// Category identifiers are strings interned to dense ids at dataset load.
struct Cat {
    int id = 0;
    friend bool operator==(Cat a, Cat b) { return a.id == b.id; }
    friend bool operator<(Cat a, Cat b) { return a.id < b.id; }
};

class CatTable {
public:
    Cat intern(const std::string& name) {
        auto it = ids_.find(name);
        if (it != ids_.end()) return Cat{it->second};
        int id = static_cast<int>(names_.size());
        if (id >= 64) fail(ErrorKind::Config, "category table limited to 64 entries");
        names_.push_back(name);
        ids_.emplace(name, id);
        return Cat{id};
    }
    std::optional<Cat> lookup(const std::string& name) const {
        auto it = ids_.find(name);
        if (it == ids_.end()) return std::nullopt;
        return Cat{it->second};
    }
    const std::string& name(Cat c) const { return names_.at(static_cast<size_t>(c.id)); }
    int size() const { return static_cast<int>(names_.size()); }

private:
    std::vector<std::string> names_;
    std::map<std::string, int> ids_;
};

struct Value;
struct TupleV {
    std::vector<Value> elems;
};
struct ListV {
    std::vector<Value> elems;
};

struct Value {
    std::variant<bool, int64_t, Cat, TupleV, ListV> v;

    Value() : v(int64_t{0}) {}
    Value(bool b) : v(b) {}
    Value(int64_t n) : v(n) {}
    Value(int n) : v(static_cast<int64_t>(n)) {}
    Value(Cat c) : v(c) {}
    Value(TupleV t) : v(std::move(t)) {}
    Value(ListV l) : v(std::move(l)) {}

    bool is_bool() const { return std::holds_alternative<bool>(v); }
    bool is_int() const { return std::holds_alternative<int64_t>(v); }
    bool is_cat() const { return std::holds_alternative<Cat>(v); }
    bool is_tuple() const { return std::holds_alternative<TupleV>(v); }
    bool is_list() const { return std::holds_alternative<ListV>(v); }

    bool as_bool() const;
    int64_t as_int() const;
    Cat as_cat() const;
    const TupleV& as_tuple() const;
    const ListV& as_list() const;
};

bool operator==(const Value& a, const Value& b);
inline bool operator!=(const Value& a, const Value& b) { return !(a == b); }
bool operator<(const Value& a, const Value& b); // lexicographic, for set containers

std::string to_string(const Value& v);

// ============================================================================
// Abstract values
// ============================================================================

// Three-valued booleans: definite true/false, or either.
enum class Kleene : uint8_t { False = 0, True = 1, Top = 2 };

inline Kleene kleene_of(bool b) { return b ? Kleene::True : Kleene::False; }

// Closed integer interval [lo, hi]; constructor rejects lo > hi.
struct Interval {
    int64_t lo;
    int64_t hi;

    Interval(int64_t lo_, int64_t hi_) : lo(lo_), hi(hi_) {
        if (lo > hi) fail(ErrorKind::Type, "interval lower bound exceeds upper bound");
    }
    static Interval point(int64_t n) { return Interval(n, n); }

    bool contains(int64_t n) const { return lo <= n && n <= hi; }
    bool singleton() const { return lo == hi; }
    friend bool operator==(const Interval& a, const Interval& b) {
        return a.lo == b.lo && a.hi == b.hi;
    }
};

// Bitset over interned category ids.
struct CatSet {
    uint64_t bits = 0;

    CatSet() = default;
    explicit CatSet(uint64_t b) : bits(b) {}
    static CatSet single(Cat c) { return CatSet(uint64_t{1} << c.id); }
    static CatSet full(int n_cats) {
        return CatSet(n_cats >= 64 ? ~uint64_t{0} : (uint64_t{1} << n_cats) - 1);
    }

    bool contains(Cat c) const { return (bits >> c.id) & 1; }
    bool empty() const { return bits == 0; }
    int count() const { return __builtin_popcountll(bits); }
    friend bool operator==(CatSet a, CatSet b) { return a.bits == b.bits; }
};

struct AbstractValue;

struct TupleA {
    std::vector<AbstractValue> elems;
};

// Abstract list: entries carry a presence flag. Flag False entries are
// omitted at construction (they denote "definitely absent").
struct ListA {
    std::vector<std::pair<AbstractValue, Kleene>> entries;
};

// Explicit finite integer set, used by the set-valued abstract mode. Values
// are kept sorted and unique.
struct IntSet {
    std::vector<int64_t> vals;

    IntSet() = default;
    explicit IntSet(std::vector<int64_t> v);
    static IntSet single(int64_t n) { return IntSet(std::vector<int64_t>{n}); }

    bool contains(int64_t n) const;
    bool empty() const { return vals.empty(); }
    int64_t min() const { return vals.front(); }
    int64_t max() const { return vals.back(); }
    size_t size() const { return vals.size(); }
    friend bool operator==(const IntSet& a, const IntSet& b) { return a.vals == b.vals; }
};

struct Bottom {
    friend bool operator==(Bottom, Bottom) { return true; }
};

struct AbstractValue {
    std::variant<Bottom, Kleene, Interval, CatSet, TupleA, ListA, IntSet> v;

    AbstractValue() : v(Bottom{}) {}
    AbstractValue(Bottom b) : v(b) {}
    AbstractValue(Kleene k) : v(k) {}
    AbstractValue(Interval i) : v(i) {}
    AbstractValue(CatSet c) : v(c) {}
    AbstractValue(TupleA t) : v(std::move(t)) {}
    AbstractValue(ListA l) : v(std::move(l)) {}
    AbstractValue(IntSet s) : v(std::move(s)) {}

    bool is_bottom() const { return std::holds_alternative<Bottom>(v); }
    bool is_bool() const { return std::holds_alternative<Kleene>(v); }
    bool is_interval() const { return std::holds_alternative<Interval>(v); }
    bool is_catset() const { return std::holds_alternative<CatSet>(v); }
    bool is_tuple() const { return std::holds_alternative<TupleA>(v); }
    bool is_list() const { return std::holds_alternative<ListA>(v); }
    bool is_intset() const { return std::holds_alternative<IntSet>(v); }

    Kleene as_bool() const;
    const Interval& as_interval() const;
    CatSet as_catset() const;
    const TupleA& as_tuple() const;
    const ListA& as_list() const;
    const IntSet& as_intset() const;
};

bool operator==(const AbstractValue& a, const AbstractValue& b);
inline bool operator!=(const AbstractValue& a, const AbstractValue& b) { return !(a == b); }

std::string to_string(const AbstractValue& a);

// Builds an abstract list, dropping flag-False entries.
ListA make_list(std::vector<std::pair<AbstractValue, Kleene>> entries);

// ============================================================================
// Galois operations
// ============================================================================

// Minimal abstraction of a single concrete value.
AbstractValue alpha(const Value& v);

// Decides v in gamma(a). List membership runs a subsequence DP over an
// order-preserving injection of list positions into abstract entries.
bool gamma_contains(const AbstractValue& a, const Value& v);

// Enumerates gamma(a) exactly (deduplicated); errors if the cardinality
// exceeds cap. Oracle support for the property suites.
std::vector<Value> gamma_enumerate(const AbstractValue& a, size_t cap);

// Number of concrete values represented, for prediction-set size metrics.
// Errors on kinds without a finite count (lists).
double gamma_size(const AbstractValue& a, int n_cats);

// Lattice operations. join requires compatible kinds (or Bottom, which is the
// identity). meet returns nullopt when the intersection is empty; that is a
// legal outcome the caller must handle, not an error.
AbstractValue join(const AbstractValue& a, const AbstractValue& b);
std::optional<AbstractValue> meet(const AbstractValue& a, const AbstractValue& b);
bool leq(const AbstractValue& a, const AbstractValue& b);

Kleene kleene_join(Kleene a, Kleene b);

} // namespace csem
