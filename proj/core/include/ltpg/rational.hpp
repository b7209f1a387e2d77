#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <ostream>
#include <string>

namespace ltpg {

// Exact rational arithmetic for annulus radii and valuations. Never floats:
// every comparison against a radius has to be exact.
using QQ = boost::rational<std::int64_t>;

inline std::string to_string(const QQ& q) {
    if (q.denominator() == 1) return std::to_string(q.numerator());
    return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

// Valuation result: an exact value, or a certified lower bound ("the element
// is indistinguishable from something of at least this valuation"). The
// infinite case is the empty infimum (exact zero element).
struct Val {
    QQ v{0};
    bool exact = true;      // false: only "value >= v" is certified
    bool infinite = false;  // true: no finite contribution at all

    static Val exactly(QQ q) { return Val{q, true, false}; }
    static Val at_least(QQ q) { return Val{q, false, false}; }
    static Val infinity() { return Val{QQ{0}, true, true}; }

    bool operator==(const Val&) const = default;
};

inline std::string to_string(const Val& val) {
    if (val.infinite) return "inf";
    if (val.exact) return to_string(val.v);
    return ">= " + to_string(val.v);
}

inline std::ostream& operator<<(std::ostream& os, const Val& val) { return os << to_string(val); }

// Minimum of two certified valuations. An exact value at or below a lower
// bound stays exact; otherwise only the bound survives.
inline Val val_min(const Val& a, const Val& b) {
    if (a.infinite) return b;
    if (b.infinite) return a;
    if (a.exact && b.exact) return Val::exactly(std::min(a.v, b.v));
    if (a.exact) return a.v <= b.v ? a : Val::at_least(b.v);
    if (b.exact) return b.v <= a.v ? b : Val::at_least(a.v);
    return Val::at_least(std::min(a.v, b.v));
}

} // namespace ltpg
