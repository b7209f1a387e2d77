#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ltpg/errors.hpp"
#include "ltpg/rational.hpp"

namespace ltpg {

using BigInt = boost::multiprecision::cpp_int;

// Immutable snapshot of the per-(p, deg) field data at one precision cap.
// minpoly is the minimal polynomial of the Teichmuller generator w: monic of
// degree deg, coefficients of x^0..x^{deg-1} stored mod p^cap. frob is the
// matrix of the q-power Frobenius lift (w -> w^p) on the basis 1, w, ...,
// w^{deg-1}, column-major by basis element, entries mod p^cap.
struct FieldData {
    std::int64_t p = 0;
    int deg = 1;
    std::int64_t q = 0; // p^deg
    int cap = 0;
    std::vector<BigInt> ppow;               // p^0 .. p^cap
    std::vector<BigInt> minpoly;            // size deg (monic head implicit)
    std::vector<std::vector<BigInt>> frob;  // deg columns of size deg

    const BigInt& pow_p(int k) const { return ppow.at(static_cast<std::size_t>(k)); }
};

// Session registry for field contexts. The minimal polynomial for a given
// (p, deg) is chosen deterministically once and only ever re-lifted to higher
// caps (the lift is unique, so reductions stay consistent).
class FieldContext {
public:
    static FieldContext& get(std::int64_t p, int deg);

    std::shared_ptr<const FieldData> snapshot(int min_cap) const;

    std::int64_t p() const { return p_; }
    int deg() const { return deg_; }
    std::int64_t q() const { return q_; }

private:
    FieldContext(std::int64_t p, int deg);
    std::int64_t p_;
    int deg_;
    std::int64_t q_;
    mutable std::shared_ptr<const FieldData> data_;
};

// Scalar valuation: exact integer v_p, or the "zero at working precision"
// marker (valuation >= prec, indistinguishable from zero).
struct ScalarVal {
    int v = 0;
    bool bounded_below_only = false; // true: only ">= v" known

    Val as_val() const { return bounded_below_only ? Val::at_least(QQ(v)) : Val::exactly(QQ(v)); }
};

// An element of the unramified extension L = Q_{p^deg} known modulo p^prec.
// Internal form: value = p^shift * sum_j c_j w^j with w the fixed Teichmuller
// generator, c_j in [0, p^{prec-shift}), and (unless the value is zero at
// this precision) some c_j a p-unit, so shift is the exact valuation.
// Immutable; all operations are pure.
class PadicScalar {
public:
    PadicScalar() = default;

    static PadicScalar zero(std::int64_t p, int deg, int prec);
    static PadicScalar one(std::int64_t p, int deg, int prec);
    static PadicScalar omega(std::int64_t p, int deg, int prec); // Teichmuller generator
    static PadicScalar from_integer(const BigInt& n, std::int64_t p, int deg, int prec);
    static PadicScalar from_coords(std::vector<BigInt> coords, std::int64_t p, int deg, int prec);
    // num/den with den a nonzero integer; exact rational reduced into L.
    static PadicScalar from_rational(const BigInt& num, const BigInt& den, std::int64_t p, int deg,
                                     int prec);

    std::int64_t p() const { return p_; }
    int deg() const { return deg_; }
    int prec() const { return prec_; }
    int shift() const { return shift_; }
    std::int64_t q() const;
    const std::vector<BigInt>& coords() const { return c_; }

    bool is_zero_at_prec() const { return zero_; }
    bool is_unit() const { return !zero_ && shift_ == 0; }
    bool is_integral() const { return zero_ ? prec_ >= 0 : shift_ >= 0; }
    ScalarVal valuation() const;

    PadicScalar operator-() const;
    PadicScalar operator+(const PadicScalar& b) const;
    PadicScalar operator-(const PadicScalar& b) const;
    PadicScalar operator*(const PadicScalar& b) const;
    PadicScalar operator/(const PadicScalar& b) const;
    PadicScalar inv() const;

    PadicScalar pow(BigInt k) const;                  // k >= 0
    PadicScalar pow_zp(const PadicScalar& a) const;   // this == 1 mod p; a in Z_p of the same field
    PadicScalar times_p_pow(int k) const;             // exact scale by p^k (precision shifts with it)

    PadicScalar frobenius() const;
    PadicScalar teichmuller_lift() const;             // unique (q-1)-th root of unity with same residue
    PadicScalar exp() const;                          // requires v_p > 1/(p-1)
    PadicScalar log() const;                          // requires v_p(x - 1) >= 1

    // Residue mod p of each coordinate (integral elements only).
    std::vector<std::int64_t> residue() const;

    PadicScalar reduced_to(int prec) const;           // never raises precision
    bool agrees_with(const PadicScalar& b) const;     // difference zero at its tracked precision

    // Exact representation equality (same precision, shift and residues).
    bool operator==(const PadicScalar& b) const;
    bool operator!=(const PadicScalar& b) const { return !(*this == b); }

    std::string str() const;
    std::string key() const;                          // canonical cache key

private:
    PadicScalar(std::int64_t p, int deg, int prec, int shift, std::vector<BigInt> c, bool zero)
        : p_(p), deg_(deg), prec_(prec), shift_(shift), zero_(zero), c_(std::move(c)) {}

    void normalize();
    std::shared_ptr<const FieldData> data(int cap) const;
    static void check_compatible(const PadicScalar& a, const PadicScalar& b);

    std::int64_t p_ = 0;
    int deg_ = 1;
    int prec_ = 0;
    int shift_ = 0;
    bool zero_ = true;
    std::vector<BigInt> c_;
};

// v_p of a nonzero integer.
int int_valuation(BigInt n, std::int64_t p);

// v_p(k!), by Legendre's formula.
int factorial_valuation(std::int64_t k, std::int64_t p);

} // namespace ltpg
