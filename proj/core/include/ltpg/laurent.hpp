#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ltpg/padic.hpp"
#include "ltpg/rational.hpp"

namespace ltpg {

// Certified lower bound on the p-adic valuation of a family of coefficients.
// Needed to decide whether coefficients beyond the stored window could beat
// the infimum seen inside it.
struct CoeffFloor {
    enum class Kind { NegInf, Finite, PosInf };
    Kind kind = Kind::PosInf;
    QQ v{0};

    static CoeffFloor neg_inf() { return {Kind::NegInf, QQ{0}}; }
    static CoeffFloor finite(QQ q) { return {Kind::Finite, q}; }
    static CoeffFloor pos_inf() { return {Kind::PosInf, QQ{0}}; }

    bool operator==(const CoeffFloor&) const = default;

    friend CoeffFloor floor_min(const CoeffFloor& a, const CoeffFloor& b) {
        if (a.kind == Kind::NegInf || b.kind == Kind::NegInf) return neg_inf();
        if (a.kind == Kind::PosInf) return b;
        if (b.kind == Kind::PosInf) return a;
        return finite(std::min(a.v, b.v));
    }
    friend CoeffFloor floor_add(const CoeffFloor& a, const CoeffFloor& b) {
        if (a.kind == Kind::PosInf || b.kind == Kind::PosInf) return pos_inf();
        if (a.kind == Kind::NegInf || b.kind == Kind::NegInf) return neg_inf();
        return finite(a.v + b.v);
    }
};

// Truncated Laurent series over PadicScalar: the computational model of the
// annulus rings E^{[s,r]} and of R at finite precision.
//
// Window semantics: coefficients below n_min are exactly zero (n_min is a
// certified T-adic support bound), coefficients above n_max are unknown,
// and inside [n_min, n_max] an absent map entry means exact zero. n_max may
// be infinite (sentinel), meaning the series is exactly the stored
// polynomial. Every operation computes the largest provably-correct output
// window. Immutable; operations are pure.
class LaurentWindow {
public:
    static constexpr int kInf = 1 << 28;

    LaurentWindow() = default;

    static LaurentWindow zero(std::int64_t p, int deg, int prec);
    static LaurentWindow constant(const PadicScalar& c);
    static LaurentWindow monomial(const PadicScalar& c, int n);
    // T as an exact polynomial.
    static LaurentWindow var(std::int64_t p, int deg, int prec);
    // Integer coefficient list c[i] -> c[i] T^{n_min + i}, exact (n_max = inf).
    static LaurentWindow from_integers(const std::vector<BigInt>& coeffs, int n_min, std::int64_t p,
                                       int deg, int prec);
    // Explicit window [n_min, n_max]; absent entries are exact zeros.
    static LaurentWindow from_coeffs(std::map<int, PadicScalar> coeffs, int n_min, int n_max,
                                     std::int64_t p, int deg, int prec, CoeffFloor floor);

    std::int64_t p() const { return p_; }
    int deg() const { return deg_; }
    int prec() const { return prec_; }
    int n_min() const { return nmin_; }
    int n_max() const { return nmax_; }
    bool exact_tail() const { return nmax_ >= kInf; }
    const std::map<int, PadicScalar>& coeffs() const { return c_; }
    const CoeffFloor& coeff_floor() const { return floor_; }

    PadicScalar coeff(int n) const; // exact zero reported as zero at nominal precision
    bool is_zero_at_prec() const;   // every stored coefficient indistinguishable from zero
    int min_coeff_prec() const;     // min tracked precision over stored entries (prec() if none)
    int precision_slack() const { return prec_ - min_coeff_prec(); }

    LaurentWindow operator-() const;
    LaurentWindow operator+(const LaurentWindow& g) const;
    LaurentWindow operator-(const LaurentWindow& g) const;
    LaurentWindow operator*(const LaurentWindow& g) const;
    LaurentWindow scaled(const PadicScalar& s) const;
    LaurentWindow scaled_p_pow(int k) const;       // exact scale by p^k
    LaurentWindow shifted(int k) const;            // multiply by T^k
    LaurentWindow truncated(int new_n_max) const;  // forget coefficients above new_n_max
    LaurentWindow reduced_to(int prec) const;      // cap every coefficient's p-adic precision
    LaurentWindow derivative() const;              // d/dT

    // Multiplicative inverse. Requires the lowest stored coefficient (at
    // n_min) to be nonzero at working precision.
    LaurentWindow reciprocal() const;

    // g(f): compose this = g with f. Requires f.n_min() >= 1; Laurent g
    // additionally requires the T-coefficient of f to be a p-adic unit.
    LaurentWindow substituted_into(const LaurentWindow& f) const;

    // v^{{r}}(f) = inf_n v_p(a_n) + n r over the certified data.
    Val v_annulus(const QQ& r) const;
    // v^{[s,r]} by the endpoint rule (concavity of r' -> v^{{r'}}).
    Val v_box(const QQ& s, const QQ& r) const;

    bool agrees_with(const LaurentWindow& g) const; // difference zero at tracked precision

    std::string str() const;
    std::string key() const;

private:
    void insert_capped(int n, const PadicScalar& v);
    static void check_compatible(const LaurentWindow& a, const LaurentWindow& b);

    std::int64_t p_ = 0;
    int deg_ = 1;
    int prec_ = 0;
    int nmin_ = 0;
    int nmax_ = kInf;
    std::map<int, PadicScalar> c_;
    CoeffFloor floor_ = CoeffFloor::pos_inf();
};

LaurentWindow substitute(const LaurentWindow& g, const LaurentWindow& f); // spec-facing alias

} // namespace ltpg
