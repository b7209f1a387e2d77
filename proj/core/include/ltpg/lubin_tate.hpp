#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ltpg/laurent.hpp"
#include "ltpg/multiseries.hpp"

namespace ltpg {

// The Lubin-Tate package for (F, pi = p) with F unramified of degree d over
// Q_p, q = p^d: the chosen series f_pi, the endomorphisms [a](T), the formal
// log/exp, the group law, and the induced (phi_q, Gamma)-action on series.
//
// Coefficients of everything live in L = F (same degree); user-facing
// precision is `prec`, while internal series are built at an elevated
// `work_prec` so that the tracked losses of the coefficient recursions never
// eat into the certified digits.
class LubinTateData {
public:
    static std::shared_ptr<const LubinTateData> standard(std::int64_t p, int d, int window, int prec);
    static std::shared_ptr<const LubinTateData> cyclotomic(std::int64_t p, int window, int prec);
    static std::shared_ptr<const LubinTateData> custom(const LaurentWindow& f_pi, int window, int prec);
    // kind: "standard" | "cyclotomic" | "coeffs:c1,c2,..." (c_i = coefficient of T^i)
    static std::shared_ptr<const LubinTateData> make(const std::string& kind, std::int64_t p, int d,
                                                     int window, int prec);

    std::int64_t p() const { return p_; }
    int d() const { return d_; }
    std::int64_t q() const { return q_; }
    int window() const { return window_; }
    int prec() const { return prec_; }
    int work_prec() const { return work_prec_; }
    const std::string& kind() const { return kind_; }
    const LaurentWindow& f_pi() const { return f_pi_; }

    // Exactly known scalars materialized at working precision.
    PadicScalar scalar(const BigInt& n) const;
    PadicScalar omega() const;                 // Teichmuller generator of O_F
    PadicScalar lie_basis(int i) const;        // beta_{i+1} = omega^i, 0 <= i < d
    PadicScalar zeta() const;                  // torsion generator of O_F^x: omega itself
    PadicScalar pro_p_generator(int i) const;  // u_{i+1} = exp(p * beta_{i+1})

    // [a](T): the unique endomorphism with linear coefficient a, by the
    // degree-by-degree commutation recursion with f_pi. Cached.
    LaurentWindow mult_by(const PadicScalar& a) const;
    LaurentWindow mult_by(const PadicScalar& a, int window) const;

    LaurentWindow formal_log() const;  // lim p^{-n} f_pi^{on}, normalized T + ...
    LaurentWindow formal_exp() const;  // compositional inverse of formal_log
    MultiSeries group_law(int degcap) const; // G(X,Y) = exp(log X + log Y)

    LaurentWindow gamma_act(const PadicScalar& u, const LaurentWindow& f) const; // f([u](T))
    LaurentWindow phi_act(const LaurentWindow& f) const;                         // f(f_pi(T))

    // u = zeta^k * prod u_i^{a_i} on the generators above.
    struct UnitDecomposition {
        std::int64_t torsion_exp = 0;
        std::vector<PadicScalar> pro_p_exps; // a_i in Z_p
    };
    UnitDecomposition decompose_unit(const PadicScalar& u) const;

    bool in_gamma_n(const PadicScalar& u, int n) const; // u == 1 mod p^n

private:
    LubinTateData(std::string kind, std::int64_t p, int d, LaurentWindow f, int window, int prec,
                  int work_prec);
    void validate_f() const;
    const std::vector<LaurentWindow>& f_powers() const; // f_pi^j truncated to window, j = 0..window

    std::string kind_;
    std::int64_t p_;
    int d_;
    std::int64_t q_;
    int window_;
    int prec_;
    int work_prec_;
    LaurentWindow f_pi_;

    mutable std::mutex mu_;
    mutable std::map<std::string, LaurentWindow> mult_cache_;
    mutable std::optional<LaurentWindow> log_;
    mutable std::optional<LaurentWindow> exp_;
    mutable std::optional<std::vector<LaurentWindow>> fpow_;
};

using LubinTatePtr = std::shared_ptr<const LubinTateData>;

} // namespace ltpg
