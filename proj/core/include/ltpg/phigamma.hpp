#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ltpg/lubin_tate.hpp"

namespace ltpg {

// Small dense matrix over LaurentWindow, row-major.
class SeriesMatrix {
public:
    SeriesMatrix() = default;
    SeriesMatrix(int rows, int cols, const LaurentWindow& fill);
    static SeriesMatrix identity(int n, std::int64_t p, int deg, int prec);
    static SeriesMatrix scalar_matrix(int n, const PadicScalar& c);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    LaurentWindow& at(int i, int j) { return e_[static_cast<std::size_t>(i * cols_ + j)]; }
    const LaurentWindow& at(int i, int j) const { return e_[static_cast<std::size_t>(i * cols_ + j)]; }

    SeriesMatrix operator+(const SeriesMatrix& b) const;
    SeriesMatrix operator-(const SeriesMatrix& b) const;
    SeriesMatrix operator*(const SeriesMatrix& b) const;
    SeriesMatrix scaled(const PadicScalar& s) const;
    SeriesMatrix substituted_into(const LaurentWindow& target) const; // entrywise composition
    SeriesMatrix transposed() const;
    SeriesMatrix inverse() const; // Gauss-Jordan; pivots need invertible leading coefficients
    static SeriesMatrix kronecker(const SeriesMatrix& a, const SeriesMatrix& b);

    bool is_zero_at_prec() const;
    bool agrees_with(const SeriesMatrix& b) const;
    int min_coeff_prec() const;
    std::string str() const;

private:
    int rows_ = 0, cols_ = 0;
    std::vector<LaurentWindow> e_;
};

// Element of a free module over the windowed Robba model, coordinates in the
// fixed basis e_1..e_r.
struct ModuleVector {
    std::vector<LaurentWindow> coords;

    int rank() const { return static_cast<int>(coords.size()); }
    bool is_zero_at_prec() const;
    ModuleVector operator+(const ModuleVector& b) const;
    ModuleVector operator-(const ModuleVector& b) const;
    ModuleVector scaled(const PadicScalar& s) const;
    ModuleVector scaled_series(const LaurentWindow& f) const;
    ModuleVector scaled_p_pow(int k) const;
    ModuleVector reduced_to(int prec) const;
    Val v_box(const QQ& s, const QQ& r) const; // inf over coordinates
    int min_coeff_prec() const;
    std::string str() const;
};

// Character of F^x recorded by its values on pi = p, on the torsion generator
// zeta, and on the pro-p generators u_i = exp(p beta_i). An entry with e > 1
// is deferred: only delta(u_i^e) is defined over L and the e-th root is a
// recorded obligation, not a constructed value.
struct TwistCharacter {
    PadicScalar at_pi;
    PadicScalar at_zeta;
    struct UnitValue {
        int e = 1;          // power of p
        PadicScalar value;  // delta(u_i^e)
    };
    std::vector<UnitValue> at_units;

    static TwistCharacter trivial(const LubinTatePtr& lt);
    static TwistCharacter identity_char(const LubinTatePtr& lt);  // delta(u) = u, delta(pi) = p
    static TwistCharacter frobenius_char(const LubinTatePtr& lt); // delta(u) = sigma(u), delta(pi) = 1

    bool fully_defined() const;
    int root_obligation(int i) const { return at_units[static_cast<std::size_t>(i)].e; }
    TwistCharacter multiplied(const TwistCharacter& o) const;
    TwistCharacter inverted() const;
    // delta(u) for a decomposable unit; requires fully defined values (or u
    // inside the open subgroup generated by the stored powers).
    PadicScalar value_on_unit(const LubinTatePtr& lt, const PadicScalar& u) const;
};

// One stored Gamma-generator of a module: the unit, its matrix, and the power
// e of the canonical generator it represents (e > 1 in open-subgroup mode).
struct GammaGenerator {
    std::string name;
    PadicScalar u;
    int exponent = 1;
    SeriesMatrix mat;
};

struct AnalyticityReport {
    bool analytic = false;
    bool scalar_defects = true;
    std::vector<PadicScalar> constants;   // c_1 = 0, c_2, ..., c_d (empty if non-scalar)
    std::vector<SeriesMatrix> defects;    // defect matrix per basis element beyond the first
    std::vector<int> defect_min_valuations; // min coefficient valuation per defect entry set
};

// Finite free module over the windowed Robba model with commuting semilinear
// phi_q and Gamma actions, Gamma stored on generators only.
class PhiGammaModule {
public:
    static PhiGammaModule trivial(LubinTatePtr lt);
    static PhiGammaModule from_character(LubinTatePtr lt, const TwistCharacter& delta,
                                         const std::string& label = "R(delta)");
    static PhiGammaModule assemble(LubinTatePtr lt, SeriesMatrix phi,
                                   std::vector<GammaGenerator> gens, std::string label,
                                   bool validate = true);

    const LubinTatePtr& lt() const { return lt_; }
    int rank() const { return phi_.rows(); }
    const std::string& label() const { return label_; }
    const SeriesMatrix& phi_matrix() const { return phi_; }
    const std::vector<GammaGenerator>& generators() const { return gens_; }
    const GammaGenerator& torsion_generator() const { return gens_.front(); }
    int pro_p_count() const { return static_cast<int>(gens_.size()) - 1; }

    // Character data of a rank-1 module with constant matrices.
    std::optional<TwistCharacter> character() const;

    void validate() const; // commutation and invertibility checks; throws on failure

    ModuleVector basis_vector(int j) const;
    ModuleVector zero_vector() const;

    ModuleVector apply_phi(const ModuleVector& x) const;
    ModuleVector apply_gamma_gen(int gi, const ModuleVector& x) const;
    // gamma_{u^k} for the unit of generator gi (k >= 0, via semilinear squaring)
    ModuleVector apply_gamma_gen_pow(int gi, const BigInt& k, const ModuleVector& x) const;
    // general decomposable u = zeta^k prod u_i^{a_i}
    ModuleVector apply_gamma(const PadicScalar& u, const ModuleVector& x) const;

    // (log gamma_u) x by the paper's series, with the adaptive p^m step.
    // u must be in the pro-p part. Cross-checked against the limit formula
    // when crosscheck is set (the default for rank <= 1).
    ModuleVector log_gamma(const PadicScalar& u, const ModuleVector& x) const;
    ModuleVector log_gamma_series(const PadicScalar& u, const ModuleVector& x,
                                  int* m_used = nullptr) const;
    ModuleVector log_gamma_limit(const PadicScalar& u, const ModuleVector& x, int n = -1) const;

    ModuleVector nabla(const PadicScalar& beta, const ModuleVector& x) const;

    // Matrix of nabla_beta - nabla_beta2 in the fixed basis; base-linearity is
    // verified on T * e_j within tracked precision.
    SeriesMatrix analytic_defect(const PadicScalar& beta, const PadicScalar& beta2) const;
    AnalyticityReport is_F_analytic(const std::vector<PadicScalar>& basis = {}) const;

    PhiGammaModule twisted(const TwistCharacter& delta) const;

    // probe radii for the adaptive valuation-gain search
    void set_probe_radii(QQ s, QQ r) { probe_s_ = s; probe_r_ = r; }
    QQ probe_s() const { return probe_s_; }
    QQ probe_r() const { return probe_r_; }
    void set_crosscheck(bool on) { crosscheck_ = on; }

private:
    PhiGammaModule() = default;
    struct Op { // semilinear operator x -> mat * (x o sub)
        SeriesMatrix mat;
        LaurentWindow sub;
    };
    Op phi_op() const;
    Op gamma_op(int gi) const;
    static Op compose(const Op& outer, const Op& inner);
    ModuleVector apply(const Op& op, const ModuleVector& x) const;
    Op op_pow(const Op& base, BigInt k) const;
    int adaptive_m(int gi, const PadicScalar& u_unit, const ModuleVector& x) const;
    ModuleVector log_gamma_gen_pow(int gi, const PadicScalar& exponent_zp, const ModuleVector& x,
                                   int* m_out = nullptr) const;

    LubinTatePtr lt_;
    SeriesMatrix phi_;
    std::vector<GammaGenerator> gens_;
    std::string label_;
    QQ probe_s_{1, 2};
    QQ probe_r_{1};
    bool crosscheck_ = true;
};

// ---------------------------------------------------------------------------
// Hom modules and explicit Ext constructions
// ---------------------------------------------------------------------------

// Hom_{R-mod}(Delta, D) with its canonical (phi_q, Gamma)-structure; basis
// E_{lk} ordered by t = k * rank(D) + l (h(e_k) = e_l).
PhiGammaModule hom_module(const PhiGammaModule& Delta, const PhiGammaModule& D);

// Extension data: the values (phi-1)h and (gamma_u-1)h of a would-be lift, as
// rank(D) x rank(Delta) matrices over the window.
struct ExtData {
    SeriesMatrix phi_part;
    std::vector<SeriesMatrix> gamma_parts; // one per stored generator
    bool is_zero_at_prec() const;
};

// Block-triangular total module D~ = D (+) Delta with the quoted action.
PhiGammaModule ext_push(const PhiGammaModule& Delta, const PhiGammaModule& D, const ExtData& data,
                        bool validate = true);

// Recover ExtData from a block extension through an R-linear section of the
// quotient map (columns = coordinates of s(e_j); default: canonical section).
ExtData ext_pull(const PhiGammaModule& Dtilde, int sub_rank,
                 const std::optional<SeriesMatrix>& section = std::nullopt);

// Twisted coboundary of h: ((phi_D o h) - (h o phi_Delta), ...) — the data of
// how far the section s + h is from the section s.
ExtData ext_coboundary(const PhiGammaModule& Delta, const PhiGammaModule& D,
                       const LaurentWindow& h);

// Rank-1 split test: decide whether data is the coboundary of some h.
bool ext_is_split(const PhiGammaModule& Delta, const PhiGammaModule& D, const ExtData& data);

} // namespace ltpg
