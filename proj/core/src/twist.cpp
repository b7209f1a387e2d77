#include "ltpg/twist.hpp"

namespace ltpg {

std::vector<PadicScalar> compute_constants(const PhiGammaModule& M,
                                           const std::vector<PadicScalar>& basis_in) {
    const auto lt = M.lt();
    std::vector<PadicScalar> basis = basis_in;
    if (basis.empty())
        for (int i = 0; i < lt->d(); ++i) basis.push_back(lt->lie_basis(i));
    std::vector<PadicScalar> cs;
    cs.push_back(PadicScalar::zero(lt->p(), lt->d(), lt->prec()));
    if (lt->d() == 1) return cs;
    AnalyticityReport rep = M.is_F_analytic(basis);
    if (!rep.scalar_defects)
        fail("End-not-scalar", "a defect operator is not scalar at working precision");
    for (std::size_t i = 1; i < rep.constants.size(); ++i) cs.push_back(rep.constants[i]);
    return cs;
}

TwistCharacter construct_twist_character(const LubinTatePtr& lt,
                                         const std::vector<PadicScalar>& constants) {
    if (static_cast<int>(constants.size()) != lt->d())
        fail("parameter-mismatch", "need one constant per Lie basis element");
    if (!constants.front().is_zero_at_prec())
        fail("parameter-mismatch", "c_1 must vanish");
    TwistCharacter delta;
    PadicScalar one = PadicScalar::one(lt->p(), lt->d(), lt->work_prec());
    delta.at_pi = one;   // the proof constrains delta only on O_F^x
    delta.at_zeta = one; // delta = 1 on the torsion part
    delta.at_units.push_back({1, one}); // delta(u_1) = 1
    for (int i = 1; i < lt->d(); ++i) {
        const PadicScalar& ci = constants[static_cast<std::size_t>(i)];
        if (ci.is_zero_at_prec()) {
            delta.at_units.push_back({1, one});
            continue;
        }
        // log u_i^{e} has valuation 1 + v_p(e); need v_p(c_i) + 1 + v_p(e) >= 1
        int vc = ci.valuation().v;
        int k = std::max(0, -vc);
        int e = 1;
        for (int j = 0; j < k; ++j) e *= static_cast<int>(lt->p());
        // delta(u_i^{e}) = exp(c_i * log(u_i^{e})), the sign fixed so that
        // c_i(R(delta)) = -c_i(M); the vanishing test pins it end to end
        PadicScalar log_ue = lt->lie_basis(i).times_p_pow(1) * lt->scalar(e);
        PadicScalar value = (ci * log_ue).exp();
        delta.at_units.push_back({e, value});
    }
    return delta;
}

TwistReport verify_twist(const PhiGammaModule& M, const TwistCharacter& delta) {
    const auto lt = M.lt();
    TwistReport rep;
    rep.character = delta;
    rep.certified_prec = lt->prec();
    for (std::size_t i = 0; i < delta.at_units.size(); ++i)
        if (delta.at_units[i].e != 1)
            rep.root_obligations.push_back({static_cast<int>(i) + 1, delta.at_units[i].e});
    PhiGammaModule twisted = M.twisted(delta);
    AnalyticityReport an = twisted.is_F_analytic();
    rep.pass = an.analytic;
    rep.defect_valuations = an.defect_min_valuations;
    return rep;
}

TwistReport run_twist_pipeline(const PhiGammaModule& M) {
    std::vector<PadicScalar> cs = compute_constants(M);
    TwistCharacter delta = construct_twist_character(M.lt(), cs);
    TwistReport rep = verify_twist(M, delta);
    rep.constants = cs;
    return rep;
}

} // namespace ltpg
