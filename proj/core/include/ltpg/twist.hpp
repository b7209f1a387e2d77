#pragma once

#include <string>
#include <vector>

#include "ltpg/phigamma.hpp"

namespace ltpg {

// The constructive rank-1 case of the main theorem: read off the scalar
// defect constants of a module with End = L, build the character whose twist
// cancels them, and verify the twist is F-analytic.

struct RootObligation {
    int generator = 0; // 1-based index of the pro-p generator
    int e = 1;         // the recorded e_i (a power of p); field degree needed for the root
};

struct TwistReport {
    std::vector<PadicScalar> constants;       // c_i of the input module
    TwistCharacter character;                 // the constructed twist
    std::vector<int> defect_valuations;       // min coefficient valuation per residual defect
    bool pass = false;
    std::vector<RootObligation> root_obligations;
    int certified_prec = 0;
};

// c_1 = 0 and the scalar of each defect nabla_{beta_1} - nabla_{beta_i}.
// Errors with "End-not-scalar" when a defect is not scalar at precision.
std::vector<PadicScalar> compute_constants(const PhiGammaModule& M,
                                           const std::vector<PadicScalar>& basis = {});

// delta with delta(pi) = delta(zeta) = delta(u_1) = 1 and, for i >= 2,
// delta(u_i^{e_i}) = exp(c_i log(u_i^{e_i})) with e_i minimal so the exp
// converges; e_i > 1 is recorded as a root obligation.
TwistCharacter construct_twist_character(const LubinTatePtr& lt,
                                         const std::vector<PadicScalar>& constants);

// Twist M by delta (open-subgroup mode when obligations exist) and measure
// the residual defects.
TwistReport verify_twist(const PhiGammaModule& M, const TwistCharacter& delta);

// The full pipeline on one module.
TwistReport run_twist_pipeline(const PhiGammaModule& M);

} // namespace ltpg
