#include "ltpg/lubin_tate.hpp"

#include <algorithm>
#include <sstream>

namespace ltpg {

namespace {

LaurentWindow standard_series(std::int64_t p, int d, std::int64_t q, int prec) {
    // p T + T^q
    std::map<int, PadicScalar> c;
    c.emplace(1, PadicScalar::from_integer(p, p, d, prec + 1));
    c.emplace(static_cast<int>(q), PadicScalar::one(p, d, prec));
    return LaurentWindow::from_coeffs(std::move(c), 1, LaurentWindow::kInf, p, d, prec,
                                      CoeffFloor::finite(QQ(0)));
}

LaurentWindow cyclotomic_series(std::int64_t p, int prec) {
    // (1+T)^p - 1
    std::vector<BigInt> binom(static_cast<std::size_t>(p) + 1);
    BigInt c = 1;
    for (std::int64_t k = 0; k <= p; ++k) {
        binom[static_cast<std::size_t>(k)] = c;
        c = c * (p - k) / (k + 1);
    }
    std::vector<BigInt> coeffs(binom.begin() + 1, binom.end()); // drop the canceled constant term
    return LaurentWindow::from_integers(coeffs, 1, p, 1, prec);
}

} // namespace

LubinTateData::LubinTateData(std::string kind, std::int64_t p, int d, LaurentWindow f, int window,
                             int prec, int work_prec)
    : kind_(std::move(kind)), p_(p), d_(d), window_(window), prec_(prec), work_prec_(work_prec),
      f_pi_(std::move(f)) {
    q_ = 1;
    for (int i = 0; i < d_; ++i) q_ *= p_;
    if (window_ < static_cast<int>(q_)) fail("bad-lubin-tate-series", "window smaller than q");
    validate_f();
}

void LubinTateData::validate_f() const {
    if (f_pi_.n_min() < 1) fail("bad-lubin-tate-series", "f_pi must have zero constant term");
    // f == p T modulo degree 2
    PadicScalar lin = f_pi_.coeff(1);
    if (!lin.agrees_with(PadicScalar::from_integer(p_, p_, d_, lin.prec())))
        fail("bad-lubin-tate-series", "linear coefficient of f_pi must be p");
    // f == T^q modulo p
    for (const auto& [n, v] : f_pi_.coeffs()) {
        if (v.is_zero_at_prec()) continue;
        auto res = v.residue();
        bool zero_mod_p = true;
        for (std::size_t i = 0; i < res.size(); ++i) zero_mod_p = zero_mod_p && res[i] == 0;
        if (n == static_cast<int>(q_)) {
            if (res[0] != 1 || !std::all_of(res.begin() + 1, res.end(), [](auto x) { return x == 0; }))
                fail("bad-lubin-tate-series", "coefficient of T^q must be 1 mod p");
        } else if (!zero_mod_p) {
            fail("bad-lubin-tate-series", "f_pi must reduce to T^q mod p");
        }
    }
    if (f_pi_.coeff(static_cast<int>(q_)).is_zero_at_prec())
        fail("bad-lubin-tate-series", "coefficient of T^q must be 1 mod p");
}

std::shared_ptr<const LubinTateData> LubinTateData::standard(std::int64_t p, int d, int window,
                                                             int prec) {
    int wp = prec + window + 16;
    std::int64_t q = 1;
    for (int i = 0; i < d; ++i) q *= p;
    return std::shared_ptr<const LubinTateData>(
        new LubinTateData("standard", p, d, standard_series(p, d, q, wp), window, prec, wp));
}

std::shared_ptr<const LubinTateData> LubinTateData::cyclotomic(std::int64_t p, int window, int prec) {
    int wp = prec + window + 16;
    return std::shared_ptr<const LubinTateData>(
        new LubinTateData("cyclotomic", p, 1, cyclotomic_series(p, wp), window, prec, wp));
}

std::shared_ptr<const LubinTateData> LubinTateData::custom(const LaurentWindow& f, int window,
                                                           int prec) {
    int wp = prec + window + 16;
    return std::shared_ptr<const LubinTateData>(
        new LubinTateData("custom", f.p(), f.deg(), f, window, prec, wp));
}

std::shared_ptr<const LubinTateData> LubinTateData::make(const std::string& kind, std::int64_t p,
                                                         int d, int window, int prec) {
    if (kind == "standard") return standard(p, d, window, prec);
    if (kind == "cyclotomic") {
        if (d != 1) fail("bad-lubin-tate-series", "cyclotomic f requires d = 1");
        return cyclotomic(p, window, prec);
    }
    if (kind.rfind("coeffs:", 0) == 0) {
        std::vector<BigInt> coeffs;
        std::stringstream ss(kind.substr(7));
        std::string tok;
        while (std::getline(ss, tok, ',')) coeffs.emplace_back(tok);
        int wp = prec + window + 16;
        LaurentWindow f = LaurentWindow::from_integers(coeffs, 1, p, d, wp);
        return custom(f, window, prec);
    }
    fail("bad-lubin-tate-series", "unknown f_pi kind: " + kind);
}

PadicScalar LubinTateData::scalar(const BigInt& n) const {
    return PadicScalar::from_integer(n, p_, d_, work_prec_);
}

PadicScalar LubinTateData::omega() const { return PadicScalar::omega(p_, d_, work_prec_); }

PadicScalar LubinTateData::lie_basis(int i) const {
    if (i < 0 || i >= d_) fail("parameter-mismatch", "Lie basis index out of range");
    return omega().pow(i);
}

PadicScalar LubinTateData::zeta() const { return omega(); }

PadicScalar LubinTateData::pro_p_generator(int i) const {
    return lie_basis(i).times_p_pow(1).exp();
}

const std::vector<LaurentWindow>& LubinTateData::f_powers() const {
    std::lock_guard<std::mutex> lock(mu_);
    if (!fpow_) {
        std::vector<LaurentWindow> fp;
        fp.push_back(LaurentWindow::constant(PadicScalar::one(p_, d_, work_prec_)));
        for (int j = 1; j <= window_; ++j)
            fp.push_back((fp.back() * f_pi_).truncated(window_));
        fpow_ = std::move(fp);
    }
    return *fpow_;
}

LaurentWindow LubinTateData::mult_by(const PadicScalar& a) const { return mult_by(a, window_); }

LaurentWindow LubinTateData::mult_by(const PadicScalar& a, int window) const {
    if (a.p() != p_ || a.deg() != d_) fail("parameter-mismatch", "a must have coordinates in O_F");
    if (!a.is_integral()) fail("parameter-mismatch", "a must lie in O_F (valuation >= 0)");
    std::string cache_key = a.key() + "@" + std::to_string(window);
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = mult_cache_.find(cache_key);
        if (it != mult_cache_.end()) return it->second;
    }

    const auto& fpow = f_powers();
    const int W = std::min(window, window_);
    const int fdeg = f_pi_.coeffs().empty() ? 1 : f_pi_.coeffs().rbegin()->first;
    // exact zeros carry an irrelevantly high precision tag so sums stay honest
    const PadicScalar exact0 = PadicScalar::zero(p_, d_, work_prec_ + 64);
    // b[k] = coefficients of [a](T); spow[i][k] = coefficient of T^k in S^i
    // where S is the partial sum of the b's (stable once written).
    std::vector<PadicScalar> b(static_cast<std::size_t>(W) + 1, exact0);
    std::vector<std::vector<PadicScalar>> spow(
        static_cast<std::size_t>(std::max<std::int64_t>(fdeg, 2)) + 1,
        std::vector<PadicScalar>(static_cast<std::size_t>(W) + 1, exact0));
    b[1] = a;
    spow[1][1] = a;

    for (int k = 2; k <= W; ++k) {
        // (S^i)_k with S of degree <= k-1, by convolution over stable entries
        for (int i = 2; i <= fdeg && i <= k; ++i) {
            PadicScalar acc = exact0;
            for (int j = 1; j <= k - i + 1; ++j)
                acc = acc + b[static_cast<std::size_t>(j)] *
                                spow[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k - j)];
            spow[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = acc;
        }
        // f(S)_k = p*b_k + sum_{i>=2} f_i (S^i)_k; the linear term is moved
        // into the divisor below since S_k = 0 at this point
        PadicScalar fS = exact0;
        for (const auto& [i, fi] : f_pi_.coeffs()) {
            if (i > k) break;
            if (i == 1) continue;
            fS = fS + fi * spow[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        }
        // S(f)_k = sum_{j<k} b_j (f^j)_k
        PadicScalar Sf = exact0;
        for (int j = 1; j < k; ++j) {
            auto it = fpow[static_cast<std::size_t>(j)].coeffs().find(k);
            if (it == fpow[static_cast<std::size_t>(j)].coeffs().end()) continue;
            Sf = Sf + b[static_cast<std::size_t>(j)] * it->second;
        }
        // b_k (p - p^k) = S(f)_k - f(S)_k
        PadicScalar divisor = scalar(p_) - scalar(p_).pow(k);
        PadicScalar bk = (Sf - fS) / divisor;
        if (!bk.is_zero_at_prec() && bk.prec() - bk.shift() < 1)
            fail("precision-exhausted", "mult_by recursion lost all precision at degree " +
                                            std::to_string(k));
        b[static_cast<std::size_t>(k)] = bk;
        spow[1][static_cast<std::size_t>(k)] = bk;
    }

    std::map<int, PadicScalar> coeffs;
    for (int k = 1; k <= W; ++k)
        if (!b[static_cast<std::size_t>(k)].is_zero_at_prec()) coeffs.emplace(k, b[static_cast<std::size_t>(k)]);
    LaurentWindow res = LaurentWindow::from_coeffs(std::move(coeffs), 1, W, p_, d_, work_prec_,
                                                   CoeffFloor::finite(QQ(0)));
    {
        std::lock_guard<std::mutex> lock(mu_);
        mult_cache_.emplace(cache_key, res);
    }
    return res;
}

LaurentWindow LubinTateData::formal_log() const {
    {
        std::lock_guard<std::mutex> lock(mu_);
        if (log_) return *log_;
    }
    LaurentWindow h = LaurentWindow::var(p_, d_, work_prec_).truncated(window_);
    LaurentWindow g_prev = h; // f^{o0}/p^0 = T
    LaurentWindow result = g_prev;
    bool converged = false;
    for (int n = 1; n <= 2 * window_; ++n) {
        h = f_pi_.substituted_into(h).truncated(window_);
        LaurentWindow g = h.scaled_p_pow(-n);
        if (g.agrees_with(g_prev)) {
            result = g;
            converged = true;
            break;
        }
        g_prev = g;
    }
    if (!converged) fail("log-nonstabilized", "formal log iteration did not stabilize within budget");
    {
        std::lock_guard<std::mutex> lock(mu_);
        if (!log_) log_ = result;
        return *log_;
    }
}

LaurentWindow LubinTateData::formal_exp() const {
    {
        std::lock_guard<std::mutex> lock(mu_);
        if (exp_) return *exp_;
    }
    LaurentWindow lg = formal_log();
    const int W = window_;
    if (lg.n_max() < W && !lg.exact_tail())
        fail("window-collapse", "formal log window too small to invert");
    const PadicScalar exact0 = PadicScalar::zero(p_, d_, work_prec_ + 64);
    std::vector<PadicScalar> l(static_cast<std::size_t>(W) + 1, exact0);
    for (const auto& [n, v] : lg.coeffs())
        if (n <= W) l[static_cast<std::size_t>(n)] = v;
    std::vector<PadicScalar> e(static_cast<std::size_t>(W) + 1, exact0);
    std::vector<std::vector<PadicScalar>> epow(
        static_cast<std::size_t>(W) + 1,
        std::vector<PadicScalar>(static_cast<std::size_t>(W) + 1, exact0));
    e[1] = PadicScalar::one(p_, d_, work_prec_);
    epow[1][1] = e[1];
    for (int k = 2; k <= W; ++k) {
        for (int i = 2; i <= k; ++i) {
            PadicScalar acc = exact0;
            for (int j = 1; j <= k - i + 1; ++j)
                acc = acc + e[static_cast<std::size_t>(j)] *
                                epow[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k - j)];
            epow[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = acc;
        }
        PadicScalar rhs = exact0;
        for (int j = 2; j <= k; ++j)
            rhs = rhs + l[static_cast<std::size_t>(j)] * epow[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
        e[static_cast<std::size_t>(k)] = -rhs; // l_1 = 1
        epow[1][static_cast<std::size_t>(k)] = e[static_cast<std::size_t>(k)];
    }
    std::map<int, PadicScalar> coeffs;
    for (int k = 1; k <= W; ++k)
        if (!e[static_cast<std::size_t>(k)].is_zero_at_prec()) coeffs.emplace(k, e[static_cast<std::size_t>(k)]);
    LaurentWindow res = LaurentWindow::from_coeffs(std::move(coeffs), 1, W, p_, d_, work_prec_,
                                                   CoeffFloor::neg_inf());
    // exp o log must give back T
    LaurentWindow roundtrip = res.substituted_into(lg.truncated(W));
    LaurentWindow tvar = LaurentWindow::var(p_, d_, work_prec_).truncated(roundtrip.n_max());
    if (!roundtrip.agrees_with(tvar))
        fail("internal-inconsistency", "formal exp does not invert formal log on the window");
    {
        std::lock_guard<std::mutex> lock(mu_);
        if (!exp_) exp_ = res;
        return *exp_;
    }
}

MultiSeries LubinTateData::group_law(int degcap) const {
    LaurentWindow lg = formal_log();
    LaurentWindow ex = formal_exp();
    MultiSeries X = MultiSeries::variable(p_, d_, work_prec_, 2, 0, degcap);
    MultiSeries Y = MultiSeries::variable(p_, d_, work_prec_, 2, 1, degcap);
    MultiSeries S = MultiSeries::compose_univariate(lg, X) + MultiSeries::compose_univariate(lg, Y);
    return MultiSeries::compose_univariate(ex, S);
}

LaurentWindow LubinTateData::gamma_act(const PadicScalar& u, const LaurentWindow& f) const {
    if (!u.is_unit()) fail("parameter-mismatch", "gamma action needs a unit of O_F");
    return f.substituted_into(mult_by(u));
}

LaurentWindow LubinTateData::phi_act(const LaurentWindow& f) const {
    return f.substituted_into(f_pi_.truncated(window_));
}

LubinTateData::UnitDecomposition LubinTateData::decompose_unit(const PadicScalar& u) const {
    if (!u.is_unit()) fail("decomposition-failure", "not a unit of O_F");
    if (q_ - 1 > (1 << 20)) fail("decomposition-failure", "residue field too large for discrete log");
    // torsion part: discrete log of the residue against zeta's residue
    auto target = u.residue();
    PadicScalar z = zeta().reduced_to(1);
    PadicScalar cur = PadicScalar::one(p_, d_, 1);
    std::int64_t k = -1;
    for (std::int64_t j = 0; j < q_ - 1; ++j) {
        if (cur.residue() == target) {
            k = j;
            break;
        }
        cur = cur * z;
    }
    if (k < 0) fail("decomposition-failure", "residue not in the cyclic group generated by zeta");
    PadicScalar u1 = u / zeta().pow(k);
    PadicScalar lg = u1.log(); // v >= 1
    PadicScalar t = lg.times_p_pow(-1);
    UnitDecomposition dec;
    dec.torsion_exp = k;
    if (t.is_zero_at_prec()) {
        for (int i = 0; i < d_; ++i) dec.pro_p_exps.push_back(PadicScalar::zero(p_, d_, t.prec()));
        return dec;
    }
    if (!t.is_integral()) fail("decomposition-failure", "pro-p part is not integral");
    // t = sum_i a_i omega^i, so the a_i are literally the coordinates
    const auto& coords = t.coords();
    for (int i = 0; i < d_; ++i) {
        PadicScalar ai = PadicScalar::from_integer(coords[static_cast<std::size_t>(i)], p_, d_,
                                                   t.prec() - t.shift());
        dec.pro_p_exps.push_back(ai.times_p_pow(t.shift()));
    }
    return dec;
}

bool LubinTateData::in_gamma_n(const PadicScalar& u, int n) const {
    PadicScalar diff = u - PadicScalar::one(p_, d_, u.prec());
    auto v = diff.valuation();
    return v.v >= n;
}

} // namespace ltpg
