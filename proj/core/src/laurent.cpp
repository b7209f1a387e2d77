#include "ltpg/laurent.hpp"

#include <algorithm>
#include <sstream>

namespace ltpg {

namespace {

int add_clamped(int a, int b) {
    long long s = static_cast<long long>(a) + b;
    if (s >= LaurentWindow::kInf) return LaurentWindow::kInf;
    if (s <= -LaurentWindow::kInf) return -LaurentWindow::kInf;
    return static_cast<int>(s);
}

CoeffFloor scalar_floor(const PadicScalar& s) {
    return CoeffFloor::finite(QQ(s.valuation().v));
}

// placeholder bound reported when nothing at all is certified about the tail
const QQ kNoCertificate = QQ(-(1 << 20));

} // namespace

void LaurentWindow::check_compatible(const LaurentWindow& a, const LaurentWindow& b) {
    if (a.p_ != b.p_ || a.deg_ != b.deg_)
        fail("parameter-mismatch", "series live over different coefficient fields");
}

LaurentWindow LaurentWindow::zero(std::int64_t p, int deg, int prec) {
    LaurentWindow f;
    f.p_ = p;
    f.deg_ = deg;
    f.prec_ = prec;
    f.nmin_ = 0;
    f.nmax_ = kInf;
    f.floor_ = CoeffFloor::pos_inf();
    return f;
}

void LaurentWindow::insert_capped(int n, const PadicScalar& v) {
    c_.insert_or_assign(n, v.reduced_to(prec_));
}

LaurentWindow LaurentWindow::constant(const PadicScalar& c) {
    LaurentWindow f = zero(c.p(), c.deg(), c.prec());
    f.insert_capped(0, c);
    f.floor_ = scalar_floor(c);
    return f;
}

LaurentWindow LaurentWindow::monomial(const PadicScalar& c, int n) { return constant(c).shifted(n); }

LaurentWindow LaurentWindow::var(std::int64_t p, int deg, int prec) {
    return monomial(PadicScalar::one(p, deg, prec), 1);
}

LaurentWindow LaurentWindow::from_integers(const std::vector<BigInt>& coeffs, int n_min, std::int64_t p,
                                           int deg, int prec) {
    LaurentWindow f = zero(p, deg, prec);
    f.nmin_ = n_min;
    f.nmax_ = kInf;
    CoeffFloor fl = CoeffFloor::pos_inf();
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (coeffs[i] == 0) continue;
        PadicScalar s = PadicScalar::from_integer(coeffs[i], p, deg, prec);
        f.insert_capped(n_min + static_cast<int>(i), s);
        fl = floor_min(fl, scalar_floor(s));
    }
    f.floor_ = fl;
    if (f.c_.empty()) f.nmin_ = 0;
    return f;
}

LaurentWindow LaurentWindow::from_coeffs(std::map<int, PadicScalar> coeffs, int n_min, int n_max,
                                         std::int64_t p, int deg, int prec, CoeffFloor floor) {
    if (n_max < n_min) fail("window-collapse", "empty coefficient window");
    LaurentWindow f = zero(p, deg, prec);
    f.nmin_ = n_min;
    f.nmax_ = n_max;
    f.floor_ = floor;
    for (const auto& [n, v] : coeffs) {
        if (n < n_min || n > n_max) fail("window-collapse", "coefficient outside declared window");
        if (v.p() != p || v.deg() != deg) fail("parameter-mismatch", "coefficient field mismatch");
        f.insert_capped(n, v);
        f.floor_ = floor_min(f.floor_, scalar_floor(v));
    }
    return f;
}

PadicScalar LaurentWindow::coeff(int n) const {
    auto it = c_.find(n);
    if (it != c_.end()) return it->second;
    return PadicScalar::zero(p_, deg_, prec_);
}

bool LaurentWindow::is_zero_at_prec() const {
    for (const auto& [n, v] : c_) {
        (void)n;
        if (!v.is_zero_at_prec()) return false;
    }
    return true;
}

int LaurentWindow::min_coeff_prec() const {
    int m = prec_;
    for (const auto& [n, v] : c_) {
        (void)n;
        m = std::min(m, v.prec());
    }
    return m;
}

LaurentWindow LaurentWindow::operator-() const {
    LaurentWindow f = *this;
    for (auto& [n, v] : f.c_) {
        (void)n;
        v = -v;
    }
    return f;
}

LaurentWindow LaurentWindow::operator+(const LaurentWindow& g) const {
    check_compatible(*this, g);
    LaurentWindow r = zero(p_, deg_, std::min(prec_, g.prec_));
    r.nmin_ = std::min(nmin_, g.nmin_);
    r.nmax_ = std::min(nmax_, g.nmax_);
    if (r.nmax_ < r.nmin_) fail("window-collapse", "sum has empty window");
    r.floor_ = floor_min(floor_, g.floor_);
    for (const auto& [n, v] : c_) {
        if (n > r.nmax_) continue;
        r.insert_capped(n, v);
    }
    for (const auto& [n, v] : g.c_) {
        if (n > r.nmax_) continue;
        auto it = r.c_.find(n);
        if (it == r.c_.end())
            r.insert_capped(n, v);
        else
            r.c_.insert_or_assign(n, it->second + v.reduced_to(r.prec_));
    }
    return r;
}

LaurentWindow LaurentWindow::operator-(const LaurentWindow& g) const { return *this + (-g); }

LaurentWindow LaurentWindow::operator*(const LaurentWindow& g) const {
    check_compatible(*this, g);
    if (c_.empty() && exact_tail()) return zero(p_, deg_, std::min(prec_, g.prec_));
    if (g.c_.empty() && g.exact_tail()) return zero(p_, deg_, std::min(prec_, g.prec_));
    LaurentWindow r = zero(p_, deg_, std::min(prec_, g.prec_));
    r.nmin_ = add_clamped(nmin_, g.nmin_);
    r.nmax_ = std::min(add_clamped(nmax_, g.nmin_), add_clamped(g.nmax_, nmin_));
    if (r.nmax_ < r.nmin_) fail("window-collapse", "product has empty window");
    r.floor_ = floor_add(floor_, g.floor_);
    for (const auto& [i, a] : c_) {
        for (const auto& [j, b] : g.c_) {
            int n = i + j;
            if (n > r.nmax_) continue;
            PadicScalar t = a * b;
            auto it = r.c_.find(n);
            if (it == r.c_.end())
                r.insert_capped(n, t);
            else
                r.c_.insert_or_assign(n, it->second + t.reduced_to(r.prec_));
        }
    }
    return r;
}

LaurentWindow LaurentWindow::scaled(const PadicScalar& s) const {
    if (s.p() != p_ || s.deg() != deg_) fail("parameter-mismatch", "scalar field mismatch");
    LaurentWindow r = *this;
    for (auto& [n, v] : r.c_) {
        (void)n;
        v = (v * s).reduced_to(prec_);
    }
    r.floor_ = floor_add(floor_, scalar_floor(s));
    return r;
}

LaurentWindow LaurentWindow::scaled_p_pow(int k) const {
    LaurentWindow r = *this;
    r.prec_ += k;
    for (auto& [n, v] : r.c_) {
        (void)n;
        v = v.times_p_pow(k);
    }
    r.floor_ = floor_add(floor_, CoeffFloor::finite(QQ(k)));
    return r;
}

LaurentWindow LaurentWindow::shifted(int k) const {
    LaurentWindow r = zero(p_, deg_, prec_);
    r.nmin_ = add_clamped(nmin_, k);
    r.nmax_ = add_clamped(nmax_, k);
    r.floor_ = floor_;
    for (const auto& [n, v] : c_) r.c_.emplace(n + k, v);
    return r;
}

LaurentWindow LaurentWindow::truncated(int new_n_max) const {
    if (new_n_max >= nmax_) return *this;
    LaurentWindow r = *this;
    r.nmax_ = new_n_max;
    if (r.nmax_ < r.nmin_) fail("window-collapse", "truncation below support bound");
    r.c_.erase(r.c_.upper_bound(new_n_max), r.c_.end());
    return r;
}

LaurentWindow LaurentWindow::reduced_to(int prec) const {
    if (prec >= prec_) return *this;
    LaurentWindow r = *this;
    r.prec_ = prec;
    for (auto& [n, v] : r.c_) {
        (void)n;
        v = v.reduced_to(prec);
    }
    return r;
}

LaurentWindow LaurentWindow::derivative() const {
    LaurentWindow r = zero(p_, deg_, prec_);
    r.nmin_ = add_clamped(nmin_, -1);
    r.nmax_ = exact_tail() ? kInf : nmax_ - 1;
    r.floor_ = floor_;
    for (const auto& [n, v] : c_) {
        if (n == 0) continue;
        PadicScalar nf =
            PadicScalar::from_integer(n, p_, deg_, v.prec() + int_valuation(BigInt(n), p_) + 1);
        r.insert_capped(n - 1, v * nf);
    }
    return r;
}

LaurentWindow LaurentWindow::reciprocal() const {
    const int v = nmin_;
    auto it = c_.find(v);
    if (it == c_.end() || it->second.is_zero_at_prec())
        fail("bad-substitution-target", "reciprocal needs a nonzero leading coefficient");
    const PadicScalar u0 = it->second;
    const PadicScalar u0inv = u0.inv();
    // u = T^{-v} f is a power series with invertible constant term; its
    // inverse is computable exactly as far as u is known.
    int K = exact_tail() ? 2 * (prec_ + 8) : nmax_ - v;
    LaurentWindow r = zero(p_, deg_, prec_);
    r.nmin_ = -v;
    r.nmax_ = exact_tail() ? K - v : nmax_ - 2 * v;
    std::map<int, PadicScalar> b;
    b[0] = u0inv;
    for (int k = 1; k <= K; ++k) {
        PadicScalar acc = PadicScalar::zero(p_, deg_, prec_ + 8);
        bool any = false;
        for (int j = 1; j <= k; ++j) {
            auto uj = c_.find(v + j);
            if (uj == c_.end()) continue;
            auto bk = b.find(k - j);
            if (bk == b.end()) continue;
            acc = acc + uj->second * bk->second;
            any = true;
        }
        if (!any) continue;
        b[k] = -(acc * u0inv);
    }
    for (const auto& [k, val] : b) {
        if (k - v > r.nmax_) break;
        r.insert_capped(k - v, val);
    }
    bool unit_integral =
        (floor_.kind == CoeffFloor::Kind::Finite && floor_.v >= 0 && u0.is_unit()) ||
        (floor_.kind == CoeffFloor::Kind::PosInf && u0.is_unit());
    r.floor_ = unit_integral ? CoeffFloor::finite(QQ(0)) : CoeffFloor::neg_inf();
    return r;
}

LaurentWindow LaurentWindow::substituted_into(const LaurentWindow& f) const {
    check_compatible(*this, f);
    if (f.nmin_ < 1) fail("bad-substitution-target", "substitution target needs positive T-adic valuation");
    const LaurentWindow& g = *this;
    const int prec = std::min(prec_, f.prec_);

    LaurentWindow total = zero(p_, deg_, prec);
    if (g.nmax_ >= 0) {
        int top = g.nmax_;
        if (g.exact_tail()) top = g.c_.empty() ? 0 : std::max(0, g.c_.rbegin()->first);
        LaurentWindow acc = zero(p_, deg_, prec);
        for (int n = top; n >= 0; --n) {
            acc = acc * f;
            auto it = g.c_.find(n);
            if (it != g.c_.end()) acc = acc + constant(it->second);
        }
        total = acc;
    }
    if (g.nmin_ < 0) {
        if (f.nmin_ != 1) fail("bad-substitution-target", "Laurent substitution needs v_T(f) = 1");
        auto lin = f.c_.find(1);
        if (lin == f.c_.end() || !lin->second.is_unit())
            fail("bad-substitution-target", "Laurent substitution needs a unit T-coefficient");
        LaurentWindow finv = f.reciprocal();
        LaurentWindow acc = zero(p_, deg_, prec);
        for (int n = g.nmin_; n <= -1; ++n) {
            auto it = g.c_.find(n);
            if (it != g.c_.end()) acc = acc + constant(it->second);
            acc = acc * finv;
        }
        total = total + acc;
    }
    if (!g.exact_tail()) {
        long long contaminated = static_cast<long long>(g.nmax_) + 1;
        contaminated *= f.nmin_;
        int capn = contaminated - 1 >= kInf ? kInf : static_cast<int>(contaminated - 1);
        if (capn < total.nmin_) fail("window-collapse", "substitution result entirely contaminated");
        if (capn < total.nmax_) total = total.truncated(capn);
    }
    return total;
}

LaurentWindow substitute(const LaurentWindow& g, const LaurentWindow& f) {
    return g.substituted_into(f);
}

Val LaurentWindow::v_annulus(const QQ& r) const {
    if (r < 0) fail("parameter-mismatch", "annulus radius must be >= 0");
    Val best = Val::infinity();
    for (const auto& [n, v] : c_) {
        auto sval = v.valuation();
        QQ contrib = QQ(sval.v) + QQ(n) * r;
        best = val_min(best, sval.bounded_below_only ? Val::at_least(contrib) : Val::exactly(contrib));
    }
    if (!exact_tail()) {
        switch (floor_.kind) {
            case CoeffFloor::Kind::PosInf:
                break; // tail certified zero
            case CoeffFloor::Kind::Finite: {
                QQ tail = floor_.v + QQ(nmax_ + 1) * r;
                best = val_min(best, Val::at_least(tail));
                break;
            }
            case CoeffFloor::Kind::NegInf:
                if (best.infinite) return Val::at_least(kNoCertificate);
                return Val::at_least(best.v);
        }
    }
    return best;
}

Val LaurentWindow::v_box(const QQ& s, const QQ& r) const {
    if (s <= 0 || s > r) fail("parameter-mismatch", "v_box needs 0 < s <= r");
    return val_min(v_annulus(s), v_annulus(r));
}

bool LaurentWindow::agrees_with(const LaurentWindow& g) const { return (*this - g).is_zero_at_prec(); }

std::string LaurentWindow::str() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [n, v] : c_) {
        if (v.is_zero_at_prec()) continue;
        if (!first) os << " + ";
        os << "[" << v.str() << "]";
        if (n == 1) os << "*T";
        if (n != 0 && n != 1) os << "*T^" << n;
        first = false;
    }
    if (first) os << "0";
    os << "  (window [" << nmin_ << ", ";
    if (exact_tail())
        os << "inf";
    else
        os << nmax_;
    os << "], prec " << prec_ << ")";
    return os.str();
}

std::string LaurentWindow::key() const {
    std::ostringstream os;
    os << p_ << "|" << deg_ << "|" << prec_ << "|" << nmin_ << "|" << nmax_;
    for (const auto& [n, v] : c_) os << "|" << n << ":" << v.key();
    return os.str();
}

} // namespace ltpg
