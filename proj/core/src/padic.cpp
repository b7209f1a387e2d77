#include "ltpg/padic.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>

namespace ltpg {

namespace {

// ---------------------------------------------------------------------------
// F_p[x] utilities on int64 coefficients, used only to pick the residue-field
// minimal polynomial deterministically.
// ---------------------------------------------------------------------------

using FpPoly = std::vector<std::int64_t>; // index i = coefficient of x^i

void fp_trim(FpPoly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

FpPoly fp_mulmod(const FpPoly& a, const FpPoly& b, const FpPoly& m, std::int64_t p) {
    if (a.empty() || b.empty()) return {};
    FpPoly c(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            c[i + j] = (c[i + j] + (__int128)a[i] * b[j] % p) % p;
    // m is monic
    const std::size_t d = m.size() - 1;
    for (std::size_t k = c.size(); k-- > d;) {
        std::int64_t top = c[k] % p;
        if (top == 0) continue;
        for (std::size_t j = 0; j < d; ++j)
            c[k - d + j] = ((c[k - d + j] - (__int128)top * m[j]) % p + p) % p;
        c[k] = 0;
    }
    c.resize(d);
    fp_trim(c);
    return c;
}

FpPoly fp_powmod(FpPoly base, BigInt e, const FpPoly& m, std::int64_t p) {
    FpPoly r{1};
    while (e > 0) {
        if ((e & 1) != 0) r = fp_mulmod(r, base, m, p);
        base = fp_mulmod(base, base, m, p);
        e >>= 1;
    }
    return r;
}

FpPoly fp_gcd(FpPoly a, FpPoly b, std::int64_t p) {
    fp_trim(a);
    fp_trim(b);
    while (!b.empty()) {
        // a mod b with b made monic
        std::int64_t lead = b.back();
        std::int64_t inv = 1, e = p - 2, base = lead;
        while (e) { if (e & 1) inv = (__int128)inv * base % p; base = (__int128)base * base % p; e >>= 1; }
        FpPoly bm(b.size());
        for (std::size_t i = 0; i < b.size(); ++i) bm[i] = (__int128)b[i] * inv % p;
        while (a.size() >= bm.size() && !a.empty()) {
            std::int64_t top = a.back();
            std::size_t off = a.size() - bm.size();
            for (std::size_t i = 0; i < bm.size(); ++i)
                a[off + i] = ((a[off + i] - (__int128)top * bm[i]) % p + p) % p;
            fp_trim(a);
        }
        std::swap(a, b);
    }
    return a;
}

std::vector<std::int64_t> prime_factors(std::int64_t n) {
    std::vector<std::int64_t> fs;
    for (std::int64_t d = 2; d * d <= n; ++d) {
        if (n % d == 0) {
            fs.push_back(d);
            while (n % d == 0) n /= d;
        }
    }
    if (n > 1) fs.push_back(n);
    return fs;
}

bool fp_is_irreducible(const FpPoly& m, std::int64_t p) {
    const int d = static_cast<int>(m.size()) - 1;
    FpPoly x{0, 1};
    // x^{p^d} == x mod m
    BigInt pd = 1;
    for (int i = 0; i < d; ++i) pd *= p;
    FpPoly xq = fp_powmod(x, pd, m, p);
    FpPoly diff = xq;
    if (diff.size() < 2) diff.resize(2, 0);
    diff[1] = ((diff[1] - 1) % p + p) % p;
    fp_trim(diff);
    if (!diff.empty()) return false;
    for (std::int64_t ell : prime_factors(d)) {
        BigInt pe = 1;
        for (int i = 0; i < d / ell; ++i) pe *= p;
        FpPoly xe = fp_powmod(x, pe, m, p);
        FpPoly g = xe;
        if (g.size() < 2) g.resize(2, 0);
        g[1] = ((g[1] - 1) % p + p) % p;
        fp_trim(g);
        g = fp_gcd(g, m, p);
        if (g.size() != 1) return false; // nontrivial gcd (or zero)
    }
    return true;
}

bool fp_is_primitive(const FpPoly& m, std::int64_t p, std::int64_t q) {
    FpPoly x{0, 1};
    for (std::int64_t ell : prime_factors(q - 1)) {
        FpPoly r = fp_powmod(x, BigInt((q - 1) / ell), m, p);
        if (r.size() == 1 && r[0] == 1) return false;
    }
    FpPoly full = fp_powmod(x, BigInt(q - 1), m, p);
    return full.size() == 1 && full[0] == 1;
}

// Smallest monic primitive polynomial of degree d over F_p, ordered by the
// base-p code of its low coefficients. Fixed for the session.
FpPoly find_primitive_poly(std::int64_t p, int d, std::int64_t q) {
    std::vector<std::int64_t> a(static_cast<std::size_t>(d), 0);
    while (true) {
        FpPoly m(a.begin(), a.end());
        m.push_back(1);
        if ((d == 1 || fp_is_irreducible(m, p)) && fp_is_primitive(m, p, q)) return m;
        int i = 0;
        for (; i < d; ++i) {
            if (++a[static_cast<std::size_t>(i)] < p) break;
            a[static_cast<std::size_t>(i)] = 0;
        }
        if (i == d) fail("bad-field-params", "no primitive polynomial found");
    }
}

// ---------------------------------------------------------------------------
// (Z/p^K)[x] mod a monic polynomial, BigInt coefficients. Vectors have fixed
// size deg (coefficients of x^0..x^{deg-1}).
// ---------------------------------------------------------------------------

struct ZqRing {
    BigInt mod;                         // p^K
    std::vector<BigInt> minpoly;        // low coefficients of the monic modulus
    int deg;

    std::vector<BigInt> mul(const std::vector<BigInt>& a, const std::vector<BigInt>& b) const {
        const int d = deg;
        std::vector<BigInt> c(static_cast<std::size_t>(2 * d - 1));
        for (int i = 0; i < d; ++i) {
            if (a[static_cast<std::size_t>(i)] == 0) continue;
            for (int j = 0; j < d; ++j) {
                if (b[static_cast<std::size_t>(j)] == 0) continue;
                c[static_cast<std::size_t>(i + j)] += a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(j)];
            }
        }
        for (int k = 2 * d - 2; k >= d; --k) {
            BigInt top = c[static_cast<std::size_t>(k)] % mod;
            c[static_cast<std::size_t>(k)] = 0;
            if (top == 0) continue;
            for (int j = 0; j < d; ++j)
                c[static_cast<std::size_t>(k - d + j)] -= top * minpoly[static_cast<std::size_t>(j)];
        }
        std::vector<BigInt> r(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) {
            BigInt v = c[static_cast<std::size_t>(i)] % mod;
            if (v < 0) v += mod;
            r[static_cast<std::size_t>(i)] = v;
        }
        return r;
    }

    std::vector<BigInt> one() const {
        std::vector<BigInt> r(static_cast<std::size_t>(deg));
        r[0] = 1;
        return r;
    }

    std::vector<BigInt> pow(std::vector<BigInt> base, BigInt e) const {
        std::vector<BigInt> r = one();
        while (e > 0) {
            if ((e & 1) != 0) r = mul(r, base);
            base = mul(base, base);
            e >>= 1;
        }
        return r;
    }
};

std::shared_ptr<const FieldData> build_field_data(std::int64_t p, int deg, std::int64_t q, int cap) {
    auto data = std::make_shared<FieldData>();
    data->p = p;
    data->deg = deg;
    data->q = q;
    data->cap = cap;
    data->ppow.resize(static_cast<std::size_t>(cap) + 1);
    data->ppow[0] = 1;
    for (int i = 1; i <= cap; ++i) data->ppow[static_cast<std::size_t>(i)] = data->ppow[static_cast<std::size_t>(i - 1)] * p;

    const FpPoly mbar = find_primitive_poly(p, deg, q);

    // Step 1: Teichmuller representative of the residue generator inside the
    // ring cut out by an arbitrary monic lift of mbar.
    ZqRing lift_ring{data->ppow[static_cast<std::size_t>(cap)], {}, deg};
    lift_ring.minpoly.resize(static_cast<std::size_t>(deg));
    for (int i = 0; i < deg; ++i) lift_ring.minpoly[static_cast<std::size_t>(i)] = mbar[static_cast<std::size_t>(i)];

    std::vector<BigInt> tau(static_cast<std::size_t>(deg));
    if (deg == 1) {
        BigInt root = lift_ring.mod - lift_ring.minpoly[0]; // x = -m0
        tau[0] = root % lift_ring.mod;
    } else {
        tau[1] = 1; // x
    }
    for (int it = 0; it < cap + 2; ++it) {
        std::vector<BigInt> next = lift_ring.pow(tau, BigInt(q));
        if (next == tau) break;
        tau = std::move(next);
    }

    // Step 2: its exact minimal polynomial from the conjugates tau^{p^j}.
    std::vector<std::vector<BigInt>> roots;
    std::vector<BigInt> conj = tau;
    for (int j = 0; j < deg; ++j) {
        roots.push_back(conj);
        if (j + 1 < deg) conj = lift_ring.pow(conj, BigInt(p));
    }
    // expand prod (X - root)
    std::vector<std::vector<BigInt>> mc(static_cast<std::size_t>(deg) + 1,
                                        std::vector<BigInt>(static_cast<std::size_t>(deg)));
    mc[0] = lift_ring.one();
    std::size_t cur = 0;
    for (const auto& r : roots) {
        ++cur;
        std::vector<std::vector<BigInt>> next(cur + 1, std::vector<BigInt>(static_cast<std::size_t>(deg)));
        for (std::size_t k = 0; k < cur; ++k) {
            // X * mc[k]
            for (int i = 0; i < deg; ++i) next[k + 1][static_cast<std::size_t>(i)] += mc[k][static_cast<std::size_t>(i)];
            // -root * mc[k]
            std::vector<BigInt> t2 = lift_ring.mul(mc[k], r);
            for (int i = 0; i < deg; ++i) next[k][static_cast<std::size_t>(i)] -= t2[static_cast<std::size_t>(i)];
        }
        for (std::size_t k = 0; k <= cur; ++k) {
            for (int i = 0; i < deg; ++i) {
                BigInt v = next[k][static_cast<std::size_t>(i)] % lift_ring.mod;
                if (v < 0) v += lift_ring.mod;
                mc[k][static_cast<std::size_t>(i)] = v;
            }
        }
    }

    data->minpoly.resize(static_cast<std::size_t>(deg));
    for (int k = 0; k < deg; ++k) {
        for (int i = 1; i < deg; ++i)
            if (mc[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] != 0)
                fail("internal-inconsistency", "Teichmuller minimal polynomial has non-rational coefficient");
        data->minpoly[static_cast<std::size_t>(k)] = mc[static_cast<std::size_t>(k)][0];
    }
    for (int i = 0; i < deg; ++i)
        if (mc[static_cast<std::size_t>(deg)][static_cast<std::size_t>(i)] != (i == 0 ? 1 : 0))
            fail("internal-inconsistency", "minimal polynomial not monic after expansion");

    // Step 3: Frobenius matrix in the Teichmuller basis.
    ZqRing ring{lift_ring.mod, data->minpoly, deg};
    std::vector<BigInt> x(static_cast<std::size_t>(deg));
    if (deg == 1) {
        BigInt v = (ring.mod - data->minpoly[0]) % ring.mod;
        x[0] = v;
    } else {
        x[1] = 1;
    }
    // sanity: x really is a (q-1)-th root of unity at this cap
    if (ring.pow(x, BigInt(q - 1)) != ring.one())
        fail("internal-inconsistency", "lifted generator is not a root of unity");

    std::vector<BigInt> xp = ring.pow(x, BigInt(p));
    data->frob.resize(static_cast<std::size_t>(deg));
    std::vector<BigInt> pw = ring.one();
    for (int j = 0; j < deg; ++j) {
        data->frob[static_cast<std::size_t>(j)] = pw;
        if (j + 1 < deg) pw = ring.mul(pw, xp);
    }
    return data;
}

bool is_odd_prime(std::int64_t p) {
    if (p < 3 || p % 2 == 0) return false;
    for (std::int64_t d = 3; d * d <= p; d += 2)
        if (p % d == 0) return false;
    return true;
}

} // namespace

// ---------------------------------------------------------------------------
// FieldContext registry
// ---------------------------------------------------------------------------


namespace {
std::mutex g_registry_mu;
std::map<std::pair<std::int64_t, int>, std::unique_ptr<FieldContext>>& registry() {
    static std::map<std::pair<std::int64_t, int>, std::unique_ptr<FieldContext>> r;
    return r;
}
std::mutex g_snapshot_mu;
} // namespace

FieldContext::FieldContext(std::int64_t p, int deg) : p_(p), deg_(deg) {
    if (!is_odd_prime(p)) fail("bad-field-params", "p must be an odd prime");
    if (deg < 1 || deg > 8) fail("bad-field-params", "field degree out of supported range [1,8]");
    long double qf = 1;
    for (int i = 0; i < deg; ++i) qf *= static_cast<long double>(p);
    if (qf > 1e12L) fail("bad-field-params", "residue field too large");
    std::int64_t q = 1;
    for (int i = 0; i < deg; ++i) q *= p;
    q_ = q;
    data_ = build_field_data(p_, deg_, q_, 96);
}

FieldContext& FieldContext::get(std::int64_t p, int deg) {
    std::lock_guard<std::mutex> lock(g_registry_mu);
    auto& r = registry();
    auto key = std::make_pair(p, deg);
    auto it = r.find(key);
    if (it == r.end()) it = r.emplace(key, std::unique_ptr<FieldContext>(new FieldContext(p, deg))).first;
    return *it->second;
}

std::shared_ptr<const FieldData> FieldContext::snapshot(int min_cap) const {
    std::lock_guard<std::mutex> lock(g_snapshot_mu);
    if (data_->cap < min_cap) {
        int new_cap = std::max({min_cap, data_->cap * 2, 96});
        data_ = build_field_data(p_, deg_, q_, new_cap);
    }
    return data_;
}

// ---------------------------------------------------------------------------
// PadicScalar
// ---------------------------------------------------------------------------

int int_valuation(BigInt n, std::int64_t p) {
    if (n == 0) fail("internal-inconsistency", "valuation of exact zero integer");
    int v = 0;
    while (n % p == 0) {
        n /= p;
        ++v;
    }
    return v;
}

int factorial_valuation(std::int64_t k, std::int64_t p) {
    int v = 0;
    while (k > 0) {
        k /= p;
        v += static_cast<int>(k);
    }
    return v;
}

std::shared_ptr<const FieldData> PadicScalar::data(int cap) const {
    return FieldContext::get(p_, deg_).snapshot(std::max(cap, 1));
}

void PadicScalar::check_compatible(const PadicScalar& a, const PadicScalar& b) {
    if (a.p_ != b.p_ || a.deg_ != b.deg_)
        fail("parameter-mismatch", "scalars live in different coefficient fields");
}

PadicScalar PadicScalar::zero(std::int64_t p, int deg, int prec) {
    FieldContext::get(p, deg); // validate parameters
    return PadicScalar(p, deg, prec, prec, std::vector<BigInt>(static_cast<std::size_t>(deg)), true);
}

PadicScalar PadicScalar::from_coords(std::vector<BigInt> coords, std::int64_t p, int deg, int prec) {
    if (static_cast<int>(coords.size()) != deg) fail("parameter-mismatch", "coordinate count != field degree");
    if (prec < 1) return zero(p, deg, prec);
    auto d = FieldContext::get(p, deg).snapshot(prec);
    const BigInt& mod = d->pow_p(prec);
    for (auto& c : coords) {
        c %= mod;
        if (c < 0) c += mod;
    }
    PadicScalar r(p, deg, prec, 0, std::move(coords), false);
    r.normalize();
    return r;
}

PadicScalar PadicScalar::from_integer(const BigInt& n, std::int64_t p, int deg, int prec) {
    std::vector<BigInt> c(static_cast<std::size_t>(deg));
    c[0] = n;
    return from_coords(std::move(c), p, deg, prec);
}

PadicScalar PadicScalar::one(std::int64_t p, int deg, int prec) { return from_integer(1, p, deg, prec); }

PadicScalar PadicScalar::omega(std::int64_t p, int deg, int prec) {
    if (prec < 1) return zero(p, deg, prec);
    auto d = FieldContext::get(p, deg).snapshot(prec);
    std::vector<BigInt> c(static_cast<std::size_t>(deg));
    if (deg == 1) {
        BigInt v = (d->pow_p(prec) - d->minpoly[0] % d->pow_p(prec)) % d->pow_p(prec);
        if (v < 0) v += d->pow_p(prec);
        c[0] = v;
    } else {
        c[1] = 1;
    }
    return from_coords(std::move(c), p, deg, prec);
}

PadicScalar PadicScalar::from_rational(const BigInt& num, const BigInt& den, std::int64_t p, int deg,
                                       int prec) {
    if (den == 0) fail("inexact-zero divisor", "rational with zero denominator");
    if (num == 0) return zero(p, deg, prec);
    int vd = int_valuation(den, p);
    int work = prec + vd + 1;
    PadicScalar n = from_integer(num, p, deg, work);
    PadicScalar d = from_integer(den, p, deg, work);
    return (n / d).reduced_to(prec);
}

void PadicScalar::normalize() {
    if (zero_) return;
    int m = prec_ - shift_;
    if (m < 1) {
        zero_ = true;
        shift_ = prec_;
        std::fill(c_.begin(), c_.end(), BigInt(0));
        return;
    }
    bool all_zero = true;
    for (const auto& c : c_)
        if (c != 0) { all_zero = false; break; }
    if (all_zero) {
        zero_ = true;
        shift_ = prec_;
        return;
    }
    int k = m; // strip common powers of p
    for (const auto& c : c_) {
        if (c == 0) continue;
        k = std::min(k, int_valuation(c, p_));
        if (k == 0) break;
    }
    if (k > 0) {
        BigInt pk = 1;
        for (int i = 0; i < k; ++i) pk *= p_;
        for (auto& c : c_) c /= pk;
        shift_ += k;
        if (prec_ - shift_ < 1) {
            zero_ = true;
            shift_ = prec_;
            std::fill(c_.begin(), c_.end(), BigInt(0));
        }
    }
}

std::int64_t PadicScalar::q() const { return FieldContext::get(p_, deg_).q(); }

ScalarVal PadicScalar::valuation() const {
    if (zero_) return ScalarVal{prec_, true};
    return ScalarVal{shift_, false};
}

PadicScalar PadicScalar::operator-() const {
    if (zero_) return *this;
    auto d = data(prec_ - shift_);
    const BigInt& mod = d->pow_p(prec_ - shift_);
    std::vector<BigInt> c(c_.size());
    for (std::size_t i = 0; i < c_.size(); ++i) c[i] = c_[i] == 0 ? BigInt(0) : mod - c_[i];
    PadicScalar r(p_, deg_, prec_, shift_, std::move(c), false);
    return r;
}

PadicScalar PadicScalar::operator+(const PadicScalar& b) const {
    check_compatible(*this, b);
    const PadicScalar& a = *this;
    int n = std::min(a.prec_, b.prec_);
    if (a.zero_ && b.zero_) return zero(p_, deg_, n);
    if (a.zero_) return b.reduced_to(n);
    if (b.zero_) return a.reduced_to(n);
    int e = std::min(a.shift_, b.shift_);
    int m = n - e;
    if (m < 1) return zero(p_, deg_, n);
    auto d = data(m + std::max(a.shift_ - e, b.shift_ - e));
    const BigInt& mod = d->pow_p(m);
    const BigInt& sa = d->pow_p(a.shift_ - e);
    const BigInt& sb = d->pow_p(b.shift_ - e);
    std::vector<BigInt> c(static_cast<std::size_t>(deg_));
    for (int i = 0; i < deg_; ++i) {
        BigInt v = (a.c_[static_cast<std::size_t>(i)] * sa + b.c_[static_cast<std::size_t>(i)] * sb) % mod;
        c[static_cast<std::size_t>(i)] = v;
    }
    PadicScalar r(p_, deg_, n, e, std::move(c), false);
    r.normalize();
    return r;
}

PadicScalar PadicScalar::operator-(const PadicScalar& b) const { return *this + (-b); }

PadicScalar PadicScalar::operator*(const PadicScalar& b) const {
    check_compatible(*this, b);
    const PadicScalar& a = *this;
    if (a.zero_ || b.zero_) {
        int va = a.zero_ ? a.prec_ : a.shift_;
        int vb = b.zero_ ? b.prec_ : b.shift_;
        return zero(p_, deg_, va + vb);
    }
    int e = a.shift_ + b.shift_;
    int m = std::min(a.prec_ - a.shift_, b.prec_ - b.shift_);
    auto d = data(m);
    ZqRing ring{d->pow_p(m), d->minpoly, deg_};
    for (auto& mp : ring.minpoly) mp %= ring.mod;
    std::vector<BigInt> ca = a.c_, cb = b.c_;
    for (auto& v : ca) v %= ring.mod;
    for (auto& v : cb) v %= ring.mod;
    PadicScalar r(p_, deg_, e + m, e, ring.mul(ca, cb), false);
    r.normalize();
    return r;
}

PadicScalar PadicScalar::inv() const {
    if (zero_) fail("inexact-zero divisor", "inverse of a value that is zero at working precision");
    int m = prec_ - shift_;
    auto d = data(m);
    // invert the unit coordinate vector mod p first, then Hensel-lift.
    const std::int64_t p = p_;
    FpPoly u(static_cast<std::size_t>(deg_));
    for (int i = 0; i < deg_; ++i) u[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(c_[static_cast<std::size_t>(i)] % p);
    fp_trim(u);
    FpPoly mbar(static_cast<std::size_t>(deg_) + 1);
    for (int i = 0; i < deg_; ++i) mbar[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(d->minpoly[static_cast<std::size_t>(i)] % p);
    mbar[static_cast<std::size_t>(deg_)] = 1;
    // extended Euclid in F_p[x]
    FpPoly r0 = mbar, r1 = u, s0 = {}, s1 = {1};
    while (!r1.empty()) {
        // quotient of r0 by r1
        FpPoly q;
        FpPoly rem = r0;
        std::int64_t lead = r1.back();
        std::int64_t inv = 1, e = p - 2, base = lead;
        while (e) { if (e & 1) inv = (__int128)inv * base % p; base = (__int128)base * base % p; e >>= 1; }
        while (rem.size() >= r1.size() && !rem.empty()) {
            std::int64_t coef = (__int128)rem.back() * inv % p;
            std::size_t off = rem.size() - r1.size();
            if (q.size() < off + 1) q.resize(off + 1, 0);
            q[off] = coef;
            for (std::size_t i = 0; i < r1.size(); ++i)
                rem[off + i] = ((rem[off + i] - (__int128)coef * r1[i]) % p + p) % p;
            fp_trim(rem);
        }
        // (r0, r1) <- (r1, rem); (s0, s1) <- (s1, s0 - q*s1)
        FpPoly qs1;
        if (!q.empty() && !s1.empty()) {
            qs1.assign(q.size() + s1.size() - 1, 0);
            for (std::size_t i = 0; i < q.size(); ++i)
                for (std::size_t j = 0; j < s1.size(); ++j)
                    qs1[i + j] = (qs1[i + j] + (__int128)q[i] * s1[j]) % p;
        }
        FpPoly ns(std::max(s0.size(), qs1.size()), 0);
        for (std::size_t i = 0; i < ns.size(); ++i) {
            std::int64_t v = (i < s0.size() ? s0[i] : 0) - (i < qs1.size() ? qs1[i] : 0);
            ns[i] = (v % p + p) % p;
        }
        fp_trim(ns);
        r0 = std::move(r1);
        r1 = std::move(rem);
        s0 = std::move(s1);
        s1 = std::move(ns);
    }
    if (r0.size() != 1) fail("internal-inconsistency", "unit coordinate vector not invertible mod p");
    // normalize gcd to 1
    {
        std::int64_t lead = r0[0];
        std::int64_t inv = 1, e = p - 2, base = lead;
        while (e) { if (e & 1) inv = (__int128)inv * base % p; base = (__int128)base * base % p; e >>= 1; }
        for (auto& v : s0) v = (__int128)v * inv % p;
    }
    std::vector<BigInt> v(static_cast<std::size_t>(deg_));
    for (std::size_t i = 0; i < s0.size(); ++i) v[i] = s0[i];
    // Hensel: v <- v(2 - c*v) doubles the precision each round
    ZqRing ring{d->pow_p(m), d->minpoly, deg_};
    for (auto& mp : ring.minpoly) mp %= ring.mod;
    std::vector<BigInt> cc = c_;
    for (auto& t : cc) t %= ring.mod;
    int have = 1;
    while (have < m) {
        std::vector<BigInt> cv = ring.mul(cc, v);
        cv[0] = (ring.mod + 2 - cv[0] % ring.mod) % ring.mod;
        for (std::size_t i = 1; i < cv.size(); ++i) cv[i] = cv[i] == 0 ? BigInt(0) : ring.mod - cv[i];
        v = ring.mul(v, cv);
        have *= 2;
    }
    PadicScalar r(p_, deg_, m - shift_, -shift_, std::move(v), false);
    r.normalize();
    return r;
}

PadicScalar PadicScalar::operator/(const PadicScalar& b) const {
    check_compatible(*this, b);
    if (b.zero_) fail("inexact-zero divisor", "division by a value that is zero at working precision");
    if (zero_) return zero(p_, deg_, prec_ - b.shift_);
    return *this * b.inv();
}

PadicScalar PadicScalar::pow(BigInt k) const {
    if (k < 0) return inv().pow(-k);
    if (k == 0) return one(p_, deg_, std::max(zero_ ? prec_ : prec_ - shift_, 1));
    PadicScalar base = *this;
    PadicScalar acc;
    bool started = false;
    while (k > 0) {
        if ((k & 1) != 0) {
            acc = started ? acc * base : base;
            started = true;
        }
        k >>= 1;
        if (k > 0) base = base * base;
    }
    return acc;
}

PadicScalar PadicScalar::times_p_pow(int k) const {
    PadicScalar r = *this;
    r.prec_ += k;
    r.shift_ += k;
    return r;
}

PadicScalar PadicScalar::frobenius() const {
    if (zero_ || deg_ == 1) return *this;
    int m = prec_ - shift_;
    auto d = data(m);
    const BigInt& mod = d->pow_p(m);
    std::vector<BigInt> out(static_cast<std::size_t>(deg_));
    for (int j = 0; j < deg_; ++j) {
        const BigInt& cj = c_[static_cast<std::size_t>(j)];
        if (cj == 0) continue;
        const auto& col = d->frob[static_cast<std::size_t>(j)];
        for (int i = 0; i < deg_; ++i) out[static_cast<std::size_t>(i)] += cj * col[static_cast<std::size_t>(i)];
    }
    for (auto& v : out) {
        v %= mod;
        if (v < 0) v += mod;
    }
    PadicScalar r(p_, deg_, prec_, shift_, std::move(out), false);
    r.normalize();
    return r;
}

PadicScalar PadicScalar::teichmuller_lift() const {
    if (zero_ || shift_ != 0)
        fail("nonunit-residue", "Teichmuller lift needs a nonzero residue");
    std::int64_t qq = q();
    PadicScalar t = *this;
    for (int i = 0; i <= prec_ + 2; ++i) {
        PadicScalar next = t.pow(BigInt(qq));
        if (next == t) return t;
        t = next;
    }
    fail("internal-inconsistency", "Teichmuller iteration failed to stabilize");
}

PadicScalar PadicScalar::exp() const {
    int n = prec_;
    if (zero_) {
        if (prec_ < 1) fail("exp-divergent", "no certified positive valuation");
        return one(p_, deg_, n);
    }
    if (shift_ < 1) fail("exp-divergent", "exp requires v_p > 1/(p-1)");
    PadicScalar sum = one(p_, deg_, n + 2);
    PadicScalar term = one(p_, deg_, prec_ - shift_ + shift_); // matches this's precision profile
    term = term.reduced_to(prec_);
    for (std::int64_t i = 1;; ++i) {
        if (static_cast<std::int64_t>(shift_) * i - factorial_valuation(i, p_) >= n) break;
        term = term * (*this);
        PadicScalar den = from_integer(i, p_, deg_, term.prec() + factorial_valuation(i, p_) + 1);
        term = term / den;
        sum = sum + term;
        if (i > 4 * (n + 4)) fail("internal-inconsistency", "exp series did not terminate");
    }
    return sum.reduced_to(n);
}

PadicScalar PadicScalar::log() const {
    int n = prec_;
    PadicScalar x = *this - one(p_, deg_, prec_);
    if (x.is_zero_at_prec()) {
        if (n < 1) fail("log-divergent", "no certified positive valuation for log");
        return zero(p_, deg_, n);
    }
    if (x.shift() < 1) fail("log-divergent", "log requires v_p(x-1) >= 1");
    PadicScalar sum = zero(p_, deg_, n + 2);
    PadicScalar xp = one(p_, deg_, x.prec());
    int e = x.shift();
    for (std::int64_t i = 1;; ++i) {
        int vi = 0;
        { std::int64_t ii = i; while (ii % p_ == 0) { ii /= p_; ++vi; } }
        if (static_cast<std::int64_t>(e) * i - vi >= n) break;
        xp = xp * x;
        PadicScalar den = from_integer(i, p_, deg_, xp.prec() + vi + 1);
        PadicScalar term = xp / den;
        if (i % 2 == 0) term = -term;
        sum = sum + term;
        if (i > 4 * (n + 4)) fail("internal-inconsistency", "log series did not terminate");
    }
    return sum.reduced_to(n);
}

PadicScalar PadicScalar::pow_zp(const PadicScalar& a) const {
    check_compatible(*this, a);
    if (!a.is_integral()) fail("parameter-mismatch", "p-adic exponent must be integral");
    PadicScalar lg = log(); // requires this == 1 mod p
    return (a * lg).exp();
}

std::vector<std::int64_t> PadicScalar::residue() const {
    std::vector<std::int64_t> r(static_cast<std::size_t>(deg_), 0);
    if (zero_) return r;
    if (shift_ > 0) return r;
    if (shift_ < 0) fail("parameter-mismatch", "residue of a non-integral scalar");
    for (int i = 0; i < deg_; ++i) r[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(c_[static_cast<std::size_t>(i)] % p_);
    return r;
}

PadicScalar PadicScalar::reduced_to(int prec) const {
    if (prec >= prec_) return *this;
    if (zero_) return zero(p_, deg_, prec);
    int m = prec - shift_;
    if (m < 1) return zero(p_, deg_, prec);
    auto d = data(m);
    const BigInt& mod = d->pow_p(m);
    std::vector<BigInt> c(c_.size());
    for (std::size_t i = 0; i < c_.size(); ++i) c[i] = c_[i] % mod;
    PadicScalar r(p_, deg_, prec, shift_, std::move(c), false);
    r.normalize();
    return r;
}

bool PadicScalar::agrees_with(const PadicScalar& b) const {
    check_compatible(*this, b);
    return (*this - b).is_zero_at_prec();
}

bool PadicScalar::operator==(const PadicScalar& b) const {
    if (p_ != b.p_ || deg_ != b.deg_ || prec_ != b.prec_ || zero_ != b.zero_) return false;
    if (zero_) return true;
    return shift_ == b.shift_ && c_ == b.c_;
}

std::string PadicScalar::str() const {
    std::ostringstream os;
    if (zero_) {
        os << "O(" << p_ << "^" << prec_ << ")";
        return os.str();
    }
    bool first = true;
    os << "(";
    for (int i = 0; i < deg_; ++i) {
        const BigInt& c = c_[static_cast<std::size_t>(i)];
        if (c == 0) continue;
        if (!first) os << " + ";
        os << c;
        if (i == 1) os << "*w";
        if (i > 1) os << "*w^" << i;
        first = false;
    }
    os << ")";
    if (shift_ != 0) os << "*" << p_ << "^" << shift_;
    os << " + O(" << p_ << "^" << prec_ << ")";
    return os.str();
}

std::string PadicScalar::key() const {
    std::ostringstream os;
    os << p_ << ":" << deg_ << ":" << prec_ << ":" << shift_ << ":" << zero_;
    for (const auto& c : c_) os << ":" << c;
    return os.str();
}

} // namespace ltpg
