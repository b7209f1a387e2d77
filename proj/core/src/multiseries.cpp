#include "ltpg/multiseries.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace ltpg {

namespace {
int total_degree(const std::vector<int>& e) { return std::accumulate(e.begin(), e.end(), 0); }
} // namespace

void MultiSeries::check_compatible(const MultiSeries& a, const MultiSeries& b) {
    if (a.p_ != b.p_ || a.deg_ != b.deg_ || a.nvars_ != b.nvars_)
        fail("parameter-mismatch", "multivariate series shape mismatch");
}

MultiSeries MultiSeries::zero(std::int64_t p, int deg, int prec, int nvars, int degcap) {
    MultiSeries s;
    s.p_ = p;
    s.deg_ = deg;
    s.prec_ = prec;
    s.nvars_ = nvars;
    s.degcap_ = degcap;
    return s;
}

MultiSeries MultiSeries::constant(const PadicScalar& c, int nvars, int degcap) {
    MultiSeries s = zero(c.p(), c.deg(), c.prec(), nvars, degcap);
    if (!c.is_zero_at_prec())
        s.c_.emplace(std::vector<int>(static_cast<std::size_t>(nvars), 0), c);
    return s;
}

MultiSeries MultiSeries::variable(std::int64_t p, int deg, int prec, int nvars, int var, int degcap) {
    MultiSeries s = zero(p, deg, prec, nvars, degcap);
    std::vector<int> e(static_cast<std::size_t>(nvars), 0);
    e[static_cast<std::size_t>(var)] = 1;
    s.c_.emplace(std::move(e), PadicScalar::one(p, deg, prec));
    return s;
}

PadicScalar MultiSeries::coeff(const std::vector<int>& e) const {
    auto it = c_.find(e);
    if (it != c_.end()) return it->second;
    return PadicScalar::zero(p_, deg_, prec_);
}

int MultiSeries::tmin() const {
    int m = degcap_ + 1;
    for (const auto& [e, v] : c_) {
        (void)v;
        m = std::min(m, total_degree(e));
    }
    return m;
}

bool MultiSeries::is_zero_at_prec() const {
    for (const auto& [e, v] : c_) {
        (void)e;
        if (!v.is_zero_at_prec()) return false;
    }
    return true;
}

void MultiSeries::insert_add(const std::vector<int>& e, const PadicScalar& v) {
    auto it = c_.find(e);
    if (it == c_.end())
        c_.emplace(e, v.reduced_to(prec_));
    else
        it->second = it->second + v.reduced_to(prec_);
}

MultiSeries MultiSeries::operator-() const {
    MultiSeries s = *this;
    for (auto& [e, v] : s.c_) {
        (void)e;
        v = -v;
    }
    return s;
}

MultiSeries MultiSeries::operator+(const MultiSeries& g) const {
    check_compatible(*this, g);
    MultiSeries r = zero(p_, deg_, std::min(prec_, g.prec_), nvars_, std::min(degcap_, g.degcap_));
    for (const auto& [e, v] : c_)
        if (total_degree(e) <= r.degcap_) r.insert_add(e, v);
    for (const auto& [e, v] : g.c_)
        if (total_degree(e) <= r.degcap_) r.insert_add(e, v);
    return r;
}

MultiSeries MultiSeries::operator-(const MultiSeries& g) const { return *this + (-g); }

MultiSeries MultiSeries::operator*(const MultiSeries& g) const {
    check_compatible(*this, g);
    // conservative truncation rule, exactly as for windowed Laurent series
    int cap = std::min(degcap_ + g.tmin(), g.degcap_ + tmin());
    MultiSeries r = zero(p_, deg_, std::min(prec_, g.prec_), nvars_, cap);
    for (const auto& [e1, v1] : c_) {
        for (const auto& [e2, v2] : g.c_) {
            std::vector<int> e(e1.size());
            for (std::size_t i = 0; i < e.size(); ++i) e[i] = e1[i] + e2[i];
            if (total_degree(e) > cap) continue;
            r.insert_add(e, v1 * v2);
        }
    }
    return r;
}

MultiSeries MultiSeries::scaled(const PadicScalar& s) const {
    MultiSeries r = *this;
    for (auto& [e, v] : r.c_) {
        (void)e;
        v = (v * s).reduced_to(prec_);
    }
    return r;
}

MultiSeries MultiSeries::truncated(int new_cap) const {
    if (new_cap >= degcap_) return *this;
    MultiSeries r = zero(p_, deg_, prec_, nvars_, new_cap);
    for (const auto& [e, v] : c_)
        if (total_degree(e) <= new_cap) r.c_.emplace(e, v);
    return r;
}

MultiSeries MultiSeries::promoted(int new_nvars, const std::vector<int>& var_map) const {
    MultiSeries r = zero(p_, deg_, prec_, new_nvars, degcap_);
    for (const auto& [e, v] : c_) {
        std::vector<int> ne(static_cast<std::size_t>(new_nvars), 0);
        for (std::size_t i = 0; i < e.size(); ++i)
            ne[static_cast<std::size_t>(var_map[i])] += e[i];
        r.insert_add(ne, v);
    }
    return r;
}

MultiSeries MultiSeries::composed(const std::vector<MultiSeries>& args) const {
    if (static_cast<int>(args.size()) != nvars_) fail("parameter-mismatch", "wrong argument count");
    for (const auto& a : args)
        if (a.tmin() < 1) fail("bad-substitution-target", "composition argument needs positive order");
    const MultiSeries& proto = args.front();
    int cap = proto.degcap_;
    for (const auto& a : args) cap = std::min(cap, a.degcap_);
    cap = std::min(cap, degcap_); // unknown coefficients of *this beyond degcap contaminate there
    MultiSeries r = zero(p_, deg_, std::min(prec_, proto.prec_), proto.nvars_, cap);
    // cache powers of each argument
    std::vector<std::vector<MultiSeries>> pows(args.size());
    for (std::size_t i = 0; i < args.size(); ++i)
        pows[i].push_back(constant(PadicScalar::one(p_, deg_, prec_), proto.nvars_, cap));
    auto arg_pow = [&](std::size_t i, int k) -> const MultiSeries& {
        while (static_cast<int>(pows[i].size()) <= k)
            pows[i].push_back(pows[i].back() * args[i].truncated(cap));
        return pows[i][static_cast<std::size_t>(k)];
    };
    for (const auto& [e, v] : c_) {
        MultiSeries term = constant(v, proto.nvars_, cap);
        for (std::size_t i = 0; i < e.size(); ++i)
            if (e[i] > 0) term = term * arg_pow(i, e[i]);
        r = r + term;
    }
    return r;
}

MultiSeries MultiSeries::compose_univariate(const LaurentWindow& g, const MultiSeries& s) {
    if (g.n_min() < 0) fail("bad-substitution-target", "univariate composition needs a power series");
    if (s.tmin() < 1) fail("bad-substitution-target", "composition argument needs positive order");
    int top = g.exact_tail() ? (g.coeffs().empty() ? 0 : std::max(0, g.coeffs().rbegin()->first))
                             : g.n_max();
    int cap = s.degcap_;
    if (!g.exact_tail()) cap = std::min(cap, (g.n_max() + 1) * s.tmin() - 1);
    MultiSeries acc = zero(s.p_, s.deg_, std::min(g.prec(), s.prec_), s.nvars_, cap);
    MultiSeries st = s.truncated(cap);
    for (int n = top; n >= 0; --n) {
        acc = acc * st;
        acc.degcap_ = cap; // multiplication by the fixed truncated argument keeps the cap
        auto it = g.coeffs().find(n);
        if (it != g.coeffs().end()) acc = acc + constant(it->second, s.nvars_, cap);
    }
    return acc;
}

MultiSeries MultiSeries::var_set_zero(int var) const {
    MultiSeries r = zero(p_, deg_, prec_, nvars_ - 1, degcap_);
    for (const auto& [e, v] : c_) {
        if (e[static_cast<std::size_t>(var)] != 0) continue;
        std::vector<int> ne;
        ne.reserve(e.size() - 1);
        for (std::size_t i = 0; i < e.size(); ++i)
            if (static_cast<int>(i) != var) ne.push_back(e[i]);
        r.insert_add(ne, v);
    }
    return r;
}

bool MultiSeries::agrees_with(const MultiSeries& g) const { return (*this - g).is_zero_at_prec(); }

std::string MultiSeries::str() const {
    static const char* names = "XYZW";
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, v] : c_) {
        if (v.is_zero_at_prec()) continue;
        if (!first) os << " + ";
        os << "[" << v.str() << "]";
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0) continue;
            os << "*" << (i < 4 ? std::string(1, names[i]) : "V" + std::to_string(i));
            if (e[i] > 1) os << "^" << e[i];
        }
        first = false;
    }
    if (first) os << "0";
    os << "  (degcap " << degcap_ << ")";
    return os.str();
}

} // namespace ltpg
