#pragma once

#include <map>
#include <string>
#include <vector>

#include "ltpg/laurent.hpp"

namespace ltpg {

// Sparse multivariate power series truncated in total degree. Small helper
// for the formal group law G(X,Y) and its associativity/compatibility
// checks; coefficients above the total-degree cap are unknown.
class MultiSeries {
public:
    MultiSeries() = default;

    static MultiSeries zero(std::int64_t p, int deg, int prec, int nvars, int degcap);
    static MultiSeries constant(const PadicScalar& c, int nvars, int degcap);
    static MultiSeries variable(std::int64_t p, int deg, int prec, int nvars, int var, int degcap);

    std::int64_t p() const { return p_; }
    int deg() const { return deg_; }
    int prec() const { return prec_; }
    int nvars() const { return nvars_; }
    int degcap() const { return degcap_; }
    const std::map<std::vector<int>, PadicScalar>& coeffs() const { return c_; }

    PadicScalar coeff(const std::vector<int>& e) const;
    int tmin() const; // smallest total degree with a stored coefficient (degcap+1 if none)
    bool is_zero_at_prec() const;

    MultiSeries operator-() const;
    MultiSeries operator+(const MultiSeries& g) const;
    MultiSeries operator-(const MultiSeries& g) const;
    MultiSeries operator*(const MultiSeries& g) const;
    MultiSeries scaled(const PadicScalar& s) const;
    MultiSeries truncated(int new_cap) const;

    // Rename/embed variables: result has new_nvars variables and variable i
    // of *this becomes var_map[i].
    MultiSeries promoted(int new_nvars, const std::vector<int>& var_map) const;

    // Substitute args[i] for variable i. Every argument needs tmin >= 1.
    MultiSeries composed(const std::vector<MultiSeries>& args) const;

    // g(s) for univariate g with n_min >= 0 and s with tmin >= 1.
    static MultiSeries compose_univariate(const LaurentWindow& g, const MultiSeries& s);

    // Set one variable to zero and forget it (result has nvars-1 variables).
    MultiSeries var_set_zero(int var) const;

    bool agrees_with(const MultiSeries& g) const;
    std::string str() const;

private:
    std::int64_t p_ = 0;
    int deg_ = 1;
    int prec_ = 0;
    int nvars_ = 1;
    int degcap_ = 0;
    std::map<std::vector<int>, PadicScalar> c_;

    void insert_add(const std::vector<int>& e, const PadicScalar& v);
    static void check_compatible(const MultiSeries& a, const MultiSeries& b);
};

} // namespace ltpg
