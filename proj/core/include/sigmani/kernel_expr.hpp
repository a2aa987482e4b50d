#pragma once

#include "sigmani/rational.hpp"

#include <map>
#include <stdexcept>
#include <tuple>

namespace sigmani {

/// Raised when a definite integral's singular monomials fail to cancel;
/// signals a mis-transcribed case rather than a numerical issue.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Finite sum of monomials q * r^j * (1-r)^k * log^m(1-r) with exact rational
/// q, j >= 0, k any integer, m >= 0. Closed under products and under
/// antidifferentiation (substitute s = 1-r).
class KernelExpr {
public:
    using Key = std::tuple<int, int, int>; // (j, k, m)

    KernelExpr() = default;
    static KernelExpr constant(const Rational& q);
    static KernelExpr monomial(const Rational& q, int j, int k, int m);

    bool is_zero() const { return terms_.empty(); }
    const std::map<Key, Rational>& terms() const { return terms_; }

    KernelExpr& operator+=(const KernelExpr& o);
    KernelExpr operator*(const KernelExpr& o) const;
    KernelExpr operator*(const Rational& c) const;

    /// Exact antiderivative: returns F with F(v) = \int_0^v f(r) dr.
    KernelExpr integrate_to_upper() const;

    /// \int_0^1 f(r) dr; divergent residual monomials must cancel in the sum.
    Rational integrate01() const;

    /// Same, but splits (finite value, surviving divergent residual) so
    /// cancellation can be asserted across a sum of expressions.
    std::pair<Rational, std::map<std::pair<int, int>, Rational>> integrate01_parts() const;

    std::string str() const;

private:
    // s-variable antiderivative helper: (K, m) -> coeff list after integration
    std::map<Key, Rational> terms_; // (j,k,m) -> coeff
};

} // namespace sigmani
