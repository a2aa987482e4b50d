#include "sigmani/kernel_expr.hpp"

#include <sstream>

namespace sigmani {

namespace {
Rational binom(int n, int k) {
    Rational r = 1;
    for (int i = 0; i < k; ++i) r *= Rational(n - i, i + 1);
    return r;
}
} // namespace

KernelExpr KernelExpr::constant(const Rational& q) { return monomial(q, 0, 0, 0); }

KernelExpr KernelExpr::monomial(const Rational& q, int j, int k, int m) {
    KernelExpr e;
    if (q != 0) e.terms_[{j, k, m}] = q;
    return e;
}

KernelExpr& KernelExpr::operator+=(const KernelExpr& o) {
    for (const auto& [key, c] : o.terms_) {
        auto it = terms_.find(key);
        if (it == terms_.end()) {
            terms_[key] = c;
        } else {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }
    return *this;
}

KernelExpr KernelExpr::operator*(const KernelExpr& o) const {
    KernelExpr out;
    for (const auto& [k1, c1] : terms_)
        for (const auto& [k2, c2] : o.terms_) {
            Key key{std::get<0>(k1) + std::get<0>(k2), std::get<1>(k1) + std::get<1>(k2),
                    std::get<2>(k1) + std::get<2>(k2)};
            auto it = out.terms_.find(key);
            if (it == out.terms_.end()) {
                out.terms_[key] = c1 * c2;
            } else {
                it->second += c1 * c2;
                if (it->second == 0) out.terms_.erase(it);
            }
        }
    return out;
}

KernelExpr KernelExpr::operator*(const Rational& c) const {
    KernelExpr out;
    if (c == 0) return out;
    for (const auto& [key, q] : terms_) out.terms_[key] = q * c;
    return out;
}

// rewrite in s = 1-r, antidifferentiate s^K log^m s:
//   K != -1: by parts, descending m;  K == -1: log^{m+1} s / (m+1)
namespace {
void anti_s(int K, int m, std::map<std::pair<int, int>, Rational>& out, const Rational& c) {
    if (K == -1) {
        out[{0, m + 1}] += c / (m + 1);
        return;
    }
    Rational coef = c / (K + 1);
    int mm = m;
    for (;;) {
        out[{K + 1, mm}] += coef;
        if (mm == 0) break;
        coef *= -mm;
        coef /= (K + 1);
        --mm;
    }
}

std::map<std::pair<int, int>, Rational> to_antiderivative_s(
    const std::map<KernelExpr::Key, Rational>& terms) {
    std::map<std::pair<int, int>, Rational> A;
    for (const auto& [key, c] : terms) {
        const int j = std::get<0>(key), k = std::get<1>(key), m = std::get<2>(key);
        // r^j = (1-s)^j = sum_b C(j,b) (-1)^b s^b
        for (int b = 0; b <= j; ++b) {
            Rational cb = c * binom(j, b);
            if (b % 2) cb = -cb;
            anti_s(k + b, m, A, cb);
        }
    }
    for (auto it = A.begin(); it != A.end();)
        it = it->second == 0 ? A.erase(it) : std::next(it);
    return A;
}
} // namespace

KernelExpr KernelExpr::integrate_to_upper() const {
    auto A = to_antiderivative_s(terms_);
    // \int_0^v f dr = A(1) - A(1-v);  s^K log^m s at s=1 is 1 iff m==0
    KernelExpr out;
    Rational a1 = 0;
    for (const auto& [km, c] : A) {
        if (km.second == 0) a1 += c;
        // A(1-v): j=0, k=K, m
        auto key = Key{0, km.first, km.second};
        auto it = out.terms_.find(key);
        if (it == out.terms_.end()) {
            out.terms_[key] = -c;
        } else {
            it->second -= c;
            if (it->second == 0) out.terms_.erase(it);
        }
    }
    if (a1 != 0) {
        auto key = Key{0, 0, 0};
        out.terms_[key] += a1;
        if (out.terms_[key] == 0) out.terms_.erase(key);
    }
    return out;
}

std::pair<Rational, std::map<std::pair<int, int>, Rational>> KernelExpr::integrate01_parts() const {
    auto A = to_antiderivative_s(terms_);
    Rational val = 0;
    std::map<std::pair<int, int>, Rational> resid;
    for (const auto& [km, c] : A) {
        const int K = km.first, m = km.second;
        if (m == 0) val += c; // A(1)
        if (K > 0) continue;  // s->0 limit vanishes
        if (K == 0 && m == 0) {
            val -= c;
        } else {
            resid[km] -= c;
        }
    }
    for (auto it = resid.begin(); it != resid.end();)
        it = it->second == 0 ? resid.erase(it) : std::next(it);
    return {val, resid};
}

Rational KernelExpr::integrate01() const {
    auto [val, resid] = integrate01_parts();
    if (!resid.empty()) throw DivergenceError("divergent monomials failed to cancel");
    return val;
}

std::string KernelExpr::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [key, c] : terms_) {
        if (!first) os << " + ";
        first = false;
        os << to_string(c) << "*r^" << std::get<0>(key) << "*(1-r)^" << std::get<1>(key)
           << "*L^" << std::get<2>(key);
    }
    return os.str();
}

} // namespace sigmani
