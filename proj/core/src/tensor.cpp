#include "sigmani/tensor.hpp"

#include <cmath>
#include <cstring>

namespace sigmani {

namespace {
std::size_t ipow(std::size_t b, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

void check_compatible(const TruncatedTensor& a, const TruncatedTensor& b) {
    if (a.ambient_dim() != b.ambient_dim() || a.max_level() != b.max_level())
        throw std::invalid_argument("tensor dimension/level mismatch");
}
} // namespace

TruncatedTensor::TruncatedTensor(int ambient_dim, int max_level) : n_(ambient_dim), m_(max_level) {
    if (ambient_dim < 1) throw std::invalid_argument("ambient_dim must be positive");
    if (max_level < 0) throw std::invalid_argument("max_level must be >= 0");
    // dense storage stays desk-scale: level cap 12 for N <= 4, 8 above
    if (max_level > 12 || (ambient_dim > 4 && max_level > 8))
        throw std::invalid_argument("max_level exceeds the dense-storage cap");
    offsets_.resize(m_ + 1);
    sizes_.resize(m_ + 1);
    std::size_t off = 0;
    for (int k = 0; k <= m_; ++k) {
        offsets_[k] = off;
        sizes_[k] = ipow(n_, k);
        off += sizes_[k];
    }
    data_.assign(off, 0.0);
}

TruncatedTensor TruncatedTensor::unit(int ambient_dim, int max_level) {
    TruncatedTensor t(ambient_dim, max_level);
    t.scalar() = 1.0;
    return t;
}

TruncatedTensor& TruncatedTensor::operator+=(const TruncatedTensor& o) {
    check_compatible(*this, o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

TruncatedTensor& TruncatedTensor::operator-=(const TruncatedTensor& o) {
    check_compatible(*this, o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

TruncatedTensor& TruncatedTensor::operator*=(double c) {
    for (double& x : data_) x *= c;
    return *this;
}

TruncatedTensor mul(const TruncatedTensor& a, const TruncatedTensor& b) {
    check_compatible(a, b);
    const int m = a.max_level();
    TruncatedTensor out(a.ambient_dim(), m);
    for (int k = 0; k <= m; ++k) {
        double* ok = out.level(k);
        const std::size_t sk = out.level_size(k);
        for (int j = 0; j <= k; ++j) {
            const double* aj = a.level(j);
            const double* bk = b.level(k - j);
            const std::size_t sb = b.level_size(k - j);
            // out[(u,v)] += a[u] * b[v], flat index u*sb + v
            std::size_t idx = 0;
            for (std::size_t u = 0; u < a.level_size(j); ++u) {
                const double au = aj[u];
                if (au == 0.0) { idx += sb; continue; }
                for (std::size_t v = 0; v < sb; ++v) ok[idx++] += au * bk[v];
            }
            (void)sk;
        }
    }
    return out;
}

TruncatedTensor exp(const TruncatedTensor& a) {
    if (a.scalar() != 0.0) throw std::invalid_argument("exp requires zero scalar part");
    const int m = a.max_level();
    TruncatedTensor out = TruncatedTensor::unit(a.ambient_dim(), m);
    // Horner in the truncated algebra: exp(a) = 1 + a(1 + a/2 (1 + a/3 (...)))
    TruncatedTensor acc = TruncatedTensor::unit(a.ambient_dim(), m);
    for (int k = m; k >= 1; --k) {
        acc = mul(a, acc);
        acc *= 1.0 / k;
        acc.scalar() += 1.0;
    }
    return acc;
}

TruncatedTensor log(const TruncatedTensor& g) {
    if (g.scalar() != 1.0) throw std::invalid_argument("log requires scalar part 1");
    const int m = g.max_level();
    TruncatedTensor x = g;
    x.scalar() = 0.0;
    // log(1+x) = x(1 - x(1/2 - x(1/3 - ...))) via Horner
    TruncatedTensor acc(g.ambient_dim(), m);
    for (int k = m; k >= 1; --k) {
        acc *= -1.0;
        acc.scalar() += 1.0 / k;
        acc = mul(x, acc);
    }
    return acc;
}

TruncatedTensor inverse(const TruncatedTensor& g) {
    if (g.scalar() != 1.0) throw std::invalid_argument("inverse requires scalar part 1");
    const int m = g.max_level();
    TruncatedTensor x = g;
    x.scalar() = 0.0;
    // (1+x)^{-1} = 1 - x + x^2 - ... via Horner
    TruncatedTensor acc = TruncatedTensor::unit(g.ambient_dim(), m);
    for (int k = 0; k < m; ++k) {
        acc = mul(x, acc);
        acc *= -1.0;
        acc.scalar() += 1.0;
    }
    return acc;
}

double hs_norm(const TruncatedTensor& a, int n) {
    if (n < 0 || n > a.max_level()) throw std::out_of_range("level out of range");
    const double* p = a.level(n);
    double s = 0.0;
    for (std::size_t i = 0; i < a.level_size(n); ++i) s += p[i] * p[i];
    return std::sqrt(s);
}

double normalized_level_norm(const TruncatedTensor& a, int n) {
    const double h = hs_norm(a, n);
    if (n == 0) return h;
    if (h == 0.0) return 0.0;
    double logfact = std::lgamma(static_cast<double>(n) + 1.0);
    return std::exp((logfact + std::log(h)) / n);
}

TruncatedTensor from_level1(int max_level, const std::vector<double>& v) {
    TruncatedTensor t(static_cast<int>(v.size()), max_level);
    if (max_level >= 1) {
        double* l1 = t.level(1);
        for (std::size_t i = 0; i < v.size(); ++i) l1[i] = v[i];
    }
    return t;
}

std::vector<double> contract_24(const std::vector<double>& xi, int ambient_dim) {
    const std::size_t n = static_cast<std::size_t>(ambient_dim);
    if (xi.size() != n * n * n * n) throw std::invalid_argument("contract_24: level-4 slice size mismatch");
    std::vector<double> out(n * n, 0.0);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t w = 0; w < n; ++w)
                out[u * n + w] += xi[((u * n + a) * n + w) * n + a];
    return out;
}

} // namespace sigmani
