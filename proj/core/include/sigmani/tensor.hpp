#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sigmani {

/// Element of the truncated tensor algebra T^(m)(R^N).
///
/// Level k holds N^k coefficients in row-major lexicographic multi-index
/// order: entry (i_1,...,i_k) sits at offset i_1*N^{k-1} + ... + i_k.
/// This ordering is frozen; the tensor file format depends on it.
class TruncatedTensor {
public:
    TruncatedTensor() = default;
    TruncatedTensor(int ambient_dim, int max_level);

    /// Unit element 1 = (1, 0, 0, ...).
    static TruncatedTensor unit(int ambient_dim, int max_level);

    int ambient_dim() const { return n_; }
    int max_level() const { return m_; }

    /// Flat coefficient storage of level k (size N^k).
    double* level(int k) { return data_.data() + offsets_[k]; }
    const double* level(int k) const { return data_.data() + offsets_[k]; }
    std::size_t level_size(int k) const { return sizes_[k]; }

    double& scalar() { return data_[0]; }
    double scalar() const { return data_[0]; }

    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

    TruncatedTensor& operator+=(const TruncatedTensor& o);
    TruncatedTensor& operator-=(const TruncatedTensor& o);
    TruncatedTensor& operator*=(double c);
    friend TruncatedTensor operator+(TruncatedTensor a, const TruncatedTensor& b) { return a += b; }
    friend TruncatedTensor operator-(TruncatedTensor a, const TruncatedTensor& b) { return a -= b; }
    friend TruncatedTensor operator*(TruncatedTensor a, double c) { return a *= c; }
    friend TruncatedTensor operator*(double c, TruncatedTensor a) { return a *= c; }

private:
    int n_ = 0;
    int m_ = -1;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> sizes_;
    std::vector<double> data_;
};

/// Truncated Cauchy product: (a (x) b)_m = sum_k a_k (x) b_{m-k}.
TruncatedTensor mul(const TruncatedTensor& a, const TruncatedTensor& b);

/// exp(a) = sum a^{(x)k} / k!, requires zero scalar part.
TruncatedTensor exp(const TruncatedTensor& a);

/// log(g) for group-like g (scalar part 1).
TruncatedTensor log(const TruncatedTensor& g);

/// Group inverse: g (x) inverse(g) = 1. Requires scalar part 1.
TruncatedTensor inverse(const TruncatedTensor& g);

/// Hilbert-Schmidt norm of level n (Euclidean norm of the flat slice).
double hs_norm(const TruncatedTensor& a, int n);

/// (n! * hs_norm(a,n))^{1/n}; 0 for a zero level, |scalar| at n = 0.
double normalized_level_norm(const TruncatedTensor& a, int n);

/// Level-1 element from a vector.
TruncatedTensor from_level1(int max_level, const std::vector<double>& v);

/// (2,4)-trace of a level-4 slice: out(u,w) = sum_a xi(u,a,w,a).
/// xi has N^4 entries, result N^2.
std::vector<double> contract_24(const std::vector<double>& xi, int ambient_dim);

} // namespace sigmani
