#include <doctest.h>

#include "sigmani/rng.hpp"
#include "sigmani/tensor.hpp"

#include <cmath>

using namespace sigmani;

namespace {
TruncatedTensor random_tensor(int N, int m, Rng& rng, bool zero_scalar = false) {
    TruncatedTensor t(N, m);
    for (auto& v : t.raw()) v = rng.next_normal();
    if (zero_scalar) t.scalar() = 0.0;
    return t;
}

double max_abs_diff(const TruncatedTensor& a, const TruncatedTensor& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.raw().size(); ++i)
        m = std::max(m, std::fabs(a.raw()[i] - b.raw()[i]));
    return m;
}

std::vector<double> conv_oracle(const TruncatedTensor& a, const TruncatedTensor& b, int k) {
    std::vector<double> out(a.level_size(k), 0.0);
    for (int j = 0; j <= k; ++j) {
        const double* aj = a.level(j);
        const double* bk = b.level(k - j);
        const std::size_t sb = b.level_size(k - j);
        for (std::size_t u = 0; u < a.level_size(j); ++u)
            for (std::size_t v = 0; v < sb; ++v) out[u * sb + v] += aj[u] * bk[v];
    }
    return out;
}
} // namespace

TEST_CASE("unit is neutral and mul matches the convolution oracle") {
    Rng rng(42, 0);
    auto a = random_tensor(2, 3, rng);
    auto one = TruncatedTensor::unit(2, 3);
    CHECK(max_abs_diff(mul(a, one), a) == 0.0);
    CHECK(max_abs_diff(mul(one, a), a) == 0.0);

    auto b = random_tensor(2, 3, rng);
    auto ab = mul(a, b);
    for (int k = 0; k <= 3; ++k) {
        auto want = conv_oracle(a, b, k);
        const double* got = ab.level(k);
        for (std::size_t i = 0; i < want.size(); ++i)
            CHECK(std::fabs(got[i] - want[i]) < 1e-12);
    }
}

TEST_CASE("group-like product of two level-1 exponentials") {
    std::vector<double> v = {0.3, -0.7}, w = {1.1, 0.4};
    auto prod = mul(exp(from_level1(3, v)), exp(from_level1(3, w)));
    CHECK(prod.scalar() == 1.0);
    const double* l1 = prod.level(1);
    CHECK(l1[0] == doctest::Approx(v[0] + w[0]).epsilon(1e-14));
    CHECK(l1[1] == doctest::Approx(v[1] + w[1]).epsilon(1e-14));
    const double* l2 = prod.level(2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double want = 0.5 * v[i] * v[j] + v[i] * w[j] + 0.5 * w[i] * w[j];
            CHECK(l2[i * 2 + j] == doctest::Approx(want).epsilon(1e-14));
        }
}

TEST_CASE("exp properties") {
    std::vector<double> v = {0.5, -0.25, 0.125};
    auto e = exp(from_level1(4, v));
    const double* l3 = e.level(3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                CHECK(l3[(i * 3 + j) * 3 + k] ==
                      doctest::Approx(v[i] * v[j] * v[k] / 6.0).epsilon(1e-13));
    const double t = 0.3;
    TruncatedTensor gen(3, 4);
    for (int i = 0; i < 3; ++i) gen.level(2)[i * 3 + i] = t / 2;
    auto psi = exp(gen);
    CHECK(psi.level(2)[0] == doctest::Approx(t / 2).epsilon(1e-14));
    auto idx4 = [](int a, int b, int c, int d) { return ((a * 3 + b) * 3 + c) * 3 + d; };
    CHECK(psi.level(4)[idx4(0, 0, 1, 1)] == doctest::Approx(t * t / 8).epsilon(1e-13));
    std::vector<double> nv = {-0.5, 0.25, -0.125};
    auto r = mul(exp(from_level1(4, v)), exp(from_level1(4, nv)));
    r.scalar() -= 1.0;
    for (double x : r.raw()) CHECK(std::fabs(x) < 1e-14);
    CHECK_THROWS(exp(TruncatedTensor::unit(3, 4)));
}

TEST_CASE("inverse and algebra laws on random tensors") {
    Rng rng(7, 1);
    auto g = random_tensor(2, 4, rng);
    g.scalar() = 1.0;
    auto prod = mul(g, inverse(g));
    CHECK(std::fabs(prod.scalar() - 1.0) < 1e-12);
    for (int k = 1; k <= 4; ++k) CHECK(hs_norm(prod, k) < 1e-12);

    auto a = random_tensor(2, 4, rng);
    auto b = random_tensor(2, 4, rng);
    auto c = random_tensor(2, 4, rng);
    CHECK(max_abs_diff(mul(mul(a, b), c), mul(a, mul(b, c))) < 1e-12);
    CHECK(max_abs_diff(mul(a, b + c), mul(a, b) + mul(a, c)) < 1e-12);
    auto h = random_tensor(2, 4, rng);
    h.scalar() = 1.0;
    CHECK(mul(g, h).scalar() == 1.0);
}

TEST_CASE("norms") {
    Rng rng(3, 9);
    std::vector<double> v = {3.0, 4.0};
    auto lv = from_level1(3, v);
    CHECK(hs_norm(lv, 1) == doctest::Approx(5.0));
    auto e = exp(lv);
    CHECK(normalized_level_norm(e, 3) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(normalized_level_norm(e, 1) == doctest::Approx(5.0).epsilon(1e-12));
    auto t = random_tensor(3, 3, rng);
    double s = 0;
    for (std::size_t i = 0; i < t.level_size(3); ++i) s += t.level(3)[i] * t.level(3)[i];
    CHECK(hs_norm(t, 3) == doctest::Approx(std::sqrt(s)).epsilon(1e-14));
    CHECK(normalized_level_norm(TruncatedTensor(2, 3), 2) == 0.0);
    CHECK_THROWS(hs_norm(t, 7));
}

TEST_CASE("contract_24 matches the brute-force trace") {
    const int N = 3;
    Rng rng(11, 0);
    std::vector<double> xi(N * N * N * N);
    for (auto& x : xi) x = rng.next_normal();
    auto got = contract_24(xi, N);
    for (int u = 0; u < N; ++u)
        for (int w = 0; w < N; ++w) {
            double s = 0;
            for (int a = 0; a < N; ++a) s += xi[((u * N + a) * N + w) * N + a];
            CHECK(got[u * N + w] == doctest::Approx(s).epsilon(1e-14));
        }
    std::vector<double> basis(N * N * N * N, 0.0);
    basis[((0 * N + 1) * N + 2) * N + 1] = 1.0;
    auto c = contract_24(basis, N);
    CHECK(c[0 * N + 2] == 1.0);
    c[0 * N + 2] = 0.0;
    for (double x : c) CHECK(x == 0.0);
    std::vector<double> all_distinct(16 * 16 * 16 * 16, 0.0); // N=16 keeps indices distinct
    // simpler: N=4, e1(x)e2(x)e3(x)e4 -> 0
    std::vector<double> b4(256, 0.0);
    b4[((0 * 4 + 1) * 4 + 2) * 4 + 3] = 1.0;
    for (double x : contract_24(b4, 4)) CHECK(x == 0.0);
    (void)all_distinct;
}

TEST_CASE("dimension and level mismatches are rejected") {
    TruncatedTensor a(2, 3), b(3, 3), c(2, 2);
    CHECK_THROWS(mul(a, b));
    CHECK_THROWS(mul(a, c));
    CHECK_THROWS(inverse(TruncatedTensor(2, 3)));
    // dense-storage level caps
    CHECK_THROWS(TruncatedTensor(2, 13));
    CHECK_THROWS(TruncatedTensor(5, 9));
    CHECK_NOTHROW(TruncatedTensor(4, 12));
}
