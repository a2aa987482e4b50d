#include <doctest.h>

#include "sigmani/rng.hpp"
#include "sigmani/signature.hpp"
#include "sigmani/tensor.hpp"

#include <cmath>

using namespace sigmani;

namespace {
AmbientPath polyline(const std::vector<Vec>& pts) {
    AmbientPath p;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        p.times.push_back(static_cast<double>(i) / std::max<std::size_t>(1, pts.size() - 1));
        p.points.push_back(pts[i]);
    }
    return p;
}
} // namespace

TEST_CASE("single segment gives the exponential") {
    Vec v = {0.4, -0.9};
    auto sig = sig_piecewise_linear(polyline({{0, 0}, v}), 4);
    auto want = exp(from_level1(4, v));
    for (std::size_t i = 0; i < sig.raw().size(); ++i)
        CHECK(sig.raw()[i] == doctest::Approx(want.raw()[i]).epsilon(1e-14));
}

TEST_CASE("Chen identity holds exactly for concatenations") {
    Rng rng(5, 0);
    std::vector<Vec> pts1, pts2;
    Vec p = {0, 0, 0};
    pts1.push_back(p);
    for (int i = 0; i < 4; ++i) {
        p = {p[0] + rng.next_normal(), p[1] + rng.next_normal(), p[2] + rng.next_normal()};
        pts1.push_back(p);
    }
    pts2.push_back(p);
    for (int i = 0; i < 3; ++i) {
        p = {p[0] + rng.next_normal(), p[1] + rng.next_normal(), p[2] + rng.next_normal()};
        pts2.push_back(p);
    }
    std::vector<Vec> all = pts1;
    all.insert(all.end(), pts2.begin() + 1, pts2.end());
    auto s1 = sig_piecewise_linear(polyline(pts1), 4);
    auto s2 = sig_piecewise_linear(polyline(pts2), 4);
    auto s = sig_piecewise_linear(polyline(all), 4);
    auto prod = mul(s1, s2);
    for (std::size_t i = 0; i < s.raw().size(); ++i)
        CHECK(s.raw()[i] == doctest::Approx(prod.raw()[i]).epsilon(1e-12));
}

TEST_CASE("unit square loop has signed area one") {
    auto sig = sig_piecewise_linear(
        polyline({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}}), 2);
    const double* l2 = sig.level(2);
    const double area = 0.5 * (l2[0 * 2 + 1] - l2[1 * 2 + 0]);
    CHECK(area == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::fabs(sig.level(1)[0]) < 1e-14);
}

TEST_CASE("reversal gives the group inverse") {
    Rng rng(17, 2);
    std::vector<Vec> pts;
    Vec p = {0, 0};
    pts.push_back(p);
    for (int i = 0; i < 6; ++i) {
        p = {p[0] + rng.next_normal(), p[1] + rng.next_normal()};
        pts.push_back(p);
    }
    auto fwd = sig_piecewise_linear(polyline(pts), 4);
    std::vector<Vec> rev(pts.rbegin(), pts.rend());
    auto bwd = sig_piecewise_linear(polyline(rev), 4);
    auto prod = mul(fwd, bwd);
    CHECK(std::fabs(prod.scalar() - 1.0) < 1e-12);
    for (int k = 1; k <= 4; ++k) CHECK(hs_norm(prod, k) < 1e-12);
    // and matches inverse()
    auto inv = inverse(fwd);
    for (std::size_t i = 0; i < inv.raw().size(); ++i)
        CHECK(bwd.raw()[i] == doctest::Approx(inv.raw()[i]).epsilon(1e-11));
}

TEST_CASE("level-2 shuffle symmetry for any path") {
    Rng rng(23, 5);
    std::vector<Vec> pts;
    Vec p = {0, 0, 0};
    pts.push_back(p);
    for (int i = 0; i < 5; ++i) {
        p = {p[0] + rng.next_normal(), p[1] + rng.next_normal(), p[2] + rng.next_normal()};
        pts.push_back(p);
    }
    auto sig = sig_piecewise_linear(polyline(pts), 2);
    const double* l1 = sig.level(1);
    const double* l2 = sig.level(2);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(0.5 * (l2[i * 3 + j] + l2[j * 3 + i]) ==
                  doctest::Approx(0.5 * l1[i] * l1[j]).epsilon(1e-12));
}

TEST_CASE("geodesic signatures") {
    auto e = make_manifold("euclidean:d=2");
    auto sig = sig_geodesic(*e, {0.0, 0.0}, {0.6, -0.2}, 4, 64);
    auto want = exp(from_level1(4, {0.6, -0.2}));
    for (std::size_t i = 0; i < sig.raw().size(); ++i)
        CHECK(sig.raw()[i] == doctest::Approx(want.raw()[i]).epsilon(1e-12));

    auto s = make_manifold("sphere:d=2,r=1");
    Vec x = {1.2, 0.4}, y = {0.9, 1.0};
    auto gs = sig_geodesic(*s, x, y, 4, 512);
    Vec fx = s->embed(x), fy = s->embed(y);
    for (int a = 0; a < 3; ++a)
        CHECK(gs.level(1)[a] == doctest::Approx(fy[a] - fx[a]).epsilon(1e-10));

    // sampling-refinement Cauchy property at level 4
    auto g1 = sig_geodesic(*s, x, y, 4, 128);
    auto g2 = sig_geodesic(*s, x, y, 4, 256);
    auto g3 = sig_geodesic(*s, x, y, 4, 512);
    double d12 = 0, d23 = 0;
    for (std::size_t i = 0; i < g1.level_size(4); ++i) {
        d12 = std::max(d12, std::fabs(g1.level(4)[i] - g2.level(4)[i]));
        d23 = std::max(d23, std::fabs(g2.level(4)[i] - g3.level(4)[i]));
    }
    CHECK(d23 <= 0.5 * d12 * 1.01); // order-2 refinement: next change is ~4x smaller
}

TEST_CASE("non-increasing time stamps are rejected") {
    AmbientPath p;
    p.times = {0.0, 0.5, 0.5};
    p.points = {{0, 0}, {1, 0}, {2, 0}};
    CHECK_THROWS(sig_piecewise_linear(p, 2));
}

TEST_CASE("degenerate single-point path yields the unit tensor") {
    AmbientPath p;
    p.times = {0.0};
    p.points = {{1.0, 2.0}};
    auto sig = sig_piecewise_linear(p, 3);
    CHECK(sig.scalar() == 1.0);
    for (int k = 1; k <= 3; ++k) CHECK(hs_norm(sig, k) == 0.0);
}
