#include <doctest.h>

#include "sigmani/bridge.hpp"
#include "sigmani/signature.hpp"

#include <cmath>

using namespace sigmani;

TEST_CASE("grad_log_p closed forms") {
    auto e = make_manifold("euclidean:d=2");
    HeatKernelModel he(*e, HeatKernelMode::exact);
    Vec g = he.grad_log_p(0.5, {0.0, 0.0}, {1.0, -2.0});
    CHECK(g[0] == doctest::Approx(2.0));
    CHECK(g[1] == doctest::Approx(-4.0));
    CHECK_THROWS(he.grad_log_p(0.0, {0, 0}, {1, 0}));

    // circle: wrapped Gaussian vs small-time mode at small u
    auto c = make_manifold("circle:r=1");
    HeatKernelModel hw(*c, HeatKernelMode::exact);
    HeatKernelModel hs(*c, HeatKernelMode::small_time);
    Vec x = c->embed({0.2}), y = c->embed({1.2}); // geodesic gap 1.0
    Vec gw = hw.grad_log_p(0.05, x, y);
    Vec gs = hs.grad_log_p(0.05, x, y);
    double nw = std::hypot(gw[0], gw[1]);
    CHECK(nw == doctest::Approx(20.0).epsilon(1e-6));
    CHECK(std::fabs(gw[0] - gs[0]) < 1e-6);
    CHECK(std::fabs(gw[1] - gs[1]) < 1e-6);

    // coincident points in small-time mode: zero drift
    auto s = make_manifold("sphere:d=2,r=1");
    HeatKernelModel hsp(*s, HeatKernelMode::small_time);
    Vec p = s->embed({1.0, 0.5});
    Vec g0 = hsp.grad_log_p(0.01, p, p);
    for (double v : g0) CHECK(std::fabs(v) < 1e-9);
}

TEST_CASE("geodesic random walk stays on the manifold") {
    auto s = make_manifold("sphere:d=2,r=1");
    Rng rng(99, 0);
    auto p = sample_bm(*s, {1.0, 0.5}, 0.05, 64, rng);
    for (const auto& pt : p.points) {
        double n = std::sqrt(pt[0] * pt[0] + pt[1] * pt[1] + pt[2] * pt[2]);
        CHECK(n == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("euclidean BM increments have the right moments") {
    auto e = make_manifold("euclidean:d=2");
    Rng rng(123, 7);
    const int K = 100000;
    auto p = sample_bm(*e, {0.0, 0.0}, 1.0, K, rng);
    const double h = 1.0 / K;
    double m1 = 0, m2 = 0;
    for (int k = 1; k <= K; ++k) {
        double dx = p.points[k][0] - p.points[k - 1][0];
        m1 += dx;
        m2 += dx * dx;
    }
    m1 /= K;
    m2 /= K;
    CHECK(std::fabs(m1) < 3.0 * std::sqrt(h / K));
    CHECK(std::fabs(m2 - h) < 3.0 * h * std::sqrt(2.0 / K));
}

TEST_CASE("sphere short-time mean squared displacement") {
    auto s = make_manifold("sphere:d=2,r=1");
    const double t = 0.01;
    const int n = 20000;
    double sum = 0, sumsq = 0;
    Vec x = {1.0, 0.5};
    Vec xa = s->embed(x);
    for (int i = 0; i < n; ++i) {
        Rng rng(2024, i);
        auto p = sample_bm(*s, x, t, 16, rng);
        double d = s->ambient_distance(xa, p.points.back());
        sum += d * d;
        sumsq += d * d * d * d;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sumsq / n - mean * mean) / n);
    CHECK(std::fabs(mean - 2.0 * t) < 3.0 * se + 2e-4); // E d^2 = d*t + O(t^2)
}

TEST_CASE("bridge hits the target exactly and reproduces deterministically") {
    auto s = make_manifold("sphere:d=2,r=1");
    HeatKernelModel kern(*s, HeatKernelMode::small_time);
    BridgeConfig cfg;
    cfg.t = 0.05;
    cfg.steps = 64;
    cfg.chart_radius = 1.0;
    cfg.kernel = &kern;
    Vec x = {1.0, 0.5}, y = {1.2, 0.7};
    Rng r1(7, 3), r2(7, 3);
    auto b1 = sample_bridge(*s, x, y, cfg, r1);
    auto b2 = sample_bridge(*s, x, y, cfg, r2);
    Vec ya = s->embed(y);
    for (int a = 0; a < 3; ++a) CHECK(b1.path.points.back()[a] == ya[a]);
    for (std::size_t i = 0; i < b1.path.points.size(); ++i)
        for (int a = 0; a < 3; ++a) CHECK(b1.path.points[i][a] == b2.path.points[i][a]);
}

TEST_CASE("euclidean bridge midpoint marginal is N((x+y)/2, I/4)") {
    auto e = make_manifold("euclidean:d=2");
    HeatKernelModel kern(*e, HeatKernelMode::exact);
    BridgeConfig cfg;
    cfg.t = 1.0;
    cfg.steps = 64;
    cfg.chart_radius = 100.0;
    cfg.kernel = &kern;
    const int n = 20000;
    double m = 0, v = 0;
    for (int i = 0; i < n; ++i) {
        Rng rng(55, i);
        auto b = sample_bridge(*e, {0.0, 0.0}, {1.0, 0.0}, cfg, rng);
        double mid = b.path.points[32][0];
        m += mid;
        v += mid * mid;
    }
    m /= n;
    v = v / n - m * m;
    CHECK(std::fabs(m - 0.5) < 3.0 * std::sqrt(0.25 / n) + 0.01);
    CHECK(std::fabs(v - 0.25) < 0.02);
}

TEST_CASE("loop exit fraction is tiny at small lifetime") {
    auto s = make_manifold("sphere:d=2,r=1");
    HeatKernelModel kern(*s, HeatKernelMode::small_time);
    BridgeConfig cfg;
    cfg.t = 0.01;
    cfg.steps = 64;
    cfg.chart_radius = 1.0;
    cfg.kernel = &kern;
    Vec x = {1.0, 0.5};
    int exits = 0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
        Rng rng(31, i);
        auto b = sample_bridge(*s, x, x, cfg, rng);
        exits += b.meta.exited ? 1 : 0;
    }
    CHECK(exits == 0);
}

TEST_CASE("loop level-2 law is symmetric about zero") {
    // sign test on the antisymmetric level-2 entry of circle loops
    auto c = make_manifold("circle:r=1");
    HeatKernelModel kern(*c, HeatKernelMode::exact);
    BridgeConfig cfg;
    cfg.t = 0.2;
    cfg.steps = 128;
    cfg.chart_radius = 2.0;
    cfg.kernel = &kern;
    const int n = 4000;
    int pos = 0;
    for (int i = 0; i < n; ++i) {
        Rng rng(77, i);
        auto bp = sample_bridge(*c, {0.3}, {0.3}, cfg, rng);
        auto sig = sig_piecewise_linear(bp.path, 2);
        const double* l2 = sig.level(2);
        if (l2[0 * 2 + 1] - l2[1 * 2 + 0] > 0) ++pos;
    }
    // two-sided sign test at the 1% level: |pos - n/2| < 2.58 * sqrt(n)/2
    CHECK(std::fabs(pos - n / 2.0) < 2.58 * std::sqrt(n) / 2.0);
}
