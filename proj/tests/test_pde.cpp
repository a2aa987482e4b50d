#include <doctest.h>

#include "sigmani/pde.hpp"

#include <cmath>

using namespace sigmani;

TEST_CASE("euclidean closed form and RK4 agree") {
    auto sol = solve_euclidean(0.7, 2, 6);
    CHECK(sol.max_abs_diff < 1e-10);
    // t = 0 -> unit
    auto z = solve_euclidean(0.0, 2, 4);
    CHECK(z.closed_form.scalar() == 1.0);
    for (int k = 1; k <= 4; ++k) CHECK(hs_norm(z.closed_form, k) == 0.0);
    // level-2 diagonal t/2, odd levels vanish
    CHECK(sol.closed_form.level(2)[0] == doctest::Approx(0.35).epsilon(1e-12));
    CHECK(hs_norm(sol.closed_form, 1) == 0.0);
    CHECK(hs_norm(sol.closed_form, 3) == 0.0);
    CHECK(hs_norm(sol.closed_form, 5) == 0.0);
}

TEST_CASE("circle BM field matches the characteristic-function solution") {
    CircleSchemeParams p;
    p.grid = 256;
    p.level = 2;
    TensorField1D f = solve_circle_bm(0.5, p);
    const double want = std::exp(-0.25) - 1.0; // e^{-t/2} - 1 at t = 0.5
    double worst = 0;
    for (int g = 0; g < p.grid; ++g) {
        const double th = 2.0 * M_PI * g / p.grid;
        const double* l1 = f.at(g).level(1);
        worst = std::max(worst, std::fabs(l1[0] - want * std::cos(th)));
        worst = std::max(worst, std::fabs(l1[1] - want * std::sin(th)));
        CHECK(f.at(g).scalar() == doctest::Approx(1.0).epsilon(1e-13));
    }
    CHECK(worst < 2e-5);
}

TEST_CASE("grid refinement is second order") {
    auto err = [](int G) {
        CircleSchemeParams p;
        p.grid = G;
        p.level = 1;
        TensorField1D f = solve_circle_bm(0.25, p);
        const double want = std::exp(-0.125) - 1.0;
        double worst = 0;
        for (int g = 0; g < G; ++g) {
            const double th = 2.0 * M_PI * g / G;
            worst = std::max(worst, std::fabs(f.at(g).level(1)[0] - want * std::cos(th)));
        }
        return worst;
    };
    const double e1 = err(64), e2 = err(128);
    CHECK(e1 / e2 >= 3.5);
}

TEST_CASE("circle bridge field pins the endpoint difference") {
    CircleSchemeParams p;
    p.grid = 512;
    p.level = 2;
    p.eps_pde = 1e-3;
    const double ty = 0.9;
    TensorField1D f = solve_circle_bridge(0.2, ty, p);
    double worst = 0;
    for (int g = 0; g < p.grid; ++g) {
        const double th = 2.0 * M_PI * g / p.grid;
        const double* l1 = f.at(g).level(1);
        worst = std::max(worst, std::fabs(l1[0] - (std::cos(ty) - std::cos(th))));
        worst = std::max(worst, std::fabs(l1[1] - (std::sin(ty) - std::sin(th))));
    }
    CHECK(worst < 1e-4);
    CHECK_THROWS(solve_circle_bridge(0.2, 0.0, [] {
        CircleSchemeParams q;
        q.eps_pde = 0.5;
        return q;
    }()));
}

TEST_CASE("loop level-2 vanishes by time-reversal symmetry") {
    CircleSchemeParams p;
    p.grid = 512;
    p.level = 2;
    TensorField1D f = solve_circle_bridge(0.2, 0.0, p);
    // at the base node theta = 0 (the loop), pi_2 of psi is ~0
    const double* l2 = f.at(0).level(2);
    for (int i = 0; i < 4; ++i) CHECK(std::fabs(l2[i]) < 1e-4);
}
