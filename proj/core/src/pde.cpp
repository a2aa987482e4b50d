#include "sigmani/pde.hpp"

#include "sigmani/geometry.hpp"
#include "sigmani/signature.hpp"

#include <cmath>
#include <stdexcept>

namespace sigmani {

EuclideanSolution solve_euclidean(double t, int dim, int level) {
    if (t < 0) throw std::invalid_argument("t must be >= 0");
    TruncatedTensor gen(dim, level);
    if (level >= 2) {
        double* l2 = gen.level(2);
        for (int i = 0; i < dim; ++i) l2[i * dim + i] = 0.5;
    }
    EuclideanSolution out;
    out.closed_form = exp(gen * t);
    // RK4 on dPsi/dt = gen (x) Psi
    int steps = std::max(64, static_cast<int>(std::ceil(t * 256)));
    const double h = t / steps;
    TruncatedTensor psi = TruncatedTensor::unit(dim, level);
    auto rhs = [&](const TruncatedTensor& p) { return mul(gen, p); };
    for (int s = 0; s < steps; ++s) {
        TruncatedTensor k1 = rhs(psi);
        TruncatedTensor k2 = rhs(psi + k1 * (h / 2));
        TruncatedTensor k3 = rhs(psi + k2 * (h / 2));
        TruncatedTensor k4 = rhs(psi + k3 * h);
        psi += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6);
    }
    out.rk4 = psi;
    double md = 0;
    for (std::size_t i = 0; i < psi.raw().size(); ++i)
        md = std::max(md, std::fabs(psi.raw()[i] - out.closed_form.raw()[i]));
    out.max_abs_diff = md;
    return out;
}

namespace {

struct CircleOps {
    int G;
    double dth;
    std::vector<Vec> Fp;  // F'(theta) = (-sin, cos)
    std::vector<Vec> Fpp; // F''(theta) = (-cos, -sin)

    explicit CircleOps(int grid) : G(grid), dth(2.0 * M_PI / grid), Fp(grid), Fpp(grid) {
        for (int g = 0; g < G; ++g) {
            const double th = g * dth;
            Fp[g] = {-std::sin(th), std::cos(th)};
            Fpp[g] = {-std::cos(th), -std::sin(th)};
        }
    }
};

// d/dtheta and d^2/dtheta^2 by second-order central differences on the ring
void ring_derivs(const std::vector<TruncatedTensor>& f, double dth,
                 std::vector<TruncatedTensor>& d1, std::vector<TruncatedTensor>& d2) {
    const int G = static_cast<int>(f.size());
    for (int g = 0; g < G; ++g) {
        const int gp = (g + 1) % G, gm = (g + G - 1) % G;
        d1[g] = (f[gp] - f[gm]) * (1.0 / (2 * dth));
        d2[g] = (f[gp] + f[gm] - f[g] * 2.0) * (1.0 / (dth * dth));
    }
}

TruncatedTensor vec_mul_left(const Vec& v, const TruncatedTensor& psi) {
    // (v as level-1 tensor) (x) psi
    TruncatedTensor lv = from_level1(psi.max_level(), v);
    return mul(lv, psi);
}

} // namespace

TensorField1D solve_circle_bm(double t, const CircleSchemeParams& p) {
    if (p.grid < 64) throw std::invalid_argument("grid must be >= 64");
    CircleOps ops(p.grid);
    const double dt_max = p.dt_safety * ops.dth * ops.dth / 2.0;
    const int steps = std::max(1, static_cast<int>(std::ceil(t / dt_max)));
    const double dt = t / steps;
    if (dt > ops.dth * ops.dth / 2.0 + 1e-15)
        throw std::runtime_error("explicit scheme stability violated");

    std::vector<TruncatedTensor> psi(p.grid, TruncatedTensor::unit(2, p.level));
    std::vector<TruncatedTensor> d1(p.grid, TruncatedTensor(2, p.level));
    std::vector<TruncatedTensor> d2(p.grid, TruncatedTensor(2, p.level));
    auto rhs = [&](const std::vector<TruncatedTensor>& f, std::vector<TruncatedTensor>& out) {
        ring_derivs(f, ops.dth, d1, d2);
        for (int g = 0; g < p.grid; ++g) {
            TruncatedTensor r = d2[g] * 0.5;
            r += vec_mul_left(ops.Fp[g], d1[g]);
            TruncatedTensor zero_order = vec_mul_left(ops.Fpp[g], f[g]);
            zero_order += vec_mul_left(ops.Fp[g], vec_mul_left(ops.Fp[g], f[g]));
            r += zero_order * 0.5;
            out[g] = r;
        }
    };
    std::vector<TruncatedTensor> k1(p.grid, TruncatedTensor(2, p.level));
    std::vector<TruncatedTensor> tmp(p.grid, TruncatedTensor(2, p.level));
    std::vector<TruncatedTensor> k2(p.grid, TruncatedTensor(2, p.level));
    for (int s = 0; s < steps; ++s) {
        // Heun (explicit RK2)
        rhs(psi, k1);
        for (int g = 0; g < p.grid; ++g) tmp[g] = psi[g] + k1[g] * dt;
        rhs(tmp, k2);
        for (int g = 0; g < p.grid; ++g) psi[g] += (k1[g] + k2[g]) * (dt / 2);
    }
    TensorField1D out;
    out.grid = p.grid;
    out.t = t;
    out.values = std::move(psi);
    return out;
}

TensorField1D solve_circle_bridge(double t, double theta_y, const CircleSchemeParams& p) {
    if (p.grid < 64) throw std::invalid_argument("grid must be >= 64");
    if (p.eps_pde <= 0 || p.eps_pde > 0.1) throw std::invalid_argument("eps_pde out of (0, 0.1]");
    CircleOps ops(p.grid);
    const int G = p.grid;
    const double dth = ops.dth;

    auto wrap = [](double a) {
        a = std::fmod(a + M_PI, 2.0 * M_PI);
        if (a < 0) a += 2.0 * M_PI;
        return a - M_PI;
    };
    // wrapped Gaussian heat kernel, cell-averaged so the near-delta start is
    // mass-correct even when its width is below the grid spacing
    auto heat_p_cell = [&](double u, double th) {
        const double del = wrap(theta_y - th);
        const double s = std::sqrt(u);
        double mass = 0;
        for (int k = -3; k <= 3; ++k) {
            const double z = del + 2.0 * M_PI * k;
            mass += 0.5 * (std::erf((z + dth / 2) / (s * std::sqrt(2.0))) -
                           std::erf((z - dth / 2) / (s * std::sqrt(2.0))));
        }
        return mass / dth;
    };
    // wrapped-Gaussian score with max-exponent normalization
    auto score = [&](double u, double th) {
        const double del = wrap(theta_y - th);
        double zmin2 = 1e300;
        for (int k = -3; k <= 3; ++k) {
            const double z = del + 2.0 * M_PI * k;
            zmin2 = std::min(zmin2, z * z);
        }
        double num = 0, den = 0;
        for (int k = -3; k <= 3; ++k) {
            const double z = del + 2.0 * M_PI * k;
            const double w = std::exp(-(z * z - zmin2) / (2.0 * u));
            num += w * (z / u);
            den += w;
        }
        return num / den;
    };

    auto circle = make_manifold("circle:r=1");
    std::vector<TruncatedTensor> geo;
    geo.reserve(G);
    for (int g = 0; g < G; ++g) {
        const double th = g * dth;
        const double del = wrap(theta_y - th);
        geo.push_back(std::fabs(del) < 1e-12
                          ? TruncatedTensor::unit(2, p.level)
                          : sig_geodesic(*circle, {th}, {th + del}, p.level, 512));
    }

    // The advection form is stiff while the drift score ~ 1/u is large, so the
    // run is split: an unnormalized phase p(u,x,y)(x)psi (no advection; the
    // geodesic closure at u0 = eps_pde * t) followed by the advection form
    // once its CFL matches the diffusive step.
    const double u0 = std::min(p.eps_pde * t, 0.5 * t);
    const double u_switch = std::min(std::max(2.34 * dth, 2.0 * u0), 0.5 * t);

    std::vector<TruncatedTensor> bar;
    bar.reserve(G);
    for (int g = 0; g < G; ++g) bar.push_back(geo[g] * heat_p_cell(u0, g * dth));

    const double dt_diff = p.dt_safety * dth * dth / 2.0;
    std::vector<TruncatedTensor> d1(G, TruncatedTensor(2, p.level));
    std::vector<TruncatedTensor> d2(G, TruncatedTensor(2, p.level));
    auto rhs_bm = [&](const std::vector<TruncatedTensor>& f, std::vector<TruncatedTensor>& out) {
        ring_derivs(f, dth, d1, d2);
        for (int g = 0; g < G; ++g) {
            TruncatedTensor r = d2[g] * 0.5;
            r += vec_mul_left(ops.Fp[g], d1[g]);
            TruncatedTensor z0 = vec_mul_left(ops.Fpp[g], f[g]);
            z0 += vec_mul_left(ops.Fp[g], vec_mul_left(ops.Fp[g], f[g]));
            r += z0 * 0.5;
            out[g] = r;
        }
    };
    auto rhs_bridge = [&](const std::vector<TruncatedTensor>& f, double u,
                          std::vector<TruncatedTensor>& out) {
        ring_derivs(f, dth, d1, d2);
        for (int g = 0; g < G; ++g) {
            const double sc = score(u, g * dth);
            TruncatedTensor r = d2[g] * 0.5;
            r += vec_mul_left(ops.Fp[g], d1[g]);
            TruncatedTensor z0 = vec_mul_left(ops.Fpp[g], f[g]);
            z0 += vec_mul_left(ops.Fp[g], vec_mul_left(ops.Fp[g], f[g]));
            r += z0 * 0.5;
            TruncatedTensor adv = d1[g] + vec_mul_left(ops.Fp[g], f[g]);
            r += adv * sc;
            out[g] = r;
        }
    };
    std::vector<TruncatedTensor> k1(G, TruncatedTensor(2, p.level));
    std::vector<TruncatedTensor> k2(G, TruncatedTensor(2, p.level));
    std::vector<TruncatedTensor> tmp(G, TruncatedTensor(2, p.level));

    // phase 1: unnormalized field up to the switch time
    {
        const int steps = std::max(1, static_cast<int>(std::ceil((u_switch - u0) / dt_diff)));
        const double dt = (u_switch - u0) / steps;
        for (int s = 0; s < steps; ++s) {
            rhs_bm(bar, k1);
            for (int g = 0; g < G; ++g) tmp[g] = bar[g] + k1[g] * dt;
            rhs_bm(tmp, k2);
            for (int g = 0; g < G; ++g) bar[g] += (k1[g] + k2[g]) * (dt / 2);
        }
    }
    // normalize; nodes whose weight underflowed restart from the geodesic field,
    // and the exactly-known pinned level-1 slice F(y) - F(x) is enforced at the
    // handoff (it is an invariant of the bridge field, not an approximation)
    std::vector<TruncatedTensor> psi;
    psi.reserve(G);
    {
        double pmax = 0;
        for (int g = 0; g < G; ++g) pmax = std::max(pmax, bar[g].scalar());
        for (int g = 0; g < G; ++g) {
            const double p0 = bar[g].scalar();
            psi.push_back(p0 > 1e-3 * pmax ? bar[g] * (1.0 / p0) : geo[g]);
            double* l1 = psi.back().level(1);
            const double* l1geo = geo[g].level(1);
            l1[0] = l1geo[0];
            l1[1] = l1geo[1];
        }
    }
    // phase 2: advection form with an adaptive step
    double u = u_switch;
    while (u < t - 1e-15) {
        double amax = 0;
        for (int g = 0; g < G; ++g) amax = std::max(amax, std::fabs(score(u, g * dth)));
        double dt = std::min(dt_diff, 0.9 / (amax * amax));
        dt = std::min(dt, t - u);
        rhs_bridge(psi, u, k1);
        for (int g = 0; g < G; ++g) tmp[g] = psi[g] + k1[g] * dt;
        rhs_bridge(tmp, u + dt, k2);
        for (int g = 0; g < G; ++g) psi[g] += (k1[g] + k2[g]) * (dt / 2);
        u += dt;
    }
    TensorField1D out;
    out.grid = G;
    out.t = t;
    out.values = std::move(psi);
    return out;
}

} // namespace sigmani
