#pragma once

#include "sigmani/tensor.hpp"

#include <vector>

namespace sigmani {

/// Tensor field on the periodic grid theta_0..theta_{G-1} of [0, 2pi).
struct TensorField1D {
    int grid = 0;
    double t = 0;
    std::vector<TruncatedTensor> values; // one per node

    const TruncatedTensor& at(int g) const { return values[g]; }
};

/// Closed form exp((t/2) sum_i E_i (x) E_i) and its RK4 cross-check.
struct EuclideanSolution {
    TruncatedTensor closed_form;
    TruncatedTensor rk4;
    double max_abs_diff = 0;
};
EuclideanSolution solve_euclidean(double t, int dim, int level);

struct CircleSchemeParams {
    int grid = 512;
    int level = 4;
    double dt_safety = 1.0;   // dt = safety * dtheta^2 / 2
    double eps_pde = 1e-3;    // bridge start-time cutoff fraction
};

/// Method-of-lines for the expected-signature PDE of circle Brownian motion:
/// dPsi/dt = 1/2 Psi_thth + F' (x) Psi_th + 1/2 (F'' + F'(x)F') (x) Psi.
TensorField1D solve_circle_bm(double t, const CircleSchemeParams& p);

/// Bridge variant with target angle y: advection by the wrapped-Gaussian
/// score; integration starts at u0 = eps_pde * t from the geodesic-signature
/// field and runs the remaining-lifetime equation forward to u = t.
TensorField1D solve_circle_bridge(double t, double theta_y, const CircleSchemeParams& p);

} // namespace sigmani
