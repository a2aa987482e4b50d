#pragma once

#include "sigmani/geometry.hpp"
#include "sigmani/rng.hpp"
#include "sigmani/signature.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace sigmani {

enum class HeatKernelMode { exact, small_time };

/// Bridge drift provider: grad_x log p(u, x, y) as an ambient tangent vector.
///
/// exact mode: closed forms (Euclidean; circle via a 7-image wrapped Gaussian).
/// small_time mode: log_map(x->y)/u plus the optional gradient of
/// G1 = -1/2 log det(d exp_y), the first small-time correction of the
/// heat-kernel log-gradient.
class HeatKernelModel {
public:
    HeatKernelModel(const ManifoldGeometry& M, HeatKernelMode mode, bool g1_correction = true);

    Vec grad_log_p(double u, const Vec& x_amb, const Vec& y_amb) const;
    HeatKernelMode mode() const { return mode_; }

private:
    const ManifoldGeometry& M_;
    HeatKernelMode mode_;
    bool g1_;
};

/// Pick the default drift mode for a manifold: exact where closed forms exist.
HeatKernelMode default_heat_kernel_mode(const ManifoldGeometry& M);

struct BridgeMeta {
    bool exited = false;
    double chart_radius = 0.0;
    int steps = 0;
    double lifetime = 0.0;
    std::uint64_t master_seed = 0;
    std::uint64_t path_index = 0;
};

struct BridgePath {
    AmbientPath path;
    BridgeMeta meta;
};

/// Geodesic random walk approximating Brownian motion started at x (chart).
AmbientPath sample_bm(const ManifoldGeometry& M, const Vec& x, double t, int steps, Rng& rng);

struct BridgeConfig {
    double t = 0.05;
    int steps = 256;
    double chart_radius = 1.0;    // exit threshold; clamp scale
    bool antithetic_negate = false;
    const HeatKernelModel* kernel = nullptr;
};

/// Euler-Maruyama with retraction and forced geodesic closure on the last step.
/// Drift is clamped so |drift| * h <= chart_radius / 4. The sample is always
/// returned; `exited` reports the localization diagnostic (discard policy is
/// the estimator's call).
BridgePath sample_bridge(const ManifoldGeometry& M, const Vec& x, const Vec& y,
                         const BridgeConfig& cfg, Rng& rng);

} // namespace sigmani
