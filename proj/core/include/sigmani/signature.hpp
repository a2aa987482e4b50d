#pragma once

#include "sigmani/geometry.hpp"
#include "sigmani/tensor.hpp"

#include <string>
#include <vector>

namespace sigmani {

/// Sampled path in ambient coordinates with time stamps in [0,1].
struct AmbientPath {
    std::vector<double> times;       // strictly increasing, size P
    std::vector<Vec> points;         // size P, each R^N
    std::string provenance = "user"; // bridge sample | geodesic | user

    std::size_t size() const { return points.size(); }
};

/// Exact signature of the chordal (piecewise-linear) interpolation:
/// per-segment exp of the increment, composed by Chen's identity.
TruncatedTensor sig_piecewise_linear(const AmbientPath& path, int level);

/// Signature of the embedded minimizing geodesic from x to y (chart points),
/// sampled uniformly in arc length.
TruncatedTensor sig_geodesic(const ManifoldGeometry& M, const Vec& x, const Vec& y, int level,
                             int samples_per_unit_length = 512);

/// In-place Chen update: sig <- sig (x) exp(delta). Exploits the rank-1
/// structure of segment signatures; this is the sampler's hot loop.
void chen_append_segment(TruncatedTensor& sig, const Vec& delta);

} // namespace sigmani
