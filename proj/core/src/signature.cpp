#include "sigmani/signature.hpp"

#include <cmath>
#include <stdexcept>

namespace sigmani {

void chen_append_segment(TruncatedTensor& sig, const Vec& delta) {
    const int m = sig.max_level();
    const int N = sig.ambient_dim();
    if (static_cast<int>(delta.size()) != N) throw std::invalid_argument("segment dimension mismatch");
    if (m == 0) return;
    // powers v^{(x)p} / p!
    std::vector<std::vector<double>> pw(m + 1);
    pw[0] = {1.0};
    for (int p = 1; p <= m; ++p) {
        const auto& prev = pw[p - 1];
        std::vector<double>& cur = pw[p];
        cur.assign(prev.size() * N, 0.0);
        std::size_t idx = 0;
        const double inv = 1.0 / p;
        for (double a : prev)
            for (int i = 0; i < N; ++i) cur[idx++] = a * delta[i] * inv;
    }
    // out_k = sum_j sig_j (x) pw[k-j], top-down so sig can be updated in place
    for (int k = m; k >= 1; --k) {
        double* ok = sig.level(k);
        const std::size_t sk = sig.level_size(k);
        // j = k term is sig_k itself (pw[0] = 1): already in place
        for (int j = k - 1; j >= 0; --j) {
            const double* aj = sig.level(j);
            const auto& b = pw[k - j];
            const std::size_t sb = b.size();
            std::size_t idx = 0;
            for (std::size_t u = 0; u < sig.level_size(j); ++u) {
                const double au = aj[u];
                if (au == 0.0) { idx += sb; continue; }
                for (std::size_t v = 0; v < sb; ++v) ok[idx++] += au * b[v];
            }
        }
        (void)sk;
    }
}

TruncatedTensor sig_piecewise_linear(const AmbientPath& path, int level) {
    if (path.size() < 1) throw std::invalid_argument("empty path");
    for (std::size_t s = 1; s < path.times.size(); ++s)
        if (!(path.times[s] > path.times[s - 1]))
            throw std::invalid_argument("path time stamps must be strictly increasing");
    const int N = static_cast<int>(path.points[0].size());
    TruncatedTensor sig = TruncatedTensor::unit(N, level);
    if (path.size() < 2) return sig; // degenerate single-point path: unit signature
    Vec delta(N);
    for (std::size_t s = 1; s < path.size(); ++s) {
        for (int i = 0; i < N; ++i) delta[i] = path.points[s][i] - path.points[s - 1][i];
        chen_append_segment(sig, delta);
    }
    return sig;
}

TruncatedTensor sig_geodesic(const ManifoldGeometry& M, const Vec& x, const Vec& y, int level,
                             int samples_per_unit_length) {
    const double dist = M.distance(x, y);
    Vec v = M.log_map(x, y);
    int segs = std::max(2, static_cast<int>(std::ceil(dist * samples_per_unit_length)));
    AmbientPath path;
    path.provenance = "geodesic";
    path.times.reserve(segs + 1);
    path.points.reserve(segs + 1);
    for (int s = 0; s <= segs; ++s) {
        double u = static_cast<double>(s) / segs;
        Vec vu(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) vu[i] = v[i] * u;
        path.times.push_back(u);
        path.points.push_back(M.embed(M.exp_map(x, vu)));
    }
    return sig_piecewise_linear(path, level);
}

} // namespace sigmani
