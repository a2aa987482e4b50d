#include "sigmani/bridge.hpp"

#include <cmath>
#include <stdexcept>

namespace sigmani {

namespace {
double wrap_angle(double a) {
    a = std::fmod(a + M_PI, 2.0 * M_PI);
    if (a < 0) a += 2.0 * M_PI;
    return a - M_PI;
}
} // namespace

HeatKernelModel::HeatKernelModel(const ManifoldGeometry& M, HeatKernelMode mode, bool g1)
    : M_(M), mode_(mode), g1_(g1) {}

HeatKernelMode default_heat_kernel_mode(const ManifoldGeometry& M) {
    const std::string n = M.name();
    if (n == "euclidean" || n == "circle") return HeatKernelMode::exact;
    return HeatKernelMode::small_time;
}

Vec HeatKernelModel::grad_log_p(double u, const Vec& x, const Vec& y) const {
    if (u <= 0) throw std::invalid_argument("grad_log_p: remaining time must be positive");
    const std::string n = M_.name();
    if (mode_ == HeatKernelMode::exact) {
        if (n == "euclidean") {
            Vec out(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) out[i] = (y[i] - x[i]) / u;
            return out;
        }
        if (n == "circle") {
            // wrapped Gaussian score, 7 image terms; angle variance u / r^2
            const double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
            const double tx = std::atan2(x[1], x[0]);
            const double ty = std::atan2(y[1], y[0]);
            const double v = u / (r * r);
            const double del = wrap_angle(ty - tx);
            double zmin2 = 1e300;
            for (int k = -3; k <= 3; ++k) {
                const double z = del + 2.0 * M_PI * k;
                zmin2 = std::min(zmin2, z * z);
            }
            double num = 0, den = 0;
            for (int k = -3; k <= 3; ++k) {
                const double z = del + 2.0 * M_PI * k;
                const double w = std::exp(-(z * z - zmin2) / (2.0 * v));
                num += w * (z / v);
                den += w;
            }
            const double score_angle = num / den; // d/d theta_x of log p
            // ambient Riemannian gradient: tau * score / r
            Vec tau = {-std::sin(tx), std::cos(tx)};
            return {tau[0] * score_angle / r, tau[1] * score_angle / r};
        }
        throw std::invalid_argument("exact heat kernel unavailable for " + n);
    }
    // small-time: log_map / u + grad G1
    Vec lg = M_.ambient_log(x, y);
    Vec out(lg.size());
    for (std::size_t i = 0; i < lg.size(); ++i) out[i] = lg[i] / u;
    if (g1_) {
        Vec g1 = M_.grad_G1(x, y);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += g1[i];
    }
    return out;
}

AmbientPath sample_bm(const ManifoldGeometry& M, const Vec& x, double t, int steps, Rng& rng) {
    if (steps < 1) throw std::invalid_argument("sample_bm: steps must be >= 1");
    const int N = M.ambient_dim();
    const double h = t / steps;
    const double sq = std::sqrt(h);
    AmbientPath out;
    out.provenance = "bridge sample";
    out.times.reserve(steps + 1);
    out.points.reserve(steps + 1);
    Vec p = M.embed(x);
    out.times.push_back(0.0);
    out.points.push_back(p);
    Vec xi(N), u(N);
    for (int k = 0; k < steps; ++k) {
        for (int i = 0; i < N; ++i) xi[i] = rng.next_normal();
        Mat P = M.ambient_projector(p);
        for (int i = 0; i < N; ++i) {
            double s = 0;
            for (int j = 0; j < N; ++j) s += P[i][j] * xi[j];
            u[i] = s * sq;
        }
        p = M.ambient_exp(p, u);
        out.times.push_back(static_cast<double>(k + 1) / steps);
        out.points.push_back(p);
    }
    return out;
}

BridgePath sample_bridge(const ManifoldGeometry& M, const Vec& x, const Vec& y,
                         const BridgeConfig& cfg, Rng& rng) {
    if (!cfg.kernel) throw std::invalid_argument("sample_bridge: kernel required");
    const int N = M.ambient_dim();
    const int K = cfg.steps;
    const double t = cfg.t;
    const double h = t / K;
    const double sq = std::sqrt(h);
    const double sign = cfg.antithetic_negate ? -1.0 : 1.0;

    BridgePath bp;
    bp.meta.chart_radius = cfg.chart_radius;
    bp.meta.steps = K;
    bp.meta.lifetime = t;
    bp.path.provenance = "bridge sample";
    bp.path.times.reserve(K + 1);
    bp.path.points.reserve(K + 1);

    Vec p = M.embed(x);
    const Vec yamb = M.embed(y);
    bp.path.times.push_back(0.0);
    bp.path.points.push_back(p);
    Vec xi(N), step(N);
    for (int k = 0; k < K - 1; ++k) {
        const double srem = t - k * h;
        Vec drift = cfg.kernel->grad_log_p(srem, p, yamb);
        double dn = 0;
        for (double v : drift) dn += v * v;
        dn = std::sqrt(dn);
        // clamp: |drift| * h <= chart_radius / 4
        const double cap = cfg.chart_radius / (4.0 * h);
        if (dn > cap) {
            const double f = cap / dn;
            for (double& v : drift) v *= f;
        }
        for (int i = 0; i < N; ++i) xi[i] = sign * rng.next_normal();
        Mat P = M.ambient_projector(p);
        for (int i = 0; i < N; ++i) {
            double s = 0;
            for (int j = 0; j < N; ++j) s += P[i][j] * xi[j];
            step[i] = drift[i] * h + s * sq;
        }
        p = M.ambient_exp(p, step);
        if (!bp.meta.exited && M.ambient_distance(p, yamb) > cfg.chart_radius) bp.meta.exited = true;
        bp.path.times.push_back(static_cast<double>(k + 1) / K);
        bp.path.points.push_back(p);
    }
    // forced closure: last increment replaced by the geodesic to y
    bp.path.times.push_back(1.0);
    bp.path.points.push_back(yamb);
    return bp;
}

} // namespace sigmani
