#include "sigmani/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sigmani {

namespace {

Vec vsub(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}
Vec vadd(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}
Vec vscale(const Vec& a, double c) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * c;
    return r;
}
double dot(const Vec& a, const Vec& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}
double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

Mat mat_zero(int r, int c) { return Mat(r, Vec(c, 0.0)); }

Mat mat_inverse(Mat a) {
    const int n = static_cast<int>(a.size());
    Mat inv = mat_zero(n, n);
    for (int i = 0; i < n; ++i) inv[i][i] = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        if (std::fabs(a[piv][col]) < 1e-14) throw std::runtime_error("singular matrix");
        std::swap(a[piv], a[col]);
        std::swap(inv[piv], inv[col]);
        const double p = a[col][col];
        for (int c = 0; c < n; ++c) { a[col][c] /= p; inv[col][c] /= p; }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            if (f == 0.0) continue;
            for (int c = 0; c < n; ++c) { a[r][c] -= f * a[col][c]; inv[r][c] -= f * inv[col][c]; }
        }
    }
    return inv;
}

double mat_det(Mat a) {
    const int n = static_cast<int>(a.size());
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        if (piv != col) { std::swap(a[piv], a[col]); det = -det; }
        if (std::fabs(a[col][col]) < 1e-16) return 0.0;
        det *= a[col][col];
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
        }
    }
    return det;
}

double wrap_angle(double a) {
    a = std::fmod(a + M_PI, 2.0 * M_PI);
    if (a < 0) a += 2.0 * M_PI;
    return a - M_PI;
}

} // namespace

// ---------------------------------------------------------------------------
// base-class finite-difference machinery
// ---------------------------------------------------------------------------

Mat ManifoldGeometry::jacobian(const Vec& x) const {
    const int d = chart_dim(), N = ambient_dim();
    Mat J = mat_zero(N, d);
    const double h = fd_step_;
    for (int j = 0; j < d; ++j) {
        Vec xp = x, xm = x, xp2 = x, xm2 = x;
        xp[j] += h; xm[j] -= h; xp2[j] += h / 2; xm2[j] -= h / 2;
        Vec d1 = vscale(vsub(embed(xp), embed(xm)), 1.0 / (2 * h));
        Vec d2 = vscale(vsub(embed(xp2), embed(xm2)), 1.0 / h);
        for (int i = 0; i < N; ++i) J[i][j] = (4 * d2[i] - d1[i]) / 3.0; // Richardson
    }
    return J;
}

Vec ManifoldGeometry::second_deriv(const Vec& x, int i, int j) const {
    const double h = fd_step_;
    auto mixed = [&](double hh) {
        Vec a = x, b = x, c = x, e = x;
        a[i] += hh; a[j] += hh;
        b[i] += hh; b[j] -= hh;
        c[i] -= hh; c[j] += hh;
        e[i] -= hh; e[j] -= hh;
        Vec r = vsub(vadd(embed(a), embed(e)), vadd(embed(b), embed(c)));
        return vscale(r, 1.0 / (4 * hh * hh));
    };
    if (i == j) {
        auto sec = [&](double hh) {
            Vec a = x, b = x;
            a[i] += hh; b[i] -= hh;
            Vec r = vadd(embed(a), embed(b));
            Vec f0 = embed(x);
            for (std::size_t t = 0; t < r.size(); ++t) r[t] -= 2 * f0[t];
            return vscale(r, 1.0 / (hh * hh));
        };
        Vec d1 = sec(h), d2 = sec(h / 2);
        Vec out(d1.size());
        for (std::size_t t = 0; t < out.size(); ++t) out[t] = (4 * d2[t] - d1[t]) / 3.0;
        return out;
    }
    Vec d1 = mixed(h), d2 = mixed(h / 2);
    Vec out(d1.size());
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = (4 * d2[t] - d1[t]) / 3.0;
    return out;
}

Vec ManifoldGeometry::third_deriv(const Vec& x, int i, int j, int k) const {
    // larger step: third-order central differences lose too many digits at 1e-4
    const double h0 = 1e-2;
    auto d3 = [&](double h) -> Vec {
        if (i == j && j == k) {
            Vec a = x, b = x, c = x, e = x;
            a[i] += 2 * h; b[i] += h; c[i] -= h; e[i] -= 2 * h;
            Vec r = vsub(embed(a), embed(e));
            Vec s = vsub(embed(b), embed(c));
            for (std::size_t t = 0; t < r.size(); ++t) r[t] = (r[t] - 2 * s[t]) / (2 * h * h * h);
            return r;
        }
        // generic: difference of second derivatives along k
        Vec xk = x;
        xk[k] += h;
        Vec xm = x;
        xm[k] -= h;
        auto sd = [&](const Vec& at) {
            // plain mixed second derivative at 'at' (no Richardson inside)
            Vec a = at, b = at, c = at, e = at;
            if (i == j) {
                a[i] += h; b[i] -= h;
                Vec r = vadd(embed(a), embed(b));
                Vec f0 = embed(at);
                for (std::size_t t = 0; t < r.size(); ++t) r[t] -= 2 * f0[t];
                return vscale(r, 1.0 / (h * h));
            }
            a[i] += h; a[j] += h;
            b[i] += h; b[j] -= h;
            c[i] -= h; c[j] += h;
            e[i] -= h; e[j] -= h;
            Vec r = vsub(vadd(embed(a), embed(e)), vadd(embed(b), embed(c)));
            return vscale(r, 1.0 / (4 * h * h));
        };
        return vscale(vsub(sd(xk), sd(xm)), 1.0 / (2 * h));
    };
    Vec c1 = d3(h0), c2 = d3(h0 / 2);
    Vec out(c1.size());
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = (4 * c2[t] - c1[t]) / 3.0;
    return out;
}

Mat ManifoldGeometry::metric(const Vec& x) const {
    const Mat J = jacobian(x);
    const int d = chart_dim(), N = ambient_dim();
    Mat g = mat_zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double s = 0;
            for (int a = 0; a < N; ++a) s += J[a][i] * J[a][j];
            g[i][j] = s;
        }
    return g;
}

Mat ManifoldGeometry::metric_inverse(const Vec& x) const { return mat_inverse(metric(x)); }

std::vector<double> ManifoldGeometry::christoffel(const Vec& x) const {
    const int d = chart_dim();
    const double h = fd_step_;
    // dg[l][i][j] = d_l g_ij via central differences
    std::vector<Mat> dg(d);
    for (int l = 0; l < d; ++l) {
        Vec xp = x, xm = x;
        xp[l] += h; xm[l] -= h;
        Mat gp = metric(xp), gm = metric(xm);
        dg[l] = mat_zero(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) dg[l][i][j] = (gp[i][j] - gm[i][j]) / (2 * h);
    }
    Mat ginv = metric_inverse(x);
    std::vector<double> gamma(static_cast<std::size_t>(d) * d * d, 0.0);
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double s = 0;
                for (int l = 0; l < d; ++l)
                    s += ginv[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
                gamma[(static_cast<std::size_t>(k) * d + i) * d + j] = 0.5 * s;
            }
    return gamma;
}

CurvatureData ManifoldGeometry::curvature(const Vec& x) const {
    const int d = chart_dim();
    const double h = fd_step_ * 10; // derivative of Christoffels: be gentler on roundoff
    auto gam = [&](const Vec& p) { return christoffel(p); };
    // dGamma[m][k][i][j] = d_m Gamma^k_ij, one Richardson level
    std::vector<std::vector<double>> dGamma(d);
    for (int m = 0; m < d; ++m) {
        auto der = [&](double hh) {
            Vec xp = x, xm = x;
            xp[m] += hh; xm[m] -= hh;
            auto gp = gam(xp), gm = gam(xm);
            std::vector<double> out(gp.size());
            for (std::size_t t = 0; t < gp.size(); ++t) out[t] = (gp[t] - gm[t]) / (2 * hh);
            return out;
        };
        auto d1 = der(h), d2r = der(h / 2);
        dGamma[m].resize(d1.size());
        for (std::size_t t = 0; t < d1.size(); ++t) dGamma[m][t] = (4 * d2r[t] - d1[t]) / 3.0;
    }
    auto g0 = christoffel(x);
    auto G = [&](const std::vector<double>& v, int k, int i, int j) {
        return v[(static_cast<std::size_t>(k) * d + i) * d + j];
    };
    // R(d_a, d_b) d_c = Rl[l][a][b][c] d_l
    auto Rl = [&](int l, int a, int b, int c) {
        double s = G(dGamma[a], l, b, c) - G(dGamma[b], l, a, c);
        for (int m = 0; m < d; ++m)
            s += G(g0, l, a, m) * G(g0, m, b, c) - G(g0, l, b, m) * G(g0, m, a, c);
        return s;
    };
    Mat g = metric(x);
    CurvatureData out;
    out.d = d;
    out.riemann.assign(static_cast<std::size_t>(d) * d * d * d, 0.0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    double s = 0;
                    for (int m = 0; m < d; ++m) s += g[i][m] * Rl(m, k, l, j);
                    out.riemann[((static_cast<std::size_t>(i) * d + j) * d + k) * d + l] = s;
                }
    out.ricci = mat_zero(d, d);
    for (int v = 0; v < d; ++v)
        for (int w = 0; w < d; ++w) {
            double s = 0;
            for (int a = 0; a < d; ++a) s += Rl(a, a, v, w);
            out.ricci[v][w] = s;
        }
    Mat ginv = mat_inverse(g);
    double S = 0;
    for (int v = 0; v < d; ++v)
        for (int w = 0; w < d; ++w) S += ginv[v][w] * out.ricci[v][w];
    out.scalar = S;
    for (auto& r : out.riemann)
        if (!std::isfinite(r)) throw std::runtime_error("curvature: finite differences broke down");
    return out;
}

ExtrinsicData ManifoldGeometry::extrinsic(const Vec& x) const {
    const int d = chart_dim(), N = ambient_dim();
    const Mat J = jacobian(x);
    const Mat ginv = metric_inverse(x);
    ExtrinsicData out;
    out.tangent_proj = mat_zero(N, N);
    // P = J ginv J^T
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) {
            double s = 0;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) s += J[a][i] * ginv[i][j] * J[b][j];
            out.tangent_proj[a][b] = s;
        }
    out.second_form.resize(static_cast<std::size_t>(d) * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            Vec dij = second_deriv(x, i, j);
            Vec nrm(N);
            for (int a = 0; a < N; ++a) {
                double t = 0;
                for (int b = 0; b < N; ++b) t += out.tangent_proj[a][b] * dij[b];
                nrm[a] = dij[a] - t;
            }
            out.second_form[static_cast<std::size_t>(i) * d + j] = nrm;
        }
    out.mean_curvature.assign(N, 0.0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int a = 0; a < N; ++a)
                out.mean_curvature[a] += ginv[i][j] * out.second_form[static_cast<std::size_t>(i) * d + j][a] / d;
    out.H2 = dot(out.mean_curvature, out.mean_curvature);
    out.BH = mat_zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            out.BH[i][j] = dot(out.second_form[static_cast<std::size_t>(i) * d + j], out.mean_curvature);
    return out;
}

Vec ManifoldGeometry::exp_map(const Vec& x, const Vec& v) const {
    // RK4 on the geodesic equation x'' = -Gamma(x)(x',x')
    const int d = chart_dim();
    Mat g = metric(x);
    double speed = 0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) speed += g[i][j] * v[i] * v[j];
    speed = std::sqrt(std::max(speed, 0.0));
    if (speed < 1e-15) return x;
    const double hmax = 1e-3 * injectivity_radius();
    int steps = std::max(16, static_cast<int>(std::ceil(speed / hmax)));
    steps = std::min(steps, 20000);
    const double dt = 1.0 / steps;
    Vec q = x, p = v;
    auto acc = [&](const Vec& qq, const Vec& pp) {
        auto gam = christoffel(qq);
        Vec a(d, 0.0);
        for (int k = 0; k < d; ++k)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    a[k] -= gam[(static_cast<std::size_t>(k) * d + i) * d + j] * pp[i] * pp[j];
        return a;
    };
    for (int s = 0; s < steps; ++s) {
        Vec k1q = p, k1p = acc(q, p);
        Vec k2q = vadd(p, vscale(k1p, dt / 2)), k2p = acc(vadd(q, vscale(k1q, dt / 2)), vadd(p, vscale(k1p, dt / 2)));
        Vec k3q = vadd(p, vscale(k2p, dt / 2)), k3p = acc(vadd(q, vscale(k2q, dt / 2)), vadd(p, vscale(k2p, dt / 2)));
        Vec k4q = vadd(p, vscale(k3p, dt)), k4p = acc(vadd(q, vscale(k3q, dt)), vadd(p, vscale(k3p, dt)));
        for (int i = 0; i < d; ++i) {
            q[i] += dt * (k1q[i] + 2 * k2q[i] + 2 * k3q[i] + k4q[i]) / 6;
            p[i] += dt * (k1p[i] + 2 * k2p[i] + 2 * k3p[i] + k4p[i]) / 6;
        }
    }
    return q;
}

Vec ManifoldGeometry::log_map(const Vec& x, const Vec& y) const {
    // damped geodesic shooting (Gauss-Newton on the chart endpoint residual)
    const int d = chart_dim();
    Vec v = vsub(y, x);
    const double h = 1e-6;
    for (int iter = 0; iter < 100; ++iter) {
        Vec r = vsub(exp_map(x, v), y);
        if (norm(r) < 1e-10) return v;
        Mat Jr = mat_zero(d, d);
        for (int j = 0; j < d; ++j) {
            Vec vp = v, vm = v;
            vp[j] += h; vm[j] -= h;
            Vec rp = vsub(exp_map(x, vp), exp_map(x, vm));
            for (int i = 0; i < d; ++i) Jr[i][j] = rp[i] / (2 * h);
        }
        Mat Jinv = mat_inverse(Jr);
        Vec dv(d, 0.0);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) dv[i] += Jinv[i][j] * r[j];
        double damp = 1.0;
        Vec vn = vsub(v, vscale(dv, damp));
        // damped update: keep the residual decreasing
        for (int bt = 0; bt < 8 && norm(vsub(exp_map(x, vn), y)) > norm(r); ++bt) {
            damp *= 0.5;
            vn = vsub(v, vscale(dv, damp));
        }
        v = vn;
    }
    if (norm(vsub(exp_map(x, v), y)) > 1e-7)
        throw std::runtime_error("log_map: shooting failed to converge (cut-locus?)");
    return v;
}

double ManifoldGeometry::distance(const Vec& x, const Vec& y) const {
    Vec v = log_map(x, y);
    Mat g = metric(x);
    double s = 0;
    const int d = chart_dim();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) s += g[i][j] * v[i] * v[j];
    return std::sqrt(std::max(s, 0.0));
}

Vec ManifoldGeometry::ambient_exp(const Vec& p, const Vec& u) const {
    Vec x = chart_from_ambient(p);
    Mat J = jacobian(x);
    Mat ginv = metric_inverse(x);
    const int d = chart_dim(), N = ambient_dim();
    // chart components of the tangent vector: v = ginv J^T u
    Vec v(d, 0.0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double s = 0;
            for (int a = 0; a < N; ++a) s += J[a][j] * u[a];
            v[i] += ginv[i][j] * s;
        }
    return embed(exp_map(x, v));
}

Vec ManifoldGeometry::ambient_log(const Vec& p, const Vec& q) const {
    Vec x = chart_from_ambient(p), y = chart_from_ambient(q);
    Vec v = log_map(x, y);
    Mat J = jacobian(x);
    const int d = chart_dim(), N = ambient_dim();
    Vec u(N, 0.0);
    for (int a = 0; a < N; ++a)
        for (int i = 0; i < d; ++i) u[a] += J[a][i] * v[i];
    return u;
}

double ManifoldGeometry::ambient_distance(const Vec& p, const Vec& q) const {
    return distance(chart_from_ambient(p), chart_from_ambient(q));
}

Mat ManifoldGeometry::ambient_projector(const Vec& p) const {
    return extrinsic(chart_from_ambient(p)).tangent_proj;
}

std::function<Vec(const Vec&)> ManifoldGeometry::normal_chart(const Vec& x) const {
    // g-orthonormal frame at x by Gram-Schmidt on the chart basis
    const int d = chart_dim();
    Mat g = metric(x);
    Mat E = mat_zero(d, d); // columns: e_a chart components
    for (int a = 0; a < d; ++a) {
        Vec e(d, 0.0);
        e[a] = 1.0;
        for (int b = 0; b < a; ++b) {
            double ip = 0;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) ip += g[i][j] * e[i] * E[j][b];
            for (int i = 0; i < d; ++i) e[i] -= ip * E[i][b];
        }
        double nn = 0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) nn += g[i][j] * e[i] * e[j];
        nn = std::sqrt(nn);
        for (int i = 0; i < d; ++i) E[i][a] = e[i] / nn;
    }
    Vec base = x;
    return [this, base, E, d](const Vec& xi) {
        Vec v(d, 0.0);
        for (int i = 0; i < d; ++i)
            for (int a = 0; a < d; ++a) v[i] += E[i][a] * xi[a];
        return embed(exp_map(base, v));
    };
}

double ManifoldGeometry::log_det_dexp(const Vec& y_amb, const Vec& x_amb) const {
    // det(d exp_y)_x = sqrt(det g_n(xi)) in the normal chart of y
    auto Fy = normal_chart(chart_from_ambient(y_amb));
    // normal coordinates of x: xi_a = <log_y(x), e_a>; recover via ambient log
    // and the frame implicit in Fy. FD the chart map around 0 to get the frame.
    const int d = chart_dim(), N = ambient_dim();
    Vec u = ambient_log(y_amb, x_amb);
    const double h = 1e-5;
    Mat frame = mat_zero(N, d);
    Vec zero(d, 0.0);
    for (int a = 0; a < d; ++a) {
        Vec xp = zero, xm = zero;
        xp[a] += h; xm[a] -= h;
        Vec col = vscale(vsub(Fy(xp), Fy(xm)), 1.0 / (2 * h));
        for (int i = 0; i < N; ++i) frame[i][a] = col[i];
    }
    Vec xi(d, 0.0);
    for (int a = 0; a < d; ++a)
        for (int i = 0; i < N; ++i) xi[a] += frame[i][a] * u[i];
    // metric of the normal chart at xi
    const double hh = 1e-4;
    Mat gn = mat_zero(d, d);
    Mat dF = mat_zero(N, d);
    for (int a = 0; a < d; ++a) {
        Vec xp = xi, xm = xi;
        xp[a] += hh; xm[a] -= hh;
        Vec col = vscale(vsub(Fy(xp), Fy(xm)), 1.0 / (2 * hh));
        for (int i = 0; i < N; ++i) dF[i][a] = col[i];
    }
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            double s = 0;
            for (int i = 0; i < N; ++i) s += dF[i][a] * dF[i][b];
            gn[a][b] = s;
        }
    return 0.5 * std::log(mat_det(gn));
}

Vec ManifoldGeometry::grad_G1(const Vec& x_amb, const Vec& y_amb) const {
    // G1(x,y) = -1/2 log det(d exp_y)_x; tangential gradient in x by FD along
    // an orthonormal tangent frame at x.
    const int N = ambient_dim(), d = chart_dim();
    Mat P = ambient_projector(x_amb);
    // build tangent ONB of T_x from the projector columns
    std::vector<Vec> frame;
    for (int c = 0; c < N && static_cast<int>(frame.size()) < d; ++c) {
        Vec cand(N);
        for (int i = 0; i < N; ++i) cand[i] = P[i][c];
        for (const auto& f : frame) {
            double ip = dot(cand, f);
            for (int i = 0; i < N; ++i) cand[i] -= ip * f[i];
        }
        double nn = norm(cand);
        if (nn > 1e-8) frame.push_back(vscale(cand, 1.0 / nn));
    }
    const double h = 1e-4;
    Vec out(N, 0.0);
    for (const auto& e : frame) {
        Vec xp = ambient_exp(x_amb, vscale(e, h));
        Vec xm = ambient_exp(x_amb, vscale(e, -h));
        double gp = -0.5 * log_det_dexp(y_amb, xp);
        double gm = -0.5 * log_det_dexp(y_amb, xm);
        double der = (gp - gm) / (2 * h);
        for (int i = 0; i < N; ++i) out[i] += der * e[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// theoretical expansion tensors and identity checks
// ---------------------------------------------------------------------------

namespace {
struct NormalJets {
    int d, N;
    std::vector<Vec> dF;    // dF[i]
    std::vector<Vec> d2F;   // d2F[i*d+j]
    std::vector<Vec> d3F;   // d3F[(i*d+j)*d+k]
};

NormalJets normal_jets(const ManifoldGeometry& M, const Vec& x) {
    NormalJets J;
    J.d = M.chart_dim();
    J.N = M.ambient_dim();
    auto F = M.normal_chart(x);
    const int d = J.d;
    Vec zero(d, 0.0);
    auto emb = [&](const Vec& xi) { return F(xi); };
    const double h1 = 1e-4, h3 = 1e-2;
    J.dF.resize(d);
    for (int i = 0; i < d; ++i) {
        Vec xp = zero, xm = zero, xp2 = zero, xm2 = zero;
        xp[i] += h1; xm[i] -= h1; xp2[i] += h1 / 2; xm2[i] -= h1 / 2;
        Vec a = vscale(vsub(emb(xp), emb(xm)), 1.0 / (2 * h1));
        Vec b = vscale(vsub(emb(xp2), emb(xm2)), 1.0 / h1);
        Vec out(J.N);
        for (int t = 0; t < J.N; ++t) out[t] = (4 * b[t] - a[t]) / 3.0;
        J.dF[i] = out;
    }
    J.d2F.resize(static_cast<std::size_t>(d) * d);
    const double h2 = 1e-3;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            auto go = [&](double hh) {
                if (i == j) {
                    Vec a = zero, b = zero;
                    a[i] += hh; b[i] -= hh;
                    Vec r = vadd(emb(a), emb(b));
                    Vec f0 = emb(zero);
                    for (int t = 0; t < J.N; ++t) r[t] -= 2 * f0[t];
                    return vscale(r, 1.0 / (hh * hh));
                }
                Vec a = zero, b = zero, c = zero, e = zero;
                a[i] += hh; a[j] += hh;
                b[i] += hh; b[j] -= hh;
                c[i] -= hh; c[j] += hh;
                e[i] -= hh; e[j] -= hh;
                return vscale(vsub(vadd(emb(a), emb(e)), vadd(emb(b), emb(c))), 1.0 / (4 * hh * hh));
            };
            Vec a = go(h2), b = go(h2 / 2);
            Vec out(J.N);
            for (int t = 0; t < J.N; ++t) out[t] = (4 * b[t] - a[t]) / 3.0;
            J.d2F[static_cast<std::size_t>(i) * d + j] = out;
        }
    J.d3F.resize(static_cast<std::size_t>(d) * d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                auto d3 = [&](double h) -> Vec {
                    auto sd = [&](const Vec& at) {
                        Vec a = at, b = at, c = at, e = at;
                        if (i == j) {
                            a[i] += h; b[i] -= h;
                            Vec r = vadd(emb(a), emb(b));
                            Vec f0 = emb(at);
                            for (int t = 0; t < J.N; ++t) r[t] -= 2 * f0[t];
                            return vscale(r, 1.0 / (h * h));
                        }
                        a[i] += h; a[j] += h;
                        b[i] += h; b[j] -= h;
                        c[i] -= h; c[j] += h;
                        e[i] -= h; e[j] -= h;
                        return vscale(vsub(vadd(emb(a), emb(e)), vadd(emb(b), emb(c))), 1.0 / (4 * h * h));
                    };
                    Vec xk = zero, xm = zero;
                    xk[k] += h; xm[k] -= h;
                    return vscale(vsub(sd(xk), sd(xm)), 1.0 / (2 * h));
                };
                Vec a = d3(h3), b = d3(h3 / 2);
                Vec out(J.N);
                for (int t = 0; t < J.N; ++t) out[t] = (4 * b[t] - a[t]) / 3.0;
                J.d3F[(static_cast<std::size_t>(i) * d + j) * d + k] = out;
            }
    return J;
}
} // namespace

ExpansionTensors ManifoldGeometry::expansion_tensors(const Vec& x) const {
    const int d = chart_dim(), N = ambient_dim();
    ExpansionTensors out;
    auto jets = normal_jets(*this, x);
    // the normal-chart frame dF is an ONB of T_xM (Lemma-level fact; FD-exact here)
    const auto& t = jets.dF;
    // curvature in the ONB frame = curvature of the normal chart at 0
    CurvatureData curv = curvature(x);
    Mat g = metric(x);
    // convert Ric to the ONB: need the chart->ONB change; simplest: recompute
    // Ric in the normal chart frame via inner products of jets (InnerDer3 gives
    // Ric implicitly) -- instead express Ric via the chart tensors:
    // Build chart frame E used by normal_chart (recompute identically).
    Mat E = mat_zero(d, d);
    {
        for (int a = 0; a < d; ++a) {
            Vec e(d, 0.0);
            e[a] = 1.0;
            for (int b = 0; b < a; ++b) {
                double ip = 0;
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) ip += g[i][j] * e[i] * E[j][b];
                for (int i = 0; i < d; ++i) e[i] -= ip * E[i][b];
            }
            double nn = 0;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) nn += g[i][j] * e[i] * e[j];
            nn = std::sqrt(nn);
            for (int i = 0; i < d; ++i) E[i][a] = e[i] / nn;
        }
    }
    Mat ric = mat_zero(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            double s = 0;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) s += curv.ricci[i][j] * E[i][a] * E[j][b];
            ric[a][b] = s;
        }
    const double S = curv.scalar;
    ExtrinsicData ext = extrinsic(x);
    // BH in the ONB
    Mat bh = mat_zero(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            double s = 0;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) s += ext.BH[i][j] * E[i][a] * E[j][b];
            bh[a][b] = s;
        }
    const double H2 = ext.H2;

    out.theta = mat_zero(N, N);
    for (int a = 0; a < d; ++a)
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) out.theta[i][j] += (d - 1) / 24.0 * t[a][i] * t[a][j];

    auto kron = [](int a, int b) { return a == b ? 1.0 : 0.0; };
    out.xi_tangent = mat_zero(d, d);
    out.xi_normal = mat_zero(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            out.xi_tangent[a][b] = (49.0 * d - 62.0) / 8640.0 * ric[a][b]
                + (49.0 * S / 8640.0 - d * d * H2 / 120.0) * kron(a, b)
                - (d - 2.0) * d / 120.0 * bh[a][b];
            out.xi_normal[a][b] = (9.0 * d * d * H2 - 8.0 * S) / 1440.0 * kron(a, b)
                + 7.0 / 1440.0 * ric[a][b] - d / 160.0 * bh[a][b];
        }
    out.xi_total = mat_zero(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) out.xi_total[a][b] = out.xi_tangent[a][b] + out.xi_normal[a][b];

    // raw-derivative route (intermediate expressions from the normal chart)
    auto ip = [&](const Vec& u, const Vec& v) { return dot(u, v); };
    auto D2 = [&](int i, int j) -> const Vec& { return jets.d2F[static_cast<std::size_t>(i) * d + j]; };
    auto D3 = [&](int i, int j, int k) -> const Vec& {
        return jets.d3F[(static_cast<std::size_t>(i) * d + j) * d + k];
    };
    double jj_kk = 0, jk_jk = 0, j_jkk = 0;
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
            jj_kk += ip(D2(j, j), D2(k, k));
            jk_jk += ip(D2(j, k), D2(j, k));
            j_jkk += ip(t[j], D3(j, k, k));
        }
    Mat i_jkk = mat_zero(d, d), ij_kk = mat_zero(d, d), ik_jk = mat_zero(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int k = 0; k < d; ++k) {
                i_jkk[a][b] += ip(t[a], D3(b, k, k));
                ij_kk[a][b] += ip(D2(a, b), D2(k, k));
                ik_jk[a][b] += ip(D2(a, k), D2(b, k));
            }
    Mat xiT_raw = mat_zero(d, d), xiP_raw = mat_zero(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            // restriction to T x T: d2F terms are normal-valued, their tensor
            // products with each other drop out; dF (x) d3F pairs survive.
            xiT_raw[a][b] = (S / 8640.0 + j_jkk / 120.0) * kron(a, b)
                + (d + 34.0) / 8640.0 * ric[a][b]
                - (i_jkk[a][b] + i_jkk[b][a]) / 240.0
                + (d - 1.0) / 240.0 * (i_jkk[a][b] + i_jkk[b][a]);
            xiP_raw[a][b] = (jj_kk / 1440.0 + jk_jk / 180.0) * kron(a, b)
                - 7.0 / 1440.0 * ik_jk[a][b] - ij_kk[a][b] / 720.0;
        }
    out.xi_raw_route = mat_zero(d, d);
    double disc = 0;
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            out.xi_raw_route[a][b] = xiT_raw[a][b] + xiP_raw[a][b];
            disc = std::max(disc, std::fabs(out.xi_raw_route[a][b] - out.xi_total[a][b]));
        }
    out.route_discrepancy = disc;
    return out;
}

std::map<std::string, double> ManifoldGeometry::verify_identities(const Vec& x) const {
    std::map<std::string, double> rep;
    const int d = chart_dim(), N = ambient_dim();
    auto jets = normal_jets(*this, x);
    ExtrinsicData ext = extrinsic(x);
    CurvatureData curv = curvature(x);
    auto ip = [&](const Vec& u, const Vec& v) { return dot(u, v); };
    auto D2 = [&](int i, int j) -> const Vec& { return jets.d2F[static_cast<std::size_t>(i) * d + j]; };
    auto D3 = [&](int i, int j, int k) -> const Vec& {
        return jets.d3F[(static_cast<std::size_t>(i) * d + j) * d + k];
    };
    // Laplace vs mean curvature: in the normal chart, Delta F(0) = sum_i d2F_ii
    Vec lap(N, 0.0);
    for (int i = 0; i < d; ++i)
        for (int a = 0; a < N; ++a) lap[a] += D2(i, i)[a];
    double r = 0;
    for (int a = 0; a < N; ++a) r = std::max(r, std::fabs(lap[a] - d * ext.mean_curvature[a]));
    rep["lap_eq_dH"] = r;

    double jj_kk = 0, jk_jk = 0, j_jkk = 0;
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
            jj_kk += ip(D2(j, j), D2(k, k));
            jk_jk += ip(D2(j, k), D2(j, k));
            j_jkk += ip(jets.dF[j], D3(j, k, k));
        }
    const double S = curv.scalar, H2 = ext.H2;
    rep["lap_norm"] = std::fabs(jj_kk - d * d * H2);
    rep["inner_der1_a"] = std::fabs(jk_jk - (-S + d * d * H2));
    rep["inner_der1_b"] = std::fabs(j_jkk - (2.0 * S / 3.0 - d * d * H2));

    // ONB conversion of Ric and BH (same construction as expansion_tensors)
    Mat g = metric(x);
    Mat E = mat_zero(d, d);
    for (int a = 0; a < d; ++a) {
        Vec e(d, 0.0);
        e[a] = 1.0;
        for (int b = 0; b < a; ++b) {
            double ipn = 0;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) ipn += g[i][j] * e[i] * E[j][b];
            for (int i = 0; i < d; ++i) e[i] -= ipn * E[i][b];
        }
        double nn = 0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) nn += g[i][j] * e[i] * e[j];
        nn = std::sqrt(nn);
        for (int i = 0; i < d; ++i) E[i][a] = e[i] / nn;
    }
    Mat ric = mat_zero(d, d), bh = mat_zero(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    ric[a][b] += curv.ricci[i][j] * E[i][a] * E[j][b];
                    bh[a][b] += ext.BH[i][j] * E[i][a] * E[j][b];
                }
    double r2 = 0, r3 = 0, r4 = 0;
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            double ijkk = 0, i_jkk = 0, ikjk = 0;
            for (int k = 0; k < d; ++k) {
                ijkk += ip(D2(a, b), D2(k, k));
                i_jkk += ip(jets.dF[a], D3(b, k, k));
                ikjk += ip(D2(a, k), D2(b, k));
            }
            r2 = std::max(r2, std::fabs(ijkk - d * bh[a][b]));
            r3 = std::max(r3, std::fabs(i_jkk - (2.0 / 3.0 * ric[a][b] - d * bh[a][b])));
            r4 = std::max(r4, std::fabs(ikjk - (-ric[a][b] + d * bh[a][b])));
        }
    rep["inner_der2"] = r2;
    rep["inner_der3"] = r3;
    rep["inner_der4"] = r4;

    // second derivatives are normal to the tangent space
    double rn = 0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int a = 0; a < d; ++a) rn = std::max(rn, std::fabs(ip(D2(i, j), jets.dF[a])));
    rep["d2F_normal"] = rn;

    // metric expansion in the normal chart: d2_kl g_ij(0) = -(1/3)(R_ikjl + R_iljk)
    auto F = normal_chart(x);
    const double h = 1e-2;
    auto gn = [&](const Vec& xi) {
        Mat dF = mat_zero(N, d);
        for (int a = 0; a < d; ++a) {
            Vec xp = xi, xm = xi;
            xp[a] += 1e-4;
            xm[a] -= 1e-4;
            Vec col = vscale(vsub(F(xp), F(xm)), 1.0 / 2e-4);
            for (int i = 0; i < N; ++i) dF[i][a] = col[i];
        }
        Mat gg = mat_zero(d, d);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                double s = 0;
                for (int i = 0; i < N; ++i) s += dF[i][a] * dF[i][b];
                gg[a][b] = s;
            }
        return gg;
    };
    // curvature in the ONB frame
    auto Ronb = [&](int i, int j, int k, int l) {
        double s = 0;
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                for (int c = 0; c < d; ++c)
                    for (int e = 0; e < d; ++e)
                        s += curv.R(a, b, c, e) * E[a][i] * E[b][j] * E[c][k] * E[e][l];
        return s;
    };
    double rg = 0, rb0 = 0, rdb = 0, rda = 0, rg1 = 0;
    Vec zero(d, 0.0);
    Mat g0 = gn(zero);
    auto second_diff = [&](auto&& scalar_fn, int k, int l, double hh) {
        Vec a = zero, b = zero, c = zero, e = zero;
        if (k == l) {
            a[k] += hh; b[k] -= hh;
            return (scalar_fn(a) - 2 * scalar_fn(zero) + scalar_fn(b)) / (hh * hh);
        }
        a[k] += hh; a[l] += hh;
        b[k] += hh; b[l] -= hh;
        c[k] -= hh; c[l] += hh;
        e[k] -= hh; e[l] -= hh;
        return (scalar_fn(a) - scalar_fn(b) - scalar_fn(c) + scalar_fn(e)) / (4 * hh * hh);
    };
    auto second_diff_rich = [&](auto&& scalar_fn, int k, int l, double hh) {
        const double d1 = second_diff(scalar_fn, k, l, hh);
        const double d2 = second_diff(scalar_fn, k, l, hh / 2);
        return (4 * d2 - d1) / 3.0;
    };
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    auto fn = [&](const Vec& xi) { return gn(xi)[i][j]; };
                    const double der = second_diff_rich(fn, k, l, h);
                    double want = -(Ronb(i, k, j, l) + Ronb(i, l, j, k)) / 3.0;
                    rg = std::max(rg, std::fabs(der - want));
                }
    rep["metric_expansion"] = rg;

    // normal-chart drift data: b(0) = 0, d_p b^m(0) = (1/3) R_{m s s p};
    // d2_pq a^{ij}(0) contracted: (2/3) R_{ipjp}; G1 hessian: (1/6) R_{sisj}.
    auto bvec = [&](const Vec& xi) {
        // b^i = g^{ij}/(4 det g) d_j det g + 1/2 d_j g^{ij}
        const double hh = 1e-3;
        Mat gg = gn(xi);
        Mat gi = mat_inverse(gg);
        double det0 = mat_det(gg);
        Vec bb(d, 0.0);
        for (int i2 = 0; i2 < d; ++i2) {
            for (int j2 = 0; j2 < d; ++j2) {
                Vec xp = xi, xm = xi;
                xp[j2] += hh;
                xm[j2] -= hh;
                double ddet = (mat_det(gn(xp)) - mat_det(gn(xm))) / (2 * hh);
                double dginv = (mat_inverse(gn(xp))[i2][j2] - mat_inverse(gn(xm))[i2][j2]) / (2 * hh);
                bb[i2] += gi[i2][j2] / (4 * det0) * ddet + 0.5 * dginv;
            }
        }
        return bb;
    };
    Vec b0 = bvec(zero);
    for (int i = 0; i < d; ++i) rb0 = std::max(rb0, std::fabs(b0[i]));
    rep["b_origin"] = rb0;
    const double hb = 5e-2;
    for (int p = 0; p < d; ++p) {
        auto der_at = [&](double hh) {
            Vec xp = zero, xm = zero;
            xp[p] += hh;
            xm[p] -= hh;
            Vec bp = bvec(xp), bm = bvec(xm);
            Vec out(d);
            for (int m = 0; m < d; ++m) out[m] = (bp[m] - bm[m]) / (2 * hh);
            return out;
        };
        Vec d1 = der_at(hb), d2r = der_at(hb / 2);
        for (int m = 0; m < d; ++m) {
            double der = (4 * d2r[m] - d1[m]) / 3.0;
            double want = 0;
            for (int s = 0; s < d; ++s) want += Ronb(m, s, s, p) / 3.0;
            rdb = std::max(rdb, std::fabs(der - want));
        }
    }
    rep["db_origin"] = rdb;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double der = 0;
            for (int p = 0; p < d; ++p) {
                auto fn = [&](const Vec& xi) { return mat_inverse(gn(xi))[i][j]; };
                der += second_diff_rich(fn, p, p, hb);
            }
            double want = 0;
            for (int p = 0; p < d; ++p) want += 2.0 / 3.0 * Ronb(i, p, j, p);
            rda = std::max(rda, std::fabs(der - want));
        }
    rep["d2a_origin"] = rda;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            auto G1v = [&](const Vec& xi) { return -0.25 * std::log(mat_det(gn(xi))); };
            const double der = second_diff_rich(G1v, i, j, hb);
            double want = 0;
            for (int s = 0; s < d; ++s) want += Ronb(s, i, s, j) / 6.0;
            rg1 = std::max(rg1, std::fabs(der - want));
        }
    rep["g1_hessian"] = rg1;
    return rep;
}

// ---------------------------------------------------------------------------
// catalog
// ---------------------------------------------------------------------------

namespace {

class Euclidean final : public ManifoldGeometry {
public:
    explicit Euclidean(int d) : d_(d) {}
    std::string name() const override { return "euclidean"; }
    int chart_dim() const override { return d_; }
    int ambient_dim() const override { return d_; }
    double injectivity_radius() const override { return 1e9; }
    Vec embed(const Vec& x) const override { return x; }
    Vec chart_from_ambient(const Vec& p) const override { return p; }
    Mat jacobian(const Vec&) const override {
        Mat J = mat_zero(d_, d_);
        for (int i = 0; i < d_; ++i) J[i][i] = 1.0;
        return J;
    }
    Vec second_deriv(const Vec&, int, int) const override { return Vec(d_, 0.0); }
    Vec third_deriv(const Vec&, int, int, int) const override { return Vec(d_, 0.0); }
    std::vector<double> christoffel(const Vec&) const override {
        return std::vector<double>(static_cast<std::size_t>(d_) * d_ * d_, 0.0);
    }
    CurvatureData curvature(const Vec&) const override {
        CurvatureData c;
        c.d = d_;
        c.riemann.assign(static_cast<std::size_t>(d_) * d_ * d_ * d_, 0.0);
        c.ricci = mat_zero(d_, d_);
        c.scalar = 0;
        return c;
    }
    Vec exp_map(const Vec& x, const Vec& v) const override { return vadd(x, v); }
    Vec log_map(const Vec& x, const Vec& y) const override { return vsub(y, x); }
    double distance(const Vec& x, const Vec& y) const override { return norm(vsub(y, x)); }
    Vec ambient_exp(const Vec& p, const Vec& u) const override { return vadd(p, u); }
    Vec ambient_log(const Vec& p, const Vec& q) const override { return vsub(q, p); }
    double ambient_distance(const Vec& p, const Vec& q) const override { return norm(vsub(q, p)); }
    double log_det_dexp(const Vec&, const Vec&) const override { return 0.0; }
    Vec grad_G1(const Vec&, const Vec&) const override { return Vec(d_, 0.0); }
    Mat ambient_projector(const Vec&) const override {
        Mat P = mat_zero(d_, d_);
        for (int i = 0; i < d_; ++i) P[i][i] = 1.0;
        return P;
    }

private:
    int d_;
};

class Circle final : public ManifoldGeometry {
public:
    explicit Circle(double r) : r_(r) {
        if (r <= 0) throw std::invalid_argument("circle radius must be positive");
    }
    std::string name() const override { return "circle"; }
    int chart_dim() const override { return 1; }
    int ambient_dim() const override { return 2; }
    double injectivity_radius() const override { return M_PI * r_; }
    double radius() const { return r_; }
    Vec embed(const Vec& x) const override { return {r_ * std::cos(x[0]), r_ * std::sin(x[0])}; }
    Vec chart_from_ambient(const Vec& p) const override { return {std::atan2(p[1], p[0])}; }
    Vec exp_map(const Vec& x, const Vec& v) const override { return {x[0] + v[0]}; }
    Vec log_map(const Vec& x, const Vec& y) const override { return {wrap_angle(y[0] - x[0])}; }
    double distance(const Vec& x, const Vec& y) const override {
        return r_ * std::fabs(wrap_angle(y[0] - x[0]));
    }
    double log_det_dexp(const Vec&, const Vec&) const override { return 0.0; }
    Vec grad_G1(const Vec&, const Vec&) const override { return Vec(2, 0.0); }
    Mat ambient_projector(const Vec& p) const override {
        const double n = std::sqrt(p[0] * p[0] + p[1] * p[1]);
        const double tx = -p[1] / n, ty = p[0] / n;
        return {{tx * tx, tx * ty}, {tx * ty, ty * ty}};
    }
    Vec ambient_exp(const Vec& p, const Vec& u) const override {
        const double th = std::atan2(p[1], p[0]);
        const double dth = (-std::sin(th) * u[0] + std::cos(th) * u[1]) / r_;
        return embed({th + dth});
    }
    Vec ambient_log(const Vec& p, const Vec& q) const override {
        const double th = std::atan2(p[1], p[0]);
        const double dth = wrap_angle(std::atan2(q[1], q[0]) - th);
        return {-std::sin(th) * r_ * dth, std::cos(th) * r_ * dth};
    }
    double ambient_distance(const Vec& p, const Vec& q) const override {
        return r_ * std::fabs(wrap_angle(std::atan2(q[1], q[0]) - std::atan2(p[1], p[0])));
    }

private:
    double r_;
};

class Sphere final : public ManifoldGeometry {
public:
    Sphere(int d, double r) : d_(d), r_(r) {
        if (r <= 0) throw std::invalid_argument("sphere radius must be positive");
        if (d < 2) throw std::invalid_argument("sphere dimension must be >= 2");
    }
    std::string name() const override { return "sphere"; }
    int chart_dim() const override { return d_; }
    int ambient_dim() const override { return d_ + 1; }
    double injectivity_radius() const override { return M_PI * r_; }
    double radius() const { return r_; }

    // spherical chart; for d = 2: (theta, phi) -> r(sin t cos p, sin t sin p, cos t);
    // higher d: nested spherical angles.
    // p_k = r * prod_{i<k} sin(t_i) * cos(t_k) for k < d; p_d = r * prod_i sin(t_i)
    Vec embed(const Vec& x) const override {
        Vec p(d_ + 1);
        double s = 1.0;
        for (int k = 0; k < d_; ++k) {
            p[k] = r_ * s * std::cos(x[k]);
            s *= std::sin(x[k]);
        }
        p[d_] = r_ * s;
        return p;
    }
    Vec chart_from_ambient(const Vec& q) const override {
        Vec x(d_);
        double s = 1.0;
        for (int k = 0; k < d_; ++k) {
            double c = q[k] / (r_ * s);
            c = std::clamp(c, -1.0, 1.0);
            if (k < d_ - 1) {
                x[k] = std::acos(c);
                s *= std::sin(x[k]);
                if (std::fabs(s) < 1e-300) s = 1e-300;
            } else {
                x[k] = std::atan2(q[d_], q[k]);
                // atan2 over the last pair (q_{d-1}, q_d)
            }
        }
        return x;
    }
    double ambient_distance(const Vec& p, const Vec& q) const override {
        double c = dot(p, q) / (r_ * r_);
        c = std::clamp(c, -1.0, 1.0);
        return r_ * std::acos(c);
    }
    Vec ambient_exp(const Vec& p, const Vec& u) const override {
        double nu = norm(u);
        if (nu < 1e-16) return p;
        double a = nu / r_;
        Vec out(d_ + 1);
        for (int i = 0; i <= d_; ++i) out[i] = std::cos(a) * p[i] + std::sin(a) * r_ * u[i] / nu;
        return out;
    }
    Vec ambient_log(const Vec& p, const Vec& q) const override {
        double c = dot(p, q) / (r_ * r_);
        c = std::clamp(c, -1.0, 1.0);
        double a = std::acos(c);
        if (a < 1e-14) return Vec(d_ + 1, 0.0);
        Vec w(d_ + 1);
        for (int i = 0; i <= d_; ++i) w[i] = q[i] - c * p[i];
        double nw = norm(w);
        if (nw < 1e-300) throw std::runtime_error("log_map at the cut-locus");
        for (int i = 0; i <= d_; ++i) w[i] *= (r_ * a) / nw;
        return w;
    }
    Vec exp_map(const Vec& x, const Vec& v) const override {
        // push chart tangent to ambient, rotate, pull back
        Mat J = jacobian(x);
        Vec u(d_ + 1, 0.0);
        for (int a = 0; a <= d_; ++a)
            for (int i = 0; i < d_; ++i) u[a] += J[a][i] * v[i];
        return chart_from_ambient(ambient_exp(embed(x), u));
    }
    Vec log_map(const Vec& x, const Vec& y) const override {
        Vec u = ambient_log(embed(x), embed(y));
        Mat J = jacobian(x);
        Mat gi = metric_inverse(x);
        Vec v(d_, 0.0);
        for (int i = 0; i < d_; ++i)
            for (int j = 0; j < d_; ++j) {
                double s = 0;
                for (int a = 0; a <= d_; ++a) s += J[a][j] * u[a];
                v[i] += gi[i][j] * s;
            }
        return v;
    }
    double distance(const Vec& x, const Vec& y) const override {
        return ambient_distance(embed(x), embed(y));
    }
    double log_det_dexp(const Vec& y_amb, const Vec& x_amb) const override {
        double r = ambient_distance(y_amb, x_amb);
        if (r < 1e-12) return 0.0;
        return (d_ - 1) * std::log(r_ * std::sin(r / r_) / r);
    }
    Mat ambient_projector(const Vec& p) const override {
        const int N = d_ + 1;
        Mat P = mat_zero(N, N);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) P[i][j] = (i == j ? 1.0 : 0.0) - p[i] * p[j] / (r_ * r_);
        return P;
    }
    Vec grad_G1(const Vec& x_amb, const Vec& y_amb) const override {
        double r = ambient_distance(x_amb, y_amb);
        if (r < 1e-10) return Vec(d_ + 1, 0.0);
        // G1 = -((d-1)/2) log(R sin(r/R)/r); dG1/dr = -((d-1)/2)(cot(r/R)/R - 1/r)
        double der = -0.5 * (d_ - 1) * (std::cos(r / r_) / (r_ * std::sin(r / r_)) - 1.0 / r);
        Vec toward = ambient_log(x_amb, y_amb); // length r, points toward y
        return vscale(toward, -der / r);        // gradient of r is -toward/r
    }

private:
    int d_;
    double r_;
};

class CliffordTorus final : public ManifoldGeometry {
public:
    // isometric chart: F(x,y) = (cos(s x), sin(s x), cos(s y), sin(s y))/s, s = sqrt(2)
    CliffordTorus() : s_(std::sqrt(2.0)) {}
    std::string name() const override { return "clifford"; }
    int chart_dim() const override { return 2; }
    int ambient_dim() const override { return 4; }
    double injectivity_radius() const override { return M_PI / s_; }
    Vec embed(const Vec& x) const override {
        return {std::cos(s_ * x[0]) / s_, std::sin(s_ * x[0]) / s_,
                std::cos(s_ * x[1]) / s_, std::sin(s_ * x[1]) / s_};
    }
    Vec chart_from_ambient(const Vec& p) const override {
        return {std::atan2(p[1], p[0]) / s_, std::atan2(p[3], p[2]) / s_};
    }
    Vec exp_map(const Vec& x, const Vec& v) const override { return vadd(x, v); }
    Vec log_map(const Vec& x, const Vec& y) const override {
        return {wrap_angle(s_ * (y[0] - x[0])) / s_, wrap_angle(s_ * (y[1] - x[1])) / s_};
    }
    double distance(const Vec& x, const Vec& y) const override { return norm(log_map(x, y)); }
    double log_det_dexp(const Vec&, const Vec&) const override { return 0.0; }
    Vec grad_G1(const Vec&, const Vec&) const override { return Vec(4, 0.0); }
    Mat ambient_projector(const Vec& p) const override {
        Mat P = mat_zero(4, 4);
        const double n1 = std::sqrt(p[0] * p[0] + p[1] * p[1]);
        const double n2 = std::sqrt(p[2] * p[2] + p[3] * p[3]);
        const double t1x = -p[1] / n1, t1y = p[0] / n1;
        const double t2x = -p[3] / n2, t2y = p[2] / n2;
        P[0][0] = t1x * t1x; P[0][1] = t1x * t1y; P[1][0] = t1x * t1y; P[1][1] = t1y * t1y;
        P[2][2] = t2x * t2x; P[2][3] = t2x * t2y; P[3][2] = t2x * t2y; P[3][3] = t2y * t2y;
        return P;
    }
    Vec ambient_exp(const Vec& p, const Vec& u) const override {
        Vec x = chart_from_ambient(p);
        Mat J = {{-std::sin(s_ * x[0]), 0.0}, {std::cos(s_ * x[0]), 0.0},
                 {0.0, -std::sin(s_ * x[1])}, {0.0, std::cos(s_ * x[1])}};
        Vec v = {J[0][0] * u[0] + J[1][0] * u[1], J[2][1] * u[2] + J[3][1] * u[3]};
        return embed(vadd(x, v));
    }
    Vec ambient_log(const Vec& p, const Vec& q) const override {
        Vec x = chart_from_ambient(p);
        Vec v = log_map(x, chart_from_ambient(q));
        return {-std::sin(s_ * x[0]) * v[0], std::cos(s_ * x[0]) * v[0],
                -std::sin(s_ * x[1]) * v[1], std::cos(s_ * x[1]) * v[1]};
    }
    double ambient_distance(const Vec& p, const Vec& q) const override {
        return distance(chart_from_ambient(p), chart_from_ambient(q));
    }
    CurvatureData curvature(const Vec&) const override {
        CurvatureData c;
        c.d = 2;
        c.riemann.assign(16, 0.0);
        c.ricci = mat_zero(2, 2);
        c.scalar = 0;
        return c;
    }
    std::vector<double> christoffel(const Vec&) const override { return std::vector<double>(8, 0.0); }

private:
    double s_;
};

class Ellipsoid final : public ManifoldGeometry {
public:
    Ellipsoid(double a, double b, double c) : a_(a), b_(b), c_(c) {
        if (a <= 0 || b <= 0 || c <= 0) throw std::invalid_argument("ellipsoid semi-axes must be positive");
        double mn = std::min({a, b, c}), mx = std::max({a, b, c});
        inj_ = M_PI * mn * mn / mx; // conservative
    }
    std::string name() const override { return "ellipsoid"; }
    int chart_dim() const override { return 2; }
    int ambient_dim() const override { return 3; }
    double injectivity_radius() const override { return inj_; }
    Vec embed(const Vec& x) const override {
        return {a_ * std::sin(x[0]) * std::cos(x[1]), b_ * std::sin(x[0]) * std::sin(x[1]),
                c_ * std::cos(x[0])};
    }
    Vec chart_from_ambient(const Vec& p) const override {
        double ct = std::clamp(p[2] / c_, -1.0, 1.0);
        return {std::acos(ct), std::atan2(p[1] / b_, p[0] / a_)};
    }

private:
    double a_, b_, c_, inj_;
};

std::map<std::string, double> parse_params(const std::string& s) {
    std::map<std::string, double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("bad manifold parameter: " + item);
        out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    }
    return out;
}

} // namespace

std::unique_ptr<ManifoldGeometry> make_manifold(const std::string& spec) {
    std::string name = spec;
    std::map<std::string, double> par;
    auto colon = spec.find(':');
    if (colon != std::string::npos) {
        name = spec.substr(0, colon);
        par = parse_params(spec.substr(colon + 1));
    }
    auto get = [&](const std::string& k, double dflt) {
        auto it = par.find(k);
        return it == par.end() ? dflt : it->second;
    };
    if (name == "euclidean") return std::make_unique<Euclidean>(static_cast<int>(get("d", 2)));
    if (name == "circle") return std::make_unique<Circle>(get("r", 1.0));
    if (name == "sphere") return std::make_unique<Sphere>(static_cast<int>(get("d", 2)), get("r", 1.0));
    if (name == "clifford") return std::make_unique<CliffordTorus>();
    if (name == "ellipsoid") return std::make_unique<Ellipsoid>(get("a", 1.0), get("b", 1.0), get("c", 1.2));
    throw std::invalid_argument("unknown manifold: " + name);
}

} // namespace sigmani
