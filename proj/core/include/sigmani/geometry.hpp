#pragma once

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace sigmani {

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;

struct CurvatureData {
    // riemann[i][j][k][l] = <R(d_k, d_l) d_j, d_i> in chart coordinates
    std::vector<double> riemann; // flattened d^4
    Mat ricci;                   // d x d
    double scalar = 0.0;
    int d = 0;
    double R(int i, int j, int k, int l) const {
        return riemann[((static_cast<std::size_t>(i) * d + j) * d + k) * d + l];
    }
};

struct ExtrinsicData {
    Mat tangent_proj;                 // N x N orthogonal projector onto T_xM
    std::vector<Vec> second_form;     // B[i*d+j] in R^N, chart index pair (i,j)
    Vec mean_curvature;               // H in R^N
    double H2 = 0.0;                  // |H|^2
    Mat BH;                           // <B_ij, H>, d x d (chart indices)
};

struct ExpansionTensors {
    Mat theta;        // N x N bilinear form, the t^2 coefficient of the contracted level-4
    Mat xi_tangent;   // Xi^T restricted to T x T, expressed as d x d in a tangent ONB
    Mat xi_normal;    // Xi^perp restricted to T x T, d x d
    Mat xi_total;     // xi_tangent + xi_normal
    Mat xi_raw_route; // the same total evaluated from raw normal-chart F-derivatives
    double route_discrepancy = 0.0; // max-abs difference between the two routes
};

/// Embedded-manifold geometry: chart ops, geodesics, curvature, extrinsic data.
///
/// Chart points and tangent vectors are coordinate tuples; ambient points are
/// R^N vectors. Catalog manifolds provide closed forms where available and
/// central finite differences (step 1e-4, one Richardson level) otherwise.
class ManifoldGeometry {
public:
    virtual ~ManifoldGeometry() = default;

    virtual std::string name() const = 0;
    virtual int chart_dim() const = 0;
    virtual int ambient_dim() const = 0;
    virtual double injectivity_radius() const = 0;

    virtual Vec embed(const Vec& x) const = 0;
    /// Chart coordinates of an ambient point on the manifold.
    virtual Vec chart_from_ambient(const Vec& p) const = 0;

    // --- chart-level differential structure (FD defaults) ---
    virtual Mat jacobian(const Vec& x) const;          // N x d
    virtual Vec second_deriv(const Vec& x, int i, int j) const;   // d^2_ij F
    virtual Vec third_deriv(const Vec& x, int i, int j, int k) const;
    Mat metric(const Vec& x) const;                    // d x d, (dF)^T dF
    Mat metric_inverse(const Vec& x) const;
    /// Christoffel symbols Gamma^k_ij (FD of the metric unless overridden).
    virtual std::vector<double> christoffel(const Vec& x) const; // flattened d^3 [k][i][j]

    virtual CurvatureData curvature(const Vec& x) const;
    ExtrinsicData extrinsic(const Vec& x) const;

    // --- geodesics (chart level) ---
    virtual Vec exp_map(const Vec& x, const Vec& v) const;
    virtual Vec log_map(const Vec& x, const Vec& y) const;
    virtual double distance(const Vec& x, const Vec& y) const;

    // --- ambient-level ops used by the samplers ---
    virtual Vec ambient_exp(const Vec& p, const Vec& u) const;
    virtual Vec ambient_log(const Vec& p, const Vec& q) const;
    virtual double ambient_distance(const Vec& p, const Vec& q) const;
    virtual Mat ambient_projector(const Vec& p) const;

    /// log det (d exp_y) at x, the quantity whose -1/2 log-gradient corrects
    /// the small-time bridge drift; closed form on spheres/circles/flat tori.
    virtual double log_det_dexp(const Vec& y_amb, const Vec& x_amb) const;
    /// Gradient (ambient, tangential) of G1(x,y) = -1/2 log det(d exp_y)_x in x.
    virtual Vec grad_G1(const Vec& x_amb, const Vec& y_amb) const;

    // --- normal chart at a base point ---
    /// Returns normal coordinates xi -> ambient point F(exp_x(xi^i e_i)),
    /// with {e_i} a g-orthonormal basis at x.
    std::function<Vec(const Vec&)> normal_chart(const Vec& x) const;

    /// Theta/Xi theoretical tensors plus the raw-derivative consistency route.
    ExpansionTensors expansion_tensors(const Vec& x) const;

    /// Named identity residuals (Laplace/mean-curvature, inner-product
    /// relations of F-derivatives, metric expansion, normal-chart a/b/G1 data).
    std::map<std::string, double> verify_identities(const Vec& x) const;

protected:
    double fd_step_ = 1e-4;
};

/// Catalog factory. Spec strings: "euclidean:d=2", "circle:r=1",
/// "sphere:d=2,r=1", "clifford", "ellipsoid:a=1,b=1,c=1.2".
std::unique_ptr<ManifoldGeometry> make_manifold(const std::string& spec);

} // namespace sigmani
