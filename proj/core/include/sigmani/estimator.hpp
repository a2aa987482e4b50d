#pragma once

#include "sigmani/bridge.hpp"
#include "sigmani/tensor.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sigmani {

enum class DiscardPolicy { drop_exited, keep_all };

struct McConfig {
    int level = 4;
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
    int steps = 256;
    double chart_radius = 1.0;
    bool antithetic = true;
    DiscardPolicy discard = DiscardPolicy::drop_exited;
    std::optional<HeatKernelMode> kernel_mode; // default: per-manifold
    bool g1_correction = true;
    int workers = 0; // 0 = hardware concurrency
};

struct SignatureEstimate {
    TruncatedTensor mean;
    TruncatedTensor stderr_tensor; // per-entry standard error of the mean
    std::size_t samples = 0;       // effective sample units (pairs if antithetic)
    std::size_t discarded = 0;
    double t = 0;
    std::string discard_policy;
    // per-chunk partial means for jackknife error bars (chunk -> flat tensor sums)
    std::vector<std::vector<double>> chunk_sums;
    std::vector<std::size_t> chunk_counts;
};

/// Monte Carlo mean of chordal signatures of bridge samples from x to y
/// (loop when x == y). Fan-out across a worker pool; chunks are merged in
/// path-index order so results are bit-identical for any worker count.
SignatureEstimate expected_signature(const ManifoldGeometry& M, const Vec& x, const Vec& y,
                                     double t, const McConfig& cfg);

/// Same but for unconditioned Brownian motion started at x.
SignatureEstimate expected_signature_bm(const ManifoldGeometry& M, const Vec& x, double t,
                                        const McConfig& cfg);

struct DistanceRow {
    int n = 0;
    double t_n = 0;
    double estimate = 0;
    double stderr_jack = 0;
    double oracle = 0;
    double discard_fraction = 0;
};

struct DistanceReport {
    std::vector<DistanceRow> rows;
    double kappa = 1.0;
    double t_min = 1e-4;
};

/// Distance reconstruction: per n = 2..n_max with t_n = max(kappa n^-6, t_min),
/// reports (n! |pi_n psi|_HS)^{1/n} with a delete-block jackknife error bar.
DistanceReport reconstruct_distance(const ManifoldGeometry& M, const Vec& x, const Vec& y,
                                    int n_max, double kappa, const McConfig& cfg,
                                    double t_min = 1e-4);

struct CurvatureFit {
    int ambient_dim = 0;
    std::vector<double> theta_hat;    // N^4, fitted t^2 coefficient
    std::vector<double> theta_stderr;
    std::vector<double> xi_hat;       // N^4, fitted t^3 coefficient
    std::vector<double> xi_stderr;
    std::vector<double> t_grid;
    double max_fit_residual = 0;      // max over entries of weighted fit residual
    double mom2_max_sigma = 0;        // |mean S4 - 1/2 mean S2(x)S2| in combined SE units
    std::size_t samples_per_t = 0;
};

/// Per-entry weighted least squares of psi_4(t) on {t^2, t^3, t^4-nuisance};
/// also forms the 1/2 E[S2 (x) S2] alternative estimator and reports the
/// worst-entry discrepancy in combined standard errors.
CurvatureFit fit_psi4(const ManifoldGeometry& M, const Vec& x, const std::vector<double>& t_grid,
                      const McConfig& cfg, bool include_t4 = true);

struct RecoveredScalar {
    double value = 0, stderr_ = 0, oracle = 0;
};
struct RecoveredTensor {
    Mat value, stderr_, oracle; // d x d in the tangent ONB
};

struct CurvatureReport {
    Mat ctheta_tangent;          // contracted Theta on the tangent ONB (d x d)
    Mat ctheta_tangent_stderr;
    double theta_rel_err = 0;    // vs (d-1)/24 * delta
    double theta_normal_max_sigma = 0; // annihilation of normal directions
    Mat cxi_tangent;             // contracted Xi restricted to tangent
    Mat cxi_tangent_stderr;
    RecoveredScalar S, H2;
    RecoveredTensor ric, BH;
    double antisym_max_sigma = 0; // slot-(1,2)/(3,4) antisymmetry of theta_hat
    double cond_number = 0;
};

/// Contract the fitted tensors, split tangential/normal traces, solve the
/// 2x2 trace system for (S, |H|^2) and the tensor system for (Ric, <B,H>).
CurvatureReport curvature_report(const CurvatureFit& fit, const ManifoldGeometry& M, const Vec& x);

} // namespace sigmani
