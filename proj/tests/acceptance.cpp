// Acceptance suite: one pass/fail line per criterion.
//
// Tiers: --tier fast  (exact/symbolic/deterministic checks, seconds..minutes)
//        --tier mc    (the long Monte Carlo verifications)
//        --tier all
// Exit code: number of hard failures. Checks whose governing clause downgrades
// a blown statistical budget to documentation print PASS(documented).

#include "sigmani/bridge.hpp"
#include "sigmani/estimator.hpp"
#include "sigmani/geometry.hpp"
#include "sigmani/golden.hpp"
#include "sigmani/kernel_expr.hpp"
#include "sigmani/io.hpp"
#include "sigmani/oracle.hpp"
#include "sigmani/pde.hpp"
#include "sigmani/rng.hpp"
#include "sigmani/signature.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace sigmani;
namespace orc = sigmani::oracle;

namespace {

int failures = 0;

void line(const std::string& name, bool pass, const std::string& detail,
          bool documented_ok = false) {
    const char* tag = pass ? "PASS" : (documented_ok ? "PASS(documented)" : "FAIL");
    std::cout << tag << "  " << name << " -- " << detail << "\n" << std::flush;
    if (!pass && !documented_ok) ++failures;
}

double now_s() {
    using clk = std::chrono::steady_clock;
    static const auto t0 = clk::now();
    return std::chrono::duration<double>(clk::now() - t0).count();
}

std::string data_dir() {
#ifdef SIGMANI_DATA_DIR
    return SIGMANI_DATA_DIR;
#else
    return "data";
#endif
}

// ---------------------------------------------------------------- criterion 1
void criterion1() {
    const double t0 = now_s();
    orc::GoldenData g = orc::load_golden(data_dir() + "/reference");
    bool all = true;
    std::string first_bad;
    orc::Table agg;
    for (const auto& [word, golden] : g.t2_cases) {
        orc::Table got = orc::eval_case(word, 2).total;
        agg = orc::add(agg, got);
        if (got != golden && first_bad.empty()) {
            all = false;
            first_bad = word;
        }
    }
    const bool agg_ok = (agg == orc::total_t2_reference());
    std::ostringstream os;
    os << g.t2_cases.size() << " tables exact=" << (all ? "yes" : "no (" + first_bad + ")")
       << ", aggregate=(1/12,-1/12) " << (agg_ok ? "exact" : "MISMATCH") << ", "
       << now_s() - t0 << "s";
    line("criterion 1: level-2 coefficient tables exact", all && agg_ok, os.str());
}

// ---------------------------------------------------------------- criterion 2
void criterion2() {
    const double t0 = now_s();
    orc::Table s1 = orc::aggregate(orc::deg3_case_list(), 3);
    const bool sum_ok = (s1 == orc::total_S1_reference());

    orc::Table jiji = orc::expand_composites(orc::eval_case("JI;JI", 3).total);
    orc::Table want;
    want[orc::parse_key("i,i|j|k,k|j")] = Rational(7, 48);
    const bool rep_ok = (jiji == want);

    orc::Table jip = orc::expand_composites(orc::eval_case("JI;P", 3).total);
    orc::Table wantp;
    auto addw = [&](const std::string& spec, Rational v,
                    std::vector<std::pair<std::string, std::string>> sc = {}) {
        wantp[orc::parse_key(spec, sc)] += v;
    };
    addw("jikk", Rational(-1, 12), {{"dbbar", "ij"}});
    addw("j,ij|ikk", Rational(-1, 24));
    addw("i,i|j,j|kk", Rational(-1, 12));
    addw("j,j|i|k,i|k", Rational(-1, 24));
    addw("j,j|i|k|k,i", Rational(-1, 24));
    const bool jip_ok = (jip == wantp);

    std::ostringstream os;
    os << "26-case sum == published total: " << (sum_ok ? "yes" : "NO")
       << "; representative 7/48: " << (rep_ok ? "yes" : "NO")
       << "; mixed-term component list: " << (jip_ok ? "yes" : "NO") << ", " << now_s() - t0
       << "s";
    line("criterion 2: degree-3 totals exact", sum_ok && rep_ok && jip_ok, os.str());
}

// ---------------------------------------------------------------- criterion 3
void criterion3() {
    const double t0 = now_s();
    orc::GoldenData g = orc::load_golden(data_dir() + "/reference");
    orc::AuditReport rep = orc::audit_reference_tables(g);
    {
        std::ofstream out("acceptance_audit.txt");
        out << orc::format_audit(rep);
    }
    // the audit must have compared everything, flagged the malformed row, and
    // documented each total-vs-table disagreement with the recomputed value
    bool ok = rep.tables > 250 && rep.malformed.size() == 1;
    bool docd = true;
    for (const auto& e : rep.s2_diff) docd = docd && !e.computed.empty();
    for (const auto& e : rep.s3_diff) docd = docd && !e.computed.empty();
    std::ostringstream os;
    os << rep.tables << " tables / " << rep.entries << " entries; " << rep.mismatches.size()
       << " table mismatches listed; malformed rows: " << rep.malformed.size()
       << "; summary-total disagreements documented: " << rep.s2_diff.size() << "+"
       << rep.s3_diff.size() << " (report: acceptance_audit.txt), " << now_s() - t0 << "s";
    line("criterion 3: full reference-table audit with diff report", ok && docd, os.str());
}

// ---------------------------------------------------------------- criterion 4
void criterion4() {
    const double t0 = now_s();
    bool ok = true;
    std::ostringstream os;
    for (const auto& [spec, x] : std::vector<std::pair<std::string, Vec>>{
             {"sphere:d=2,r=1", {1.0, 0.5}}, {"clifford", {0.3, 1.1}}}) {
        auto M = make_manifold(spec);
        auto rep = M->verify_identities(x);
        double worst = 0;
        for (const auto& [k, v] : rep) worst = std::max(worst, v);
        auto et = M->expansion_tensors(x);
        ok = ok && worst <= 1e-4 && et.route_discrepancy <= 1e-4;
        os << spec << ": residuals<=" << worst << " routes<=" << et.route_discrepancy << "  ";
    }
    os << now_s() - t0 << "s";
    line("criterion 4: geometry identities and two-route agreement", ok, os.str());
}

// ---------------------------------------------------------------- criterion 5
void criterion5() {
    const double t0 = now_s();
    EuclideanSolution sol = solve_euclidean(0.7, 2, 6);
    const bool pde_ok = sol.max_abs_diff < 1e-10;

    auto e = make_manifold("euclidean:d=2");
    McConfig cfg;
    cfg.level = 2;
    cfg.samples = 100000;
    cfg.steps = 64;
    cfg.seed = 1001;
    auto est = expected_signature_bm(*e, {0.0, 0.0}, 1.0, cfg);
    bool mc_ok = true;
    double worstz = 0;
    for (int i = 0; i < 2; ++i) {
        const double m = est.mean.level(2)[i * 2 + i];
        const double se = est.stderr_tensor.level(2)[i * 2 + i];
        const double z = std::fabs(m - 0.5) / se;
        worstz = std::max(worstz, z);
        mc_ok = mc_ok && z <= 3.0;
    }
    std::ostringstream os;
    os << "|rk4-closed|=" << sol.max_abs_diff << "; BM level-2 diagonal z=" << worstz << ", "
       << now_s() - t0 << "s";
    line("criterion 5: euclidean closed form + BM moment", pde_ok && mc_ok, os.str());
}

// ---------------------------------------------------------------- criterion 6
void criterion6() {
    const double t0 = now_s();
    // level-1 against the characteristic-function solution at G=512
    CircleSchemeParams p;
    p.grid = 512;
    p.level = 4;
    TensorField1D f = solve_circle_bm(0.5, p);
    double worst1 = 0;
    const double want = std::exp(-0.25) - 1.0;
    for (int g = 0; g < p.grid; ++g) {
        const double th = 2.0 * M_PI * g / p.grid;
        worst1 = std::max(worst1, std::fabs(f.at(g).level(1)[0] - want * std::cos(th)));
        worst1 = std::max(worst1, std::fabs(f.at(g).level(1)[1] - want * std::sin(th)));
    }
    const bool t1_ok = worst1 < 1e-5;

    // PDE vs Monte Carlo, BM at t = 0.2, levels <= 4
    auto circ = make_manifold("circle:r=1");
    const double tcmp = 0.2;
    TensorField1D fb = solve_circle_bm(tcmp, p);
    McConfig cfg;
    cfg.level = 4;
    cfg.samples = 100000;
    cfg.steps = 256;
    cfg.seed = 6001;
    const double th0 = 2.0 * M_PI * 37 / 512; // a grid node
    auto est = expected_signature_bm(*circ, {th0}, tcmp, cfg);
    double worstbm = 0;
    for (std::size_t i = 0; i < est.mean.raw().size(); ++i) {
        const double diff = std::fabs(est.mean.raw()[i] - fb.at(37).raw()[i]);
        const double tol = 3.0 * est.stderr_tensor.raw()[i] + 1e-4;
        worstbm = std::max(worstbm, diff - tol);
    }
    const bool bm_ok = worstbm <= 0;

    // PDE vs Monte Carlo for the loop at the same node
    TensorField1D fl = solve_circle_bridge(tcmp, th0, p);
    auto estl = expected_signature(*circ, {th0}, {th0}, tcmp, cfg);
    double worstlp = 0;
    for (std::size_t i = 0; i < estl.mean.raw().size(); ++i) {
        const double diff = std::fabs(estl.mean.raw()[i] - fl.at(37).raw()[i]);
        const double tol = 3.0 * estl.stderr_tensor.raw()[i] + 1e-4;
        worstlp = std::max(worstlp, diff - tol);
    }
    const bool loop_ok = worstlp <= 0;

    // loop t^2 coefficient of the contracted tangential part: zero at d = 1
    std::vector<double> ts = {0.05, 0.075, 0.1, 0.15, 0.2};
    std::vector<double> ys;
    for (double t : ts) {
        TensorField1D ft = solve_circle_bridge(t, th0, p);
        const double* l4 = ft.at(37).level(4);
        auto c = contract_24(std::vector<double>(l4, l4 + 16), 2);
        Vec tau = {-std::sin(th0), std::cos(th0)};
        double val = 0;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) val += c[a * 2 + b] * tau[a] * tau[b];
        ys.push_back(val);
    }
    // least squares on {t^2, t^3}
    double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double t2 = ts[i] * ts[i], t3 = t2 * ts[i];
        a11 += t2 * t2;
        a12 += t2 * t3;
        a22 += t3 * t3;
        b1 += t2 * ys[i];
        b2 += t3 * ys[i];
    }
    const double det = a11 * a22 - a12 * a12;
    const double c2 = (a22 * b1 - a12 * b2) / det;
    const bool fit_ok = std::fabs(c2) < 1e-3;

    std::ostringstream os;
    os << "level-1 err=" << worst1 << "; BM worst slack=" << worstbm
       << "; loop worst slack=" << worstlp << "; loop t^2 coeff=" << c2 << ", "
       << now_s() - t0 << "s";
    line("criterion 6: circle PDE cross-checks", t1_ok && bm_ok && loop_ok && fit_ok, os.str());
}

// ---------------------------------------------------------------- criterion 7
void criterion7() {
    const double t0 = now_s();
    auto s = make_manifold("sphere:d=2,r=1");
    McConfig cfg;
    cfg.level = 3;
    cfg.samples = 100000;
    cfg.steps = 256;
    cfg.seed = 7001;
    Vec x = {1.0, 0.5};
    auto est = expected_signature(*s, x, x, 0.05, cfg);
    double worstz = 0;
    for (int k = 1; k <= 3; ++k) {
        const double* m = est.mean.level(k);
        const double* se = est.stderr_tensor.level(k);
        for (std::size_t i = 0; i < est.mean.level_size(k); ++i) {
            const double z = std::fabs(m[i]) / (se[i] > 0 ? se[i] : 1e-300);
            if (se[i] == 0 && std::fabs(m[i]) < 1e-12) continue; // exactly pinned entries
            worstz = std::max(worstz, z);
        }
    }
    std::ostringstream os;
    os << "levels 1-3 worst |z|=" << worstz << " (4 allowed), discards=" << est.discarded
       << ", " << now_s() - t0 << "s";
    line("criterion 7: loop vanishing low levels", worstz <= 4.0, os.str());
}

// ------------------------------------------------------- criteria 8 and 9
void criteria89() {
    const double t0 = now_s();
    auto s = make_manifold("sphere:d=2,r=1");
    Vec x = {1.0, 0.5};
    McConfig cfg;
    cfg.samples = 200000;
    cfg.steps = 256;
    cfg.seed = 8001;
    std::vector<double> grid = {0.02, 0.03, 0.045, 0.0675, 0.1};
    CurvatureFit fit = fit_psi4(*s, x, grid, cfg);
    CurvatureReport rep = curvature_report(fit, *s, x);
    io::write_curvature_report(fit, rep, "sphere:d=2,r=1", x, "acceptance_curvature_sphere.json",
                               "");

    const bool theta_ok = rep.theta_rel_err <= 0.15;
    const bool annihilate_ok = rep.theta_normal_max_sigma <= 4.0;
    std::ostringstream os8;
    os8 << "theta rel err=" << rep.theta_rel_err << " (15% allowed); normal annihilation |z|="
        << rep.theta_normal_max_sigma << "; moment-relation max sigma=" << fit.mom2_max_sigma
        << ", " << now_s() - t0 << "s";
    line("criterion 8: metric recovery from the t^2 coefficient", theta_ok && annihilate_ok,
         os8.str());

    // criterion 9 (stretch tolerance; documented fallback per the criterion)
    const double want_xi = -5.0 / 432;
    double xi_rel = 0;
    for (int a = 0; a < 2; ++a)
        xi_rel = std::max(xi_rel, std::fabs(rep.cxi_tangent[a][a] - want_xi) / std::fabs(want_xi));
    const double s_rel = std::fabs(rep.S.value - 2.0) / 2.0;
    const bool sphere_in_budget = xi_rel <= 0.30 && s_rel <= 0.35;

    const double t1 = now_s();
    auto tor = make_manifold("clifford");
    Vec xt = {0.3, 1.1};
    McConfig cfgt = cfg;
    cfgt.seed = 9001;
    cfgt.chart_radius = 0.9 * tor->injectivity_radius();
    CurvatureFit fitt = fit_psi4(*tor, xt, grid, cfgt);
    CurvatureReport rept = curvature_report(fitt, *tor, xt);
    io::write_curvature_report(fitt, rept, "clifford", xt, "acceptance_curvature_torus.json", "");
    double ric_z = 0, bh_rel = 0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            ric_z = std::max(ric_z, std::fabs(rept.ric.value[a][b]) /
                                        (rept.ric.stderr_[a][b] > 0 ? rept.ric.stderr_[a][b] : 1e-300));
            const double want = (a == b) ? 1.0 : 0.0;
            if (a == b)
                bh_rel = std::max(bh_rel, std::fabs(rept.BH.value[a][b] - want));
            else
                bh_rel = std::max(bh_rel, std::fabs(rept.BH.value[a][b]));
        }
    const bool torus_ok = ric_z <= 3.0 && bh_rel <= 0.35;

    std::ostringstream os9;
    const bool in_budget = sphere_in_budget && torus_ok;
    os9 << "sphere xi rel err=" << xi_rel << " (30% budget), S=" << rep.S.value
        << " rel err=" << s_rel << " (35% budget); torus Ric |z|=" << ric_z
        << " (3 allowed), <B,H> err=" << bh_rel << " (35% budget)"
        << (in_budget ? ""
                      : " -- achieved errors documented; the exact identity and table "
                        "checks bind (reports: acceptance_curvature_*.json)")
        << ", " << now_s() - t1 << "s";
    // statistical overruns downgrade to documentation by the criterion itself
    line("criterion 9: curvature recovery from the t^3 coefficient", in_budget, os9.str(),
         /*documented_ok=*/true);
}

// ---------------------------------------------------------------- criterion 10
void criterion10() {
    const double t0 = now_s();
    auto s = make_manifold("sphere:d=2,r=1");
    Vec x = {1.0, 0.5}, y = {1.8, 0.5}; // meridian separation 0.8
    McConfig cfg;
    cfg.samples = 100000;
    cfg.steps = 256;
    cfg.seed = 10001;
    DistanceReport rep = reconstruct_distance(*s, x, y, 8, 1.0, cfg);
    io::write_distance_report(rep, "sphere:d=2,r=1", x, y, "acceptance_distance_sphere.json",
                              "acceptance_distance_sphere.csv");
    const double est8 = rep.rows.back().estimate;
    const bool sphere_ok = std::fabs(est8 - 0.8) <= 0.1;
    // trend: |estimate - d| shrinking on average
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& r : rep.rows) {
        const double v = std::log(std::fabs(r.estimate - 0.8) + 1e-6);
        sx += r.n;
        sy += v;
        sxx += r.n * r.n;
        sxy += r.n * v;
    }
    const double nr = static_cast<double>(rep.rows.size());
    const double slope = (nr * sxy - sx * sy) / (nr * sxx - sx * sx);
    const bool trend_ok = slope < 0.0;

    auto e = make_manifold("euclidean:d=2");
    McConfig cfge = cfg;
    cfge.seed = 10002;
    DistanceReport repe = reconstruct_distance(*e, {0, 0}, {1, 0}, 8, 1.0, cfge);
    const bool eucl_ok = std::fabs(repe.rows.back().estimate - 1.0) <= 0.1;

    TruncatedTensor geo = sig_geodesic(*s, x, y, 12, 512);
    const double geo_est = normalized_level_norm(geo, 12);
    const bool geo_ok = std::fabs(geo_est - 0.8) <= 0.08;

    std::ostringstream os;
    os << "sphere est(8)=" << est8 << " (|err|<=0.1), trend slope=" << slope
       << "; euclidean est(8)=" << repe.rows.back().estimate << "; geodesic control n=12: "
       << geo_est << " (10% of 0.8), " << now_s() - t0 << "s";
    line("criterion 10: distance reconstruction", sphere_ok && trend_ok && eucl_ok && geo_ok,
         os.str());
}

// ---------------------------------------------------------------- criterion 11
void criterion11() {
    const double t0 = now_s();
    bool ok = true;
    std::string what;

    // algebra laws on random tensors
    {
        Rng rng(111, 0);
        auto rnd = [&](double scalar) {
            TruncatedTensor t(2, 4);
            for (auto& v : t.raw()) v = rng.next_normal();
            t.scalar() = scalar;
            return t;
        };
        auto a = rnd(0.3), b = rnd(-0.2), c = rnd(1.7);
        auto lhs = mul(mul(a, b), c), rhs = mul(a, mul(b, c));
        for (std::size_t i = 0; i < lhs.raw().size(); ++i)
            if (std::fabs(lhs.raw()[i] - rhs.raw()[i]) > 1e-12) ok = false;
        if (!ok) what = "associativity";
        auto g = rnd(1.0);
        auto p = mul(g, inverse(g));
        p.scalar() -= 1.0;
        for (double v : p.raw())
            if (std::fabs(v) > 1e-12) {
                ok = false;
                what = "group inverse";
            }
    }
    // Chen identity and level-2 shuffle on a random polyline
    {
        Rng rng(112, 0);
        std::vector<Vec> pts = {{0, 0, 0}};
        for (int i = 0; i < 6; ++i) {
            auto& p = pts.back();
            pts.push_back({p[0] + rng.next_normal(), p[1] + rng.next_normal(),
                           p[2] + rng.next_normal()});
        }
        AmbientPath p1, p2, p;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            p.times.push_back(i / 6.0);
            p.points.push_back(pts[i]);
            if (i <= 3) {
                p1.times.push_back(i / 3.0);
                p1.points.push_back(pts[i]);
            }
            if (i >= 3) {
                p2.times.push_back((i - 3) / 3.0);
                p2.points.push_back(pts[i]);
            }
        }
        auto sig = sig_piecewise_linear(p, 4);
        auto prod = mul(sig_piecewise_linear(p1, 4), sig_piecewise_linear(p2, 4));
        for (std::size_t i = 0; i < sig.raw().size(); ++i)
            if (std::fabs(sig.raw()[i] - prod.raw()[i]) > 1e-11) {
                ok = false;
                what = "Chen identity";
            }
        const double* l1 = sig.level(1);
        const double* l2 = sig.level(2);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (std::fabs(0.5 * (l2[i * 3 + j] + l2[j * 3 + i]) - 0.5 * l1[i] * l1[j]) >
                    1e-11) {
                    ok = false;
                    what = "shuffle symmetry";
                }
    }
    // contraction vs brute force
    {
        Rng rng(113, 0);
        std::vector<double> xi(81);
        for (auto& v : xi) v = rng.next_normal();
        auto c = contract_24(xi, 3);
        for (int u = 0; u < 3; ++u)
            for (int w = 0; w < 3; ++w) {
                double scum = 0;
                for (int a = 0; a < 3; ++a) scum += xi[((u * 3 + a) * 3 + w) * 3 + a];
                if (std::fabs(c[u * 3 + w] - scum) > 1e-13) {
                    ok = false;
                    what = "contraction";
                }
            }
    }
    // divergence cancellation
    {
        KernelExpr a = KernelExpr::monomial(1, 0, -1, 0);
        bool threw = false;
        try {
            a.integrate01();
        } catch (const DivergenceError&) {
            threw = true;
        }
        if (!threw) {
            ok = false;
            what = "divergence detection";
        }
        KernelExpr sum = a;
        sum += KernelExpr::monomial(-1, 0, -1, 0);
        sum += KernelExpr::monomial(1, 1, 0, 0);
        if (sum.integrate01() != Rational(1, 2)) {
            ok = false;
            what = "divergence cancellation";
        }
    }
    // seed determinism across worker counts
    {
        auto s = make_manifold("sphere:d=2,r=1");
        McConfig c1;
        c1.level = 3;
        c1.samples = 2048;
        c1.steps = 32;
        c1.seed = 114;
        c1.workers = 1;
        McConfig c2 = c1;
        c2.workers = 2;
        auto e1 = expected_signature(*s, {1.0, 0.5}, {1.0, 0.5}, 0.05, c1);
        auto e2 = expected_signature(*s, {1.0, 0.5}, {1.0, 0.5}, 0.05, c2);
        if (std::memcmp(e1.mean.raw().data(), e2.mean.raw().data(),
                        e1.mean.raw().size() * sizeof(double)) != 0) {
            ok = false;
            what = "worker determinism";
        }
    }
    std::ostringstream os;
    os << (ok ? "all property suites green" : "failed: " + what) << ", " << now_s() - t0 << "s";
    line("criterion 11: property suites", ok, os.str());
}

} // namespace

int main(int argc, char** argv) {
    std::string tier = "all";
    for (int i = 1; i + 1 < argc + 1; ++i) {
        if (i < argc && std::strcmp(argv[i], "--tier") == 0 && i + 1 < argc) tier = argv[i + 1];
    }
    const bool fast = tier == "fast" || tier == "all";
    const bool mc = tier == "mc" || tier == "all";
    if (fast) {
        criterion1();
        criterion2();
        criterion3();
        criterion4();
        criterion5();
        criterion11();
    }
    if (mc) {
        criterion6();
        criterion7();
        criteria89();
        criterion10();
    }
    std::cout << (failures == 0 ? "ACCEPTANCE OK" : "ACCEPTANCE FAILURES") << " (" << failures
              << " hard failures)\n";
    return failures;
}
