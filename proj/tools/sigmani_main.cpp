// sigmani: Brownian bridge / loop expected-signature toolkit.
//
// Subcommands: sig, bridge-sample, expected-sig, recon-distance,
// recon-curvature, pde, oracle, geometry-check. Outputs report.json and
// series.csv under --out. Exit codes: 0 success, 1 runtime error, 2 usage.

#include <CLI11.hpp>
#include <json.hpp>

#include "sigmani/bridge.hpp"
#include "sigmani/estimator.hpp"
#include "sigmani/geometry.hpp"
#include "sigmani/golden.hpp"
#include "sigmani/io.hpp"
#include "sigmani/oracle.hpp"
#include "sigmani/pde.hpp"
#include "sigmani/signature.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace sigmani;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int env_workers() {
    if (const char* e = std::getenv("SIGMANI_THREADS")) {
        int w = std::atoi(e);
        if (w > 0) return w;
    }
    return 0; // auto
}

Vec parse_point(const std::string& s) {
    Vec out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

std::vector<double> parse_grid(const std::string& s) { return parse_point(s); }

void ensure_out(const std::string& dir) {
    if (!dir.empty()) fs::create_directories(dir);
}

// resolved run configuration embedded verbatim in every report; the worker
// count is execution detail and deliberately not part of it, so reports are
// byte-identical across worker counts
json config_json(const std::string& cmd, const json& extra) {
    json j = extra;
    j["subcommand"] = cmd;
    return j;
}

void write_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    out << j.dump(1) << "\n";
}

McConfig mc_config(std::size_t samples, int level, std::uint64_t seed, int steps,
                   double chart_radius, bool antithetic, const std::string& discard,
                   const std::string& mode, int workers) {
    McConfig cfg;
    cfg.samples = samples;
    cfg.level = level;
    cfg.seed = seed;
    cfg.steps = steps;
    cfg.chart_radius = chart_radius;
    cfg.antithetic = antithetic;
    cfg.discard = discard == "keep" ? DiscardPolicy::keep_all : DiscardPolicy::drop_exited;
    if (mode == "exact") cfg.kernel_mode = HeatKernelMode::exact;
    if (mode == "small_time") cfg.kernel_mode = HeatKernelMode::small_time;
    cfg.workers = workers;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"expected signatures of Brownian bridges on embedded manifolds"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "flat key=value configuration file");
    app.allow_config_extras(true);

    int workers = env_workers();
    app.add_option("--workers", workers, "worker threads (default: SIGMANI_THREADS or cores)");

    std::string out_dir = "out";
    app.add_option("--out", out_dir, "output directory");

    // ---- sig ----
    auto* c_sig = app.add_subcommand("sig", "signature of a CSV path");
    std::string sig_path;
    int sig_level = 4;
    c_sig->add_option("--path", sig_path, "CSV path file (t,x1,...,xN)")->required();
    c_sig->add_option("--level", sig_level, "truncation level");

    // ---- bridge-sample ----
    auto* c_bs = app.add_subcommand("bridge-sample", "sample bridge paths to CSV");
    std::string bs_manifold = "sphere:d=2,r=1", bs_x = "1.0,0.5", bs_y = "1.0,0.5";
    double bs_t = 0.05, bs_radius = 1.0;
    int bs_steps = 256, bs_samples = 4;
    std::uint64_t bs_seed = 1;
    std::string bs_mode = "auto";
    c_bs->add_option("--manifold", bs_manifold);
    c_bs->add_option("--x", bs_x);
    c_bs->add_option("--y", bs_y);
    c_bs->add_option("--t", bs_t);
    c_bs->add_option("--steps", bs_steps);
    c_bs->add_option("--samples", bs_samples);
    c_bs->add_option("--seed", bs_seed);
    c_bs->add_option("--chart-radius", bs_radius);
    c_bs->add_option("--mode", bs_mode, "exact|small_time|auto");

    // ---- expected-sig ----
    auto* c_es = app.add_subcommand("expected-sig", "Monte Carlo expected signature");
    std::string es_manifold = "sphere:d=2,r=1", es_x = "1.0,0.5", es_y = "", es_mode = "auto",
                es_discard = "drop";
    double es_t = 0.05, es_radius = 1.0;
    int es_level = 4, es_steps = 256;
    std::size_t es_samples = 10000;
    std::uint64_t es_seed = 1;
    bool es_bm = false, es_no_anti = false;
    c_es->add_option("--manifold", es_manifold);
    c_es->add_option("--x", es_x);
    c_es->add_option("--y", es_y, "target point; defaults to x (a loop)");
    c_es->add_option("--t", es_t);
    c_es->add_option("--level", es_level);
    c_es->add_option("--steps", es_steps);
    c_es->add_option("--samples", es_samples);
    c_es->add_option("--seed", es_seed);
    c_es->add_option("--chart-radius", es_radius);
    c_es->add_option("--mode", es_mode, "exact|small_time|auto");
    c_es->add_option("--discard", es_discard, "drop|keep");
    c_es->add_flag("--bm", es_bm, "unconditioned Brownian motion instead of a bridge");
    c_es->add_flag("--no-antithetic", es_no_anti);

    // ---- recon-distance ----
    auto* c_rd = app.add_subcommand("recon-distance", "distance reconstruction report");
    std::string rd_manifold = "sphere:d=2,r=1", rd_x = "1.0,0.5", rd_y = "1.6,1.1",
                rd_mode = "auto";
    int rd_nmax = 8, rd_steps = 256;
    double rd_kappa = 1.0, rd_tmin = 1e-4, rd_radius = 1.0;
    std::size_t rd_samples = 100000;
    std::uint64_t rd_seed = 7;
    c_rd->add_option("--manifold", rd_manifold);
    c_rd->add_option("--x", rd_x);
    c_rd->add_option("--y", rd_y);
    c_rd->add_option("--nmax", rd_nmax);
    c_rd->add_option("--kappa", rd_kappa);
    c_rd->add_option("--tmin", rd_tmin);
    c_rd->add_option("--samples", rd_samples);
    c_rd->add_option("--steps", rd_steps);
    c_rd->add_option("--seed", rd_seed);
    c_rd->add_option("--chart-radius", rd_radius);
    c_rd->add_option("--mode", rd_mode);

    // ---- recon-curvature ----
    auto* c_rc = app.add_subcommand("recon-curvature", "curvature recovery from the t^3 fit");
    std::string rc_manifold = "sphere:d=2,r=1", rc_x = "1.0,0.5",
                rc_grid = "0.02,0.03,0.045,0.0675,0.1", rc_mode = "auto";
    int rc_steps = 256;
    std::size_t rc_samples = 200000;
    std::uint64_t rc_seed = 11;
    double rc_radius = 1.0;
    bool rc_no_t4 = false;
    c_rc->add_option("--manifold", rc_manifold);
    c_rc->add_option("--x", rc_x);
    c_rc->add_option("--tgrid", rc_grid, "comma-separated lifetimes");
    c_rc->add_option("--samples", rc_samples, "samples per grid point");
    c_rc->add_option("--steps", rc_steps);
    c_rc->add_option("--seed", rc_seed);
    c_rc->add_option("--chart-radius", rc_radius);
    c_rc->add_option("--mode", rc_mode);
    c_rc->add_flag("--no-t4", rc_no_t4, "drop the t^4 nuisance term from the fit");

    // ---- pde ----
    auto* c_pde = app.add_subcommand("pde", "expected-signature PDE solves");
    std::string pde_target = "circle-bm";
    double pde_t = 0.5, pde_theta_y = 0.0, pde_eps = 1e-3;
    int pde_grid = 512, pde_level = 4, pde_dim = 2;
    c_pde->add_option("--target", pde_target, "euclidean|circle-bm|circle-bridge");
    c_pde->add_option("--t", pde_t);
    c_pde->add_option("--grid", pde_grid);
    c_pde->add_option("--level", pde_level);
    c_pde->add_option("--dim", pde_dim, "dimension for the euclidean target");
    c_pde->add_option("--theta-y", pde_theta_y, "target angle for circle-bridge");
    c_pde->add_option("--eps-pde", pde_eps);

    // ---- oracle ----
    auto* c_or = app.add_subcommand("oracle", "exact symbolic coefficient tables");
    std::string or_case = "II.II", or_order = "t2", or_directive = "";
    bool or_audit = false;
    std::string or_data = std::string(SIGMANI_DATA_DIR_DEFAULT);
    c_or->add_option("--case", or_case, "case word, e.g. II.II or JI.P");
    c_or->add_option("--order", or_order, "t2|t3");
    c_or->add_option("--directive", or_directive, "restrict to one expansion row");
    c_or->add_flag("--audit", or_audit, "recompute and diff every reference table");
    c_or->add_option("--data", or_data, "golden table directory");

    // ---- geometry-check ----
    auto* c_gc = app.add_subcommand("geometry-check", "identity residual report");
    std::string gc_manifold = "sphere:d=2,r=1", gc_x = "1.0,0.5";
    c_gc->add_option("--manifold", gc_manifold);
    c_gc->add_option("--x", gc_x);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        ensure_out(out_dir);
        if (*c_sig) {
            AmbientPath p = io::read_path_csv(sig_path);
            TruncatedTensor sig = sig_piecewise_linear(p, sig_level);
            io::write_tensor_json(sig, out_dir + "/report.json");
            std::ofstream csv(out_dir + "/series.csv");
            csv << "level,hs_norm,normalized_norm\n";
            for (int k = 0; k <= sig_level; ++k)
                csv << k << "," << hs_norm(sig, k) << "," << normalized_level_norm(sig, k) << "\n";
            std::cout << "sig: level " << sig_level << " signature of " << p.size()
                      << " points -> " << out_dir << "/report.json\n";
        } else if (*c_bs) {
            auto M = make_manifold(bs_manifold);
            HeatKernelMode mode = bs_mode == "exact"   ? HeatKernelMode::exact
                                  : bs_mode == "small_time" ? HeatKernelMode::small_time
                                                            : default_heat_kernel_mode(*M);
            HeatKernelModel kern(*M, mode);
            BridgeConfig bc;
            bc.t = bs_t;
            bc.steps = bs_steps;
            bc.chart_radius = bs_radius;
            bc.kernel = &kern;
            Vec x = parse_point(bs_x), y = parse_point(bs_y);
            json meta = json::array();
            for (int i = 0; i < bs_samples; ++i) {
                Rng rng(bs_seed, static_cast<std::uint64_t>(i));
                BridgePath bp = sample_bridge(*M, x, y, bc, rng);
                std::string f = out_dir + "/path_" + std::to_string(i) + ".csv";
                io::write_path_csv(bp.path, f);
                meta.push_back(json{{"file", f},
                                    {"exited", bp.meta.exited},
                                    {"chart_radius", bp.meta.chart_radius},
                                    {"steps", bp.meta.steps},
                                    {"lifetime", bp.meta.lifetime},
                                    {"path_index", i}});
            }
            json rep = config_json("bridge-sample",
                                   json{{"manifold", bs_manifold}, {"x", x}, {"y", y},
                                        {"t", bs_t}, {"steps", bs_steps}, {"seed", bs_seed},
                                        {"chart_radius", bs_radius},
                                        {"mode", mode == HeatKernelMode::exact ? "exact" : "small_time"}});
            rep["paths"] = std::move(meta);
            write_json(rep, out_dir + "/report.json");
            std::cout << "bridge-sample: " << bs_samples << " paths -> " << out_dir << "\n";
        } else if (*c_es) {
            auto M = make_manifold(es_manifold);
            Vec x = parse_point(es_x);
            Vec y = es_y.empty() ? x : parse_point(es_y);
            McConfig cfg = mc_config(es_samples, es_level, es_seed, es_steps, es_radius,
                                     !es_no_anti, es_discard, es_mode, workers);
            SignatureEstimate est = es_bm ? expected_signature_bm(*M, x, es_t, cfg)
                                          : expected_signature(*M, x, y, es_t, cfg);
            json rep = config_json(
                "expected-sig",
                json{{"manifold", es_manifold}, {"x", x}, {"y", y}, {"t", es_t},
                     {"level", es_level}, {"samples", es_samples}, {"seed", es_seed},
                     {"steps", es_steps}, {"discard_policy", est.discard_policy},
                     {"antithetic", !es_no_anti}, {"bm", es_bm}});
            rep["mean"] = json::parse(io::tensor_to_json_string(est.mean));
            rep["stderr"] = json::parse(io::tensor_to_json_string(est.stderr_tensor));
            rep["effective_samples"] = est.samples;
            rep["discarded"] = est.discarded;
            write_json(rep, out_dir + "/report.json");
            std::ofstream csv(out_dir + "/series.csv");
            csv << "level,hs_norm,normalized_norm\n";
            for (int k = 0; k <= es_level; ++k)
                csv << k << "," << hs_norm(est.mean, k) << ","
                    << normalized_level_norm(est.mean, k) << "\n";
            std::cout << "expected-sig: " << est.samples << " kept, " << est.discarded
                      << " discarded -> " << out_dir << "/report.json\n";
        } else if (*c_rd) {
            auto M = make_manifold(rd_manifold);
            Vec x = parse_point(rd_x), y = parse_point(rd_y);
            McConfig cfg = mc_config(rd_samples, rd_nmax, rd_seed, rd_steps, rd_radius, true,
                                     "drop", rd_mode, workers);
            DistanceReport rep = reconstruct_distance(*M, x, y, rd_nmax, rd_kappa, cfg, rd_tmin);
            io::write_distance_report(rep, rd_manifold, x, y, out_dir + "/report.json",
                                      out_dir + "/series.csv");
            double worst_discard = 0;
            for (const auto& r : rep.rows) worst_discard = std::max(worst_discard, r.discard_fraction);
            if (worst_discard > 0.01)
                std::cerr << "warning: discard fraction " << worst_discard << " exceeds 1%\n";
            std::cout << "recon-distance: n=" << rep.rows.back().n << " estimate "
                      << rep.rows.back().estimate << " (oracle " << rep.rows.back().oracle
                      << ") -> " << out_dir << "/report.json\n";
        } else if (*c_rc) {
            auto M = make_manifold(rc_manifold);
            Vec x = parse_point(rc_x);
            McConfig cfg = mc_config(rc_samples, 4, rc_seed, rc_steps, rc_radius, true, "drop",
                                     rc_mode, workers);
            CurvatureFit fit = fit_psi4(*M, x, parse_grid(rc_grid), cfg, !rc_no_t4);
            CurvatureReport rep = curvature_report(fit, *M, x);
            io::write_curvature_report(fit, rep, rc_manifold, x, out_dir + "/report.json",
                                       out_dir + "/series.csv");
            std::cout << "recon-curvature: S " << rep.S.value << " (oracle " << rep.S.oracle
                      << "), |H|^2 " << rep.H2.value << " (oracle " << rep.H2.oracle << ") -> "
                      << out_dir << "/report.json\n";
        } else if (*c_pde) {
            if (pde_target == "euclidean") {
                EuclideanSolution sol = solve_euclidean(pde_t, pde_dim, pde_level);
                io::write_tensor_json(sol.closed_form, out_dir + "/report.json");
                json j = config_json("pde", json{{"target", pde_target}, {"t", pde_t},
                                                 {"dim", pde_dim}, {"level", pde_level},
                                                 {"rk4_vs_closed_form", sol.max_abs_diff}});
                write_json(j, out_dir + "/summary.json");
                std::cout << "pde euclidean: |rk4 - closed form| = " << sol.max_abs_diff << "\n";
            } else {
                CircleSchemeParams par;
                par.grid = pde_grid;
                par.level = pde_level;
                par.eps_pde = pde_eps;
                TensorField1D f = pde_target == "circle-bm"
                                      ? solve_circle_bm(pde_t, par)
                                      : solve_circle_bridge(pde_t, pde_theta_y, par);
                io::write_field_csv(f, out_dir + "/series.csv");
                json j = config_json("pde", json{{"target", pde_target}, {"t", pde_t},
                                                 {"grid", pde_grid}, {"level", pde_level},
                                                 {"theta_y", pde_theta_y}, {"eps_pde", pde_eps}});
                // convergence diagnostics: level-1 checks against closed forms
                if (pde_level >= 1) {
                    double worst = 0;
                    for (int g = 0; g < f.grid; ++g) {
                        const double th = 2.0 * M_PI * g / f.grid;
                        const double* l1 = f.at(g).level(1);
                        double w0, w1;
                        if (pde_target == "circle-bm") {
                            const double want = std::exp(-pde_t / 2) - 1.0;
                            w0 = want * std::cos(th);
                            w1 = want * std::sin(th);
                        } else {
                            w0 = std::cos(pde_theta_y) - std::cos(th);
                            w1 = std::sin(pde_theta_y) - std::sin(th);
                        }
                        worst = std::max({worst, std::fabs(l1[0] - w0), std::fabs(l1[1] - w1)});
                    }
                    j["level1_closed_form_error"] = worst;
                }
                write_json(j, out_dir + "/report.json");
                std::cout << "pde " << pde_target << ": field on " << pde_grid << " nodes -> "
                          << out_dir << "/series.csv\n";
            }
        } else if (*c_or) {
            if (or_audit) {
                oracle::GoldenData g = oracle::load_golden(or_data + "/reference");
                oracle::AuditReport rep = oracle::audit_reference_tables(g);
                std::string text = oracle::format_audit(rep);
                std::ofstream out(out_dir + "/audit.txt");
                out << text;
                std::cout << text;
            } else {
                std::string word = or_case;
                for (auto& c : word)
                    if (c == '.') c = ';';
                const int power = or_order == "t2" ? 2 : 3;
                oracle::CaseResult r = oracle::eval_case(word, power);
                const oracle::Table& tab =
                    or_directive.empty() ? r.total : r.by_directive[or_directive];
                // compact one-line summary for the plain-phi delta3 shape
                if (or_order == "t2" && or_directive.empty()) {
                    auto k_ijkl = [&](const std::string& patt) {
                        std::string spec = "ijkl";
                        for (std::size_t p = 0; p + 1 < patt.size(); p += 3) {
                            for (auto& ch : spec)
                                if (ch == patt[p + 1]) ch = patt[p];
                        }
                        return oracle::parse_key(spec);
                    };
                    auto get = [&](const char* patt) {
                        auto it = tab.find(k_ijkl(patt));
                        return it == tab.end() ? std::string("0") : to_string(it->second);
                    };
                    std::cout << get("ij,kl") << ", " << get("ik,jl") << ", " << get("il,jk")
                              << "\n";
                } else {
                    for (const auto& e : oracle::pretty(tab))
                        std::cout << e.label << "  " << e.pattern << "  " << e.value << "\n";
                }
                json out = json::array();
                for (const auto& e : oracle::pretty(tab))
                    out.push_back(json{{"label", e.label}, {"pattern", e.pattern},
                                       {"value", e.value}});
                write_json(json{{"case", or_case}, {"order", or_order},
                                {"basis", or_order == "t2" ? "delta3" : "delta15"},
                                {"entries", out}},
                           out_dir + "/report.json");
            }
        } else if (*c_gc) {
            auto M = make_manifold(gc_manifold);
            Vec x = parse_point(gc_x);
            auto rep = M->verify_identities(x);
            auto et = M->expansion_tensors(x);
            rep["xi_route_discrepancy"] = et.route_discrepancy;
            io::write_identity_report(rep, gc_manifold, x, out_dir + "/report.json");
            double worst = 0;
            for (const auto& [k, v] : rep) worst = std::max(worst, v);
            std::cout << "geometry-check: worst residual " << worst << " -> " << out_dir
                      << "/report.json\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
