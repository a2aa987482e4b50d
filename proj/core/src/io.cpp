#include "sigmani/io.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace sigmani {
namespace io {

using nlohmann::json;

namespace {
json tensor_json(const TruncatedTensor& t) {
    json levels = json::array();
    for (int k = 0; k <= t.max_level(); ++k) {
        json lv = json::array();
        const double* p = t.level(k);
        for (std::size_t i = 0; i < t.level_size(k); ++i) lv.push_back(p[i]);
        levels.push_back(std::move(lv));
    }
    return json{{"ambient_dim", t.ambient_dim()}, {"max_level", t.max_level()},
                {"levels", std::move(levels)}};
}

void dump(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(1) << "\n";
}

json mat_json(const Mat& m) {
    json out = json::array();
    for (const auto& row : m) out.push_back(row);
    return out;
}
} // namespace

void write_tensor_json(const TruncatedTensor& t, const std::string& path) {
    dump(tensor_json(t), path);
}

std::string tensor_to_json_string(const TruncatedTensor& t) { return tensor_json(t).dump(); }

TruncatedTensor read_tensor_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    TruncatedTensor t(j.at("ambient_dim").get<int>(), j.at("max_level").get<int>());
    const auto& levels = j.at("levels");
    if (static_cast<int>(levels.size()) != t.max_level() + 1)
        throw std::runtime_error("tensor file: level count mismatch");
    for (int k = 0; k <= t.max_level(); ++k) {
        const auto& lv = levels[k];
        if (lv.size() != t.level_size(k)) throw std::runtime_error("tensor file: level size mismatch");
        double* p = t.level(k);
        for (std::size_t i = 0; i < t.level_size(k); ++i) p[i] = lv[i].get<double>();
    }
    return t;
}

void write_path_csv(const AmbientPath& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    const std::size_t N = p.points.empty() ? 0 : p.points[0].size();
    out << "t";
    for (std::size_t i = 1; i <= N; ++i) out << ",x" << i;
    out << "\n" << std::setprecision(17);
    for (std::size_t s = 0; s < p.size(); ++s) {
        out << p.times[s];
        for (double v : p.points[s]) out << "," << v;
        out << "\n";
    }
}

AmbientPath read_path_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    AmbientPath p;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');
        p.times.push_back(std::stod(tok));
        Vec pt;
        while (std::getline(ss, tok, ',')) pt.push_back(std::stod(tok));
        p.points.push_back(std::move(pt));
    }
    return p;
}

void write_distance_report(const DistanceReport& rep, const std::string& manifold,
                           const Vec& x, const Vec& y, const std::string& json_path,
                           const std::string& csv_path) {
    json rows = json::array();
    for (const auto& r : rep.rows)
        rows.push_back(json{{"n", r.n}, {"t_n", r.t_n}, {"estimate", r.estimate},
                            {"stderr", r.stderr_jack}, {"oracle", r.oracle},
                            {"discard_fraction", r.discard_fraction}});
    json j{{"manifold", manifold}, {"x", x}, {"y", y}, {"kappa", rep.kappa},
           {"t_min", rep.t_min}, {"rows", std::move(rows)}};
    if (!json_path.empty()) dump(j, json_path);
    if (!csv_path.empty()) {
        std::ofstream out(csv_path);
        out << "n,t_n,estimate,stderr,oracle,discard_fraction\n" << std::setprecision(17);
        for (const auto& r : rep.rows)
            out << r.n << "," << r.t_n << "," << r.estimate << "," << r.stderr_jack << ","
                << r.oracle << "," << r.discard_fraction << "\n";
    }
}

void write_curvature_report(const CurvatureFit& fit, const CurvatureReport& rep,
                            const std::string& manifold, const Vec& x,
                            const std::string& json_path, const std::string& csv_path) {
    const int d = static_cast<int>(rep.ctheta_tangent.size());
    json theta{{"est", mat_json(rep.ctheta_tangent)},
               {"stderr", mat_json(rep.ctheta_tangent_stderr)},
               {"theory", (d - 1) / 24.0},
               {"rel_err", rep.theta_rel_err},
               {"normal_annihilation_max_sigma", rep.theta_normal_max_sigma},
               {"antisym_max_sigma", rep.antisym_max_sigma}};
    json xi{{"est", mat_json(rep.cxi_tangent)}, {"stderr", mat_json(rep.cxi_tangent_stderr)}};
    json recovered{
        {"S", json{{"value", rep.S.value}, {"stderr", rep.S.stderr_}, {"oracle", rep.S.oracle}}},
        {"H2", json{{"value", rep.H2.value}, {"stderr", rep.H2.stderr_}, {"oracle", rep.H2.oracle}}},
        {"Ric", json{{"value", mat_json(rep.ric.value)}, {"stderr", mat_json(rep.ric.stderr_)},
                     {"oracle", mat_json(rep.ric.oracle)}}},
        {"BH", json{{"value", mat_json(rep.BH.value)}, {"stderr", mat_json(rep.BH.stderr_)},
                    {"oracle", mat_json(rep.BH.oracle)}}}};
    json j{{"manifold", manifold}, {"x", x}, {"t_grid", fit.t_grid},
           {"samples_per_t", fit.samples_per_t},
           {"moment_relation_max_sigma", fit.mom2_max_sigma},
           {"theta", std::move(theta)}, {"xi", std::move(xi)},
           {"recovered", std::move(recovered)}, {"cond_number", rep.cond_number}};
    if (!json_path.empty()) dump(j, json_path);
    if (!csv_path.empty()) {
        std::ofstream out(csv_path);
        out << "t,samples\n" << std::setprecision(17);
        for (double t : fit.t_grid) out << t << "," << fit.samples_per_t << "\n";
    }
}

void write_identity_report(const std::map<std::string, double>& residuals,
                           const std::string& manifold, const Vec& x,
                           const std::string& json_path) {
    json res;
    for (const auto& [k, v] : residuals) res[k] = v;
    dump(json{{"manifold", manifold}, {"x", x}, {"residuals", std::move(res)}}, json_path);
}

void write_field_csv(const TensorField1D& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "theta,level,entry_index,value\n" << std::setprecision(17);
    const double dth = 2.0 * M_PI / f.grid;
    for (int g = 0; g < f.grid; ++g) {
        const auto& t = f.values[g];
        for (int k = 0; k <= t.max_level(); ++k) {
            const double* p = t.level(k);
            for (std::size_t i = 0; i < t.level_size(k); ++i)
                out << g * dth << "," << k << "," << i << "," << p[i] << "\n";
        }
    }
}

} // namespace io
} // namespace sigmani
