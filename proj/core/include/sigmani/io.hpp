#pragma once

#include "sigmani/estimator.hpp"
#include "sigmani/pde.hpp"
#include "sigmani/signature.hpp"
#include "sigmani/tensor.hpp"

#include <string>

namespace sigmani {
namespace io {

/// Tensor file format: {"ambient_dim":N,"max_level":m,"levels":[[...],...]}
/// with levels as flat lists in the frozen row-major index order.
void write_tensor_json(const TruncatedTensor& t, const std::string& path);
TruncatedTensor read_tensor_json(const std::string& path);
std::string tensor_to_json_string(const TruncatedTensor& t);

/// Path file format: CSV with header "t,x1,...,xN".
void write_path_csv(const AmbientPath& p, const std::string& path);
AmbientPath read_path_csv(const std::string& path);

void write_distance_report(const DistanceReport& rep, const std::string& manifold,
                           const Vec& x, const Vec& y, const std::string& json_path,
                           const std::string& csv_path);

void write_curvature_report(const CurvatureFit& fit, const CurvatureReport& rep,
                            const std::string& manifold, const Vec& x,
                            const std::string& json_path, const std::string& csv_path);

void write_identity_report(const std::map<std::string, double>& residuals,
                           const std::string& manifold, const Vec& x,
                           const std::string& json_path);

/// Field dump: CSV "theta,level,entry_index,value".
void write_field_csv(const TensorField1D& f, const std::string& path);

} // namespace io
} // namespace sigmani
