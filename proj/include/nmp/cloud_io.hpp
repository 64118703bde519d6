#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "nmp/geometry.hpp"

namespace nmp {

/// {delta, seed, manifold, mode, weights,
///  interior: [[x, y, z, A], ...], boundary: [[x, y, z, L, nx, ny, nz, kappa], ...]}
nlohmann::json cloud_to_json(const PointCloud& cloud);

/// Throws IoError (field "cloud") on malformed documents.
PointCloud cloud_from_json(const nlohmann::json& doc);

/// One row per sample: kind,x,y,z,weight,nx,ny,nz,kappa (normal columns empty for interior rows).
void write_cloud_csv(std::ostream& os, const PointCloud& cloud);

PointCloud load_cloud(const std::string& path);

}  // namespace nmp
