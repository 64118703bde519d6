#include "nmp/cloud_io.hpp"

#include <fstream>
#include <ostream>

#include "nmp/error.hpp"

namespace nmp {

using nlohmann::json;

json cloud_to_json(const PointCloud& cloud) {
    json interior = json::array();
    for (const auto& p : cloud.interior) {
        interior.push_back({p.position.x(), p.position.y(), p.position.z(), p.area});
    }
    json boundary = json::array();
    for (const auto& q : cloud.boundary) {
        boundary.push_back({q.position.x(), q.position.y(), q.position.z(), q.length, q.conormal.x(),
                            q.conormal.y(), q.conormal.z(), q.kappa});
    }
    return json{{"manifold", cloud.manifold},
                {"delta", cloud.delta},
                {"seed", cloud.seed},
                {"mode", to_string(cloud.mode)},
                {"weights", to_string(cloud.weights)},
                {"interior", std::move(interior)},
                {"boundary", std::move(boundary)}};
}

PointCloud cloud_from_json(const json& doc) {
    try {
        PointCloud cloud;
        cloud.manifold = doc.value("manifold", std::string("hemisphere"));
        cloud.delta = doc.at("delta").get<double>();
        cloud.seed = doc.at("seed").get<std::uint64_t>();
        cloud.mode = parse_sampling_mode(doc.value("mode", std::string("random")));
        cloud.weights = parse_weight_mode(doc.value("weights", std::string("uniform")));
        for (const auto& row : doc.at("interior")) {
            if (row.size() != 4) throw IoError("interior rows must have 4 entries", "cloud");
            cloud.interior.push_back({Vec3(row[0].get<double>(), row[1].get<double>(), row[2].get<double>()),
                                      row[3].get<double>()});
        }
        for (const auto& row : doc.at("boundary")) {
            if (row.size() != 8) throw IoError("boundary rows must have 8 entries", "cloud");
            cloud.boundary.push_back(
                {Vec3(row[0].get<double>(), row[1].get<double>(), row[2].get<double>()), row[3].get<double>(),
                 Vec3(row[4].get<double>(), row[5].get<double>(), row[6].get<double>()), row[7].get<double>()});
        }
        return cloud;
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed point cloud document: ") + e.what(), "cloud");
    }
}

void write_cloud_csv(std::ostream& os, const PointCloud& cloud) {
    os.precision(17);
    os << "kind,x,y,z,weight,nx,ny,nz,kappa\n";
    for (const auto& p : cloud.interior) {
        os << "interior," << p.position.x() << ',' << p.position.y() << ',' << p.position.z() << ','
           << p.area << ",,,,\n";
    }
    for (const auto& q : cloud.boundary) {
        os << "boundary," << q.position.x() << ',' << q.position.y() << ',' << q.position.z() << ','
           << q.length << ',' << q.conormal.x() << ',' << q.conormal.y() << ',' << q.conormal.z() << ','
           << q.kappa << '\n';
    }
}

PointCloud load_cloud(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open point cloud file " + path, path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw IoError("cannot parse point cloud file " + path + ": " + e.what(), path);
    }
    return cloud_from_json(doc);
}

}  // namespace nmp
