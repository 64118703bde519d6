#include "nmp/error.hpp"

namespace nmp {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Domain: return "domain_error";
        case ErrorKind::Config: return "config_error";
        case ErrorKind::Geometry: return "geometry_error";
        case ErrorKind::Assembly: return "assembly_error";
        case ErrorKind::SingularReduction: return "singular_reduction_error";
        case ErrorKind::NonConvergence: return "non_convergence_error";
        case ErrorKind::Metric: return "metric_error";
        case ErrorKind::Io: return "io_error";
    }
    return "error";
}

}  // namespace nmp
