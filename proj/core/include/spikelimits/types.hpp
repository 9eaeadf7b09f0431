#pragma once

#include <cstdint>
#include <string>

#include "spikelimits/errors.hpp"

namespace spikelimits {

enum class ModelMode { covariance, correlation };

enum class ModelStructure { identity_embedding, random_orthogonal, equal_weight_leading };

// Which sample matrix a statistic or CLT refers to.
enum class MatrixKind { covariance_matrix, correlation_matrix };

inline std::string to_string(ModelMode m) {
    return m == ModelMode::covariance ? "covariance" : "correlation";
}

inline std::string to_string(ModelStructure s) {
    switch (s) {
        case ModelStructure::identity_embedding: return "identity_embedding";
        case ModelStructure::random_orthogonal: return "random_orthogonal";
        case ModelStructure::equal_weight_leading: return "equal_weight_leading";
    }
    return "?";
}

inline std::string to_string(MatrixKind k) {
    return k == MatrixKind::covariance_matrix ? "covariance_matrix" : "correlation_matrix";
}

inline ModelMode parse_mode(const std::string& s) {
    if (s == "covariance") return ModelMode::covariance;
    if (s == "correlation") return ModelMode::correlation;
    throw ParseError("unknown model mode: " + s);
}

inline ModelStructure parse_structure(const std::string& s) {
    if (s == "identity_embedding") return ModelStructure::identity_embedding;
    if (s == "random_orthogonal") return ModelStructure::random_orthogonal;
    if (s == "equal_weight_leading") return ModelStructure::equal_weight_leading;
    throw ParseError("unknown model structure: " + s);
}

inline MatrixKind parse_kind(const std::string& s) {
    if (s == "covariance_matrix" || s == "covariance") return MatrixKind::covariance_matrix;
    if (s == "correlation_matrix" || s == "correlation") return MatrixKind::correlation_matrix;
    throw ParseError("unknown matrix kind: " + s);
}

}  // namespace spikelimits
