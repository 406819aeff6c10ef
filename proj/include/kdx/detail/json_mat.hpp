#pragma once

// JSON <-> Eigen helpers shared by the model serializers.

#include <string>

#include <json.hpp>

#include "kdx/errors.hpp"
#include "kdx/linalg.hpp"

namespace kdx::detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline nlohmann::json vector_to_json(const Vector& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

inline Matrix matrix_from_json(const nlohmann::json& j,
                               const std::string& what) {
    if (!j.is_array() || j.empty())
        throw ConfigError("model JSON: '" + what +
                          "' must be a non-empty array of rows");
    const auto rows = static_cast<Index>(j.size());
    if (!j[0].is_array() || j[0].empty())
        throw ConfigError("model JSON: '" + what +
                          "' rows must be non-empty arrays");
    const auto cols = static_cast<Index>(j[0].size());
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols)
            throw ConfigError("model JSON: ragged rows in '" + what + "'");
        for (Index c = 0; c < cols; ++c) {
            const auto& cell = row[static_cast<std::size_t>(c)];
            if (!cell.is_number())
                throw ConfigError("model JSON: non-numeric entry in '" + what +
                                  "'");
            m(i, c) = cell.get<double>();
        }
    }
    return m;
}

inline Vector vector_from_json(const nlohmann::json& j,
                               const std::string& what) {
    if (!j.is_array())
        throw ConfigError("model JSON: '" + what + "' must be an array");
    Vector v(static_cast<Index>(j.size()));
    for (Index i = 0; i < v.size(); ++i) {
        const auto& cell = j[static_cast<std::size_t>(i)];
        if (!cell.is_number())
            throw ConfigError("model JSON: non-numeric entry in '" + what +
                              "'");
        v[i] = cell.get<double>();
    }
    return v;
}

inline const nlohmann::json& require_field(const nlohmann::json& j,
                                           const std::string& key) {
    if (!j.is_object() || !j.contains(key))
        throw ConfigError("model JSON: missing field '" + key + "'");
    return j.at(key);
}

inline void require_kind(const nlohmann::json& j, const std::string& kind) {
    const auto& k = require_field(j, "kind");
    if (!k.is_string() || k.get<std::string>() != kind)
        throw ConfigError("model JSON: expected kind '" + kind + "'");
}

}  // namespace kdx::detail
