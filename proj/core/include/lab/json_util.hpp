#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lab/matrix.hpp"

namespace lab {

/// Canonical text form: sorted keys, no insignificant whitespace, round-trip
/// float rendering. Invalid UTF-8 in strings is replaced rather than rejected.
std::string canonical_dump(const nlohmann::json& j);

/// Finite doubles become numbers; NaN and infinities become null.
nlohmann::json number_to_json(double v);
/// Inverse of number_to_json: null reads back as NaN.
double number_from_json(const nlohmann::json& j);

nlohmann::json matrix_to_json(const Matrix& m);
/// Throws nlohmann::json::type_error / ContractViolation on malformed input.
Matrix matrix_from_json(const nlohmann::json& j);

/// RFC 4122 version-4 identifier drawn from the system entropy source.
std::string make_uuid();

/// ISO-8601 UTC timestamp with millisecond precision.
std::string utc_timestamp();

}  // namespace lab
