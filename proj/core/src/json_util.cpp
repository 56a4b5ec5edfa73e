#include "lab/json_util.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <random>

#include <fmt/format.h>

#include "lab/errors.hpp"

namespace lab {

std::string canonical_dump(const nlohmann::json& j) {
    return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

nlohmann::json number_to_json(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

double number_from_json(const nlohmann::json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.get<double>();
}

nlohmann::json matrix_to_json(const Matrix& m) {
    auto out = nlohmann::json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = nlohmann::json::array();
        for (double v : m.row(r)) row.push_back(number_to_json(v));
        out.push_back(std::move(row));
    }
    return out;
}

Matrix matrix_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ContractViolation("matrix must be an array of rows");
    std::vector<std::vector<double>> rows;
    rows.reserve(j.size());
    for (const auto& row : j) {
        if (!row.is_array()) throw ContractViolation("matrix row must be an array");
        std::vector<double> values;
        values.reserve(row.size());
        for (const auto& v : row) values.push_back(number_from_json(v));
        rows.push_back(std::move(values));
    }
    return Matrix::from_rows(rows);
}

std::string make_uuid() {
    thread_local std::mt19937_64 engine{[] {
        std::random_device rd;
        return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    }()};
    std::uint64_t hi = engine();
    std::uint64_t lo = engine();
    hi = (hi & 0xFFFFFFFFFFFF0FFFULL) | 0x0000000000004000ULL;
    lo = (lo & 0x3FFFFFFFFFFFFFFFULL) | 0x8000000000000000ULL;
    return fmt::format("{:08x}-{:04x}-{:04x}-{:04x}-{:012x}", hi >> 32, (hi >> 16) & 0xFFFF, hi & 0xFFFF,
                       lo >> 48, lo & 0xFFFFFFFFFFFFULL);
}

std::string utc_timestamp() {
    using namespace std::chrono;
    auto now = system_clock::now();
    auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
    std::time_t t = system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}.{:03}Z", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                       tm.tm_hour, tm.tm_min, tm.tm_sec, ms);
}

}  // namespace lab
