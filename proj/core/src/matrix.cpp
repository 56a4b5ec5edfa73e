#include "lab/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "lab/errors.hpp"

namespace lab {

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m;
    for (const auto& r : rows) {
        std::vector<double> tmp(r);
        m.append_row(tmp);
    }
    return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m;
    if (!rows.empty()) {
        m.cols_ = rows.front().size();
        m.data_.reserve(rows.size() * m.cols_);
    }
    for (const auto& r : rows) {
        if (r.size() != m.cols_) throw ContractViolation("ragged rows in matrix literal");
        m.data_.insert(m.data_.end(), r.begin(), r.end());
        ++m.rows_;
    }
    return m;
}

Matrix Matrix::row_vector(std::span<const double> values) {
    Matrix m(1, values.size());
    std::copy(values.begin(), values.end(), m.data_.begin());
    return m;
}

void Matrix::append_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_) throw ContractViolation("row width does not match matrix");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

void Matrix::append_rows(const Matrix& other) {
    if (other.rows_ == 0) return;
    if (rows_ == 0 && cols_ == 0) cols_ = other.cols_;
    if (other.cols_ != cols_) throw ContractViolation("column count mismatch in append_rows");
    data_.insert(data_.end(), other.data_.begin(), other.data_.end());
    rows_ += other.rows_;
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
    Matrix out(indices.size(), cols_);
    for (std::size_t k = 0; k < indices.size(); ++k) {
        if (indices[k] >= rows_) throw ContractViolation("row index out of range");
        std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(indices[k] * cols_), cols_,
                    out.data_.begin() + static_cast<std::ptrdiff_t>(k * cols_));
    }
    return out;
}

std::vector<std::vector<double>> Matrix::to_rows() const {
    std::vector<std::vector<double>> out;
    out.reserve(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        auto v = row(r);
        out.emplace_back(v.begin(), v.end());
    }
    return out;
}

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace lab
