#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace lab {

/// Dense row-major matrix of doubles. Rows are solutions, columns are objectives
/// or decision variables.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);
    /// A single row vector viewed as a 1×n matrix.
    static Matrix row_vector(std::span<const double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    /// Appends a row; on an empty matrix with no columns the row fixes the width.
    void append_row(std::span<const double> values);
    /// Appends all rows of `other`, which must share the column count.
    void append_rows(const Matrix& other);
    Matrix select_rows(std::span<const std::size_t> indices) const;

    std::vector<std::vector<double>> to_rows() const;
    const std::vector<double>& data() const noexcept { return data_; }

    bool all_finite() const noexcept;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace lab
