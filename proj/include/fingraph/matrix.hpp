#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace fingraph {

/// Dense real matrix, row-major, 64-bit floats throughout. The node count
/// here is tiny (order 10^2) so a plain O(N^3) dense kernel is all the
/// linear algebra the rest of the library needs.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    /// Builds from an explicit row list; throws DomainError on ragged rows
    /// or non-finite entries.
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    bool all_finite() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Standard product; throws ShapeError naming both shapes on a mismatch.
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scaled(const Matrix& a, double factor);

/// Scalar maps applied entrywise. sigmoid clamps its argument to
/// [-500, 500] before exponentiating, so it never overflows; the clamp is
/// invisible below |x| = 36 where the result already saturates.
/// sigmoid_from_value maps an already-computed sigmoid s to s*(1-s).
/// relu_grad is the exact subgradient used by the backward pass, with the
/// value at 0 defined as 0.
enum class Elementwise { relu, sigmoid, relu_grad, sigmoid_from_value };

Matrix map_elementwise(const Matrix& a, Elementwise f);

double sigmoid(double x);

/// Reductions; all throw DomainError on an empty matrix.
double sum(const Matrix& a);
double mean(const Matrix& a);
double max_value(const Matrix& a);
std::vector<double> column_mean(const Matrix& a);
/// Population convention: divides by the row count, not rows-1.
std::vector<double> column_std(const Matrix& a);

double frobenius_norm_sq(const Matrix& a);

double dot(std::span<const double> u, std::span<const double> v);

} // namespace fingraph
