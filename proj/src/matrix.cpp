#include "fingraph/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fingraph/error.hpp"

namespace fingraph {

namespace {

std::string shape_str(std::size_t r, std::size_t c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

} // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw DomainError("ragged row in matrix literal");
        for (double v : r) {
            if (!std::isfinite(v)) throw DomainError("non-finite entry in matrix literal");
            data_.push_back(v);
        }
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

bool Matrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul shape mismatch: " + shape_str(a.rows(), a.cols()) + " * " +
                         shape_str(b.rows(), b.cols()));
    }
    Matrix out(a.rows(), b.cols(), 0.0);
    // i-k-j order keeps the inner loop contiguous; the zero skip pays off on
    // normalized adjacencies, which are about half zeros.
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const auto brow = b.row(k);
            auto orow = out.row(i);
            for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

namespace {

Matrix zip(const Matrix& a, const Matrix& b, double (*f)(double, double), const char* name) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(name) + " shape mismatch: " + shape_str(a.rows(), a.cols()) +
                         " vs " + shape_str(b.rows(), b.cols()));
    }
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = f(a.data()[i], b.data()[i]);
    return out;
}

} // namespace

Matrix add(const Matrix& a, const Matrix& b) {
    return zip(a, b, [](double x, double y) { return x + y; }, "add");
}

Matrix subtract(const Matrix& a, const Matrix& b) {
    return zip(a, b, [](double x, double y) { return x - y; }, "subtract");
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    return zip(a, b, [](double x, double y) { return x * y; }, "hadamard");
}

Matrix scaled(const Matrix& a, double factor) {
    Matrix out = a;
    for (double& v : out.data()) v *= factor;
    return out;
}

double sigmoid(double x) {
    const double clamped = std::clamp(x, -500.0, 500.0);
    return 1.0 / (1.0 + std::exp(-clamped));
}

Matrix map_elementwise(const Matrix& a, Elementwise f) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a.data()[i];
        double y = 0.0;
        switch (f) {
            case Elementwise::relu: y = x > 0.0 ? x : 0.0; break;
            case Elementwise::sigmoid: y = sigmoid(x); break;
            case Elementwise::relu_grad: y = x > 0.0 ? 1.0 : 0.0; break;
            case Elementwise::sigmoid_from_value: y = x * (1.0 - x); break;
        }
        out.data()[i] = y;
    }
    return out;
}

namespace {

void require_nonempty(const Matrix& a, const char* op) {
    if (a.empty()) throw DomainError(std::string(op) + " of an empty matrix");
}

} // namespace

double sum(const Matrix& a) {
    require_nonempty(a, "sum");
    double s = 0.0;
    for (double v : a.data()) s += v;
    return s;
}

double mean(const Matrix& a) {
    require_nonempty(a, "mean");
    return sum(a) / static_cast<double>(a.size());
}

double max_value(const Matrix& a) {
    require_nonempty(a, "max");
    return *std::max_element(a.data().begin(), a.data().end());
}

std::vector<double> column_mean(const Matrix& a) {
    require_nonempty(a, "column_mean");
    std::vector<double> out(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out[j] += a(i, j);
    for (double& v : out) v /= static_cast<double>(a.rows());
    return out;
}

std::vector<double> column_std(const Matrix& a) {
    require_nonempty(a, "column_std");
    const std::vector<double> mu = column_mean(a);
    std::vector<double> out(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double d = a(i, j) - mu[j];
            out[j] += d * d;
        }
    }
    for (double& v : out) v = std::sqrt(v / static_cast<double>(a.rows()));
    return out;
}

double frobenius_norm_sq(const Matrix& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return s;
}

double dot(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw ShapeError("dot length mismatch: " + std::to_string(u.size()) + " vs " +
                         std::to_string(v.size()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

} // namespace fingraph
