#include "dcda/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dcda {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) {
        throw std::invalid_argument("matrix: " + std::to_string(values_.size()) + " values for shape " +
                                    shape_string());
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    values_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw std::invalid_argument("matrix: ragged initializer rows");
        }
        values_.insert(values_.end(), r.begin(), r.end());
    }
}

bool Matrix::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

std::string Matrix::shape_string() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void Matrix::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            t(c, r) = (*this)(r, c);
        }
    }
    return t;
}

Matrix Matrix::slice_rows(std::size_t begin, std::size_t end) const {
    if (begin > end || end > rows_) {
        throw std::out_of_range("matrix: row slice [" + std::to_string(begin) + ", " + std::to_string(end) +
                                ") outside " + shape_string());
    }
    std::vector<double> v(values_.begin() + static_cast<std::ptrdiff_t>(begin * cols_),
                          values_.begin() + static_cast<std::ptrdiff_t>(end * cols_));
    return Matrix(end - begin, cols_, std::move(v));
}

Matrix Matrix::gather_rows(std::span<const std::size_t> indices) const {
    Matrix out(indices.size(), cols_);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= rows_) {
            throw std::out_of_range("matrix: gather index " + std::to_string(indices[i]) + " outside " +
                                    shape_string());
        }
        std::copy_n(row(indices[i]).begin(), cols_, out.row(i).begin());
    }
    return out;
}

Matrix Matrix::vstack(const Matrix& top, const Matrix& bottom) {
    if (top.empty()) return bottom;
    if (bottom.empty()) return top;
    if (top.cols_ != bottom.cols_) {
        throw std::invalid_argument("matrix: vstack of " + top.shape_string() + " and " + bottom.shape_string());
    }
    std::vector<double> v;
    v.reserve(top.size() + bottom.size());
    v.insert(v.end(), top.values_.begin(), top.values_.end());
    v.insert(v.end(), bottom.values_.begin(), bottom.values_.end());
    return Matrix(top.rows_ + bottom.rows_, top.cols_, std::move(v));
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace dcda
