#ifndef EPIALLOC_LINALG_HPP
#define EPIALLOC_LINALG_HPP

#include <cstddef>
#include <vector>

namespace epialloc {

using Vec = std::vector<double>;

/// Dense row-major matrix of doubles. Small sizes only (counties x counties,
/// days x counties); no BLAS, no views.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    /// Row i as a copy.
    Vec row(std::size_t i) const {
        return Vec(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                   data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
    }

    void set_row(std::size_t i, const Vec& v) {
        for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) = v[j];
    }

    const std::vector<double>& data() const { return data_; }

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Vec matvec(const Matrix& a, const Vec& x);
double dot(const Vec& a, const Vec& b);
double sum(const Vec& v);

} // namespace epialloc

#endif
