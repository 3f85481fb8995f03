#include "epialloc/linalg.hpp"

#include <cassert>

namespace epialloc {

Vec matvec(const Matrix& a, const Vec& x) {
    assert(a.cols() == x.size());
    Vec y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

double dot(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double sum(const Vec& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc;
}

} // namespace epialloc
