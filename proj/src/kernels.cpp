#include "xbar/kernels.hpp"

#include <stdexcept>

namespace xbar {

namespace {
// Below this many multiply-adds the fork/join overhead dominates on small
// arrays, so stay serial.
constexpr long kParallelThreshold = 16 * 1024;
}  // namespace

namespace reference {

Vector multiply(const Matrix& m, const Vector& v) {
    if (static_cast<int>(v.size()) != m.cols())
        throw std::invalid_argument("multiply: dimension mismatch");
    Vector y(static_cast<std::size_t>(m.rows()), 0.0);
    for (int r = 0; r < m.rows(); ++r) {
        const double* row = m.row(r);
        double acc = 0.0;
        for (int c = 0; c < m.cols(); ++c) acc += row[c] * v[c];
        y[r] = acc;
    }
    return y;
}

Vector multiply_transpose(const Matrix& m, const Vector& v) {
    if (static_cast<int>(v.size()) != m.rows())
        throw std::invalid_argument("multiply_transpose: dimension mismatch");
    Vector y(static_cast<std::size_t>(m.cols()), 0.0);
    for (int c = 0; c < m.cols(); ++c) {
        double acc = 0.0;
        for (int r = 0; r < m.rows(); ++r) acc += m(r, c) * v[r];
        y[c] = acc;
    }
    return y;
}

void add_outer(Matrix& acc, const Vector& a, const Vector& b) {
    if (static_cast<int>(a.size()) != acc.rows() || static_cast<int>(b.size()) != acc.cols())
        throw std::invalid_argument("add_outer: dimension mismatch");
    for (int r = 0; r < acc.rows(); ++r) {
        double* row = acc.row(r);
        const double ar = a[r];
        for (int c = 0; c < acc.cols(); ++c) row[c] += ar * b[c];
    }
}

}  // namespace reference

Vector multiply(const Matrix& m, const Vector& v) {
    if (static_cast<int>(v.size()) != m.cols())
        throw std::invalid_argument("multiply: dimension mismatch");
    const long work = static_cast<long>(m.rows()) * m.cols();
    Vector y(static_cast<std::size_t>(m.rows()), 0.0);
#pragma omp parallel for schedule(static) if (work >= kParallelThreshold)
    for (int r = 0; r < m.rows(); ++r) {
        const double* row = m.row(r);
        double acc = 0.0;
        for (int c = 0; c < m.cols(); ++c) acc += row[c] * v[c];
        y[r] = acc;
    }
    return y;
}

Vector multiply_transpose(const Matrix& m, const Vector& v) {
    if (static_cast<int>(v.size()) != m.rows())
        throw std::invalid_argument("multiply_transpose: dimension mismatch");
    const long work = static_cast<long>(m.rows()) * m.cols();
    Vector y(static_cast<std::size_t>(m.cols()), 0.0);
#pragma omp parallel for schedule(static) if (work >= kParallelThreshold)
    for (int c = 0; c < m.cols(); ++c) {
        double acc = 0.0;
        for (int r = 0; r < m.rows(); ++r) acc += m(r, c) * v[r];
        y[c] = acc;
    }
    return y;
}

void add_outer(Matrix& acc, const Vector& a, const Vector& b) {
    if (static_cast<int>(a.size()) != acc.rows() || static_cast<int>(b.size()) != acc.cols())
        throw std::invalid_argument("add_outer: dimension mismatch");
    const long work = static_cast<long>(acc.rows()) * acc.cols();
#pragma omp parallel for schedule(static) if (work >= kParallelThreshold)
    for (int r = 0; r < acc.rows(); ++r) {
        double* row = acc.row(r);
        const double ar = a[r];
        for (int c = 0; c < acc.cols(); ++c) row[c] += ar * b[c];
    }
}

}  // namespace xbar
