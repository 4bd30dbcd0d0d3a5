#pragma once
// Minimal dense vector/matrix types. Row-major storage throughout; matrices
// are sized once and never reshaped in hot loops.

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "pathexplain/common.hpp"

namespace pathexplain {

using Vec = std::vector<double>;

struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec data;  // row-major: data[r * cols + c]

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
    Mat(std::size_t r, std::size_t c, Vec values) : rows(r), cols(c), data(std::move(values)) {
        if (data.size() != rows * cols)
            throw input_error("matrix data size does not match rows*cols");
    }

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    const double* row(std::size_t r) const { return data.data() + r * cols; }
    double* row(std::size_t r) { return data.data() + r * cols; }

    Vec row_vec(std::size_t r) const { return Vec(row(r), row(r) + cols); }
};

inline double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw input_error("dot: size mismatch");
    return dot(a.data(), b.data(), a.size());
}

/// out = W * x + b   (out may not alias x)
inline void affine(const Mat& w, const Vec& b, const Vec& x, Vec& out) {
    out.resize(w.rows);
    for (std::size_t r = 0; r < w.rows; ++r) out[r] = dot(w.row(r), x.data(), w.cols) + b[r];
}

/// out = W^T * y   (used by reverse-mode sweeps; out may not alias y)
inline void matvec_transpose(const Mat& w, const Vec& y, Vec& out) {
    out.assign(w.cols, 0.0);
    for (std::size_t r = 0; r < w.rows; ++r) {
        const double* wr = w.row(r);
        double yr = y[r];
        if (yr == 0.0) continue;
        for (std::size_t c = 0; c < w.cols; ++c) out[c] += wr[c] * yr;
    }
}

inline void axpy(double a, const Vec& x, Vec& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline double max_abs(const Vec& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double max_abs(const Mat& m) { return max_abs(m.data); }

inline double frobenius_norm(const Mat& m) {
    double s = 0.0;
    for (double x : m.data) s += x * x;
    return std::sqrt(s);
}

inline double sum(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

inline double sum(const Mat& m) { return sum(m.data); }

}  // namespace pathexplain
