#include <algorithm>
#include <cmath>
#include <cstdint>

#include "kernels_impl.hpp"

namespace perspcrop::simd::detail {
namespace {

template <class T>
void gemm(std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t lda, const T* b,
          std::size_t ldb, T* c, std::size_t ldc, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        T* ci = c + i * ldc;
        if (!accumulate) std::fill(ci, ci + n, T(0));
        for (std::size_t p = 0; p < k; ++p) {
            const T aip = a[i * lda + p];
            const T* bp = b + p * ldb;
            for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
        }
    }
}

template <class T>
void relu(const T* x, T* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <class T>
void relu_mask(const T* act, T* grad, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (!(act[i] > T(0))) grad[i] = T(0);
}

template <class T>
void add_rows(T* x, std::size_t m, std::size_t n, std::size_t ldx, const T* bias) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) x[i * ldx + j] += bias[j];
}

template <class T>
void column_sum(const T* x, std::size_t m, std::size_t n, std::size_t ldx, T* out) {
    std::fill(out, out + n, T(0));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[j] += x[i * ldx + j];
}

template <class T>
void adam(T* param, const T* grad, T* m1, T* m2, std::size_t n, T lr, T b1, T b2, T eps, T c1,
          T c2) {
    for (std::size_t i = 0; i < n; ++i) {
        const T g = grad[i];
        m1[i] = b1 * m1[i] + (T(1) - b1) * g;
        m2[i] = b2 * m2[i] + (T(1) - b2) * g * g;
        param[i] -= lr * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + eps);
    }
}

double homography_row(const double* h, double v, std::size_t out_w, double* xs, double* ys) {
    double min_w = INFINITY;
    const double row_x = h[1] * v + h[2];
    const double row_y = h[4] * v + h[5];
    const double row_w = h[7] * v + h[8];
    for (std::size_t j = 0; j < out_w; ++j) {
        const double u = (static_cast<double>(j) + 0.5) / static_cast<double>(out_w);
        const double x = h[0] * u + row_x;
        const double y = h[3] * u + row_y;
        const double w = h[6] * u + row_w;
        xs[j] = x / w;
        ys[j] = y / w;
        min_w = std::min(min_w, std::abs(w));
    }
    return min_w;
}

inline double snap(double p) {
    const double r = std::nearbyint(p);
    return std::abs(p - r) < kLatticeSnap ? r : p;
}

void bilinear(const double* img, std::size_t h, std::size_t w, std::size_t c, const double* xs,
              const double* ys, std::size_t n, double* out) {
    const double wd = static_cast<double>(w), hd = static_cast<double>(h);
    for (std::size_t s = 0; s < n; ++s) {
        const double px = std::clamp(snap(xs[s] * wd - 0.5), -2.0, wd + 1.0);
        const double py = std::clamp(snap(ys[s] * hd - 0.5), -2.0, hd + 1.0);
        const double fx0 = std::floor(px), fy0 = std::floor(py);
        const double fx = px - fx0, fy = py - fy0;
        const std::int64_t x0 = static_cast<std::int64_t>(fx0);
        const std::int64_t y0 = static_cast<std::int64_t>(fy0);
        const double wt[4] = {(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy};
        const std::int64_t cx[4] = {x0, x0 + 1, x0, x0 + 1};
        const std::int64_t cy[4] = {y0, y0, y0 + 1, y0 + 1};
        double* o = out + s * c;
        for (std::size_t ch = 0; ch < c; ++ch) o[ch] = 0.0;
        for (int q = 0; q < 4; ++q) {
            if (cx[q] < 0 || cy[q] < 0 || cx[q] >= static_cast<std::int64_t>(w) ||
                cy[q] >= static_cast<std::int64_t>(h))
                continue;
            const double* src = img + (static_cast<std::size_t>(cy[q]) * w +
                                       static_cast<std::size_t>(cx[q])) * c;
            for (std::size_t ch = 0; ch < c; ++ch) o[ch] += wt[q] * src[ch];
        }
    }
}

} // namespace

const KernelTable<float> scalar_f32{gemm<float>, relu<float>, relu_mask<float>, add_rows<float>,
                                    column_sum<float>, adam<float>};
const KernelTable<double> scalar_f64{gemm<double>, relu<double>, relu_mask<double>,
                                     add_rows<double>, column_sum<double>, adam<double>};
const ImageKernelTable scalar_image{homography_row, bilinear};

} // namespace perspcrop::simd::detail
