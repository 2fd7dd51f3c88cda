// AVX2 + FMA kernels. This translation unit is compiled with -mavx2 -mfma and
// must only be entered through the runtime dispatcher.

#include <immintrin.h>

#include <cmath>
#include <cstdint>

#include "kernels_impl.hpp"

namespace perspcrop::simd::detail {
namespace {

struct F32 {
    using T = float;
    using V = __m256;
    static constexpr std::size_t L = 8;
    static V zero() { return _mm256_setzero_ps(); }
    static V set1(T x) { return _mm256_set1_ps(x); }
    static V load(const T* p) { return _mm256_loadu_ps(p); }
    static void store(T* p, V v) { _mm256_storeu_ps(p, v); }
    static V fmadd(V a, V b, V c) { return _mm256_fmadd_ps(a, b, c); }
    static V add(V a, V b) { return _mm256_add_ps(a, b); }
    static V sub(V a, V b) { return _mm256_sub_ps(a, b); }
    static V mul(V a, V b) { return _mm256_mul_ps(a, b); }
    static V div(V a, V b) { return _mm256_div_ps(a, b); }
    static V sqrt(V a) { return _mm256_sqrt_ps(a); }
    static V max(V a, V b) { return _mm256_max_ps(a, b); }
    static V gt_mask(V a, V b) { return _mm256_cmp_ps(a, b, _CMP_GT_OQ); }
    static V and_(V a, V b) { return _mm256_and_ps(a, b); }
};

struct F64 {
    using T = double;
    using V = __m256d;
    static constexpr std::size_t L = 4;
    static V zero() { return _mm256_setzero_pd(); }
    static V set1(T x) { return _mm256_set1_pd(x); }
    static V load(const T* p) { return _mm256_loadu_pd(p); }
    static void store(T* p, V v) { _mm256_storeu_pd(p, v); }
    static V fmadd(V a, V b, V c) { return _mm256_fmadd_pd(a, b, c); }
    static V add(V a, V b) { return _mm256_add_pd(a, b); }
    static V sub(V a, V b) { return _mm256_sub_pd(a, b); }
    static V mul(V a, V b) { return _mm256_mul_pd(a, b); }
    static V div(V a, V b) { return _mm256_div_pd(a, b); }
    static V sqrt(V a) { return _mm256_sqrt_pd(a); }
    static V max(V a, V b) { return _mm256_max_pd(a, b); }
    static V gt_mask(V a, V b) { return _mm256_cmp_pd(a, b, _CMP_GT_OQ); }
    static V and_(V a, V b) { return _mm256_and_pd(a, b); }
};

// 4 rows x (NV * L) columns register block.
template <class Tr, std::size_t R, std::size_t NV>
inline void gemm_block(std::size_t k, const typename Tr::T* a, std::size_t lda,
                       const typename Tr::T* b, std::size_t ldb, typename Tr::T* c,
                       std::size_t ldc, bool accumulate) {
    using V = typename Tr::V;
    constexpr std::size_t L = Tr::L;
    V acc[R][NV];
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t v = 0; v < NV; ++v)
            acc[r][v] = accumulate ? Tr::load(c + r * ldc + v * L) : Tr::zero();
    for (std::size_t p = 0; p < k; ++p) {
        V bv[NV];
        for (std::size_t v = 0; v < NV; ++v) bv[v] = Tr::load(b + p * ldb + v * L);
        for (std::size_t r = 0; r < R; ++r) {
            const V av = Tr::set1(a[r * lda + p]);
            for (std::size_t v = 0; v < NV; ++v) acc[r][v] = Tr::fmadd(av, bv[v], acc[r][v]);
        }
    }
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t v = 0; v < NV; ++v) Tr::store(c + r * ldc + v * L, acc[r][v]);
}

template <class Tr, std::size_t NV>
inline void gemm_block1(std::size_t k, const typename Tr::T* a, const typename Tr::T* b,
                        std::size_t ldb, typename Tr::T* c, bool accumulate) {
    using V = typename Tr::V;
    constexpr std::size_t L = Tr::L;
    V acc[NV];
    for (std::size_t v = 0; v < NV; ++v) acc[v] = accumulate ? Tr::load(c + v * L) : Tr::zero();
    for (std::size_t p = 0; p < k; ++p) {
        const V av = Tr::set1(a[p]);
        for (std::size_t v = 0; v < NV; ++v) acc[v] = Tr::fmadd(av, Tr::load(b + p * ldb + v * L), acc[v]);
    }
    for (std::size_t v = 0; v < NV; ++v) Tr::store(c + v * L, acc[v]);
}

template <class T>
inline void gemm_tail(std::size_t rows, std::size_t k, const T* a, std::size_t lda, const T* b,
                      std::size_t ldb, T* c, std::size_t ldc, bool accumulate) {
    for (std::size_t r = 0; r < rows; ++r) {
        T acc = accumulate ? c[r * ldc] : T(0);
        for (std::size_t p = 0; p < k; ++p) acc = std::fma(a[r * lda + p], b[p * ldb], acc);
        c[r * ldc] = acc;
    }
}

template <class Tr>
void gemm(std::size_t m, std::size_t n, std::size_t k, const typename Tr::T* a, std::size_t lda,
          const typename Tr::T* b, std::size_t ldb, typename Tr::T* c, std::size_t ldc,
          bool accumulate) {
    constexpr std::size_t L = Tr::L;
    const std::size_t m6 = m - m % 6;
    // Column panels outermost so a k x 2L panel of B stays in L1 while every
    // 6-row block of A streams past it. 6 x 2L tile: 12 accumulators.
    std::size_t j = 0;
    for (; j + 2 * L <= n; j += 2 * L) {
        for (std::size_t i = 0; i < m6; i += 6)
            gemm_block<Tr, 6, 2>(k, a + i * lda, lda, b + j, ldb, c + i * ldc + j, ldc, accumulate);
        for (std::size_t i = m6; i < m; ++i)
            gemm_block1<Tr, 2>(k, a + i * lda, b + j, ldb, c + i * ldc + j, accumulate);
    }
    for (; j + L <= n; j += L) {
        for (std::size_t i = 0; i < m6; i += 6)
            gemm_block<Tr, 6, 1>(k, a + i * lda, lda, b + j, ldb, c + i * ldc + j, ldc, accumulate);
        for (std::size_t i = m6; i < m; ++i)
            gemm_block1<Tr, 1>(k, a + i * lda, b + j, ldb, c + i * ldc + j, accumulate);
    }
    for (; j < n; ++j) gemm_tail(m, k, a, lda, b + j, ldb, c + j, ldc, accumulate);
}

template <class Tr>
void relu(const typename Tr::T* x, typename Tr::T* y, std::size_t n) {
    using T = typename Tr::T;
    std::size_t i = 0;
    for (; i + Tr::L <= n; i += Tr::L) Tr::store(y + i, Tr::max(Tr::load(x + i), Tr::zero()));
    for (; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <class Tr>
void relu_mask(const typename Tr::T* act, typename Tr::T* grad, std::size_t n) {
    using T = typename Tr::T;
    std::size_t i = 0;
    for (; i + Tr::L <= n; i += Tr::L)
        Tr::store(grad + i, Tr::and_(Tr::load(grad + i), Tr::gt_mask(Tr::load(act + i), Tr::zero())));
    for (; i < n; ++i)
        if (!(act[i] > T(0))) grad[i] = T(0);
}

template <class Tr>
void add_rows(typename Tr::T* x, std::size_t m, std::size_t n, std::size_t ldx,
              const typename Tr::T* bias) {
    for (std::size_t r = 0; r < m; ++r) {
        auto* row = x + r * ldx;
        std::size_t j = 0;
        for (; j + Tr::L <= n; j += Tr::L) Tr::store(row + j, Tr::add(Tr::load(row + j), Tr::load(bias + j)));
        for (; j < n; ++j) row[j] += bias[j];
    }
}

template <class Tr>
void column_sum(const typename Tr::T* x, std::size_t m, std::size_t n, std::size_t ldx,
                typename Tr::T* out) {
    using T = typename Tr::T;
    std::size_t j = 0;
    for (; j + Tr::L <= n; j += Tr::L) {
        auto acc = Tr::zero();
        for (std::size_t r = 0; r < m; ++r) acc = Tr::add(acc, Tr::load(x + r * ldx + j));
        Tr::store(out + j, acc);
    }
    for (; j < n; ++j) {
        T acc = T(0);
        for (std::size_t r = 0; r < m; ++r) acc += x[r * ldx + j];
        out[j] = acc;
    }
}

template <class Tr>
void adam(typename Tr::T* param, const typename Tr::T* grad, typename Tr::T* m1,
          typename Tr::T* m2, std::size_t n, typename Tr::T lr, typename Tr::T b1,
          typename Tr::T b2, typename Tr::T eps, typename Tr::T c1, typename Tr::T c2) {
    using T = typename Tr::T;
    const auto vb1 = Tr::set1(b1), vb2 = Tr::set1(b2);
    const auto v1b1 = Tr::set1(T(1) - b1), v1b2 = Tr::set1(T(1) - b2);
    const auto vlr = Tr::set1(lr), veps = Tr::set1(eps), vc1 = Tr::set1(c1), vc2 = Tr::set1(c2);
    std::size_t i = 0;
    for (; i + Tr::L <= n; i += Tr::L) {
        const auto g = Tr::load(grad + i);
        const auto a = Tr::add(Tr::mul(vb1, Tr::load(m1 + i)), Tr::mul(v1b1, g));
        const auto b = Tr::add(Tr::mul(vb2, Tr::load(m2 + i)), Tr::mul(Tr::mul(v1b2, g), g));
        Tr::store(m1 + i, a);
        Tr::store(m2 + i, b);
        const auto step = Tr::div(Tr::mul(vlr, Tr::div(a, vc1)), Tr::add(Tr::sqrt(Tr::div(b, vc2)), veps));
        Tr::store(param + i, Tr::sub(Tr::load(param + i), step));
    }
    for (; i < n; ++i) {
        const T g = grad[i];
        m1[i] = b1 * m1[i] + (T(1) - b1) * g;
        m2[i] = b2 * m2[i] + (T(1) - b2) * g * g;
        param[i] -= lr * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + eps);
    }
}

double homography_row(const double* h, double v, std::size_t out_w, double* xs, double* ys) {
    const double row_x = h[1] * v + h[2];
    const double row_y = h[4] * v + h[5];
    const double row_w = h[7] * v + h[8];
    const __m256d inv_w = _mm256_set1_pd(static_cast<double>(out_w));
    const __m256d h0 = _mm256_set1_pd(h[0]), h3 = _mm256_set1_pd(h[3]), h6 = _mm256_set1_pd(h[6]);
    const __m256d rx = _mm256_set1_pd(row_x), ry = _mm256_set1_pd(row_y), rw = _mm256_set1_pd(row_w);
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d min_w = _mm256_set1_pd(INFINITY);
    std::size_t j = 0;
    for (; j + 4 <= out_w; j += 4) {
        const double jd = static_cast<double>(j);
        const __m256d u = _mm256_div_pd(
            _mm256_add_pd(_mm256_set_pd(jd + 3.0, jd + 2.0, jd + 1.0, jd), _mm256_set1_pd(0.5)), inv_w);
        const __m256d x = _mm256_fmadd_pd(h0, u, rx);
        const __m256d y = _mm256_fmadd_pd(h3, u, ry);
        const __m256d w = _mm256_fmadd_pd(h6, u, rw);
        _mm256_storeu_pd(xs + j, _mm256_div_pd(x, w));
        _mm256_storeu_pd(ys + j, _mm256_div_pd(y, w));
        min_w = _mm256_min_pd(min_w, _mm256_andnot_pd(sign, w));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, min_w);
    double result = std::fmin(std::fmin(lanes[0], lanes[1]), std::fmin(lanes[2], lanes[3]));
    for (; j < out_w; ++j) {
        const double u = (static_cast<double>(j) + 0.5) / static_cast<double>(out_w);
        const double x = h[0] * u + row_x;
        const double y = h[3] * u + row_y;
        const double w = h[6] * u + row_w;
        xs[j] = x / w;
        ys[j] = y / w;
        result = std::fmin(result, std::abs(w));
    }
    return result;
}

inline __m256d snap(__m256d p) {
    const __m256d r = _mm256_round_pd(p, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    const __m256d d = _mm256_andnot_pd(_mm256_set1_pd(-0.0), _mm256_sub_pd(p, r));
    return _mm256_blendv_pd(p, r, _mm256_cmp_pd(d, _mm256_set1_pd(kLatticeSnap), _CMP_LT_OQ));
}

inline __m256d in_range(__m256d v, __m256d hi) {
    return _mm256_and_pd(_mm256_cmp_pd(v, _mm256_setzero_pd(), _CMP_GE_OQ),
                         _mm256_cmp_pd(v, hi, _CMP_LE_OQ));
}

void bilinear(const double* img, std::size_t h, std::size_t w, std::size_t c, const double* xs,
              const double* ys, std::size_t n, double* out) {
    const double wd = static_cast<double>(w), hd = static_cast<double>(h);
    const __m256d vw = _mm256_set1_pd(wd), vh = _mm256_set1_pd(hd);
    const __m256d half = _mm256_set1_pd(0.5), one = _mm256_set1_pd(1.0);
    const __m256d lo = _mm256_set1_pd(-2.0);
    const __m256d hix = _mm256_set1_pd(wd + 1.0), hiy = _mm256_set1_pd(hd + 1.0);
    const __m256d maxx = _mm256_set1_pd(wd - 1.0), maxy = _mm256_set1_pd(hd - 1.0);
    const __m128i row_stride = _mm_set1_epi32(static_cast<int>(w * c));
    const __m128i chans = _mm_set1_epi32(static_cast<int>(c));
    const __m256d zero = _mm256_setzero_pd();

    std::size_t s = 0;
    alignas(32) double tmp[4];
    for (; s + 4 <= n; s += 4) {
        const __m256d px = _mm256_min_pd(_mm256_max_pd(snap(_mm256_fmsub_pd(_mm256_loadu_pd(xs + s), vw, half)), lo), hix);
        const __m256d py = _mm256_min_pd(_mm256_max_pd(snap(_mm256_fmsub_pd(_mm256_loadu_pd(ys + s), vh, half)), lo), hiy);
        const __m256d fx0 = _mm256_floor_pd(px), fy0 = _mm256_floor_pd(py);
        const __m256d fx = _mm256_sub_pd(px, fx0), fy = _mm256_sub_pd(py, fy0);
        const __m256d gx = _mm256_sub_pd(one, fx), gy = _mm256_sub_pd(one, fy);
        const __m256d w00 = _mm256_mul_pd(gx, gy), w01 = _mm256_mul_pd(fx, gy);
        const __m256d w10 = _mm256_mul_pd(gx, fy), w11 = _mm256_mul_pd(fx, fy);

        const __m256d fx1 = _mm256_add_pd(fx0, one), fy1 = _mm256_add_pd(fy0, one);
        const __m256d vx0 = in_range(fx0, maxx), vx1 = in_range(fx1, maxx);
        const __m256d vy0 = in_range(fy0, maxy), vy1 = in_range(fy1, maxy);
        const __m256d m00 = _mm256_and_pd(vx0, vy0), m01 = _mm256_and_pd(vx1, vy0);
        const __m256d m10 = _mm256_and_pd(vx0, vy1), m11 = _mm256_and_pd(vx1, vy1);

        const __m128i x0 = _mm256_cvttpd_epi32(fx0), y0 = _mm256_cvttpd_epi32(fy0);
        const __m128i base = _mm_add_epi32(_mm_mullo_epi32(y0, row_stride), _mm_mullo_epi32(x0, chans));
        const __m128i i01 = _mm_add_epi32(base, chans);
        const __m128i i10 = _mm_add_epi32(base, row_stride);
        const __m128i i11 = _mm_add_epi32(i10, chans);

        for (std::size_t ch = 0; ch < c; ++ch) {
            const __m128i off = _mm_set1_epi32(static_cast<int>(ch));
            const double* src = img;
            const __m256d g00 = _mm256_mask_i32gather_pd(zero, src, _mm_add_epi32(base, off), m00, 8);
            const __m256d g01 = _mm256_mask_i32gather_pd(zero, src, _mm_add_epi32(i01, off), m01, 8);
            const __m256d g10 = _mm256_mask_i32gather_pd(zero, src, _mm_add_epi32(i10, off), m10, 8);
            const __m256d g11 = _mm256_mask_i32gather_pd(zero, src, _mm_add_epi32(i11, off), m11, 8);
            __m256d acc = _mm256_mul_pd(w00, g00);
            acc = _mm256_fmadd_pd(w01, g01, acc);
            acc = _mm256_fmadd_pd(w10, g10, acc);
            acc = _mm256_fmadd_pd(w11, g11, acc);
            _mm256_store_pd(tmp, acc);
            for (std::size_t q = 0; q < 4; ++q) out[(s + q) * c + ch] = tmp[q];
        }
    }
    if (s < n) scalar_image.bilinear(img, h, w, c, xs + s, ys + s, n - s, out + s * c);
}

} // namespace

const KernelTable<float> avx2_f32{gemm<F32>, relu<F32>, relu_mask<F32>, add_rows<F32>,
                                  column_sum<F32>, adam<F32>};
const KernelTable<double> avx2_f64{gemm<F64>, relu<F64>, relu_mask<F64>, add_rows<F64>,
                                   column_sum<F64>, adam<F64>};
const ImageKernelTable avx2_image{homography_row, bilinear};

} // namespace perspcrop::simd::detail
