#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference
// implementation and, on x86-64, an AVX2+FMA variant chosen at runtime.
// The scalar path is the definition; vector variants are tested against it.

#include <cstddef>

namespace perspcrop::simd {

enum class Isa { Scalar, Avx2 };

const char* isa_name(Isa isa);

/// Best ISA supported by both the build and the running CPU.
Isa detected_isa();

/// ISA currently used by the dispatched entry points. Defaults to
/// detected_isa(), or Scalar when PERSPCROP_ISA=scalar is set.
Isa active_isa();

/// Forces an ISA; falls back to Scalar when the request is unsupported.
/// Returns the ISA actually selected. Not thread-safe against concurrent kernel calls.
Isa set_active_isa(Isa isa);

template <class T>
struct KernelTable {
    /// C[MxN] (=, or += when accumulate) A[MxK] * B[KxN]; all row-major with leading dims.
    void (*gemm)(std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t lda,
                 const T* b, std::size_t ldb, T* c, std::size_t ldc, bool accumulate);
    /// y = max(x, 0), in place allowed.
    void (*relu)(const T* x, T* y, std::size_t n);
    /// grad[i] = 0 where act[i] <= 0.
    void (*relu_mask)(const T* act, T* grad, std::size_t n);
    /// Each of the m rows of x (length n, stride ldx) gets += bias.
    void (*add_rows)(T* x, std::size_t m, std::size_t n, std::size_t ldx, const T* bias);
    /// out[j] = sum_i x[i, j] over m rows, summed in row order.
    void (*column_sum)(const T* x, std::size_t m, std::size_t n, std::size_t ldx, T* out);
    /// Adam moment update and parameter step. c1 = 1 - b1^t, c2 = 1 - b2^t.
    void (*adam)(T* param, const T* grad, T* m1, T* m2, std::size_t n, T lr, T b1, T b2, T eps,
                 T c1, T c2);
};

struct ImageKernelTable {
    /// Source coordinates of one output row: for column j the target point is
    /// ((j + 0.5) / out_w, v, 1) and the source is the dehomogenized H * q.
    /// Returns the smallest |w| encountered.
    double (*homography_row)(const double* h, double v, std::size_t out_w, double* xs, double* ys);
    /// Bilinear sampling with zero padding from an HxWxC row-major image.
    /// Sample coordinates are normalized ([0,1] spans the image, pixel
    /// centers at (i + 0.5) / W). Output is n x C.
    void (*bilinear)(const double* img, std::size_t h, std::size_t w, std::size_t c,
                     const double* xs, const double* ys, std::size_t n, double* out);
};

const KernelTable<float>& kernels_f32(Isa isa);
const KernelTable<double>& kernels_f64(Isa isa);
const ImageKernelTable& image_kernels(Isa isa);

template <class T>
const KernelTable<T>& kernels(Isa isa);
template <>
inline const KernelTable<float>& kernels<float>(Isa isa) { return kernels_f32(isa); }
template <>
inline const KernelTable<double>& kernels<double>(Isa isa) { return kernels_f64(isa); }

template <class T>
const KernelTable<T>& kernels() { return kernels<T>(active_isa()); }
inline const ImageKernelTable& image_kernels() { return image_kernels(active_isa()); }

/// Pixel coordinate snapping tolerance: positions within this distance of an
/// integer are treated as lying exactly on the pixel lattice.
inline constexpr double kLatticeSnap = 1e-10;

} // namespace perspcrop::simd
