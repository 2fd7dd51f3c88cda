#pragma once

#include "perspcrop/simd/kernels.hpp"

namespace perspcrop::simd::detail {

extern const KernelTable<float> scalar_f32;
extern const KernelTable<double> scalar_f64;
extern const ImageKernelTable scalar_image;

#if defined(PERSPCROP_HAVE_AVX2)
extern const KernelTable<float> avx2_f32;
extern const KernelTable<double> avx2_f64;
extern const ImageKernelTable avx2_image;
#endif

} // namespace perspcrop::simd::detail
