#include <atomic>
#include <cstdlib>
#include <cstring>

#include "kernels_impl.hpp"

namespace perspcrop::simd {
namespace {

bool cpu_has_avx2() {
#if defined(PERSPCROP_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa initial_isa() {
    const char* env = std::getenv("PERSPCROP_ISA");
    if (env && std::strcmp(env, "scalar") == 0) return Isa::Scalar;
    return detected_isa();
}

std::atomic<Isa>& active() {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

} // namespace

const char* isa_name(Isa isa) {
    switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    }
    return "?";
}

Isa detected_isa() {
    static const Isa isa = cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
    return isa;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

Isa set_active_isa(Isa isa) {
    if (isa == Isa::Avx2 && detected_isa() != Isa::Avx2) isa = Isa::Scalar;
    active().store(isa, std::memory_order_relaxed);
    return isa;
}

const KernelTable<float>& kernels_f32(Isa isa) {
#if defined(PERSPCROP_HAVE_AVX2)
    if (isa == Isa::Avx2 && detected_isa() == Isa::Avx2) return detail::avx2_f32;
#endif
    (void)isa;
    return detail::scalar_f32;
}

const KernelTable<double>& kernels_f64(Isa isa) {
#if defined(PERSPCROP_HAVE_AVX2)
    if (isa == Isa::Avx2 && detected_isa() == Isa::Avx2) return detail::avx2_f64;
#endif
    (void)isa;
    return detail::scalar_f64;
}

const ImageKernelTable& image_kernels(Isa isa) {
#if defined(PERSPCROP_HAVE_AVX2)
    if (isa == Isa::Avx2 && detected_isa() == Isa::Avx2) return detail::avx2_image;
#endif
    (void)isa;
    return detail::scalar_image;
}

} // namespace perspcrop::simd
