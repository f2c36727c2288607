#pragma once

// Exposes glibc's vector math variants (libmvec) of exp and log to the GCC
// vectorizer without turning on -ffast-math for the whole program. glibc only
// declares these under __FAST_MATH__; redeclaring them with the simd attribute
// lets `#pragma omp simd` loops call _ZGV*_exp / _ZGV*_log directly.
#include <cmath>

#if defined(__GNUC__) && !defined(__clang__) && defined(__x86_64__) && defined(__GLIBC__) && \
    !defined(__FAST_MATH__) && !defined(ALPHAPATCH_NO_LIBMVEC)
extern "C" {
__attribute__((simd("notinbranch"))) double exp(double) noexcept;
__attribute__((simd("notinbranch"))) double log(double) noexcept;
}
#endif
