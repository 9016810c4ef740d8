#pragma once

#include <cstddef>

// Dense row-major matrix kernels.
//
// `serial` is the reference implementation. `parallel` splits the output rows
// across OpenMP threads but runs the same per-element loop, so both produce
// bitwise-identical results for any thread count. The unqualified entry points
// pick one based on problem size.
//
// Every kernel accumulates into C (C += ...); callers zero C first when they
// want a plain product.

namespace gerl::kernels {

namespace serial {

// C[m×n] += A[m×k] · B[k×n]
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b, float* c);
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
// C[m×n] += A[m×k] · B[n×k]ᵀ
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b, float* c);
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
// C[m×n] += A[k×m]ᵀ · B[k×n]
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b, float* c);
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);

}  // namespace serial

namespace parallel {

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b, float* c);
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b, float* c);
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b, float* c);
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);

// Batched variants: `batch` independent products laid out back to back.
// Work is split over (batch, row) pairs.
void bgemm_nn(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const float* a,
              const float* b, float* c);
void bgemm_nn(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const double* a,
              const double* b, double* c);
void bgemm_nt(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const float* a,
              const float* b, float* c);
void bgemm_nt(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const double* a,
              const double* b, double* c);
void bgemm_tn(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const float* a,
              const float* b, float* c);
void bgemm_tn(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const double* a,
              const double* b, double* c);

}  // namespace parallel

namespace serial {

void bgemm_nn(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const float* a,
              const float* b, float* c);
void bgemm_nn(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const double* a,
              const double* b, double* c);
void bgemm_nt(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const float* a,
              const float* b, float* c);
void bgemm_nt(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const double* a,
              const double* b, double* c);
void bgemm_tn(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const float* a,
              const float* b, float* c);
void bgemm_tn(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const double* a,
              const double* b, double* c);

}  // namespace serial

// Size-dispatched entry points used by the autodiff ops.
template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c);
template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c);
template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c);
template <typename T>
void bgemm_nn(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c);
template <typename T>
void bgemm_nt(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c);
template <typename T>
void bgemm_tn(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c);

// Work (multiply-adds) below which the dispatchers stay serial.
inline constexpr std::size_t kParallelThreshold = 1u << 15;

// Caps OpenMP worker threads; 0 leaves the runtime default. Reads GERL_THREADS
// when called with no argument.
void configure_threads();
void set_threads(int threads);
int max_threads();

}  // namespace gerl::kernels
