#include "gerl/kernels.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace gerl::kernels {

namespace {

// Row kernels shared by the serial and parallel drivers. Each computes one
// output row with a fixed summation order.

template <typename T>
inline void row_nn(std::size_t i, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  T* ci = c + i * n;
  const T* ai = a + i * k;
  for (std::size_t p = 0; p < k; ++p) {
    const T aip = ai[p];
    if (aip == T{0}) continue;
    const T* bp = b + p * n;
    for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
  }
}

template <typename T>
inline void row_nt(std::size_t i, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  T* ci = c + i * n;
  const T* ai = a + i * k;
  for (std::size_t j = 0; j < n; ++j) {
    const T* bj = b + j * k;
    T acc{0};
    for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
    ci[j] += acc;
  }
}

template <typename T>
inline void row_tn(std::size_t i, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b,
                   T* c) {
  T* ci = c + i * n;
  for (std::size_t p = 0; p < k; ++p) {
    const T api = a[p * m + i];
    if (api == T{0}) continue;
    const T* bp = b + p * n;
    for (std::size_t j = 0; j < n; ++j) ci[j] += api * bp[j];
  }
}

template <typename T>
void serial_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  for (std::size_t i = 0; i < m; ++i) row_nn(i, n, k, a, b, c);
}
template <typename T>
void serial_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  for (std::size_t i = 0; i < m; ++i) row_nt(i, n, k, a, b, c);
}
template <typename T>
void serial_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  for (std::size_t i = 0; i < m; ++i) row_tn(i, m, n, k, a, b, c);
}

template <typename T>
void parallel_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) row_nn(static_cast<std::size_t>(i), n, k, a, b, c);
}
template <typename T>
void parallel_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) row_nt(static_cast<std::size_t>(i), n, k, a, b, c);
}
template <typename T>
void parallel_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) row_tn(static_cast<std::size_t>(i), m, n, k, a, b, c);
}

// Batched: A is batch×(m×k) etc.
template <typename T>
void serial_bnn(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b,
                T* c) {
  for (std::size_t s = 0; s < batch; ++s) serial_nn(m, n, k, a + s * m * k, b + s * k * n, c + s * m * n);
}
template <typename T>
void serial_bnt(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b,
                T* c) {
  for (std::size_t s = 0; s < batch; ++s) serial_nt(m, n, k, a + s * m * k, b + s * n * k, c + s * m * n);
}
template <typename T>
void serial_btn(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b,
                T* c) {
  for (std::size_t s = 0; s < batch; ++s) serial_tn(m, n, k, a + s * k * m, b + s * k * n, c + s * m * n);
}

template <typename T>
void parallel_bnn(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b,
                  T* c) {
  const auto total = static_cast<std::ptrdiff_t>(batch * m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < total; ++t) {
    const std::size_t s = static_cast<std::size_t>(t) / m;
    const std::size_t i = static_cast<std::size_t>(t) % m;
    row_nn(i, n, k, a + s * m * k, b + s * k * n, c + s * m * n);
  }
}
template <typename T>
void parallel_bnt(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b,
                  T* c) {
  const auto total = static_cast<std::ptrdiff_t>(batch * m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < total; ++t) {
    const std::size_t s = static_cast<std::size_t>(t) / m;
    const std::size_t i = static_cast<std::size_t>(t) % m;
    row_nt(i, n, k, a + s * m * k, b + s * n * k, c + s * m * n);
  }
}
template <typename T>
void parallel_btn(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b,
                  T* c) {
  const auto total = static_cast<std::ptrdiff_t>(batch * m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < total; ++t) {
    const std::size_t s = static_cast<std::size_t>(t) / m;
    const std::size_t i = static_cast<std::size_t>(t) % m;
    row_tn(i, m, n, k, a + s * k * m, b + s * k * n, c + s * m * n);
  }
}

bool go_parallel(std::size_t work) { return work >= kParallelThreshold && omp_get_max_threads() > 1; }

}  // namespace

#define GERL_KERNEL_PAIR(T)                                                                              \
  namespace serial {                                                                                     \
  void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {              \
    serial_nn(m, n, k, a, b, c);                                                                         \
  }                                                                                                      \
  void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {              \
    serial_nt(m, n, k, a, b, c);                                                                         \
  }                                                                                                      \
  void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {              \
    serial_tn(m, n, k, a, b, c);                                                                         \
  }                                                                                                      \
  void bgemm_nn(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b,  \
                T* c) {                                                                                  \
    serial_bnn(batch, m, n, k, a, b, c);                                                                 \
  }                                                                                                      \
  void bgemm_nt(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b,  \
                T* c) {                                                                                  \
    serial_bnt(batch, m, n, k, a, b, c);                                                                 \
  }                                                                                                      \
  void bgemm_tn(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b,  \
                T* c) {                                                                                  \
    serial_btn(batch, m, n, k, a, b, c);                                                                 \
  }                                                                                                      \
  }                                                                                                      \
  namespace parallel {                                                                                   \
  void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {              \
    parallel_nn(m, n, k, a, b, c);                                                                       \
  }                                                                                                      \
  void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {              \
    parallel_nt(m, n, k, a, b, c);                                                                       \
  }                                                                                                      \
  void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {              \
    parallel_tn(m, n, k, a, b, c);                                                                       \
  }                                                                                                      \
  void bgemm_nn(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b,  \
                T* c) {                                                                                  \
    parallel_bnn(batch, m, n, k, a, b, c);                                                               \
  }                                                                                                      \
  void bgemm_nt(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b,  \
                T* c) {                                                                                  \
    parallel_bnt(batch, m, n, k, a, b, c);                                                               \
  }                                                                                                      \
  void bgemm_tn(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b,  \
                T* c) {                                                                                  \
    parallel_btn(batch, m, n, k, a, b, c);                                                               \
  }                                                                                                      \
  }

GERL_KERNEL_PAIR(float)
GERL_KERNEL_PAIR(double)

#undef GERL_KERNEL_PAIR

template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  if (go_parallel(m * n * k)) {
    parallel::gemm_nn(m, n, k, a, b, c);
  } else {
    serial::gemm_nn(m, n, k, a, b, c);
  }
}
template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  if (go_parallel(m * n * k)) {
    parallel::gemm_nt(m, n, k, a, b, c);
  } else {
    serial::gemm_nt(m, n, k, a, b, c);
  }
}
template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  if (go_parallel(m * n * k)) {
    parallel::gemm_tn(m, n, k, a, b, c);
  } else {
    serial::gemm_tn(m, n, k, a, b, c);
  }
}
template <typename T>
void bgemm_nn(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  if (go_parallel(batch * m * n * k)) {
    parallel::bgemm_nn(batch, m, n, k, a, b, c);
  } else {
    serial::bgemm_nn(batch, m, n, k, a, b, c);
  }
}
template <typename T>
void bgemm_nt(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  if (go_parallel(batch * m * n * k)) {
    parallel::bgemm_nt(batch, m, n, k, a, b, c);
  } else {
    serial::bgemm_nt(batch, m, n, k, a, b, c);
  }
}
template <typename T>
void bgemm_tn(std::size_t batch, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  if (go_parallel(batch * m * n * k)) {
    parallel::bgemm_tn(batch, m, n, k, a, b, c);
  } else {
    serial::bgemm_tn(batch, m, n, k, a, b, c);
  }
}

#define GERL_INSTANTIATE(T)                                                                                 \
  template void gemm_nn<T>(std::size_t, std::size_t, std::size_t, const T*, const T*, T*);                  \
  template void gemm_nt<T>(std::size_t, std::size_t, std::size_t, const T*, const T*, T*);                  \
  template void gemm_tn<T>(std::size_t, std::size_t, std::size_t, const T*, const T*, T*);                  \
  template void bgemm_nn<T>(std::size_t, std::size_t, std::size_t, std::size_t, const T*, const T*, T*);    \
  template void bgemm_nt<T>(std::size_t, std::size_t, std::size_t, std::size_t, const T*, const T*, T*);    \
  template void bgemm_tn<T>(std::size_t, std::size_t, std::size_t, std::size_t, const T*, const T*, T*);

GERL_INSTANTIATE(float)
GERL_INSTANTIATE(double)

#undef GERL_INSTANTIATE

void set_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

void configure_threads() {
  if (const char* env = std::getenv("GERL_THREADS")) {
    try {
      set_threads(std::stoi(env));
    } catch (const std::exception&) {
      // Unparseable value: keep the runtime default.
    }
  }
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace gerl::kernels
