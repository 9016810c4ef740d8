#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "gerl/tape.hpp"

// Differentiable operations. Each records its forward value on the operand
// tape together with a backward rule. Shapes are checked eagerly and mismatches
// raise DimensionError naming both shapes.
namespace gerl::ops {

// What masked_softmax does with a row whose mask is all false.
enum class EmptyRows {
  kReject,  // throw DegenerateRowError
  kZero,    // emit an all-zero row (used by pooling over possibly-empty lists)
};

// [m×k] · [k×n]
template <typename T>
Var<T> matmul(Var<T> a, Var<T> b);
// [m×k] · [n×k]ᵀ; the usual "x Wᵀ" of a dense layer with W stored [out×in].
template <typename T>
Var<T> matmul_nt(Var<T> a, Var<T> b);
// [b×m×k] · [b×k×n]
template <typename T>
Var<T> bmm(Var<T> a, Var<T> b);
// [b×m×k] · [b×n×k]ᵀ
template <typename T>
Var<T> bmm_nt(Var<T> a, Var<T> b);

template <typename T>
Var<T> add(Var<T> a, Var<T> b);
template <typename T>
Var<T> sub(Var<T> a, Var<T> b);
template <typename T>
Var<T> mul(Var<T> a, Var<T> b);
template <typename T>
Var<T> scale(Var<T> x, T factor);
// x[r×c] + bias[c] broadcast over rows.
template <typename T>
Var<T> add_bias(Var<T> x, Var<T> bias);
template <typename T>
Var<T> tanh(Var<T> x);

// Softmax over the last axis restricted to positions whose mask is set.
// Masked positions get exactly 0. Uses row-max subtraction.
template <typename T>
Var<T> masked_softmax(Var<T> logits, std::span<const std::uint8_t> mask,
                      EmptyRows empty = EmptyRows::kReject);

template <typename T>
Var<T> reshape(Var<T> x, Shape shape);
// Concatenates rank-2 tensors with equal row counts along columns.
template <typename T>
Var<T> concat_cols(std::span<const Var<T>> parts);
// out[i] = table[ids[i]] for a rank-2 table; backward scatter-adds.
template <typename T>
Var<T> gather_rows(Var<T> table, std::span<const std::uint32_t> ids);
// Column j of a rank-2 tensor, as a vector of length rows.
template <typename T>
Var<T> column(Var<T> x, std::size_t j);

// Inverted dropout: survivors are scaled by 1/(1-rate). Identity when not
// training or when rate is 0. rate must lie in [0, 1).
template <typename T>
Var<T> dropout(Var<T> x, double rate, bool training, std::mt19937_64& rng);

// out[r] = <a[r], b[r]> for rank-2 a, b of equal shape.
template <typename T>
Var<T> rowwise_dot(Var<T> a, Var<T> b);
// log Σ_c exp(x[r][c]) per row of a rank-2 tensor.
template <typename T>
Var<T> logsumexp_rows(Var<T> x);
// Scalar [1] sum of all elements.
template <typename T>
Var<T> sum(Var<T> x);
// Scalar [1] inner product of two equally shaped tensors.
template <typename T>
Var<T> dot(Var<T> a, Var<T> b);

}  // namespace gerl::ops
