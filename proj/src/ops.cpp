#include "gerl/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gerl/kernels.hpp"

namespace gerl::ops {

namespace {

template <typename T>
void same_tape(Var<T> a, Var<T> b, const char* op) {
  if (a.tape != b.tape) throw ContractError(std::string(op) + ": operands recorded on different tapes");
}

template <typename T>
void require_rank(Var<T> x, std::size_t rank, const char* op) {
  if (x.value().rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_string(x.shape()));
  }
}

template <typename T>
void require_same_shape(Var<T> a, Var<T> b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

template <typename T>
bool any_grad(Var<T> a) {
  return a.requires_grad();
}
template <typename T>
bool any_grad(Var<T> a, Var<T> b) {
  return a.requires_grad() || b.requires_grad();
}

}  // namespace

template <typename T>
Var<T> matmul(Var<T> a, Var<T> b) {
  same_tape(a, b, "matmul");
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw DimensionError("matmul: inner dimensions differ " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
  }
  Tensor<T> out({m, n});
  kernels::gemm_nn(m, n, k, a.value().data(), b.value().data(), out.data());
  const std::size_t ia = a.id, ib = b.id;
  return a.tape->record(std::move(out), any_grad(a, b), [=](Tape<T>& t, std::size_t self) {
    const T* g = t.grad(self).data();
    if (t.requires_grad(ia)) kernels::gemm_nt(m, k, n, g, t.value(ib).data(), t.grad(ia).data());
    if (t.requires_grad(ib)) kernels::gemm_tn(k, n, m, t.value(ia).data(), g, t.grad(ib).data());
  });
}

template <typename T>
Var<T> matmul_nt(Var<T> a, Var<T> b) {
  same_tape(a, b, "matmul_nt");
  require_rank(a, 2, "matmul_nt");
  require_rank(b, 2, "matmul_nt");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[0];
  if (b.shape()[1] != k) {
    throw DimensionError("matmul_nt: inner dimensions differ " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()) + "^T");
  }
  Tensor<T> out({m, n});
  kernels::gemm_nt(m, n, k, a.value().data(), b.value().data(), out.data());
  const std::size_t ia = a.id, ib = b.id;
  return a.tape->record(std::move(out), any_grad(a, b), [=](Tape<T>& t, std::size_t self) {
    const T* g = t.grad(self).data();
    // dA = G B, dB = Gᵀ A
    if (t.requires_grad(ia)) kernels::gemm_nn(m, k, n, g, t.value(ib).data(), t.grad(ia).data());
    if (t.requires_grad(ib)) kernels::gemm_tn(n, k, m, g, t.value(ia).data(), t.grad(ib).data());
  });
}

template <typename T>
Var<T> bmm(Var<T> a, Var<T> b) {
  same_tape(a, b, "bmm");
  require_rank(a, 3, "bmm");
  require_rank(b, 3, "bmm");
  const std::size_t bs = a.shape()[0], m = a.shape()[1], k = a.shape()[2], n = b.shape()[2];
  if (b.shape()[0] != bs || b.shape()[1] != k) {
    throw DimensionError("bmm: incompatible shapes " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  Tensor<T> out({bs, m, n});
  kernels::bgemm_nn(bs, m, n, k, a.value().data(), b.value().data(), out.data());
  const std::size_t ia = a.id, ib = b.id;
  return a.tape->record(std::move(out), any_grad(a, b), [=](Tape<T>& t, std::size_t self) {
    const T* g = t.grad(self).data();
    if (t.requires_grad(ia)) kernels::bgemm_nt(bs, m, k, n, g, t.value(ib).data(), t.grad(ia).data());
    if (t.requires_grad(ib)) kernels::bgemm_tn(bs, k, n, m, t.value(ia).data(), g, t.grad(ib).data());
  });
}

template <typename T>
Var<T> bmm_nt(Var<T> a, Var<T> b) {
  same_tape(a, b, "bmm_nt");
  require_rank(a, 3, "bmm_nt");
  require_rank(b, 3, "bmm_nt");
  const std::size_t bs = a.shape()[0], m = a.shape()[1], k = a.shape()[2], n = b.shape()[1];
  if (b.shape()[0] != bs || b.shape()[2] != k) {
    throw DimensionError("bmm_nt: incompatible shapes " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()) + "^T");
  }
  Tensor<T> out({bs, m, n});
  kernels::bgemm_nt(bs, m, n, k, a.value().data(), b.value().data(), out.data());
  const std::size_t ia = a.id, ib = b.id;
  return a.tape->record(std::move(out), any_grad(a, b), [=](Tape<T>& t, std::size_t self) {
    const T* g = t.grad(self).data();
    if (t.requires_grad(ia)) kernels::bgemm_nn(bs, m, k, n, g, t.value(ib).data(), t.grad(ia).data());
    if (t.requires_grad(ib)) kernels::bgemm_tn(bs, n, k, m, g, t.value(ia).data(), t.grad(ib).data());
  });
}

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  same_tape(a, b, "add");
  require_same_shape(a, b, "add");
  Tensor<T> out = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const std::size_t ia = a.id, ib = b.id;
  return a.tape->record(std::move(out), any_grad(a, b), [=](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad(self);
    for (std::size_t p : {ia, ib}) {
      if (!t.requires_grad(p)) continue;
      auto& gp = t.grad(p);
      for (std::size_t i = 0; i < g.size(); ++i) gp[i] += g[i];
    }
  });
}

template <typename T>
Var<T> sub(Var<T> a, Var<T> b) {
  same_tape(a, b, "sub");
  require_same_shape(a, b, "sub");
  Tensor<T> out = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  const std::size_t ia = a.id, ib = b.id;
  return a.tape->record(std::move(out), any_grad(a, b), [=](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad(self);
    if (t.requires_grad(ia)) {
      auto& ga = t.grad(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (t.requires_grad(ib)) {
      auto& gb = t.grad(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
  same_tape(a, b, "mul");
  require_same_shape(a, b, "mul");
  Tensor<T> out = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const std::size_t ia = a.id, ib = b.id;
  return a.tape->record(std::move(out), any_grad(a, b), [=](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad(self);
    if (t.requires_grad(ia)) {
      auto& ga = t.grad(ia);
      const auto& vb = t.value(ib);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * vb[i];
    }
    if (t.requires_grad(ib)) {
      auto& gb = t.grad(ib);
      const auto& va = t.value(ia);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * va[i];
    }
  });
}

template <typename T>
Var<T> scale(Var<T> x, T factor) {
  Tensor<T> out = x.value();
  for (auto& v : out.values()) v *= factor;
  const std::size_t ix = x.id;
  return x.tape->record(std::move(out), any_grad(x), [=](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad(self);
    auto& gx = t.grad(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factor;
  });
}

template <typename T>
Var<T> add_bias(Var<T> x, Var<T> bias) {
  same_tape(x, bias, "add_bias");
  require_rank(x, 2, "add_bias");
  const std::size_t rows = x.shape()[0], cols = x.shape()[1];
  if (bias.value().size() != cols) {
    throw DimensionError("add_bias: bias " + shape_string(bias.shape()) + " does not match " +
                         shape_string(x.shape()));
  }
  Tensor<T> out = x.value();
  const T* bv = bias.value().data();
  for (std::size_t r = 0; r < rows; ++r) {
    T* row = out.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] += bv[c];
  }
  const std::size_t ix = x.id, ibias = bias.id;
  return x.tape->record(std::move(out), any_grad(x, bias), [=](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad(self);
    if (t.requires_grad(ix)) {
      auto& gx = t.grad(ix);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    }
    if (t.requires_grad(ibias)) {
      auto& gb = t.grad(ibias);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) gb[c] += g[r * cols + c];
      }
    }
  });
}

template <typename T>
Var<T> tanh(Var<T> x) {
  Tensor<T> out = x.value();
  for (auto& v : out.values()) v = std::tanh(v);
  const std::size_t ix = x.id;
  return x.tape->record(std::move(out), any_grad(x), [=](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad(self);
    const auto& y = t.value(self);
    auto& gx = t.grad(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (T{1} - y[i] * y[i]);
  });
}

template <typename T>
Var<T> masked_softmax(Var<T> logits, std::span<const std::uint8_t> mask, EmptyRows empty) {
  const auto& in = logits.value();
  if (in.rank() == 0) throw DimensionError("masked_softmax: scalar input");
  if (mask.size() != in.size()) {
    throw DimensionError("masked_softmax: mask has " + std::to_string(mask.size()) + " entries for logits " +
                         shape_string(in.shape()));
  }
  const std::size_t width = in.shape().back();
  const std::size_t rows = in.size() / width;
  Tensor<T> out(in.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* x = in.data() + r * width;
    const std::uint8_t* m = mask.data() + r * width;
    T* y = out.data() + r * width;
    T peak = -std::numeric_limits<T>::infinity();
    bool any = false;
    for (std::size_t c = 0; c < width; ++c) {
      if (m[c]) {
        peak = std::max(peak, x[c]);
        any = true;
      }
    }
    if (!any) {
      if (empty == EmptyRows::kReject) {
        throw DegenerateRowError("masked_softmax: row " + std::to_string(r) + " has no valid entry");
      }
      continue;
    }
    T total{0};
    for (std::size_t c = 0; c < width; ++c) {
      if (m[c]) {
        y[c] = std::exp(x[c] - peak);
        total += y[c];
      }
    }
    for (std::size_t c = 0; c < width; ++c) y[c] /= total;
  }
  const std::size_t ix = logits.id;
  return logits.tape->record(std::move(out), any_grad(logits), [=](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad(self);
    const auto& y = t.value(self);
    auto& gx = t.grad(ix);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t o = r * width;
      T inner{0};
      for (std::size_t c = 0; c < width; ++c) inner += y[o + c] * g[o + c];
      for (std::size_t c = 0; c < width; ++c) gx[o + c] += y[o + c] * (g[o + c] - inner);
    }
  });
}

template <typename T>
Var<T> reshape(Var<T> x, Shape shape) {
  Tensor<T> out = x.value();
  out.reshape(std::move(shape));
  const std::size_t ix = x.id;
  return x.tape->record(std::move(out), any_grad(x), [=](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad(self);
    auto& gx = t.grad(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

template <typename T>
Var<T> concat_cols(std::span<const Var<T>> parts) {
  if (parts.empty()) throw ContractError("concat_cols: no inputs");
  Tape<T>* tape = parts[0].tape;
  const std::size_t rows = parts[0].shape().at(0);
  std::size_t cols = 0;
  bool needs_grad = false;
  std::vector<std::size_t> ids, widths;
  for (const auto& p : parts) {
    if (p.tape != tape) throw ContractError("concat_cols: operands recorded on different tapes");
    require_rank(p, 2, "concat_cols");
    if (p.shape()[0] != rows) {
      throw DimensionError("concat_cols: row mismatch " + shape_string(parts[0].shape()) + " vs " +
                           shape_string(p.shape()));
    }
    ids.push_back(p.id);
    widths.push_back(p.shape()[1]);
    cols += p.shape()[1];
    needs_grad = needs_grad || p.requires_grad();
  }
  Tensor<T> out({rows, cols});
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& v = parts[k].value();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(v.data() + r * widths[k], widths[k], out.data() + r * cols + offset);
    }
    offset += widths[k];
  }
  return tape->record(std::move(out), needs_grad, [=](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad(self);
    std::size_t off = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (t.requires_grad(ids[k])) {
        auto& gp = t.grad(ids[k]);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < widths[k]; ++c) gp[r * widths[k] + c] += g[r * cols + off + c];
        }
      }
      off += widths[k];
    }
  });
}

template <typename T>
Var<T> gather_rows(Var<T> table, std::span<const std::uint32_t> ids) {
  require_rank(table, 2, "gather_rows");
  if (ids.empty()) throw ContractError("gather_rows: empty index list");
  const std::size_t vocab = table.shape()[0], width = table.shape()[1];
  Tensor<T> out({ids.size(), width});
  const T* src = table.value().data();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= vocab) {
      throw DimensionError("gather_rows: index " + std::to_string(ids[i]) + " outside table " +
                           shape_string(table.shape()));
    }
    std::copy_n(src + std::size_t{ids[i]} * width, width, out.data() + i * width);
  }
  std::vector<std::uint32_t> index(ids.begin(), ids.end());
  const std::size_t it = table.id;
  return table.tape->record(std::move(out), any_grad(table), [=, index = std::move(index)](Tape<T>& t,
                                                                                          std::size_t self) {
    const auto& g = t.grad(self);
    auto& gt = t.grad(it);
    for (std::size_t i = 0; i < index.size(); ++i) {
      T* dst = gt.data() + std::size_t{index[i]} * width;
      const T* s = g.data() + i * width;
      for (std::size_t c = 0; c < width; ++c) dst[c] += s[c];
    }
  });
}

template <typename T>
Var<T> column(Var<T> x, std::size_t j) {
  require_rank(x, 2, "column");
  const std::size_t rows = x.shape()[0], cols = x.shape()[1];
  if (j >= cols) throw DimensionError("column: index " + std::to_string(j) + " outside " + shape_string(x.shape()));
  Tensor<T> out({rows});
  for (std::size_t r = 0; r < rows; ++r) out[r] = x.value()[r * cols + j];
  const std::size_t ix = x.id;
  return x.tape->record(std::move(out), any_grad(x), [=](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad(self);
    auto& gx = t.grad(ix);
    for (std::size_t r = 0; r < rows; ++r) gx[r * cols + j] += g[r];
  });
}

template <typename T>
Var<T> dropout(Var<T> x, double rate, bool training, std::mt19937_64& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
  if (!training || rate == 0.0) return x;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Tensor<T> factor(x.shape());
  for (auto& f : factor.values()) f = unit(rng) < rate ? T{0} : keep_scale;
  Tensor<T> out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= factor[i];
  const std::size_t ix = x.id;
  return x.tape->record(std::move(out), any_grad(x),
                        [=, factor = std::move(factor)](Tape<T>& t, std::size_t self) {
                          const auto& g = t.grad(self);
                          auto& gx = t.grad(ix);
                          for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factor[i];
                        });
}

template <typename T>
Var<T> rowwise_dot(Var<T> a, Var<T> b) {
  same_tape(a, b, "rowwise_dot");
  require_rank(a, 2, "rowwise_dot");
  require_same_shape(a, b, "rowwise_dot");
  const std::size_t rows = a.shape()[0], cols = a.shape()[1];
  Tensor<T> out({rows});
  for (std::size_t r = 0; r < rows; ++r) {
    T acc{0};
    for (std::size_t c = 0; c < cols; ++c) acc += a.value()[r * cols + c] * b.value()[r * cols + c];
    out[r] = acc;
  }
  const std::size_t ia = a.id, ib = b.id;
  return a.tape->record(std::move(out), any_grad(a, b), [=](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad(self);
    if (t.requires_grad(ia)) {
      auto& ga = t.grad(ia);
      const auto& vb = t.value(ib);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) ga[r * cols + c] += g[r] * vb[r * cols + c];
      }
    }
    if (t.requires_grad(ib)) {
      auto& gb = t.grad(ib);
      const auto& va = t.value(ia);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) gb[r * cols + c] += g[r] * va[r * cols + c];
      }
    }
  });
}

template <typename T>
Var<T> logsumexp_rows(Var<T> x) {
  require_rank(x, 2, "logsumexp_rows");
  const std::size_t rows = x.shape()[0], cols = x.shape()[1];
  const auto& v = x.value();
  Tensor<T> out({rows});
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = v.data() + r * cols;
    const T peak = *std::max_element(row, row + cols);
    T total{0};
    for (std::size_t c = 0; c < cols; ++c) total += std::exp(row[c] - peak);
    out[r] = peak + std::log(total);
  }
  const std::size_t ix = x.id;
  return x.tape->record(std::move(out), any_grad(x), [=](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad(self);
    const auto& y = t.value(self);
    const auto& in = t.value(ix);
    auto& gx = t.grad(ix);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) gx[r * cols + c] += g[r] * std::exp(in[r * cols + c] - y[r]);
    }
  });
}

template <typename T>
Var<T> sum(Var<T> x) {
  T acc{0};
  for (auto v : x.value().values()) acc += v;
  const std::size_t ix = x.id;
  return x.tape->record(Tensor<T>({1}, {acc}), any_grad(x), [=](Tape<T>& t, std::size_t self) {
    const T g = t.grad(self)[0];
    auto& gx = t.grad(ix);
    for (auto& v : gx.values()) v += g;
  });
}

template <typename T>
Var<T> dot(Var<T> a, Var<T> b) {
  same_tape(a, b, "dot");
  require_same_shape(a, b, "dot");
  T acc{0};
  for (std::size_t i = 0; i < a.value().size(); ++i) acc += a.value()[i] * b.value()[i];
  const std::size_t ia = a.id, ib = b.id;
  return a.tape->record(Tensor<T>({1}, {acc}), any_grad(a, b), [=](Tape<T>& t, std::size_t self) {
    const T g = t.grad(self)[0];
    const auto& va = t.value(ia);
    const auto& vb = t.value(ib);
    if (t.requires_grad(ia)) {
      auto& ga = t.grad(ia);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g * vb[i];
    }
    if (t.requires_grad(ib)) {
      auto& gb = t.grad(ib);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g * va[i];
    }
  });
}

#define GERL_INSTANTIATE_OPS(T)                                                               \
  template Var<T> matmul(Var<T>, Var<T>);                                                     \
  template Var<T> matmul_nt(Var<T>, Var<T>);                                                  \
  template Var<T> bmm(Var<T>, Var<T>);                                                        \
  template Var<T> bmm_nt(Var<T>, Var<T>);                                                     \
  template Var<T> add(Var<T>, Var<T>);                                                        \
  template Var<T> sub(Var<T>, Var<T>);                                                        \
  template Var<T> mul(Var<T>, Var<T>);                                                        \
  template Var<T> scale(Var<T>, T);                                                           \
  template Var<T> add_bias(Var<T>, Var<T>);                                                   \
  template Var<T> tanh(Var<T>);                                                               \
  template Var<T> masked_softmax(Var<T>, std::span<const std::uint8_t>, EmptyRows);           \
  template Var<T> reshape(Var<T>, Shape);                                                     \
  template Var<T> concat_cols(std::span<const Var<T>>);                                       \
  template Var<T> gather_rows(Var<T>, std::span<const std::uint32_t>);                        \
  template Var<T> column(Var<T>, std::size_t);                                                \
  template Var<T> dropout(Var<T>, double, bool, std::mt19937_64&);                            \
  template Var<T> rowwise_dot(Var<T>, Var<T>);                                                \
  template Var<T> logsumexp_rows(Var<T>);                                                     \
  template Var<T> sum(Var<T>);                                                                \
  template Var<T> dot(Var<T>, Var<T>);

GERL_INSTANTIATE_OPS(float)
GERL_INSTANTIATE_OPS(double)

#undef GERL_INSTANTIATE_OPS

}  // namespace gerl::ops
