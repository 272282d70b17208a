// SPDX-License-Identifier: Apache-2.0
#include "graphinformer/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "graphinformer/errors.hpp"

namespace gi {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

auto idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

// C[m,n] += A[m,k] B[k,n]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  MutMap(c, idx(m), idx(n)).noalias() += ConstMap(a, idx(m), idx(k)) * ConstMap(b, idx(k), idx(n));
}

// C[m,n] += A[m,k] B[n,k]^T
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  MutMap(c, idx(m), idx(n)).noalias() += ConstMap(a, idx(m), idx(k)) * ConstMap(b, idx(n), idx(k)).transpose();
}

// C[m,n] += A[k,m]^T B[k,n]
void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  MutMap(c, idx(m), idx(n)).noalias() += ConstMap(a, idx(k), idx(m)).transpose() * ConstMap(b, idx(k), idx(n));
}

Tape& tape_of(Var v, const char* op) {
  if (!v.valid()) throw DimensionError(std::string(op) + ": unbound variable");
  return *v.tape();
}

void require_same_shape(const char* op, Var a, Var b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

void require_rank(const char* op, const char* name, Var v, std::size_t rank) {
  if (v.shape().size() != rank) {
    throw DimensionError(std::string(op) + ": " + name + " must have rank " + std::to_string(rank) + ", got " +
                         shape_string(v.shape()));
  }
}

}  // namespace

// Elementwise ----------------------------------------------------------------

Var add(Var a, Var b) {
  require_same_shape("add", a, b);
  Tensor out = a.value();
  const auto bd = b.value().data();
  auto od = out.data();
  for (std::size_t i = 0; i < od.size(); ++i) od[i] += bd[i];
  return tape_of(a, "add").record("add", std::move(out), {a, b},
                                  [a, b](std::span<const double> g, const Tensor&, Tape& t) {
                                    for (Var in : {a, b}) {
                                      if (double* d = t.grad_buffer(in)) {
                                        for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
                                      }
                                    }
                                  });
}

Var sub(Var a, Var b) {
  require_same_shape("sub", a, b);
  Tensor out = a.value();
  const auto bd = b.value().data();
  auto od = out.data();
  for (std::size_t i = 0; i < od.size(); ++i) od[i] -= bd[i];
  return tape_of(a, "sub").record("sub", std::move(out), {a, b},
                                  [a, b](std::span<const double> g, const Tensor&, Tape& t) {
                                    if (double* d = t.grad_buffer(a)) {
                                      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
                                    }
                                    if (double* d = t.grad_buffer(b)) {
                                      for (std::size_t i = 0; i < g.size(); ++i) d[i] -= g[i];
                                    }
                                  });
}

Var mul(Var a, Var b) {
  require_same_shape("mul", a, b);
  Tensor out = a.value();
  const auto bd = b.value().data();
  auto od = out.data();
  for (std::size_t i = 0; i < od.size(); ++i) od[i] *= bd[i];
  return tape_of(a, "mul").record("mul", std::move(out), {a, b},
                                  [a, b](std::span<const double> g, const Tensor&, Tape& t) {
                                    const auto av = a.value().data();
                                    const auto bv = b.value().data();
                                    if (double* d = t.grad_buffer(a)) {
                                      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * bv[i];
                                    }
                                    if (double* d = t.grad_buffer(b)) {
                                      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * av[i];
                                    }
                                  });
}

Var scale(Var a, double factor) {
  Tensor out = a.value();
  for (double& v : out.data()) v *= factor;
  return tape_of(a, "scale").record("scale", std::move(out), {a},
                                    [a, factor](std::span<const double> g, const Tensor&, Tape& t) {
                                      if (double* d = t.grad_buffer(a)) {
                                        for (std::size_t i = 0; i < g.size(); ++i) d[i] += factor * g[i];
                                      }
                                    });
}

Var add_constant(Var a, const Tensor& c) {
  if (a.shape() != c.shape()) {
    throw DimensionError("add_constant: shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(c.shape()));
  }
  Tensor out = a.value();
  auto od = out.data();
  const auto cd = c.data();
  for (std::size_t i = 0; i < od.size(); ++i) od[i] += cd[i];
  return tape_of(a, "add_constant").record("add_constant", std::move(out), {a},
                                           [a](std::span<const double> g, const Tensor&, Tape& t) {
                                             if (double* d = t.grad_buffer(a)) {
                                               for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
                                             }
                                           });
}

Var add_bias(Var x, Var bias) {
  const Shape& xs = x.shape();
  require_rank("add_bias", "bias", bias, 1);
  if (xs.empty() || xs.back() != bias.shape()[0]) {
    throw DimensionError("add_bias: bias " + shape_string(bias.shape()) + " does not match last axis of " +
                         shape_string(xs));
  }
  const std::size_t d = bias.shape()[0];
  Tensor out = x.value();
  auto od = out.data();
  const auto bd = bias.value().data();
  for (std::size_t i = 0; i < od.size(); ++i) od[i] += bd[i % d];
  return tape_of(x, "add_bias").record("add_bias", std::move(out), {x, bias},
                                       [x, bias, d](std::span<const double> g, const Tensor&, Tape& t) {
                                         if (double* dx = t.grad_buffer(x)) {
                                           for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i];
                                         }
                                         if (double* db = t.grad_buffer(bias)) {
                                           for (std::size_t i = 0; i < g.size(); ++i) db[i % d] += g[i];
                                         }
                                       });
}

Var elementwise(Elementwise f, Var x) {
  Tensor out = x.value();
  switch (f) {
    case Elementwise::sigmoid:
      for (double& v : out.data()) v = 1.0 / (1.0 + std::exp(-v));
      break;
    case Elementwise::relu:
      for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
      break;
    case Elementwise::tanh:
      for (double& v : out.data()) v = std::tanh(v);
      break;
  }
  const char* name = f == Elementwise::sigmoid ? "sigmoid" : f == Elementwise::relu ? "relu" : "tanh";
  return tape_of(x, name).record(name, std::move(out), {x},
                                 [x, f](std::span<const double> g, const Tensor& y, Tape& t) {
                                   double* d = t.grad_buffer(x);
                                   if (!d) return;
                                   const auto yv = y.data();
                                   switch (f) {
                                     case Elementwise::sigmoid:
                                       for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * yv[i] * (1.0 - yv[i]);
                                       break;
                                     case Elementwise::relu:
                                       for (std::size_t i = 0; i < g.size(); ++i) d[i] += yv[i] > 0.0 ? g[i] : 0.0;
                                       break;
                                     case Elementwise::tanh:
                                       for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * (1.0 - yv[i] * yv[i]);
                                       break;
                                   }
                                 });
}

// Reductions and reshaping ---------------------------------------------------

Var sum(Var x) {
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  return tape_of(x, "sum").record("sum", Tensor::scalar(total), {x},
                                  [x](std::span<const double> g, const Tensor&, Tape& t) {
                                    if (double* d = t.grad_buffer(x)) {
                                      const std::size_t n = x.value().size();
                                      for (std::size_t i = 0; i < n; ++i) d[i] += g[0];
                                    }
                                  });
}

Var mean(Var x) {
  const std::size_t n = x.value().size();
  if (n == 0) throw DimensionError("mean: empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(n));
}

Var reshape(Var x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return tape_of(x, "reshape").record("reshape", std::move(out), {x},
                                      [x](std::span<const double> g, const Tensor&, Tape& t) {
                                        if (double* d = t.grad_buffer(x)) {
                                          for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
                                        }
                                      });
}

// Matrix products ------------------------------------------------------------

Var matmul(Var a, Var b) {
  require_rank("matmul", "a", a, 2);
  require_rank("matmul", "b", b, 2);
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw DimensionError("matmul: inner dimensions differ for " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
  }
  Tensor out(Shape{m, n});
  gemm_nn(a.value().data().data(), b.value().data().data(), out.data().data(), m, k, n);
  return tape_of(a, "matmul").record("matmul", std::move(out), {a, b},
                                     [a, b, m, k, n](std::span<const double> g, const Tensor&, Tape& t) {
                                       if (double* da = t.grad_buffer(a)) gemm_nt(g.data(), b.value().data().data(), da, m, n, k);
                                       if (double* db = t.grad_buffer(b)) gemm_tn(a.value().data().data(), g.data(), db, k, m, n);
                                     });
}

Var linear(Var x, Var weight, std::optional<Var> bias) {
  require_rank("linear", "weight", weight, 2);
  const Shape& xs = x.shape();
  const std::size_t out_dim = weight.shape()[0], in_dim = weight.shape()[1];
  if (xs.empty() || xs.back() != in_dim) {
    throw DimensionError("linear: input " + shape_string(xs) + " incompatible with weight " +
                         shape_string(weight.shape()));
  }
  if (bias && (bias->shape().size() != 1 || bias->shape()[0] != out_dim)) {
    throw DimensionError("linear: bias " + shape_string(bias->shape()) + " incompatible with weight " +
                         shape_string(weight.shape()));
  }
  const std::size_t rows = x.value().size() / in_dim;
  Shape os = xs;
  os.back() = out_dim;
  Tensor out(os);
  gemm_nt(x.value().data().data(), weight.value().data().data(), out.data().data(), rows, in_dim, out_dim);
  if (bias) {
    auto od = out.data();
    const auto bd = bias->value().data();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < out_dim; ++j) od[r * out_dim + j] += bd[j];
    }
  }
  Tape& tape = tape_of(x, "linear");
  auto backward = [x, weight, bias, rows, in_dim, out_dim](std::span<const double> g, const Tensor&, Tape& t) {
    if (double* dx = t.grad_buffer(x)) gemm_nn(g.data(), weight.value().data().data(), dx, rows, out_dim, in_dim);
    if (double* dw = t.grad_buffer(weight)) gemm_tn(g.data(), x.value().data().data(), dw, out_dim, rows, in_dim);
    if (bias) {
      if (double* db = t.grad_buffer(*bias)) {
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < out_dim; ++j) db[j] += g[r * out_dim + j];
        }
      }
    }
  };
  if (bias) return tape.record("linear", std::move(out), {x, weight, *bias}, backward);
  return tape.record("linear", std::move(out), {x, weight}, backward);
}

Var bmm(Var a, Var b) {
  require_rank("bmm", "a", a, 3);
  require_rank("bmm", "b", b, 3);
  const std::size_t batch = a.shape()[0], m = a.shape()[1], k = a.shape()[2], n = b.shape()[2];
  if (b.shape()[0] != batch || b.shape()[1] != k) {
    throw DimensionError("bmm: incompatible shapes " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  Tensor out(Shape{batch, m, n});
  for (std::size_t i = 0; i < batch; ++i) {
    gemm_nn(a.value().data().data() + i * m * k, b.value().data().data() + i * k * n, out.data().data() + i * m * n,
            m, k, n);
  }
  return tape_of(a, "bmm").record(
      "bmm", std::move(out), {a, b}, [a, b, batch, m, k, n](std::span<const double> g, const Tensor&, Tape& t) {
        double* da = t.grad_buffer(a);
        double* db = t.grad_buffer(b);
        for (std::size_t i = 0; i < batch; ++i) {
          const double* gi = g.data() + i * m * n;
          if (da) gemm_nt(gi, b.value().data().data() + i * k * n, da + i * m * k, m, n, k);
          if (db) gemm_tn(a.value().data().data() + i * m * k, gi, db + i * k * n, k, m, n);
        }
      });
}

Var bmm_nt(Var a, Var b) {
  require_rank("bmm_nt", "a", a, 3);
  require_rank("bmm_nt", "b", b, 3);
  const std::size_t batch = a.shape()[0], m = a.shape()[1], k = a.shape()[2], n = b.shape()[1];
  if (b.shape()[0] != batch || b.shape()[2] != k) {
    throw DimensionError("bmm_nt: incompatible shapes " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()) + "^T");
  }
  Tensor out(Shape{batch, m, n});
  for (std::size_t i = 0; i < batch; ++i) {
    gemm_nt(a.value().data().data() + i * m * k, b.value().data().data() + i * n * k, out.data().data() + i * m * n,
            m, k, n);
  }
  return tape_of(a, "bmm_nt").record(
      "bmm_nt", std::move(out), {a, b}, [a, b, batch, m, k, n](std::span<const double> g, const Tensor&, Tape& t) {
        double* da = t.grad_buffer(a);
        double* db = t.grad_buffer(b);
        for (std::size_t i = 0; i < batch; ++i) {
          const double* gi = g.data() + i * m * n;
          if (da) gemm_nn(gi, b.value().data().data() + i * n * k, da + i * m * k, m, n, k);
          if (db) gemm_tn(gi, a.value().data().data() + i * m * k, db + i * n * k, n, m, k);
        }
      });
}

Var transpose_last2(Var x) {
  require_rank("transpose_last2", "x", x, 3);
  const std::size_t batch = x.shape()[0], m = x.shape()[1], n = x.shape()[2];
  Tensor out(Shape{batch, n, m});
  const auto xd = x.value().data();
  auto od = out.data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) od[(b * n + j) * m + i] = xd[(b * m + i) * n + j];
    }
  }
  return tape_of(x, "transpose_last2").record(
      "transpose_last2", std::move(out), {x}, [x, batch, m, n](std::span<const double> g, const Tensor&, Tape& t) {
        double* d = t.grad_buffer(x);
        if (!d) return;
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) d[(b * m + i) * n + j] += g[(b * n + j) * m + i];
          }
        }
      });
}

Var grouped_linear(Var x, Var weight) {
  require_rank("grouped_linear", "x", x, 3);
  require_rank("grouped_linear", "weight", weight, 3);
  const std::size_t groups = x.shape()[0], n = x.shape()[1], in_dim = x.shape()[2];
  const std::size_t heads = weight.shape()[0], out_dim = weight.shape()[1];
  if (weight.shape()[2] != in_dim || heads == 0 || groups % heads != 0) {
    throw DimensionError("grouped_linear: input " + shape_string(x.shape()) + " incompatible with weight " +
                         shape_string(weight.shape()));
  }
  Tensor out(Shape{groups, n, out_dim});
  for (std::size_t g = 0; g < groups; ++g) {
    gemm_nt(x.value().data().data() + g * n * in_dim, weight.value().data().data() + (g % heads) * out_dim * in_dim,
            out.data().data() + g * n * out_dim, n, in_dim, out_dim);
  }
  return tape_of(x, "grouped_linear")
      .record("grouped_linear", std::move(out), {x, weight},
              [x, weight, groups, heads, n, in_dim, out_dim](std::span<const double> grad, const Tensor&, Tape& t) {
                double* dx = t.grad_buffer(x);
                double* dw = t.grad_buffer(weight);
                for (std::size_t g = 0; g < groups; ++g) {
                  const double* gg = grad.data() + g * n * out_dim;
                  const std::size_t h = g % heads;
                  if (dx) gemm_nn(gg, weight.value().data().data() + h * out_dim * in_dim, dx + g * n * in_dim, n, out_dim, in_dim);
                  if (dw) gemm_tn(gg, x.value().data().data() + g * n * in_dim, dw + h * out_dim * in_dim, out_dim, n, in_dim);
                }
              });
}

// Route contractions ---------------------------------------------------------

Var pair_contract(Var q, Var r) {
  require_rank("pair_contract", "query", q, 3);
  require_rank("pair_contract", "route", r, 4);
  const std::size_t groups = q.shape()[0], n = q.shape()[1], f = q.shape()[2];
  const std::size_t rgroups = r.shape()[0];
  if (rgroups == 0 || groups % rgroups != 0 || r.shape()[1] != n || r.shape()[2] != n || r.shape()[3] != f) {
    throw DimensionError("pair_contract: query " + shape_string(q.shape()) + " incompatible with route " +
                         shape_string(r.shape()));
  }
  const std::size_t heads = groups / rgroups;
  Tensor out(Shape{groups, n, n});
  const double* qd = q.value().data().data();
  const double* rd = r.value().data().data();
  double* od = out.data().data();
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t rg = g / heads;
    for (std::size_t k = 0; k < n; ++k) {
      const double* qrow = qd + (g * n + k) * f;
      for (std::size_t l = 0; l < n; ++l) {
        const double* rrow = rd + ((rg * n + k) * n + l) * f;
        double acc = 0.0;
        for (std::size_t c = 0; c < f; ++c) acc += qrow[c] * rrow[c];
        od[(g * n + k) * n + l] = acc;
      }
    }
  }
  return tape_of(q, "pair_contract")
      .record("pair_contract", std::move(out), {q, r},
              [q, r, groups, heads, n, f](std::span<const double> grad, const Tensor&, Tape& t) {
                double* dq = t.grad_buffer(q);
                double* dr = t.grad_buffer(r);
                const double* qd = q.value().data().data();
                const double* rd = r.value().data().data();
                for (std::size_t g = 0; g < groups; ++g) {
                  const std::size_t rg = g / heads;
                  for (std::size_t k = 0; k < n; ++k) {
                    for (std::size_t l = 0; l < n; ++l) {
                      const double go = grad[(g * n + k) * n + l];
                      if (go == 0.0) continue;
                      const std::size_t roff = ((rg * n + k) * n + l) * f;
                      const std::size_t qoff = (g * n + k) * f;
                      if (dq) for (std::size_t c = 0; c < f; ++c) dq[qoff + c] += go * rd[roff + c];
                      if (dr) for (std::size_t c = 0; c < f; ++c) dr[roff + c] += go * qd[qoff + c];
                    }
                  }
                }
              });
}

Var pair_aggregate(Var a, Var r) {
  require_rank("pair_aggregate", "attention", a, 3);
  require_rank("pair_aggregate", "route", r, 4);
  const std::size_t groups = a.shape()[0], n = a.shape()[1];
  const std::size_t rgroups = r.shape()[0], v = r.shape()[3];
  if (a.shape()[2] != n || rgroups == 0 || groups % rgroups != 0 || r.shape()[1] != n || r.shape()[2] != n) {
    throw DimensionError("pair_aggregate: attention " + shape_string(a.shape()) + " incompatible with route " +
                         shape_string(r.shape()));
  }
  const std::size_t heads = groups / rgroups;
  Tensor out(Shape{groups, n, v});
  const double* ad = a.value().data().data();
  const double* rd = r.value().data().data();
  double* od = out.data().data();
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t rg = g / heads;
    for (std::size_t k = 0; k < n; ++k) {
      double* orow = od + (g * n + k) * v;
      for (std::size_t l = 0; l < n; ++l) {
        const double w = ad[(g * n + k) * n + l];
        if (w == 0.0) continue;
        const double* rrow = rd + ((rg * n + k) * n + l) * v;
        for (std::size_t c = 0; c < v; ++c) orow[c] += w * rrow[c];
      }
    }
  }
  return tape_of(a, "pair_aggregate")
      .record("pair_aggregate", std::move(out), {a, r},
              [a, r, groups, heads, n, v](std::span<const double> grad, const Tensor&, Tape& t) {
                double* da = t.grad_buffer(a);
                double* dr = t.grad_buffer(r);
                const double* ad = a.value().data().data();
                const double* rd = r.value().data().data();
                for (std::size_t g = 0; g < groups; ++g) {
                  const std::size_t rg = g / heads;
                  for (std::size_t k = 0; k < n; ++k) {
                    const double* grow = grad.data() + (g * n + k) * v;
                    for (std::size_t l = 0; l < n; ++l) {
                      const std::size_t roff = ((rg * n + k) * n + l) * v;
                      if (da) {
                        double acc = 0.0;
                        for (std::size_t c = 0; c < v; ++c) acc += grow[c] * rd[roff + c];
                        da[(g * n + k) * n + l] += acc;
                      }
                      if (dr) {
                        const double w = ad[(g * n + k) * n + l];
                        if (w == 0.0) continue;
                        for (std::size_t c = 0; c < v; ++c) dr[roff + c] += w * grow[c];
                      }
                    }
                  }
                }
              });
}

Var split_heads(Var x, std::size_t heads) {
  const Shape& xs = x.shape();
  if (xs.size() < 3 || xs.size() > 4 || heads == 0 || xs.back() % heads != 0) {
    throw DimensionError("split_heads: cannot split " + shape_string(xs) + " into " + std::to_string(heads) +
                         " heads");
  }
  const std::size_t batch = xs[0], width = xs.back(), d = width / heads;
  const std::size_t middle = x.value().size() / (batch * width);
  Shape os = xs;
  os[0] = batch * heads;
  os.back() = d;
  Tensor out(os);
  const double* xd = x.value().data().data();
  double* od = out.data().data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t m = 0; m < middle; ++m) {
        const double* src = xd + (b * middle + m) * width + h * d;
        double* dst = od + ((b * heads + h) * middle + m) * d;
        std::copy(src, src + d, dst);
      }
    }
  }
  return tape_of(x, "split_heads")
      .record("split_heads", std::move(out), {x},
              [x, batch, heads, middle, width, d](std::span<const double> g, const Tensor&, Tape& t) {
                double* dx = t.grad_buffer(x);
                if (!dx) return;
                for (std::size_t b = 0; b < batch; ++b) {
                  for (std::size_t h = 0; h < heads; ++h) {
                    for (std::size_t m = 0; m < middle; ++m) {
                      double* dst = dx + (b * middle + m) * width + h * d;
                      const double* src = g.data() + ((b * heads + h) * middle + m) * d;
                      for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
                    }
                  }
                }
              });
}

Var merge_heads(Var x, std::size_t heads) {
  require_rank("merge_heads", "x", x, 3);
  const std::size_t groups = x.shape()[0], n = x.shape()[1], d = x.shape()[2];
  if (heads == 0 || groups % heads != 0) {
    throw DimensionError("merge_heads: " + shape_string(x.shape()) + " not divisible into " +
                         std::to_string(heads) + " heads");
  }
  const std::size_t batch = groups / heads, width = heads * d;
  Tensor out(Shape{batch, n, width});
  const double* xd = x.value().data().data();
  double* od = out.data().data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t m = 0; m < n; ++m) {
        const double* src = xd + ((b * heads + h) * n + m) * d;
        std::copy(src, src + d, od + (b * n + m) * width + h * d);
      }
    }
  }
  return tape_of(x, "merge_heads")
      .record("merge_heads", std::move(out), {x},
              [x, batch, heads, n, d, width](std::span<const double> g, const Tensor&, Tape& t) {
                double* dx = t.grad_buffer(x);
                if (!dx) return;
                for (std::size_t b = 0; b < batch; ++b) {
                  for (std::size_t h = 0; h < heads; ++h) {
                    for (std::size_t m = 0; m < n; ++m) {
                      double* dst = dx + ((b * heads + h) * n + m) * d;
                      const double* src = g.data() + (b * n + m) * width + h * d;
                      for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
                    }
                  }
                }
              });
}

// Normalization and probabilities --------------------------------------------

Var softmax_rows(Var x, bool zero_masked_rows) {
  const Shape& xs = x.shape();
  if (xs.empty() || xs.back() == 0) throw DimensionError("softmax_rows: needs a non-empty last axis");
  const std::size_t n = xs.back(), rows = x.value().size() / n;
  Tensor out(xs);
  const double* xd = x.value().data().data();
  double* od = out.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = xd + r * n;
    double* o = od + r * n;
    const double mx = *std::max_element(in, in + n);
    if (zero_masked_rows && mx < kMaskedRowThreshold) continue;
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      o[j] = std::exp(in[j] - mx);
      total += o[j];
    }
    for (std::size_t j = 0; j < n; ++j) o[j] /= total;
  }
  return tape_of(x, "softmax_rows")
      .record("softmax_rows", std::move(out), {x}, [x, rows, n](std::span<const double> g, const Tensor& y, Tape& t) {
        double* dx = t.grad_buffer(x);
        if (!dx) return;
        const double* yd = y.data().data();
        for (std::size_t r = 0; r < rows; ++r) {
          double dot = 0.0;
          for (std::size_t j = 0; j < n; ++j) dot += g[r * n + j] * yd[r * n + j];
          for (std::size_t j = 0; j < n; ++j) dx[r * n + j] += yd[r * n + j] * (g[r * n + j] - dot);
        }
      });
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
  const Shape& xs = x.shape();
  if (xs.empty() || xs.back() == 0) throw DimensionError("layer_norm: needs a non-empty last axis");
  const std::size_t d = xs.back(), rows = x.value().size() / d;
  if (gamma.shape() != Shape{d} || beta.shape() != Shape{d}) {
    throw DimensionError("layer_norm: gamma " + shape_string(gamma.shape()) + " / beta " +
                         shape_string(beta.shape()) + " do not match last axis of " + shape_string(xs));
  }
  std::vector<double> xhat(x.value().size());
  std::vector<double> rstd(rows);
  Tensor out(xs);
  const double* xd = x.value().data().data();
  const double* gd = gamma.value().data().data();
  const double* bd = beta.value().data().data();
  double* od = out.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = xd + r * d;
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += in[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (in[j] - mu) * (in[j] - mu);
    var /= static_cast<double>(d);
    rstd[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (in[j] - mu) * rstd[r];
      xhat[r * d + j] = h;
      od[r * d + j] = gd[j] * h + bd[j];
    }
  }
  return tape_of(x, "layer_norm")
      .record("layer_norm", std::move(out), {x, gamma, beta},
              [x, gamma, beta, rows, d, xhat = std::move(xhat), rstd = std::move(rstd)](
                  std::span<const double> g, const Tensor&, Tape& t) {
                double* dx = t.grad_buffer(x);
                double* dgamma = t.grad_buffer(gamma);
                double* dbeta = t.grad_buffer(beta);
                const double* gd = gamma.value().data().data();
                const double inv_d = 1.0 / static_cast<double>(d);
                for (std::size_t r = 0; r < rows; ++r) {
                  const double* go = g.data() + r * d;
                  const double* h = xhat.data() + r * d;
                  if (dgamma) for (std::size_t j = 0; j < d; ++j) dgamma[j] += go[j] * h[j];
                  if (dbeta) for (std::size_t j = 0; j < d; ++j) dbeta[j] += go[j];
                  if (!dx) continue;
                  double mean_g = 0.0, mean_gh = 0.0;
                  for (std::size_t j = 0; j < d; ++j) {
                    const double gg = go[j] * gd[j];
                    mean_g += gg;
                    mean_gh += gg * h[j];
                  }
                  mean_g *= inv_d;
                  mean_gh *= inv_d;
                  for (std::size_t j = 0; j < d; ++j) {
                    dx[r * d + j] += rstd[r] * (go[j] * gd[j] - mean_g - h[j] * mean_gh);
                  }
                }
              });
}

Var dropout(Var x, double rate, DropoutMode mode, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ParameterError("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (!training || rate == 0.0) return x;
  const Shape& xs = x.shape();
  const std::size_t total = x.value().size();
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> factor(total);
  if (mode == DropoutMode::element || xs.size() < 2) {
    for (double& f : factor) f = bernoulli(rng, rate) ? 0.0 : keep_scale;
  } else {
    const std::size_t d = xs.back(), nodes = xs[xs.size() - 2];
    const std::size_t graphs = nodes * d == 0 ? 0 : total / (nodes * d);
    for (std::size_t g = 0; g < graphs; ++g) {
      for (std::size_t c = 0; c < d; ++c) {
        const double f = bernoulli(rng, rate) ? 0.0 : keep_scale;
        for (std::size_t n = 0; n < nodes; ++n) factor[(g * nodes + n) * d + c] = f;
      }
    }
  }
  Tensor out = x.value();
  auto od = out.data();
  for (std::size_t i = 0; i < total; ++i) od[i] *= factor[i];
  return tape_of(x, "dropout").record("dropout", std::move(out), {x},
                                      [x, factor = std::move(factor)](std::span<const double> g, const Tensor&, Tape& t) {
                                        if (double* d = t.grad_buffer(x)) {
                                          for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * factor[i];
                                        }
                                      });
}

// Node pooling ---------------------------------------------------------------

Var node_weighted_sum(Var x, const Tensor& weights) {
  require_rank("node_weighted_sum", "x", x, 3);
  const std::size_t batch = x.shape()[0], n = x.shape()[1], d = x.shape()[2];
  if (weights.shape() != Shape{batch, n}) {
    throw DimensionError("node_weighted_sum: weights " + shape_string(weights.shape()) + " do not match " +
                         shape_string(x.shape()));
  }
  Tensor out(Shape{batch, d});
  const double* xd = x.value().data().data();
  double* od = out.data().data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t m = 0; m < n; ++m) {
      const double w = weights[b * n + m];
      if (w == 0.0) continue;
      for (std::size_t j = 0; j < d; ++j) od[b * d + j] += w * xd[(b * n + m) * d + j];
    }
  }
  return tape_of(x, "node_weighted_sum")
      .record("node_weighted_sum", std::move(out), {x},
              [x, weights, batch, n, d](std::span<const double> g, const Tensor&, Tape& t) {
                double* dx = t.grad_buffer(x);
                if (!dx) return;
                for (std::size_t b = 0; b < batch; ++b) {
                  for (std::size_t m = 0; m < n; ++m) {
                    const double w = weights[b * n + m];
                    if (w == 0.0) continue;
                    for (std::size_t j = 0; j < d; ++j) dx[(b * n + m) * d + j] += w * g[b * d + j];
                  }
                }
              });
}

Var place_rows(Var vec, const Tensor& indicator) {
  require_rank("place_rows", "vec", vec, 1);
  if (indicator.rank() != 2) {
    throw DimensionError("place_rows: indicator must be [B,N], got " + shape_string(indicator.shape()));
  }
  const std::size_t batch = indicator.shape()[0], n = indicator.shape()[1], d = vec.shape()[0];
  Tensor out(Shape{batch, n, d});
  const double* vd = vec.value().data().data();
  double* od = out.data().data();
  for (std::size_t r = 0; r < batch * n; ++r) {
    const double w = indicator[r];
    if (w == 0.0) continue;
    for (std::size_t j = 0; j < d; ++j) od[r * d + j] = w * vd[j];
  }
  return tape_of(vec, "place_rows")
      .record("place_rows", std::move(out), {vec}, [vec, indicator, batch, n, d](std::span<const double> g, const Tensor&, Tape& t) {
        double* dv = t.grad_buffer(vec);
        if (!dv) return;
        for (std::size_t r = 0; r < batch * n; ++r) {
          const double w = indicator[r];
          if (w == 0.0) continue;
          for (std::size_t j = 0; j < d; ++j) dv[j] += w * g[r * d + j];
        }
      });
}

}  // namespace gi
