#include "fusionloc/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "fusionloc/errors.hpp"
#include "fusionloc/parallel.hpp"
#include "fusionloc/rng.hpp"

namespace fusionloc::ad {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream ss;
  ss << "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) ss << ",";
    ss << shape[i];
  }
  ss << ")";
  return ss.str();
}

namespace detail {

void Node::ensure_grad() {
  if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
}

}  // namespace detail

using detail::Node;

namespace {

void check_finite(const std::vector<double>& values, const char* op) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string("non-finite value produced by ") + op);
    }
  }
}

[[noreturn]] void shape_error(const char* op, const Tensor& a) {
  throw InvalidInputError(std::string(op) + ": unsupported shape " +
                          shape_str(a.shape()));
}

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw InvalidInputError(std::string(op) + ": incompatible shapes " +
                          shape_str(a.shape()) + " and " + shape_str(b.shape()));
}

}  // namespace

Tensor make_op(Shape shape, std::vector<double> value, std::vector<Tensor> parents,
               std::function<void(Node&)> backprop) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value = std::move(value);
  n->is_leaf = false;
  bool rg = false;
  for (const Tensor& p : parents) rg = rg || p.requires_grad();
  n->requires_grad = rg;
  if (rg) {
    n->parents.reserve(parents.size());
    for (const Tensor& p : parents) n->parents.push_back(p.node());
    n->backprop = std::move(backprop);
  }
  return Tensor(std::move(n));
}

Tensor Tensor::constant(Shape shape, std::vector<double> values) {
  if (shape_numel(shape) != values.size()) {
    throw InvalidInputError("tensor: value count does not match shape " +
                            shape_str(shape));
  }
  check_finite(values, "constant");
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value = std::move(values);
  return Tensor(std::move(n));
}

Tensor Tensor::scalar(double v) { return constant({}, {v}); }

Tensor Tensor::zeros(Shape shape) {
  std::vector<double> v(shape_numel(shape), 0.0);
  return constant(std::move(shape), std::move(v));
}

Tensor Tensor::variable(Shape shape, std::vector<double> values) {
  Tensor t = constant(std::move(shape), std::move(values));
  t.node_->requires_grad = true;
  t.node_->ensure_grad();
  return t;
}

double Tensor::item() const {
  if (numel() != 1) {
    throw InvalidInputError("item: tensor is not scalar, shape " +
                            shape_str(shape()));
  }
  return node_->value[0];
}

std::span<const double> Tensor::grad() const {
  node_->ensure_grad();
  return node_->grad;
}

void Tensor::zero_grad() {
  node_->grad.assign(node_->value.size(), 0.0);
}

std::span<double> Tensor::mutable_values() {
  if (!node_->is_leaf) {
    throw InvalidInputError("mutable_values: only leaves may be mutated");
  }
  return node_->value;
}

// ---- elementwise ops ------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  const bool same = a.shape() == b.shape();
  const bool row_bcast = a.shape().size() == 2 && b.shape().size() == 1 &&
                         a.shape()[1] == b.shape()[0];
  if (!same && !row_bcast) shape_error("add", a, b);

  std::vector<double> out(a.numel());
  if (same) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = a.value(i) + b.value(i);
    }
  } else {
    const std::size_t rows = a.shape()[0], cols = a.shape()[1];
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        out[r * cols + c] = a.value(r * cols + c) + b.value(c);
      }
    }
  }
  check_finite(out, "add");
  return make_op(a.shape(), std::move(out), {a, b}, [same](Node& n) {
    Node& pa = *n.parents[0];
    Node& pb = *n.parents[1];
    if (pa.requires_grad) {
      pa.ensure_grad();
      for (std::size_t i = 0; i < n.grad.size(); ++i) pa.grad[i] += n.grad[i];
    }
    if (pb.requires_grad) {
      pb.ensure_grad();
      if (same) {
        for (std::size_t i = 0; i < n.grad.size(); ++i) pb.grad[i] += n.grad[i];
      } else {
        const std::size_t cols = pb.value.size();
        const std::size_t rows = n.value.size() / cols;
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < cols; ++c) {
            pb.grad[c] += n.grad[r * cols + c];
          }
        }
      }
    }
  });
}

Tensor negate(const Tensor& a) {
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -a.value(i);
  return make_op(a.shape(), std::move(out), {a}, [](Node& n) {
    Node& pa = *n.parents[0];
    pa.ensure_grad();
    for (std::size_t i = 0; i < n.grad.size(); ++i) pa.grad[i] -= n.grad[i];
  });
}

Tensor sub(const Tensor& a, const Tensor& b) { return add(a, negate(b)); }

Tensor mul(const Tensor& a, const Tensor& b) {
  const bool same = a.shape() == b.shape();
  const bool a_scalar = a.numel() == 1;
  const bool b_scalar = b.numel() == 1;
  if (!same && !a_scalar && !b_scalar) shape_error("mul", a, b);

  const Tensor& big = a_scalar && !same ? b : a;
  std::vector<double> out(big.numel());
  if (same) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value(i) * b.value(i);
  } else if (a_scalar) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value(0) * b.value(i);
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value(i) * b.value(0);
  }
  check_finite(out, "mul");
  // 0: elementwise, 1: a scalar broadcast, 2: b scalar broadcast
  const int mode = same ? 0 : (a_scalar ? 1 : 2);
  return make_op(big.shape(), std::move(out), {a, b}, [mode](Node& n) {
    Node& pa = *n.parents[0];
    Node& pb = *n.parents[1];
    if (pa.requires_grad) {
      pa.ensure_grad();
      if (mode == 0) {
        for (std::size_t i = 0; i < n.grad.size(); ++i) {
          pa.grad[i] += n.grad[i] * pb.value[i];
        }
      } else if (mode == 1) {
        double s = 0.0;
        for (std::size_t i = 0; i < n.grad.size(); ++i) {
          s += n.grad[i] * pb.value[i];
        }
        pa.grad[0] += s;
      } else {
        for (std::size_t i = 0; i < n.grad.size(); ++i) {
          pa.grad[i] += n.grad[i] * pb.value[0];
        }
      }
    }
    if (pb.requires_grad) {
      pb.ensure_grad();
      if (mode == 0) {
        for (std::size_t i = 0; i < n.grad.size(); ++i) {
          pb.grad[i] += n.grad[i] * pa.value[i];
        }
      } else if (mode == 1) {
        for (std::size_t i = 0; i < n.grad.size(); ++i) {
          pb.grad[i] += n.grad[i] * pa.value[0];
        }
      } else {
        double s = 0.0;
        for (std::size_t i = 0; i < n.grad.size(); ++i) {
          s += n.grad[i] * pa.value[i];
        }
        pb.grad[0] += s;
      }
    }
  });
}

Tensor scalar_mul(const Tensor& a, double s) {
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value(i) * s;
  check_finite(out, "scalar_mul");
  return make_op(a.shape(), std::move(out), {a}, [s](Node& n) {
    Node& pa = *n.parents[0];
    pa.ensure_grad();
    for (std::size_t i = 0; i < n.grad.size(); ++i) pa.grad[i] += s * n.grad[i];
  });
}

Tensor exp(const Tensor& a) {
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(a.value(i));
  check_finite(out, "exp");
  return make_op(a.shape(), std::move(out), {a}, [](Node& n) {
    Node& pa = *n.parents[0];
    pa.ensure_grad();
    for (std::size_t i = 0; i < n.grad.size(); ++i) {
      pa.grad[i] += n.grad[i] * n.value[i];
    }
  });
}

Tensor relu(const Tensor& a) {
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = a.value(i) > 0.0 ? a.value(i) : 0.0;
  }
  return make_op(a.shape(), std::move(out), {a}, [](Node& n) {
    Node& pa = *n.parents[0];
    pa.ensure_grad();
    for (std::size_t i = 0; i < n.grad.size(); ++i) {
      if (pa.value[i] > 0.0) pa.grad[i] += n.grad[i];
    }
  });
}

// ---- matmul ---------------------------------------------------------------

namespace {

constexpr std::size_t kParallelFlops = 1u << 18;

// C[m,n] += A[m,k] * B[k,n]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n) {
  auto row = [&](std::size_t i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      if (av == 0.0) continue;
      const double* brow = b + kk * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  };
  if (m * k * n >= kParallelFlops && m > 1) {
    parallel_for(m, row);
  } else {
    for (std::size_t i = 0; i < m; ++i) row(i);
  }
}

// C[m,n] += A[m,k] * B[n,k]^T
void gemm_nt(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n) {
  auto row = [&](std::size_t i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = b + j * k;
      double s = 0.0;
      for (std::size_t kk = 0; kk < k; ++kk) s += arow[kk] * brow[kk];
      crow[j] += s;
    }
  };
  if (m * k * n >= kParallelFlops && m > 1) {
    parallel_for(m, row);
  } else {
    for (std::size_t i = 0; i < m; ++i) row(i);
  }
}

// C[m,n] += A[k,m]^T * B[k,n]
void gemm_tn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n) {
  for (std::size_t kk = 0; kk < k; ++kk) {
    const double* arow = a + kk * m;
    const double* brow = b + kk * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  const auto& sa = a.shape();
  const auto& sb = b.shape();
  std::size_t m, k, n;
  bool squeeze_m = false, squeeze_n = false;
  if (sa.size() == 2 && sb.size() == 2) {
    m = sa[0], k = sa[1], n = sb[1];
    if (sb[0] != k) shape_error("matmul", a, b);
  } else if (sa.size() == 2 && sb.size() == 1) {
    m = sa[0], k = sa[1], n = 1;
    if (sb[0] != k) shape_error("matmul", a, b);
    squeeze_n = true;
  } else if (sa.size() == 1 && sb.size() == 2) {
    m = 1, k = sa[0], n = sb[1];
    if (sb[0] != k) shape_error("matmul", a, b);
    squeeze_m = true;
  } else {
    shape_error("matmul", a, b);
  }

  std::vector<double> out(m * n, 0.0);
  gemm_nn(a.values().data(), b.values().data(), out.data(), m, k, n);
  check_finite(out, "matmul");

  Shape shape;
  if (squeeze_m && squeeze_n) {
    shape = {};
  } else if (squeeze_m) {
    shape = {n};
  } else if (squeeze_n) {
    shape = {m};
  } else {
    shape = {m, n};
  }
  return make_op(std::move(shape), std::move(out), {a, b}, [m, k, n](Node& nd) {
    Node& pa = *nd.parents[0];
    Node& pb = *nd.parents[1];
    if (pa.requires_grad) {
      pa.ensure_grad();
      gemm_nt(nd.grad.data(), pb.value.data(), pa.grad.data(), m, n, k);
    }
    if (pb.requires_grad) {
      pb.ensure_grad();
      gemm_tn(pa.value.data(), nd.grad.data(), pb.grad.data(), k, m, n);
    }
  });
}

// ---- softmax / max / concat -----------------------------------------------

namespace {

void softmax_span(const double* x, double* y, std::size_t n, std::size_t stride) {
  double mx = x[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, x[i * stride]);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::exp(x[i * stride] - mx);
    y[i * stride] = e;
    sum += e;
  }
  for (std::size_t i = 0; i < n; ++i) y[i * stride] /= sum;
}

void softmax_backward_span(const double* y, const double* gy, double* gx,
                           std::size_t n, std::size_t stride) {
  double dot = 0.0;
  for (std::size_t i = 0; i < n; ++i) dot += gy[i * stride] * y[i * stride];
  for (std::size_t i = 0; i < n; ++i) {
    gx[i * stride] += y[i * stride] * (gy[i * stride] - dot);
  }
}

}  // namespace

Tensor softmax(const Tensor& a, std::size_t axis) {
  const auto& s = a.shape();
  std::vector<double> out(a.numel());
  if (s.size() <= 1) {
    if (a.numel() == 0) shape_error("softmax", a);
    softmax_span(a.values().data(), out.data(), a.numel(), 1);
  } else if (s.size() == 2) {
    if (axis > 1) shape_error("softmax", a);
    const std::size_t rows = s[0], cols = s[1];
    if (axis == 1) {
      for (std::size_t r = 0; r < rows; ++r) {
        softmax_span(a.values().data() + r * cols, out.data() + r * cols, cols, 1);
      }
    } else {
      for (std::size_t c = 0; c < cols; ++c) {
        softmax_span(a.values().data() + c, out.data() + c, rows, cols);
      }
    }
  } else {
    shape_error("softmax", a);
  }
  check_finite(out, "softmax");
  return make_op(a.shape(), std::move(out), {a}, [axis](Node& n) {
    Node& pa = *n.parents[0];
    pa.ensure_grad();
    const auto& s = n.shape;
    if (s.size() <= 1) {
      softmax_backward_span(n.value.data(), n.grad.data(), pa.grad.data(),
                            n.value.size(), 1);
    } else if (axis == 1) {
      for (std::size_t r = 0; r < s[0]; ++r) {
        softmax_backward_span(n.value.data() + r * s[1], n.grad.data() + r * s[1],
                              pa.grad.data() + r * s[1], s[1], 1);
      }
    } else {
      for (std::size_t c = 0; c < s[1]; ++c) {
        softmax_backward_span(n.value.data() + c, n.grad.data() + c,
                              pa.grad.data() + c, s[0], s[1]);
      }
    }
  });
}

Tensor max_over_set(const Tensor& a, std::size_t axis) {
  const auto& s = a.shape();
  std::vector<double> out;
  std::vector<std::size_t> argmax;
  Shape out_shape;

  if (s.size() <= 1) {
    if (a.numel() == 0) shape_error("max_over_set", a);
    std::size_t best = 0;
    for (std::size_t i = 1; i < a.numel(); ++i) {
      if (a.value(i) > a.value(best)) best = i;
    }
    out = {a.value(best)};
    argmax = {best};
    out_shape = {};
  } else if (s.size() == 2 && axis <= 1) {
    const std::size_t rows = s[0], cols = s[1];
    if (axis == 0) {
      out.resize(cols);
      argmax.resize(cols);
      for (std::size_t c = 0; c < cols; ++c) {
        std::size_t best = 0;
        for (std::size_t r = 1; r < rows; ++r) {
          if (a.value(r * cols + c) > a.value(best * cols + c)) best = r;
        }
        out[c] = a.value(best * cols + c);
        argmax[c] = best * cols + c;
      }
      out_shape = {cols};
    } else {
      out.resize(rows);
      argmax.resize(rows);
      for (std::size_t r = 0; r < rows; ++r) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < cols; ++c) {
          if (a.value(r * cols + c) > a.value(r * cols + best)) best = c;
        }
        out[r] = a.value(r * cols + best);
        argmax[r] = r * cols + best;
      }
      out_shape = {rows};
    }
  } else {
    shape_error("max_over_set", a);
  }
  return make_op(std::move(out_shape), std::move(out), {a},
                 [argmax = std::move(argmax)](Node& n) {
                   Node& pa = *n.parents[0];
                   pa.ensure_grad();
                   for (std::size_t i = 0; i < argmax.size(); ++i) {
                     pa.grad[argmax[i]] += n.grad[i];
                   }
                 });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) {
    throw InvalidInputError("concat: nothing to concatenate");
  }
  const auto& s0 = parts[0].shape();
  std::vector<double> out;
  Shape out_shape;

  if (s0.size() <= 1) {
    std::size_t total = 0;
    for (const Tensor& p : parts) {
      if (p.shape().size() > 1) shape_error("concat", parts[0], p);
      total += p.numel();
    }
    out.reserve(total);
    for (const Tensor& p : parts) {
      out.insert(out.end(), p.values().begin(), p.values().end());
    }
    out_shape = {total};
  } else if (s0.size() == 2 && axis == 0) {
    const std::size_t cols = s0[1];
    std::size_t rows = 0;
    for (const Tensor& p : parts) {
      if (p.shape().size() != 2 || p.shape()[1] != cols) {
        shape_error("concat", parts[0], p);
      }
      rows += p.shape()[0];
    }
    out.reserve(rows * cols);
    for (const Tensor& p : parts) {
      out.insert(out.end(), p.values().begin(), p.values().end());
    }
    out_shape = {rows, cols};
  } else if (s0.size() == 2 && axis == 1) {
    const std::size_t rows = s0[0];
    std::size_t cols = 0;
    for (const Tensor& p : parts) {
      if (p.shape().size() != 2 || p.shape()[0] != rows) {
        shape_error("concat", parts[0], p);
      }
      cols += p.shape()[1];
    }
    out.resize(rows * cols);
    std::size_t col0 = 0;
    for (const Tensor& p : parts) {
      const std::size_t pc = p.shape()[1];
      for (std::size_t r = 0; r < rows; ++r) {
        std::copy_n(p.values().data() + r * pc, pc,
                    out.data() + r * cols + col0);
      }
      col0 += pc;
    }
    out_shape = {rows, cols};
  } else {
    shape_error("concat", parts[0]);
  }

  return make_op(std::move(out_shape), std::move(out), parts, [axis](Node& n) {
    if (n.shape.size() <= 1 || axis == 0) {
      std::size_t off = 0;
      for (auto& pp : n.parents) {
        if (pp->requires_grad) {
          pp->ensure_grad();
          for (std::size_t i = 0; i < pp->value.size(); ++i) {
            pp->grad[i] += n.grad[off + i];
          }
        }
        off += pp->value.size();
      }
    } else {
      const std::size_t rows = n.shape[0], cols = n.shape[1];
      std::size_t col0 = 0;
      for (auto& pp : n.parents) {
        const std::size_t pc = pp->value.size() / rows;
        if (pp->requires_grad) {
          pp->ensure_grad();
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < pc; ++c) {
              pp->grad[r * pc + c] += n.grad[r * cols + col0 + c];
            }
          }
        }
        col0 += pc;
      }
    }
  });
}

// ---- norms ----------------------------------------------------------------

Tensor l1_norm(const Tensor& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) s += std::abs(a.value(i));
  check_finite({s}, "l1_norm");
  return make_op({}, {s}, {a}, [](Node& n) {
    Node& pa = *n.parents[0];
    pa.ensure_grad();
    const double g = n.grad[0];
    for (std::size_t i = 0; i < pa.value.size(); ++i) {
      const double v = pa.value[i];
      pa.grad[i] += g * (v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0));
    }
  });
}

Tensor l2_norm(const Tensor& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) s += a.value(i) * a.value(i);
  const double norm = std::sqrt(s);
  check_finite({norm}, "l2_norm");
  return make_op({}, {norm}, {a}, [](Node& n) {
    Node& pa = *n.parents[0];
    pa.ensure_grad();
    const double norm = n.value[0];
    if (norm == 0.0) return;  // subgradient 0 at the origin
    const double g = n.grad[0] / norm;
    for (std::size_t i = 0; i < pa.value.size(); ++i) {
      pa.grad[i] += g * pa.value[i];
    }
  });
}

// ---- structural ops -------------------------------------------------------

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw InvalidInputError("reshape: element count mismatch, " +
                            shape_str(a.shape()) + " -> " + shape_str(shape));
  }
  std::vector<double> out(a.values().begin(), a.values().end());
  return make_op(std::move(shape), std::move(out), {a}, [](Node& n) {
    Node& pa = *n.parents[0];
    pa.ensure_grad();
    for (std::size_t i = 0; i < n.grad.size(); ++i) pa.grad[i] += n.grad[i];
  });
}

Tensor gather_rows(const Tensor& a, const std::vector<std::size_t>& rows) {
  if (a.shape().size() != 2) shape_error("gather_rows", a);
  const std::size_t cols = a.shape()[1];
  for (std::size_t r : rows) {
    if (r >= a.shape()[0]) {
      throw InvalidInputError("gather_rows: row index out of range");
    }
  }
  std::vector<double> out(rows.size() * cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(a.values().data() + rows[i] * cols, cols, out.data() + i * cols);
  }
  return make_op({rows.size(), cols}, std::move(out), {a}, [rows, cols](Node& n) {
    Node& pa = *n.parents[0];
    pa.ensure_grad();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t c = 0; c < cols; ++c) {
        pa.grad[rows[i] * cols + c] += n.grad[i * cols + c];
      }
    }
  });
}

// ---- conv2d ---------------------------------------------------------------

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              std::size_t stride, std::size_t pad) {
  const auto& si = input.shape();
  const auto& sw = weight.shape();
  if (si.size() != 3 || sw.size() != 4 || bias.shape().size() != 1) {
    throw InvalidInputError("conv2d: expected {C,H,W} input, {O,C,k,k} weight");
  }
  const std::size_t ci = si[0], h = si[1], w = si[2];
  const std::size_t co = sw[0], kh = sw[2], kw = sw[3];
  if (sw[1] != ci || bias.shape()[0] != co || kh != kw || stride == 0) {
    shape_error("conv2d", input, weight);
  }
  if (h + 2 * pad < kh || w + 2 * pad < kw) {
    throw InvalidInputError("conv2d: kernel larger than padded input");
  }
  const std::size_t ho = (h + 2 * pad - kh) / stride + 1;
  const std::size_t wo = (w + 2 * pad - kw) / stride + 1;

  std::vector<double> out(co * ho * wo);
  const double* x = input.values().data();
  const double* wt = weight.values().data();
  const double* b = bias.values().data();

  parallel_for(co, [&](std::size_t o) {
    double* oplane = out.data() + o * ho * wo;
    for (std::size_t oy = 0; oy < ho; ++oy) {
      for (std::size_t ox = 0; ox < wo; ++ox) {
        double acc = b[o];
        for (std::size_t c = 0; c < ci; ++c) {
          const double* xplane = x + c * h * w;
          const double* wplane = wt + (o * ci + c) * kh * kw;
          for (std::size_t ky = 0; ky < kh; ++ky) {
            const std::ptrdiff_t iy =
                static_cast<std::ptrdiff_t>(oy * stride + ky) -
                static_cast<std::ptrdiff_t>(pad);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
            for (std::size_t kx = 0; kx < kw; ++kx) {
              const std::ptrdiff_t ix =
                  static_cast<std::ptrdiff_t>(ox * stride + kx) -
                  static_cast<std::ptrdiff_t>(pad);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
              acc += xplane[iy * w + ix] * wplane[ky * kw + kx];
            }
          }
        }
        oplane[oy * wo + ox] = acc;
      }
    }
  });
  check_finite(out, "conv2d");

  return make_op({co, ho, wo}, std::move(out), {input, weight, bias},
                 [ci, h, w, co, kh, kw, ho, wo, stride, pad](Node& n) {
    Node& px = *n.parents[0];
    Node& pw = *n.parents[1];
    Node& pb = *n.parents[2];
    const double* g = n.grad.data();

    if (pb.requires_grad) {
      pb.ensure_grad();
      for (std::size_t o = 0; o < co; ++o) {
        double s = 0.0;
        const double* gplane = g + o * ho * wo;
        for (std::size_t i = 0; i < ho * wo; ++i) s += gplane[i];
        pb.grad[o] += s;
      }
    }
    if (pw.requires_grad) {
      pw.ensure_grad();
      parallel_for(co, [&](std::size_t o) {
        const double* gplane = g + o * ho * wo;
        for (std::size_t c = 0; c < ci; ++c) {
          const double* xplane = px.value.data() + c * h * w;
          double* wgrad = pw.grad.data() + (o * ci + c) * kh * kw;
          for (std::size_t ky = 0; ky < kh; ++ky) {
            for (std::size_t kx = 0; kx < kw; ++kx) {
              double s = 0.0;
              for (std::size_t oy = 0; oy < ho; ++oy) {
                const std::ptrdiff_t iy =
                    static_cast<std::ptrdiff_t>(oy * stride + ky) -
                    static_cast<std::ptrdiff_t>(pad);
                if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                for (std::size_t ox = 0; ox < wo; ++ox) {
                  const std::ptrdiff_t ix =
                      static_cast<std::ptrdiff_t>(ox * stride + kx) -
                      static_cast<std::ptrdiff_t>(pad);
                  if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                  s += gplane[oy * wo + ox] * xplane[iy * w + ix];
                }
              }
              wgrad[ky * kw + kx] += s;
            }
          }
        }
      });
    }
    if (px.requires_grad) {
      px.ensure_grad();
      parallel_for(ci, [&](std::size_t c) {
        double* xgrad = px.grad.data() + c * h * w;
        for (std::size_t o = 0; o < co; ++o) {
          const double* gplane = g + o * ho * wo;
          const double* wplane = pw.value.data() + (o * ci + c) * kh * kw;
          for (std::size_t oy = 0; oy < ho; ++oy) {
            for (std::size_t ox = 0; ox < wo; ++ox) {
              const double gv = gplane[oy * wo + ox];
              if (gv == 0.0) continue;
              for (std::size_t ky = 0; ky < kh; ++ky) {
                const std::ptrdiff_t iy =
                    static_cast<std::ptrdiff_t>(oy * stride + ky) -
                    static_cast<std::ptrdiff_t>(pad);
                if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                for (std::size_t kx = 0; kx < kw; ++kx) {
                  const std::ptrdiff_t ix =
                      static_cast<std::ptrdiff_t>(ox * stride + kx) -
                      static_cast<std::ptrdiff_t>(pad);
                  if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                  xgrad[iy * w + ix] += gv * wplane[ky * kw + kx];
                }
              }
            }
          }
        }
      });
    }
  });
}

// ---- backward -------------------------------------------------------------

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw InvalidInputError("backward: loss must be a scalar tensor");
  }
  Node* root = loss.node().get();
  if (!root->requires_grad) return;  // nothing reachable

  // Iterative post-order DFS for a topological order.
  std::vector<Node*> topo;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root, 0);
  visited.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      topo.push_back(node);
      stack.pop_back();
    }
  }

  root->ensure_grad();
  root->grad[0] += 1.0;
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    Node* node = *it;
    if (node->backprop) {
      node->ensure_grad();
      node->backprop(*node);
    }
  }
}

// ---- parameters -----------------------------------------------------------

Tensor ParameterStore::create(const std::string& name, Shape shape,
                              std::vector<double> init) {
  if (contains(name)) {
    throw InvalidInputError("parameter already registered: " + name);
  }
  Tensor t = Tensor::variable(std::move(shape), std::move(init));
  params_.push_back({name, t});
  return t;
}

Tensor ParameterStore::get(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p.value;
  }
  throw InvalidInputError("unknown parameter: " + name);
}

bool ParameterStore::contains(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return true;
  }
  return false;
}

std::size_t ParameterStore::total_size() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.numel();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p.value.zero_grad();
}

std::vector<double> kaiming_uniform(std::size_t count, std::size_t fan_in,
                                    std::uint64_t seed) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  Rng rng(seed);
  std::vector<double> v(count);
  for (double& x : v) x = rng.uniform(-bound, bound);
  return v;
}

std::vector<double> bias_uniform(std::size_t count, std::size_t fan_in,
                                 std::uint64_t seed) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Rng rng(seed);
  std::vector<double> v(count);
  for (double& x : v) x = rng.uniform(-bound, bound);
  return v;
}

}  // namespace fusionloc::ad
