#include "mmrisk/tensor.hpp"

#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace mmrisk {

namespace {

std::string shape_str(const std::vector<int>& s) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) os << "x";
    os << s[i];
  }
  os << ")";
  return os.str();
}

[[noreturn]] void shape_error(const std::string& op, const std::vector<int>& a,
                              const std::vector<int>& b) {
  throw std::invalid_argument(op + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
}

[[noreturn]] void shape_error(const std::string& op, const std::vector<int>& a,
                              const std::string& why) {
  throw std::invalid_argument(op + ": " + why + ", got " + shape_str(a));
}

size_t numel_of(const std::vector<int>& shape) {
  size_t n = 1;
  for (int d : shape) n *= static_cast<size_t>(d);
  return n;
}

using Node = Tensor::Node;
using NodePtr = std::shared_ptr<Node>;

NodePtr make_node(std::vector<int> shape, std::string op,
                  std::vector<NodePtr> parents) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value.assign(numel_of(n->shape), 0.0);
  n->op = std::move(op);
  n->parents = std::move(parents);
  for (const auto& p : n->parents) {
    if (p->requires_grad) n->requires_grad = true;
  }
  return n;
}

bool rowwise_broadcast(const std::vector<int>& big, const std::vector<int>& small) {
  // (n x d) with (d) or (1 x d)
  if (big.size() != 2) return false;
  if (small.size() == 1) return small[0] == big[1];
  if (small.size() == 2) return small[0] == 1 && small[1] == big[1];
  return false;
}

}  // namespace

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("tensor: non-positive dimension in " + shape_str(shape));
  }
  if (shape.empty() || shape.size() > 2) {
    throw std::invalid_argument("tensor: rank must be 1 or 2, got " + shape_str(shape));
  }
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value.assign(numel_of(n->shape), 0.0);
  n->requires_grad = requires_grad;
  return Tensor(std::move(n));
}

Tensor Tensor::from(std::vector<int> shape, std::vector<double> data, bool requires_grad) {
  Tensor t = zeros(shape, requires_grad);
  if (data.size() != t.size()) {
    throw std::invalid_argument("tensor: data length " + std::to_string(data.size()) +
                                " does not match shape " + shape_str(shape));
  }
  t.node()->value = std::move(data);
  return t;
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return from({1}, {v}, requires_grad);
}

const std::vector<double>& Tensor::grad() const {
  node_->ensure_grad();
  return node_->grad;
}

double Tensor::item() const {
  if (size() != 1) {
    throw std::invalid_argument("item: expected scalar, got " + shape_str(node_->shape));
  }
  return node_->value[0];
}

// --- op implementations --------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[0]) {
    shape_error("matmul", a.shape(), b.shape());
  }
  const int n = a.shape()[0], k = a.shape()[1], m = b.shape()[1];
  auto out = make_node({n, m}, "matmul", {a.node(), b.node()});
  const double* av = a.values().data();
  const double* bv = b.values().data();
  double* ov = out->value.data();
  for (int i = 0; i < n; ++i) {
    for (int kk = 0; kk < k; ++kk) {
      const double aik = av[i * k + kk];
      if (aik == 0.0) continue;
      const double* brow = bv + kk * m;
      double* orow = ov + i * m;
      for (int j = 0; j < m; ++j) orow[j] += aik * brow[j];
    }
  }
  out->backprop = [n, k, m](Node& self) {
    Node& A = *self.parents[0];
    Node& B = *self.parents[1];
    const double* g = self.grad.data();
    if (A.requires_grad) {
      A.ensure_grad();
      // dA = g . B^T
      for (int i = 0; i < n; ++i) {
        for (int kk = 0; kk < k; ++kk) {
          double acc = 0.0;
          const double* grow = g + i * m;
          const double* brow = B.value.data() + kk * m;
          for (int j = 0; j < m; ++j) acc += grow[j] * brow[j];
          A.grad[i * k + kk] += acc;
        }
      }
    }
    if (B.requires_grad) {
      B.ensure_grad();
      // dB = A^T . g
      for (int i = 0; i < n; ++i) {
        const double* arow = A.value.data() + i * k;
        const double* grow = g + i * m;
        for (int kk = 0; kk < k; ++kk) {
          const double aik = arow[kk];
          if (aik == 0.0) continue;
          double* brow = B.grad.data() + kk * m;
          for (int j = 0; j < m; ++j) brow[j] += aik * grow[j];
        }
      }
    }
  };
  return Tensor(out);
}

Tensor transpose(const Tensor& a) {
  if (a.rank() != 2) shape_error("transpose", a.shape(), "expected rank 2");
  const int n = a.shape()[0], m = a.shape()[1];
  auto out = make_node({m, n}, "transpose", {a.node()});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) out->value[j * n + i] = a.values()[i * m + j];
  out->backprop = [n, m](Node& self) {
    Node& A = *self.parents[0];
    if (!A.requires_grad) return;
    A.ensure_grad();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) A.grad[i * m + j] += self.grad[j * n + i];
  };
  return Tensor(out);
}

namespace {

// Shared core of add/mul: equal shapes or row-broadcast of the second arg.
enum class EwKind { Add, Mul };

Tensor elementwise(const Tensor& a, const Tensor& b, EwKind kind) {
  const char* name = kind == EwKind::Add ? "add" : "mul";
  const bool same = a.shape() == b.shape();
  const bool bcast = !same && rowwise_broadcast(a.shape(), b.shape());
  if (!same && !bcast) shape_error(name, a.shape(), b.shape());

  auto out = make_node(a.shape(), name, {a.node(), b.node()});
  const size_t total = out->numel();
  const size_t bn = b.size();
  const double* av = a.values().data();
  const double* bv = b.values().data();
  for (size_t i = 0; i < total; ++i) {
    const double bi = bv[same ? i : i % bn];
    out->value[i] = kind == EwKind::Add ? av[i] + bi : av[i] * bi;
  }
  out->backprop = [kind, same, bn, total](Node& self) {
    Node& A = *self.parents[0];
    Node& B = *self.parents[1];
    if (A.requires_grad) {
      A.ensure_grad();
      for (size_t i = 0; i < total; ++i) {
        const double g = self.grad[i];
        A.grad[i] += kind == EwKind::Add ? g : g * B.value[same ? i : i % bn];
      }
    }
    if (B.requires_grad) {
      B.ensure_grad();
      for (size_t i = 0; i < total; ++i) {
        const double g = self.grad[i];
        B.grad[same ? i : i % bn] += kind == EwKind::Add ? g : g * A.value[i];
      }
    }
  };
  return Tensor(out);
}

Tensor unary(const Tensor& a, const char* name, double (*fwd)(double),
             double (*dfd)(double /*x*/, double /*y*/)) {
  auto out = make_node(a.shape(), name, {a.node()});
  for (size_t i = 0; i < out->numel(); ++i) out->value[i] = fwd(a.values()[i]);
  out->backprop = [dfd](Node& self) {
    Node& A = *self.parents[0];
    if (!A.requires_grad) return;
    A.ensure_grad();
    for (size_t i = 0; i < self.numel(); ++i) {
      A.grad[i] += self.grad[i] * dfd(A.value[i], self.value[i]);
    }
  };
  return Tensor(out);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return elementwise(a, b, EwKind::Add); }
Tensor mul(const Tensor& a, const Tensor& b) { return elementwise(a, b, EwKind::Mul); }

Tensor scale(const Tensor& a, double s) {
  auto out = make_node(a.shape(), "scale", {a.node()});
  for (size_t i = 0; i < out->numel(); ++i) out->value[i] = a.values()[i] * s;
  out->backprop = [s](Node& self) {
    Node& A = *self.parents[0];
    if (!A.requires_grad) return;
    A.ensure_grad();
    for (size_t i = 0; i < self.numel(); ++i) A.grad[i] += self.grad[i] * s;
  };
  return Tensor(out);
}

double sigmoid_scalar(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus_scalar(double x) {
  // log(1 + e^x), stable on both tails
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

Tensor relu(const Tensor& a) {
  return unary(
      a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a, "sigmoid", [](double x) { return sigmoid_scalar(x); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor softmax_rows(const Tensor& a) {
  const int r = a.rows(), c = a.cols();
  auto out = make_node(a.shape(), "softmax_rows", {a.node()});
  for (int i = 0; i < r; ++i) {
    const double* x = a.values().data() + static_cast<size_t>(i) * c;
    double* y = out->value.data() + static_cast<size_t>(i) * c;
    double mx = x[0];
    for (int j = 1; j < c; ++j) mx = std::max(mx, x[j]);
    double z = 0.0;
    for (int j = 0; j < c; ++j) {
      y[j] = std::exp(x[j] - mx);
      z += y[j];
    }
    for (int j = 0; j < c; ++j) y[j] /= z;
  }
  out->backprop = [r, c](Node& self) {
    Node& A = *self.parents[0];
    if (!A.requires_grad) return;
    A.ensure_grad();
    for (int i = 0; i < r; ++i) {
      const double* y = self.value.data() + static_cast<size_t>(i) * c;
      const double* g = self.grad.data() + static_cast<size_t>(i) * c;
      double dot = 0.0;
      for (int j = 0; j < c; ++j) dot += y[j] * g[j];
      double* da = A.grad.data() + static_cast<size_t>(i) * c;
      for (int j = 0; j < c; ++j) da[j] += y[j] * (g[j] - dot);
    }
  };
  return Tensor(out);
}

Tensor layer_norm_rows(const Tensor& a) {
  constexpr double kEps = 1e-5;
  const int r = a.rows(), c = a.cols();
  auto out = make_node(a.shape(), "layer_norm", {a.node()});
  // inv std per row is needed again in backprop; recomputed there from the
  // stored normalized values to keep the node payload minimal.
  for (int i = 0; i < r; ++i) {
    const double* x = a.values().data() + static_cast<size_t>(i) * c;
    double* y = out->value.data() + static_cast<size_t>(i) * c;
    double mean = 0.0;
    for (int j = 0; j < c; ++j) mean += x[j];
    mean /= c;
    double var = 0.0;
    for (int j = 0; j < c; ++j) var += (x[j] - mean) * (x[j] - mean);
    var /= c;
    const double inv = 1.0 / std::sqrt(var + kEps);
    for (int j = 0; j < c; ++j) y[j] = (x[j] - mean) * inv;
  }
  out->backprop = [r, c](Node& self) {
    Node& A = *self.parents[0];
    if (!A.requires_grad) return;
    A.ensure_grad();
    for (int i = 0; i < r; ++i) {
      const double* x = A.value.data() + static_cast<size_t>(i) * c;
      const double* y = self.value.data() + static_cast<size_t>(i) * c;
      const double* g = self.grad.data() + static_cast<size_t>(i) * c;
      double mean = 0.0;
      for (int j = 0; j < c; ++j) mean += x[j];
      mean /= c;
      double var = 0.0;
      for (int j = 0; j < c; ++j) var += (x[j] - mean) * (x[j] - mean);
      var /= c;
      const double inv = 1.0 / std::sqrt(var + kEps);
      double gmean = 0.0, gydot = 0.0;
      for (int j = 0; j < c; ++j) {
        gmean += g[j];
        gydot += g[j] * y[j];
      }
      gmean /= c;
      gydot /= c;
      double* da = A.grad.data() + static_cast<size_t>(i) * c;
      for (int j = 0; j < c; ++j) da[j] += inv * (g[j] - gmean - y[j] * gydot);
    }
  };
  return Tensor(out);
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: empty input list");
  const int c = parts[0].cols();
  int total_rows = 0;
  std::vector<NodePtr> parents;
  for (const auto& p : parts) {
    if (p.cols() != c) shape_error("concat_rows", parts[0].shape(), p.shape());
    total_rows += p.rows();
    parents.push_back(p.node());
  }
  auto out = make_node({total_rows, c}, "concat_rows", std::move(parents));
  size_t off = 0;
  for (const auto& p : parts) {
    const auto& v = p.values();
    std::copy(v.begin(), v.end(), out->value.begin() + off);
    off += v.size();
  }
  out->backprop = [](Node& self) {
    size_t off = 0;
    for (auto& p : self.parents) {
      const size_t n = p->numel();
      if (p->requires_grad) {
        p->ensure_grad();
        for (size_t i = 0; i < n; ++i) p->grad[i] += self.grad[off + i];
      }
      off += n;
    }
  };
  return Tensor(out);
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: empty input list");
  const bool vectors = parts[0].rank() == 1;
  const int r = parts[0].rows();
  int total_cols = 0;
  std::vector<NodePtr> parents;
  std::vector<int> widths;
  for (const auto& p : parts) {
    if (p.rows() != r || (p.rank() == 1) != vectors) {
      shape_error("concat_cols", parts[0].shape(), p.shape());
    }
    widths.push_back(p.cols());
    total_cols += p.cols();
    parents.push_back(p.node());
  }
  std::vector<int> oshape = vectors ? std::vector<int>{total_cols}
                                    : std::vector<int>{r, total_cols};
  auto out = make_node(std::move(oshape), "concat_cols", std::move(parents));
  int coff = 0;
  for (size_t pi = 0; pi < widths.size(); ++pi) {
    const double* src = out->parents[pi]->value.data();
    const int w = widths[pi];
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < w; ++j)
        out->value[static_cast<size_t>(i) * total_cols + coff + j] = src[static_cast<size_t>(i) * w + j];
    coff += w;
  }
  out->backprop = [r, total_cols, widths](Node& self) {
    int coff = 0;
    for (size_t pi = 0; pi < widths.size(); ++pi) {
      Node& p = *self.parents[pi];
      const int w = widths[pi];
      if (p.requires_grad) {
        p.ensure_grad();
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < w; ++j)
            p.grad[static_cast<size_t>(i) * w + j] +=
                self.grad[static_cast<size_t>(i) * total_cols + coff + j];
      }
      coff += w;
    }
  };
  return Tensor(out);
}

namespace {

Tensor slice_impl(const Tensor& a, int start, int len, bool rows) {
  const char* name = rows ? "slice_rows" : "slice_cols";
  const int limit = rows ? a.rows() : a.cols();
  if (start < 0 || len <= 0 || start + len > limit) {
    throw std::invalid_argument(std::string(name) + ": range [" + std::to_string(start) + ", " +
                                std::to_string(start + len) + ") out of bounds for " +
                                shape_str(a.shape()));
  }
  const int r = a.rows(), c = a.cols();
  std::vector<int> oshape = rows ? std::vector<int>{len, c} : std::vector<int>{r, len};
  auto out = make_node(std::move(oshape), name, {a.node()});
  if (rows) {
    std::copy(a.values().begin() + static_cast<size_t>(start) * c,
              a.values().begin() + static_cast<size_t>(start + len) * c, out->value.begin());
  } else {
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < len; ++j)
        out->value[static_cast<size_t>(i) * len + j] = a.values()[static_cast<size_t>(i) * c + start + j];
  }
  out->backprop = [start, len, r, c, rows](Node& self) {
    Node& A = *self.parents[0];
    if (!A.requires_grad) return;
    A.ensure_grad();
    if (rows) {
      for (size_t i = 0; i < self.numel(); ++i)
        A.grad[static_cast<size_t>(start) * c + i] += self.grad[i];
    } else {
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < len; ++j)
          A.grad[static_cast<size_t>(i) * c + start + j] += self.grad[static_cast<size_t>(i) * len + j];
    }
  };
  return Tensor(out);
}

}  // namespace

Tensor slice_rows(const Tensor& a, int start, int len) { return slice_impl(a, start, len, true); }
Tensor slice_cols(const Tensor& a, int start, int len) { return slice_impl(a, start, len, false); }

Tensor repeat_rows(const Tensor& a, int n) {
  if (a.rows() != 1) shape_error("repeat_rows", a.shape(), "expected a single row");
  if (n <= 0) throw std::invalid_argument("repeat_rows: n must be positive");
  const int c = a.cols();
  auto out = make_node({n, c}, "repeat_rows", {a.node()});
  for (int i = 0; i < n; ++i)
    std::copy(a.values().begin(), a.values().end(), out->value.begin() + static_cast<size_t>(i) * c);
  out->backprop = [n, c](Node& self) {
    Node& A = *self.parents[0];
    if (!A.requires_grad) return;
    A.ensure_grad();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < c; ++j) A.grad[j] += self.grad[static_cast<size_t>(i) * c + j];
  };
  return Tensor(out);
}

namespace {

Tensor reduce_all(const Tensor& a, bool mean) {
  auto out = make_node({1}, mean ? "mean" : "sum", {a.node()});
  double acc = 0.0;
  for (double v : a.values()) acc += v;
  const double w = mean ? 1.0 / static_cast<double>(a.size()) : 1.0;
  out->value[0] = acc * w;
  out->backprop = [w](Node& self) {
    Node& A = *self.parents[0];
    if (!A.requires_grad) return;
    A.ensure_grad();
    const double g = self.grad[0] * w;
    for (size_t i = 0; i < A.numel(); ++i) A.grad[i] += g;
  };
  return Tensor(out);
}

}  // namespace

Tensor mean_all(const Tensor& a) { return reduce_all(a, true); }
Tensor sum_all(const Tensor& a) { return reduce_all(a, false); }

Tensor cumsum_last(const Tensor& a) {
  const int r = a.rows(), c = a.cols();
  auto out = make_node(a.shape(), "cumsum_last", {a.node()});
  for (int i = 0; i < r; ++i) {
    double acc = 0.0;
    for (int j = 0; j < c; ++j) {
      acc += a.values()[static_cast<size_t>(i) * c + j];
      out->value[static_cast<size_t>(i) * c + j] = acc;
    }
  }
  out->backprop = [r, c](Node& self) {
    Node& A = *self.parents[0];
    if (!A.requires_grad) return;
    A.ensure_grad();
    for (int i = 0; i < r; ++i) {
      double acc = 0.0;
      for (int j = c - 1; j >= 0; --j) {
        acc += self.grad[static_cast<size_t>(i) * c + j];
        A.grad[static_cast<size_t>(i) * c + j] += acc;
      }
    }
  };
  return Tensor(out);
}

Tensor embedding_lookup(const Tensor& table, const std::vector<int>& indices) {
  if (table.rank() != 2) shape_error("embedding_lookup", table.shape(), "expected rank-2 table");
  const int v = table.shape()[0], d = table.shape()[1];
  for (int idx : indices) {
    if (idx < 0 || idx >= v) {
      throw std::invalid_argument("embedding_lookup: index " + std::to_string(idx) +
                                  " out of range for table " + shape_str(table.shape()));
    }
  }
  const int n = static_cast<int>(indices.size());
  if (n == 0) throw std::invalid_argument("embedding_lookup: empty index list");
  auto out = make_node({n, d}, "embedding_lookup", {table.node()});
  for (int i = 0; i < n; ++i)
    std::copy(table.values().begin() + static_cast<size_t>(indices[i]) * d,
              table.values().begin() + static_cast<size_t>(indices[i] + 1) * d,
              out->value.begin() + static_cast<size_t>(i) * d);
  out->backprop = [indices, d](Node& self) {
    Node& T = *self.parents[0];
    if (!T.requires_grad) return;
    T.ensure_grad();
    for (size_t i = 0; i < indices.size(); ++i)
      for (int j = 0; j < d; ++j)
        T.grad[static_cast<size_t>(indices[i]) * d + j] += self.grad[i * d + j];
  };
  return Tensor(out);
}

Tensor masked_bce_with_logits(const Tensor& logits, const std::array<int, 6>& targets,
                              const std::array<int, 6>& mask) {
  if (logits.size() != 6) {
    throw std::invalid_argument("masked_bce: expected 6 logits, got " + shape_str(logits.shape()));
  }
  int m_count = 0;
  for (int m : mask) m_count += m != 0;
  if (m_count == 0) throw std::invalid_argument("masked_bce: fully censored example");

  auto out = make_node({1}, "masked_bce", {logits.node()});
  double loss = 0.0;
  for (int j = 0; j < 6; ++j) {
    if (!mask[j]) continue;
    const double s = logits.values()[j];
    loss += targets[j] ? softplus_scalar(-s) : softplus_scalar(s);
  }
  out->value[0] = loss / m_count;
  out->backprop = [targets, mask, m_count](Node& self) {
    Node& L = *self.parents[0];
    if (!L.requires_grad) return;
    L.ensure_grad();
    const double g = self.grad[0] / m_count;
    for (int j = 0; j < 6; ++j) {
      if (!mask[j]) continue;
      L.grad[j] += g * (sigmoid_scalar(L.value[j]) - targets[j]);
    }
  };
  return Tensor(out);
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw std::invalid_argument("backward: loss must be a defined scalar tensor");
  }
  // Iterative DFS postorder gives a topological order; replayed in reverse.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  // Interior grads are scratch for this call; only leaves accumulate
  // across calls (that is what makes repeated backward additive).
  for (Node* n : order) {
    if (!n->parents.empty() && !n->grad.empty()) n->grad.assign(n->value.size(), 0.0);
  }
  loss.node()->ensure_grad();
  loss.node()->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backprop && n->requires_grad) {
      n->ensure_grad();
      n->backprop(*n);
    }
  }
}

}  // namespace mmrisk
