#include "rxnshingle/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "rxnshingle/error.hpp"

namespace rxnshingle {
namespace {

thread_local Precision g_precision = Precision::F64;

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

void check_finite(const Node& n) {
  for (double v : n.value)
    if (!std::isfinite(v))
      fail(ErrorKind::NonFiniteValue, "tensor op produced a non-finite value");
}

Value make_node(int rows, int cols) {
  if (rows <= 0 || cols <= 0)
    fail(ErrorKind::ShapeMismatch, "tensor dimensions must be positive");
  auto n = std::make_shared<Node>();
  n->rows = rows;
  n->cols = cols;
  n->value.assign(static_cast<size_t>(rows) * cols, 0.0);
  return n;
}

// Finalize an op node: round stored values in F32 mode, validate finiteness,
// and attach the tape entry only when some parent actually needs gradients.
Value finish(Value out, std::vector<Value> parents,
             std::function<void(Node&)> backprop) {
  if (g_precision == Precision::F32)
    for (double& v : out->value) v = static_cast<double>(static_cast<float>(v));
  check_finite(*out);
  bool needs = false;
  for (const auto& p : parents)
    if (p->requires_grad) needs = true;
  if (needs) {
    out->requires_grad = true;
    out->parents = std::move(parents);
    out->backprop = std::move(backprop);
  }
  return out;
}

void require_same_shape(const Value& a, const Value& b, const char* what) {
  if (a->rows != b->rows || a->cols != b->cols)
    fail(ErrorKind::ShapeMismatch, what);
}

}  // namespace

Precision precision() { return g_precision; }
void set_precision(Precision p) { g_precision = p; }
double round_precision(double v) {
  return g_precision == Precision::F32
             ? static_cast<double>(static_cast<float>(v))
             : v;
}

Value constant(int rows, int cols, std::vector<double> data) {
  auto n = make_node(rows, cols);
  if (data.size() != n->size())
    fail(ErrorKind::ShapeMismatch, "constant: data length != rows*cols");
  n->value = std::move(data);
  if (g_precision == Precision::F32)
    for (double& v : n->value) v = static_cast<double>(static_cast<float>(v));
  check_finite(*n);
  return n;
}

Value param(int rows, int cols, std::vector<double> data) {
  auto n = constant(rows, cols, std::move(data));
  n->requires_grad = true;
  return n;
}

Value zeros(int rows, int cols) {
  return constant(rows, cols, std::vector<double>(static_cast<size_t>(rows) * cols, 0.0));
}

Value add(const Value& a, const Value& b) {
  require_same_shape(a, b, "add: shape mismatch");
  auto out = make_node(a->rows, a->cols);
  for (size_t i = 0; i < out->size(); ++i) out->value[i] = a->value[i] + b->value[i];
  return finish(out, {a, b}, [pa = a.get(), pb = b.get()](Node& self) {
    for (size_t i = 0; i < self.size(); ++i) {
      pa->grad[i] += self.grad[i];
      pb->grad[i] += self.grad[i];
    }
  });
}

Value sub(const Value& a, const Value& b) {
  require_same_shape(a, b, "sub: shape mismatch");
  auto out = make_node(a->rows, a->cols);
  for (size_t i = 0; i < out->size(); ++i) out->value[i] = a->value[i] - b->value[i];
  return finish(out, {a, b}, [pa = a.get(), pb = b.get()](Node& self) {
    for (size_t i = 0; i < self.size(); ++i) {
      pa->grad[i] += self.grad[i];
      pb->grad[i] -= self.grad[i];
    }
  });
}

Value mul(const Value& a, const Value& b) {
  require_same_shape(a, b, "mul: shape mismatch");
  auto out = make_node(a->rows, a->cols);
  for (size_t i = 0; i < out->size(); ++i) out->value[i] = a->value[i] * b->value[i];
  return finish(out, {a, b}, [pa = a.get(), pb = b.get()](Node& self) {
    for (size_t i = 0; i < self.size(); ++i) {
      pa->grad[i] += self.grad[i] * pb->value[i];
      pb->grad[i] += self.grad[i] * pa->value[i];
    }
  });
}

Value scale(const Value& a, double c) {
  auto out = make_node(a->rows, a->cols);
  for (size_t i = 0; i < out->size(); ++i) out->value[i] = a->value[i] * c;
  return finish(out, {a}, [pa = a.get(), c](Node& self) {
    for (size_t i = 0; i < self.size(); ++i) pa->grad[i] += self.grad[i] * c;
  });
}

Value add_const(const Value& a, double c) {
  auto out = make_node(a->rows, a->cols);
  for (size_t i = 0; i < out->size(); ++i) out->value[i] = a->value[i] + c;
  return finish(out, {a}, [pa = a.get()](Node& self) {
    for (size_t i = 0; i < self.size(); ++i) pa->grad[i] += self.grad[i];
  });
}

Value add_rowvec(const Value& m, const Value& row) {
  if (row->rows != 1 || row->cols != m->cols)
    fail(ErrorKind::ShapeMismatch, "add_rowvec: row must be 1 x cols");
  auto out = make_node(m->rows, m->cols);
  for (int r = 0; r < m->rows; ++r)
    for (int c = 0; c < m->cols; ++c)
      out->value[static_cast<size_t>(r) * m->cols + c] =
          m->at(r, c) + row->value[static_cast<size_t>(c)];
  return finish(out, {m, row}, [pm = m.get(), pr = row.get()](Node& self) {
    for (int r = 0; r < self.rows; ++r)
      for (int c = 0; c < self.cols; ++c) {
        const double g = self.grad[static_cast<size_t>(r) * self.cols + c];
        pm->grad[static_cast<size_t>(r) * self.cols + c] += g;
        pr->grad[static_cast<size_t>(c)] += g;
      }
  });
}

Value sub_rowvec(const Value& m, const Value& row) {
  if (row->rows != 1 || row->cols != m->cols)
    fail(ErrorKind::ShapeMismatch, "sub_rowvec: row must be 1 x cols");
  auto out = make_node(m->rows, m->cols);
  for (int r = 0; r < m->rows; ++r)
    for (int c = 0; c < m->cols; ++c)
      out->value[static_cast<size_t>(r) * m->cols + c] =
          m->at(r, c) - row->value[static_cast<size_t>(c)];
  return finish(out, {m, row}, [pm = m.get(), pr = row.get()](Node& self) {
    for (int r = 0; r < self.rows; ++r)
      for (int c = 0; c < self.cols; ++c) {
        const double g = self.grad[static_cast<size_t>(r) * self.cols + c];
        pm->grad[static_cast<size_t>(r) * self.cols + c] += g;
        pr->grad[static_cast<size_t>(c)] -= g;
      }
  });
}

Value mul_rowvec(const Value& m, const Value& row) {
  if (row->rows != 1 || row->cols != m->cols)
    fail(ErrorKind::ShapeMismatch, "mul_rowvec: row must be 1 x cols");
  auto out = make_node(m->rows, m->cols);
  for (int r = 0; r < m->rows; ++r)
    for (int c = 0; c < m->cols; ++c)
      out->value[static_cast<size_t>(r) * m->cols + c] =
          m->at(r, c) * row->value[static_cast<size_t>(c)];
  return finish(out, {m, row}, [pm = m.get(), pr = row.get()](Node& self) {
    for (int r = 0; r < self.rows; ++r)
      for (int c = 0; c < self.cols; ++c) {
        const double g = self.grad[static_cast<size_t>(r) * self.cols + c];
        pm->grad[static_cast<size_t>(r) * self.cols + c] +=
            g * pr->value[static_cast<size_t>(c)];
        pr->grad[static_cast<size_t>(c)] +=
            g * pm->value[static_cast<size_t>(r) * self.cols + c];
      }
  });
}

Value mul_colvec(const Value& m, const Value& col) {
  if (col->cols != 1 || col->rows != m->rows)
    fail(ErrorKind::ShapeMismatch, "mul_colvec: col must be rows x 1");
  auto out = make_node(m->rows, m->cols);
  for (int r = 0; r < m->rows; ++r)
    for (int c = 0; c < m->cols; ++c)
      out->value[static_cast<size_t>(r) * m->cols + c] =
          m->at(r, c) * col->value[static_cast<size_t>(r)];
  return finish(out, {m, col}, [pm = m.get(), pc = col.get()](Node& self) {
    for (int r = 0; r < self.rows; ++r) {
      double acc = 0.0;
      for (int c = 0; c < self.cols; ++c) {
        const double g = self.grad[static_cast<size_t>(r) * self.cols + c];
        pm->grad[static_cast<size_t>(r) * self.cols + c] +=
            g * pc->value[static_cast<size_t>(r)];
        acc += g * pm->value[static_cast<size_t>(r) * self.cols + c];
      }
      pc->grad[static_cast<size_t>(r)] += acc;
    }
  });
}

Value reciprocal(const Value& a) {
  auto out = make_node(a->rows, a->cols);
  for (size_t i = 0; i < out->size(); ++i) out->value[i] = 1.0 / a->value[i];
  return finish(out, {a}, [pa = a.get()](Node& self) {
    for (size_t i = 0; i < self.size(); ++i)
      pa->grad[i] -= self.grad[i] * self.value[i] * self.value[i];
  });
}

Value clamp_min(const Value& a, double floor) {
  auto out = make_node(a->rows, a->cols);
  for (size_t i = 0; i < out->size(); ++i)
    out->value[i] = std::max(a->value[i], floor);
  return finish(out, {a}, [pa = a.get(), floor](Node& self) {
    for (size_t i = 0; i < self.size(); ++i)
      if (pa->value[i] > floor) pa->grad[i] += self.grad[i];
  });
}

Value exp_op(const Value& a) {
  auto out = make_node(a->rows, a->cols);
  for (size_t i = 0; i < out->size(); ++i) out->value[i] = std::exp(a->value[i]);
  return finish(out, {a}, [pa = a.get()](Node& self) {
    for (size_t i = 0; i < self.size(); ++i)
      pa->grad[i] += self.grad[i] * self.value[i];
  });
}

Value square(const Value& a) {
  auto out = make_node(a->rows, a->cols);
  for (size_t i = 0; i < out->size(); ++i)
    out->value[i] = a->value[i] * a->value[i];
  return finish(out, {a}, [pa = a.get()](Node& self) {
    for (size_t i = 0; i < self.size(); ++i)
      pa->grad[i] += self.grad[i] * 2.0 * pa->value[i];
  });
}

Value gelu(const Value& a) {
  auto out = make_node(a->rows, a->cols);
  for (size_t i = 0; i < out->size(); ++i) {
    const double x = a->value[i];
    out->value[i] = x * 0.5 * (1.0 + std::erf(x * kInvSqrt2));
  }
  return finish(out, {a}, [pa = a.get()](Node& self) {
    for (size_t i = 0; i < self.size(); ++i) {
      const double x = pa->value[i];
      const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
      const double pdf = std::exp(-0.5 * x * x) * kInvSqrt2Pi;
      pa->grad[i] += self.grad[i] * (cdf + x * pdf);
    }
  });
}

Value matmul(const Value& a, const Value& b) {
  if (a->cols != b->rows) fail(ErrorKind::ShapeMismatch, "matmul: inner dims differ");
  auto out = make_node(a->rows, b->cols);
  const int n = a->rows, k = a->cols, m = b->cols;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      double acc = 0.0;
      for (int t = 0; t < k; ++t) acc += a->at(i, t) * b->at(t, j);
      out->value[static_cast<size_t>(i) * m + j] = acc;
    }
  return finish(out, {a, b}, [pa = a.get(), pb = b.get(), n, k, m](Node& self) {
    for (int i = 0; i < n; ++i)
      for (int t = 0; t < k; ++t) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j)
          acc += self.grad[static_cast<size_t>(i) * m + j] *
                 pb->value[static_cast<size_t>(t) * m + j];
        pa->grad[static_cast<size_t>(i) * k + t] += acc;
      }
    for (int t = 0; t < k; ++t)
      for (int j = 0; j < m; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
          acc += pa->value[static_cast<size_t>(i) * k + t] *
                 self.grad[static_cast<size_t>(i) * m + j];
        pb->grad[static_cast<size_t>(t) * m + j] += acc;
      }
  });
}

Value transpose(const Value& a) {
  auto out = make_node(a->cols, a->rows);
  for (int r = 0; r < a->rows; ++r)
    for (int c = 0; c < a->cols; ++c)
      out->value[static_cast<size_t>(c) * a->rows + r] = a->at(r, c);
  return finish(out, {a}, [pa = a.get()](Node& self) {
    for (int r = 0; r < self.rows; ++r)
      for (int c = 0; c < self.cols; ++c)
        pa->grad[static_cast<size_t>(c) * self.rows + r] +=
            self.grad[static_cast<size_t>(r) * self.cols + c];
  });
}

Value concat_rows(const Value& a, const Value& b) {
  if (a->cols != b->cols) fail(ErrorKind::ShapeMismatch, "concat_rows: col mismatch");
  auto out = make_node(a->rows + b->rows, a->cols);
  std::copy(a->value.begin(), a->value.end(), out->value.begin());
  std::copy(b->value.begin(), b->value.end(), out->value.begin() + a->value.size());
  return finish(out, {a, b}, [pa = a.get(), pb = b.get()](Node& self) {
    for (size_t i = 0; i < pa->size(); ++i) pa->grad[i] += self.grad[i];
    for (size_t i = 0; i < pb->size(); ++i)
      pb->grad[i] += self.grad[pa->size() + i];
  });
}

Value concat_cols(const std::vector<Value>& parts) {
  if (parts.empty()) fail(ErrorKind::ShapeMismatch, "concat_cols: empty input");
  int cols = 0;
  for (const auto& p : parts) {
    if (p->rows != parts[0]->rows)
      fail(ErrorKind::ShapeMismatch, "concat_cols: row mismatch");
    cols += p->cols;
  }
  auto out = make_node(parts[0]->rows, cols);
  int off = 0;
  for (const auto& p : parts) {
    for (int r = 0; r < p->rows; ++r)
      for (int c = 0; c < p->cols; ++c)
        out->value[static_cast<size_t>(r) * cols + off + c] = p->at(r, c);
    off += p->cols;
  }
  std::vector<Node*> raw;
  for (const auto& p : parts) raw.push_back(p.get());
  return finish(out, parts, [raw, cols](Node& self) {
    int off = 0;
    for (Node* p : raw) {
      for (int r = 0; r < p->rows; ++r)
        for (int c = 0; c < p->cols; ++c)
          p->grad[static_cast<size_t>(r) * p->cols + c] +=
              self.grad[static_cast<size_t>(r) * cols + off + c];
      off += p->cols;
    }
  });
}

Value slice_row(const Value& a, int row) {
  if (row < 0 || row >= a->rows)
    fail(ErrorKind::IndexOutOfRange, "slice_row: row out of range");
  auto out = make_node(1, a->cols);
  for (int c = 0; c < a->cols; ++c) out->value[static_cast<size_t>(c)] = a->at(row, c);
  return finish(out, {a}, [pa = a.get(), row](Node& self) {
    for (int c = 0; c < self.cols; ++c)
      pa->grad[static_cast<size_t>(row) * self.cols + c] +=
          self.grad[static_cast<size_t>(c)];
  });
}

Value slice_cols(const Value& a, int col0, int col1) {
  if (col0 < 0 || col1 > a->cols || col0 >= col1)
    fail(ErrorKind::IndexOutOfRange, "slice_cols: bad column range");
  auto out = make_node(a->rows, col1 - col0);
  for (int r = 0; r < a->rows; ++r)
    for (int c = col0; c < col1; ++c)
      out->value[static_cast<size_t>(r) * out->cols + (c - col0)] = a->at(r, c);
  return finish(out, {a}, [pa = a.get(), col0](Node& self) {
    for (int r = 0; r < self.rows; ++r)
      for (int c = 0; c < self.cols; ++c)
        pa->grad[static_cast<size_t>(r) * pa->cols + col0 + c] +=
            self.grad[static_cast<size_t>(r) * self.cols + c];
  });
}

Value reshape(const Value& a, int rows, int cols) {
  if (rows < 1 || cols < 1 ||
      static_cast<long long>(rows) * cols != static_cast<long long>(a->rows) * a->cols)
    fail(ErrorKind::ShapeMismatch, "reshape: element count must be preserved");
  auto out = make_node(rows, cols);
  out->value = a->value;  // row-major, so a reshape is just a relabel
  return finish(out, {a}, [pa = a.get()](Node& self) {
    for (size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i];
  });
}

Value pad_zero_row_col(const Value& a) {
  if (a->rows != a->cols)
    fail(ErrorKind::ShapeMismatch, "pad_zero_row_col: input must be square");
  const int n = a->rows;
  auto out = make_node(n + 1, n + 1);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      out->value[static_cast<size_t>(r + 1) * (n + 1) + c + 1] = a->at(r, c);
  return finish(out, {a}, [pa = a.get(), n](Node& self) {
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        pa->grad[static_cast<size_t>(r) * n + c] +=
            self.grad[static_cast<size_t>(r + 1) * (n + 1) + c + 1];
  });
}

Value sum_all(const Value& a) {
  auto out = make_node(1, 1);
  double acc = 0.0;
  for (double v : a->value) acc += v;
  out->value[0] = acc;
  return finish(out, {a}, [pa = a.get()](Node& self) {
    for (size_t i = 0; i < pa->size(); ++i) pa->grad[i] += self.grad[0];
  });
}

Value mean_rows(const Value& a) {
  auto out = make_node(1, a->cols);
  for (int c = 0; c < a->cols; ++c) {
    double acc = 0.0;
    for (int r = 0; r < a->rows; ++r) acc += a->at(r, c);
    out->value[static_cast<size_t>(c)] = acc / a->rows;
  }
  return finish(out, {a}, [pa = a.get()](Node& self) {
    const double inv = 1.0 / pa->rows;
    for (int r = 0; r < pa->rows; ++r)
      for (int c = 0; c < pa->cols; ++c)
        pa->grad[static_cast<size_t>(r) * pa->cols + c] +=
            self.grad[static_cast<size_t>(c)] * inv;
  });
}

Value block_row_sum(const Value& a, int block) {
  if (block <= 0 || a->rows % block != 0)
    fail(ErrorKind::ShapeMismatch, "block_row_sum: rows not divisible by block");
  const int groups = a->rows / block;
  auto out = make_node(groups, a->cols);
  for (int g = 0; g < groups; ++g)
    for (int c = 0; c < a->cols; ++c) {
      double acc = 0.0;
      for (int r = 0; r < block; ++r) acc += a->at(g * block + r, c);
      out->value[static_cast<size_t>(g) * a->cols + c] = acc;
    }
  return finish(out, {a}, [pa = a.get(), block](Node& self) {
    for (int g = 0; g < self.rows; ++g)
      for (int r = 0; r < block; ++r)
        for (int c = 0; c < self.cols; ++c)
          pa->grad[static_cast<size_t>(g * block + r) * self.cols + c] +=
              self.grad[static_cast<size_t>(g) * self.cols + c];
  });
}

Value softmax_lastdim(const Value& a) {
  auto out = make_node(a->rows, a->cols);
  for (int r = 0; r < a->rows; ++r) {
    double mx = a->at(r, 0);
    for (int c = 1; c < a->cols; ++c) mx = std::max(mx, a->at(r, c));
    double sum = 0.0;
    for (int c = 0; c < a->cols; ++c) {
      const double e = std::exp(a->at(r, c) - mx);
      out->value[static_cast<size_t>(r) * a->cols + c] = e;
      sum += e;
    }
    for (int c = 0; c < a->cols; ++c)
      out->value[static_cast<size_t>(r) * a->cols + c] /= sum;
  }
  return finish(out, {a}, [pa = a.get()](Node& self) {
    for (int r = 0; r < self.rows; ++r) {
      double dot = 0.0;
      for (int c = 0; c < self.cols; ++c)
        dot += self.grad[static_cast<size_t>(r) * self.cols + c] *
               self.value[static_cast<size_t>(r) * self.cols + c];
      for (int c = 0; c < self.cols; ++c) {
        const size_t at = static_cast<size_t>(r) * self.cols + c;
        pa->grad[at] += self.value[at] * (self.grad[at] - dot);
      }
    }
  });
}

Value layernorm(const Value& x, const Value& gamma, const Value& beta,
                double eps) {
  if (gamma->rows != 1 || gamma->cols != x->cols || beta->rows != 1 ||
      beta->cols != x->cols)
    fail(ErrorKind::ShapeMismatch, "layernorm: gamma/beta must be 1 x cols");
  const int rows = x->rows, cols = x->cols;
  auto out = make_node(rows, cols);
  // normalized values and inverse stddevs are captured for the backward pass
  auto xhat = std::make_shared<std::vector<double>>(out->size());
  auto inv_std = std::make_shared<std::vector<double>>(static_cast<size_t>(rows));
  for (int r = 0; r < rows; ++r) {
    double mean = 0.0;
    for (int c = 0; c < cols; ++c) mean += x->at(r, c);
    mean /= cols;
    double var = 0.0;
    for (int c = 0; c < cols; ++c) {
      const double d = x->at(r, c) - mean;
      var += d * d;
    }
    var /= cols;
    const double inv = 1.0 / std::sqrt(var + eps);
    (*inv_std)[static_cast<size_t>(r)] = inv;
    for (int c = 0; c < cols; ++c) {
      const double h = (x->at(r, c) - mean) * inv;
      (*xhat)[static_cast<size_t>(r) * cols + c] = h;
      out->value[static_cast<size_t>(r) * cols + c] =
          h * gamma->value[static_cast<size_t>(c)] +
          beta->value[static_cast<size_t>(c)];
    }
  }
  return finish(out, {x, gamma, beta},
                [px = x.get(), pg = gamma.get(), pb = beta.get(), xhat,
                 inv_std](Node& self) {
    const int rows = self.rows, cols = self.cols;
    for (int r = 0; r < rows; ++r) {
      double mean_dh = 0.0, mean_dh_h = 0.0;
      for (int c = 0; c < cols; ++c) {
        const size_t at = static_cast<size_t>(r) * cols + c;
        const double g = self.grad[at];
        const double h = (*xhat)[at];
        pg->grad[static_cast<size_t>(c)] += g * h;
        pb->grad[static_cast<size_t>(c)] += g;
        const double dh = g * pg->value[static_cast<size_t>(c)];
        mean_dh += dh;
        mean_dh_h += dh * h;
      }
      mean_dh /= cols;
      mean_dh_h /= cols;
      const double inv = (*inv_std)[static_cast<size_t>(r)];
      for (int c = 0; c < cols; ++c) {
        const size_t at = static_cast<size_t>(r) * cols + c;
        const double dh = self.grad[at] * pg->value[static_cast<size_t>(c)];
        px->grad[at] += inv * (dh - mean_dh - (*xhat)[at] * mean_dh_h);
      }
    }
  });
}

Value embedding_lookup(const Value& table, const std::vector<int>& indices) {
  if (indices.empty())
    fail(ErrorKind::ShapeMismatch, "embedding_lookup: empty index list");
  for (int idx : indices)
    if (idx < 0 || idx >= table->rows)
      fail(ErrorKind::IndexOutOfRange, "embedding_lookup: index out of range");
  auto out = make_node(static_cast<int>(indices.size()), table->cols);
  for (size_t r = 0; r < indices.size(); ++r)
    for (int c = 0; c < table->cols; ++c)
      out->value[r * table->cols + c] = table->at(indices[r], c);
  return finish(out, {table}, [pt = table.get(), indices](Node& self) {
    for (size_t r = 0; r < indices.size(); ++r)
      for (int c = 0; c < self.cols; ++c)
        pt->grad[static_cast<size_t>(indices[r]) * self.cols + c] +=
            self.grad[r * self.cols + c];
  });
}

Value cross_entropy_logits(const Value& logits, const std::vector<int>& labels) {
  if (static_cast<int>(labels.size()) != logits->rows)
    fail(ErrorKind::LengthMismatch, "cross_entropy_logits: label count != rows");
  for (int l : labels)
    if (l < 0 || l >= logits->cols)
      fail(ErrorKind::LabelOutOfRange, "cross_entropy_logits: label out of range");
  const int rows = logits->rows, cols = logits->cols;
  auto out = make_node(1, 1);
  double total = 0.0;
  for (int r = 0; r < rows; ++r) {
    double mx = logits->at(r, 0);
    for (int c = 1; c < cols; ++c) mx = std::max(mx, logits->at(r, c));
    double sum = 0.0;
    for (int c = 0; c < cols; ++c) sum += std::exp(logits->at(r, c) - mx);
    total += mx + std::log(sum) - logits->at(r, labels[static_cast<size_t>(r)]);
  }
  out->value[0] = total / rows;
  return finish(out, {logits}, [pl = logits.get(), labels](Node& self) {
    const int rows = pl->rows, cols = pl->cols;
    const double g = self.grad[0] / rows;
    for (int r = 0; r < rows; ++r) {
      double mx = pl->at(r, 0);
      for (int c = 1; c < cols; ++c) mx = std::max(mx, pl->at(r, c));
      double sum = 0.0;
      for (int c = 0; c < cols; ++c) sum += std::exp(pl->at(r, c) - mx);
      for (int c = 0; c < cols; ++c) {
        const double p = std::exp(pl->at(r, c) - mx) / sum;
        const double onehot = c == labels[static_cast<size_t>(r)] ? 1.0 : 0.0;
        pl->grad[static_cast<size_t>(r) * cols + c] += g * (p - onehot);
      }
    }
  });
}

void backward(const Value& loss) {
  if (!loss) fail(ErrorKind::InvalidArgument, "backward: null tensor");
  if (loss->rows != 1 || loss->cols != 1)
    fail(ErrorKind::NotScalar, "backward requires a 1x1 loss tensor");
  if (!loss->requires_grad)
    fail(ErrorKind::DetachedTensor,
         "backward: loss is not connected to any parameter");

  // Post-order DFS gives children-before-parents; walking it in reverse
  // propagates every node's full gradient before its own backprop runs.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  struct Frame {
    Node* n;
    size_t next;
  };
  std::vector<Frame> stack{{loss.get(), 0}};
  visited.insert(loss.get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next < f.n->parents.size()) {
      Node* p = f.n->parents[f.next++].get();
      if (visited.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(f.n);
      stack.pop_back();
    }
  }
  for (Node* n : order) n->grad.assign(n->size(), 0.0);
  loss->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backprop) (*it)->backprop(**it);
}

}  // namespace rxnshingle
