#pragma once

#include <functional>
#include <memory>
#include <vector>

namespace rxnshingle {

// Numeric mode. F32 rounds every op output (and parameter updates) through
// float while keeping all accumulations in double, so reductions behave the
// same way in both modes and the permutation-invariance contract holds
// bit-exactly in either.
enum class Precision { F64, F32 };
Precision precision();
void set_precision(Precision p);
double round_precision(double v);

// All tensors are 2-D row-major (vectors are 1 x n, scalars 1 x 1). The graph
// of Node values doubles as the tape: each node keeps shared ownership of its
// parents plus a closure that scatters its gradient back to them.
struct Node {
  int rows = 0;
  int cols = 0;
  std::vector<double> value;
  std::vector<double> grad;  // sized during backward
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backprop;

  size_t size() const { return static_cast<size_t>(rows) * cols; }
  double at(int r, int c) const { return value[static_cast<size_t>(r) * cols + c]; }
  double scalar() const { return value[0]; }
};

using Value = std::shared_ptr<Node>;

Value constant(int rows, int cols, std::vector<double> data);
Value param(int rows, int cols, std::vector<double> data);
Value zeros(int rows, int cols);

// Elementwise and broadcast arithmetic.
Value add(const Value& a, const Value& b);
Value sub(const Value& a, const Value& b);
Value mul(const Value& a, const Value& b);
Value scale(const Value& a, double c);
Value add_const(const Value& a, double c);
Value add_rowvec(const Value& m, const Value& row);  // row is 1 x cols
Value sub_rowvec(const Value& m, const Value& row);
Value mul_rowvec(const Value& m, const Value& row);
Value mul_colvec(const Value& m, const Value& col);  // col is rows x 1
Value reciprocal(const Value& a);
Value clamp_min(const Value& a, double floor);
Value exp_op(const Value& a);
Value square(const Value& a);
Value gelu(const Value& a);  // exact erf form

// Linear algebra and shape plumbing.
Value matmul(const Value& a, const Value& b);
Value transpose(const Value& a);
Value concat_rows(const Value& a, const Value& b);
Value concat_cols(const std::vector<Value>& parts);
Value slice_row(const Value& a, int row);
Value slice_cols(const Value& a, int col0, int col1);  // half-open
Value reshape(const Value& a, int rows, int cols);     // same element count
Value pad_zero_row_col(const Value& a);  // n x n -> (n+1) x (n+1)

// Reductions and structured ops.
Value sum_all(const Value& a);
Value mean_rows(const Value& a);                 // n x m -> 1 x m
Value block_row_sum(const Value& a, int block);  // sums consecutive row blocks
Value softmax_lastdim(const Value& a);
Value layernorm(const Value& x, const Value& gamma, const Value& beta,
                double eps = 1e-5);
Value embedding_lookup(const Value& table, const std::vector<int>& indices);
Value cross_entropy_logits(const Value& logits, const std::vector<int>& labels);

// Reverse-mode sweep from a scalar. Gradients accumulate in Node::grad.
void backward(const Value& loss);

}  // namespace rxnshingle
