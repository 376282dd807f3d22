#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace fusionloc::ad {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // allocated lazily during backward, or eagerly
                             // for leaves with requires_grad
  bool requires_grad = false;
  bool is_leaf = true;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backprop;  // accumulates into parents' grads

  void ensure_grad();
};

}  // namespace detail

// A shaped 64-bit float array participating in a recorded computation graph.
// Ops record themselves whenever an input requires grad; every op validates
// that its output is finite and throws NumericError otherwise. A graph is
// confined to one thread; independent graphs are independent.
class Tensor {
 public:
  Tensor() = default;

  // Leaf without gradient (inputs, targets).
  static Tensor constant(Shape shape, std::vector<double> values);
  static Tensor scalar(double v);
  static Tensor zeros(Shape shape);

  // Leaf with gradient storage (parameters).
  static Tensor variable(Shape shape, std::vector<double> values);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t numel() const { return node_->value.size(); }
  bool requires_grad() const { return node_->requires_grad; }

  std::span<const double> values() const { return node_->value; }
  double value(std::size_t i = 0) const { return node_->value[i]; }
  double item() const;  // scalar tensors only

  // Gradient of a leaf after backward(); zero-filled until then.
  std::span<const double> grad() const;
  void zero_grad();

  // In-place update of a leaf's values (optimizer steps, checkpoint load).
  std::span<double> mutable_values();

  std::shared_ptr<detail::Node> node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> n) : node_(std::move(n)) {}
  std::shared_ptr<detail::Node> node_;

  friend Tensor make_op(Shape shape, std::vector<double> value,
                        std::vector<Tensor> parents,
                        std::function<void(detail::Node&)> backprop);
};

// ---- forward ops ----------------------------------------------------------

// Elementwise sum. A {n} vector may be broadcast across the rows of a
// {m, n} matrix (bias addition).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
// Elementwise product; a scalar operand broadcasts over the other.
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scalar_mul(const Tensor& a, double s);
Tensor negate(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor relu(const Tensor& a);

// (m,k)x(k,n) -> (m,n); vectors promote: (m,k)x(k) -> (m), (k)x(k,n) -> (n).
Tensor matmul(const Tensor& a, const Tensor& b);

// Softmax over a vector, or over each row (axis=1) / column (axis=0) of a
// matrix.
Tensor softmax(const Tensor& a, std::size_t axis = 0);

// Max-reduction of a matrix over rows (axis=0 -> per-column max) or columns
// (axis=1 -> per-row max); a vector reduces to a scalar. Gradient routes to
// the first maximal element on exact ties.
Tensor max_over_set(const Tensor& a, std::size_t axis = 0);

// Concatenation along axis 0 or 1; vectors concatenate along axis 0.
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis = 0);

Tensor l1_norm(const Tensor& a);
Tensor l2_norm(const Tensor& a);

// Same data, new shape (element count preserved).
Tensor reshape(const Tensor& a, Shape shape);

// Selects rows of a {n, c} matrix; repeated indices accumulate gradient.
Tensor gather_rows(const Tensor& a, const std::vector<std::size_t>& rows);

// 2D convolution of a {C,H,W} input with {O,C,k,k} weights and {O} bias.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              std::size_t stride, std::size_t pad);

// ---- reverse mode ---------------------------------------------------------

// Reverse-mode accumulation from a scalar loss. Gradients accumulate into
// every reachable leaf with requires_grad; repeated calls keep accumulating
// until zero_grad().
void backward(const Tensor& loss);

// ---- parameters -----------------------------------------------------------

struct Parameter {
  std::string name;
  Tensor value;  // leaf tensor with requires_grad
};

class ParameterStore {
 public:
  // Registration order is the canonical parameter order (checkpoints,
  // optimizer state).
  Tensor create(const std::string& name, Shape shape, std::vector<double> init);
  Tensor get(const std::string& name) const;
  bool contains(const std::string& name) const;

  const std::vector<Parameter>& all() const { return params_; }
  std::size_t total_size() const;
  void zero_grad();

 private:
  std::vector<Parameter> params_;
};

// Kaiming-uniform fan-in initialization used for perceptron and convolution
// weights.
std::vector<double> kaiming_uniform(std::size_t count, std::size_t fan_in,
                                    std::uint64_t seed);

// Small symmetric uniform initialization, U(-1/sqrt(fan_in), 1/sqrt(fan_in)),
// used for biases. Zero biases would leave the padded zero-relative group
// rows sitting exactly on the relu kink, where subgradients and finite
// differences disagree.
std::vector<double> bias_uniform(std::size_t count, std::size_t fan_in,
                                 std::uint64_t seed);

}  // namespace fusionloc::ad
