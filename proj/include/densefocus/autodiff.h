/* Copyright 2026 The densefocus Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef DENSEFOCUS_AUTODIFF_H_
#define DENSEFOCUS_AUTODIFF_H_

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "densefocus/tensor.h"

// Minimal reverse-mode differentiation over the operator set used by the
// density, focusing and fusion modules. A Var is an immutable node in a
// dataflow graph; Vjp() walks the graph backwards from one output.
namespace densefocus::ag {

struct Node;
using NodePtr = std::shared_ptr<Node>;

// Returns one cotangent per input of `self`; entries for inputs that do not
// require gradients may be left empty.
using BackwardFn =
    std::function<std::vector<Tensor>(const Tensor& grad_out, const Node& self)>;

struct Node {
  Tensor value;
  std::vector<NodePtr> inputs;
  BackwardFn backward;
  bool requires_grad = false;
  std::string op;
};

class Var {
 public:
  Var() = default;
  explicit Var(NodePtr node) : node_(std::move(node)) {}

  const Tensor& value() const { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool defined() const { return node_ != nullptr; }
  const NodePtr& node() const { return node_; }
  const std::string& op() const { return node_->op; }

 private:
  NodePtr node_;
};

// Leaf that never receives gradients.
Var Constant(Tensor value);
// Leaf whose gradient is reported by Vjp().
Var Parameter(Tensor value);

// Builds an interior node. Exposed so modules can register custom ops.
Var MakeOp(std::string op, Tensor value, std::vector<Var> inputs,
           BackwardFn backward);

class Gradients {
 public:
  // Gradient of the output with respect to `v`; zeros if `v` is unreachable
  // or does not require gradients.
  Tensor of(const Var& v) const;
  bool contains(const Var& v) const;

 private:
  friend Gradients Vjp(const Var&, const Tensor&);
  std::unordered_map<const Node*, Tensor> grads_;
};

// Vector-Jacobian product of `output` with `cotangent` against every
// parameter reachable from it.
Gradients Vjp(const Var& output, const Tensor& cotangent);
// Shorthand for a scalar output with cotangent 1.
Gradients Backward(const Var& scalar_output);

// ---------------------------------------------------------------------------
// Differentiable operators. Semantics match the ops:: forward functions.

Var Add(const Var& a, const Var& b);
Var Sub(const Var& a, const Var& b);
Var Mul(const Var& a, const Var& b);
Var Scale(const Var& a, double s);
// 1 - a.
Var OneMinus(const Var& a);

Var Sigmoid(const Var& a);
Var Relu(const Var& a);
Var Softmax(const Var& a, std::size_t axis);

Var MulChannels(const Var& x, const Var& plane);
Var AddChannels(const Var& x, const Var& plane);
Var ScaleChannels(const Var& x, const Var& gate);

Var Matmul(const Var& a, const Var& b);
Var Transpose(const Var& a);
Var Reshape(const Var& a, Shape shape);
// m[R,C] + b[C] broadcast over rows.
Var AddRowVector(const Var& m, const Var& b);
// m[R,C] + b[R] broadcast over columns.
Var AddColumnVector(const Var& m, const Var& b);

Var BilinearResize(const Var& t, std::size_t out_h, std::size_t out_w);
Var AvgPool(const Var& t, std::size_t k, std::size_t stride = 0);
// `bias` may be an undefined Var for no bias.
Var Conv2d(const Var& t, const Var& weights, const Var& bias,
           std::size_t stride, std::size_t pad);
Var DepthwiseConv(const Var& t, const Var& weights);
Var DepthwiseSeparableConv(const Var& t, const Var& dw, const Var& pw);

Var Dct2(const Var& t);
Var Idct2(const Var& t);

Var ChannelMean(const Var& t);
Var ChannelMax(const Var& t);
Var SpatialMean(const Var& t);
Var ConcatChannels(const Var& a, const Var& b);

// Scalar reductions; results have shape [1].
Var Sum(const Var& t);
// sum(t * weights) with constant weights.
Var WeightedSum(const Var& t, const Tensor& weights);
// Mean of squared differences over all elements.
Var MeanSquaredError(const Var& a, const Var& b);

// Forwards the value but refuses to propagate gradients: Vjp() throws
// UnsupportedOperation if a gradient reaches this node and `source` requires
// gradients. Used for hard, non-differentiable selections.
Var StopGradientBarrier(const Var& source, Tensor value, std::string op);

}  // namespace densefocus::ag

#endif  // DENSEFOCUS_AUTODIFF_H_
