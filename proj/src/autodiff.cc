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
#include "densefocus/autodiff.h"

#include <algorithm>
#include <unordered_set>

#include "densefocus/errors.h"
#include "densefocus/ops.h"

namespace densefocus::ag {

Var Constant(Tensor value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->op = "constant";
  return Var(std::move(node));
}

Var Parameter(Tensor value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = true;
  node->op = "parameter";
  return Var(std::move(node));
}

Var MakeOp(std::string op, Tensor value, std::vector<Var> inputs,
           BackwardFn backward) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->op = std::move(op);
  for (const Var& in : inputs) {
    if (!in.defined()) {
      throw InvalidArgument("autodiff: undefined input to " + node->op);
    }
    node->requires_grad = node->requires_grad || in.requires_grad();
    node->inputs.push_back(in.node());
  }
  if (node->requires_grad) node->backward = std::move(backward);
  return Var(std::move(node));
}

Tensor Gradients::of(const Var& v) const {
  auto it = grads_.find(v.node().get());
  if (it == grads_.end()) return Tensor::ZerosLike(v.value());
  return it->second;
}

bool Gradients::contains(const Var& v) const {
  return grads_.count(v.node().get()) > 0;
}

Gradients Vjp(const Var& output, const Tensor& cotangent) {
  if (cotangent.shape() != output.shape()) {
    throw InvalidArgument("Vjp: cotangent shape " +
                          ShapeToString(cotangent.shape()) +
                          " does not match output " +
                          ShapeToString(output.shape()));
  }
  Gradients result;
  if (!output.requires_grad()) return result;

  // Iterative post-order DFS over the nodes that carry gradients.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(output.node().get(), 0);
  visited.insert(output.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) {
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  std::unordered_map<Node*, Tensor> pending;
  pending[output.node().get()] = cotangent;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    auto found = pending.find(node);
    if (found == pending.end()) continue;
    Tensor grad = std::move(found->second);
    pending.erase(found);
    if (node->inputs.empty()) {
      result.grads_[node] = std::move(grad);
      continue;
    }
    std::vector<Tensor> in_grads = node->backward(grad, *node);
    for (std::size_t i = 0; i < node->inputs.size(); ++i) {
      Node* in = node->inputs[i].get();
      if (!in->requires_grad || i >= in_grads.size() || in_grads[i].empty()) {
        continue;
      }
      auto slot = pending.find(in);
      if (slot == pending.end()) {
        pending.emplace(in, std::move(in_grads[i]));
      } else {
        Tensor& acc = slot->second;
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += in_grads[i][k];
      }
    }
  }
  return result;
}

Gradients Backward(const Var& scalar_output) {
  if (scalar_output.value().size() != 1) {
    throw InvalidArgument("Backward needs a scalar output, got " +
                          ShapeToString(scalar_output.shape()));
  }
  return Vjp(scalar_output, Tensor::Full(scalar_output.shape(), 1.0));
}

namespace {

bool NeedsGrad(const Node& self, std::size_t i) {
  return self.inputs[i]->requires_grad;
}

const Tensor& In(const Node& self, std::size_t i) {
  return self.inputs[i]->value;
}

}  // namespace

Var Add(const Var& a, const Var& b) {
  return MakeOp("add", ops::Add(a.value(), b.value()), {a, b},
                [](const Tensor& g, const Node&) {
                  return std::vector<Tensor>{g, g};
                });
}

Var Sub(const Var& a, const Var& b) {
  return MakeOp("sub", ops::Sub(a.value(), b.value()), {a, b},
                [](const Tensor& g, const Node&) {
                  return std::vector<Tensor>{g, ops::Scale(g, -1.0)};
                });
}

Var Mul(const Var& a, const Var& b) {
  return MakeOp("mul", ops::Mul(a.value(), b.value()), {a, b},
                [](const Tensor& g, const Node& self) {
                  std::vector<Tensor> out(2);
                  if (NeedsGrad(self, 0)) out[0] = ops::Mul(g, In(self, 1));
                  if (NeedsGrad(self, 1)) out[1] = ops::Mul(g, In(self, 0));
                  return out;
                });
}

Var Scale(const Var& a, double s) {
  return MakeOp("scale", ops::Scale(a.value(), s), {a},
                [s](const Tensor& g, const Node&) {
                  return std::vector<Tensor>{ops::Scale(g, s)};
                });
}

Var OneMinus(const Var& a) {
  Tensor v(a.shape());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 - a.value()[i];
  return MakeOp("one_minus", std::move(v), {a},
                [](const Tensor& g, const Node&) {
                  return std::vector<Tensor>{ops::Scale(g, -1.0)};
                });
}

Var Sigmoid(const Var& a) {
  return MakeOp("sigmoid", ops::Sigmoid(a.value()), {a},
                [](const Tensor& g, const Node& self) {
                  Tensor d(g.shape());
                  for (std::size_t i = 0; i < d.size(); ++i) {
                    const double s = self.value[i];
                    d[i] = g[i] * s * (1.0 - s);
                  }
                  return std::vector<Tensor>{std::move(d)};
                });
}

Var Relu(const Var& a) {
  return MakeOp("relu", ops::Relu(a.value()), {a},
                [](const Tensor& g, const Node& self) {
                  Tensor d(g.shape());
                  const Tensor& x = In(self, 0);
                  for (std::size_t i = 0; i < d.size(); ++i) {
                    d[i] = x[i] > 0.0 ? g[i] : 0.0;
                  }
                  return std::vector<Tensor>{std::move(d)};
                });
}

Var Softmax(const Var& a, std::size_t axis) {
  return MakeOp(
      "softmax", ops::Softmax(a.value(), axis), {a},
      [axis](const Tensor& g, const Node& self) {
        const Tensor& s = self.value;
        std::size_t outer = 1, inner = 1;
        for (std::size_t i = 0; i < axis; ++i) outer *= s.dim(i);
        for (std::size_t i = axis + 1; i < s.rank(); ++i) inner *= s.dim(i);
        const std::size_t n = s.dim(axis);
        Tensor d(s.shape());
        for (std::size_t o = 0; o < outer; ++o) {
          for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = o * n * inner + in;
            double dot = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
              dot += g[base + k * inner] * s[base + k * inner];
            }
            for (std::size_t k = 0; k < n; ++k) {
              const std::size_t idx = base + k * inner;
              d[idx] = s[idx] * (g[idx] - dot);
            }
          }
        }
        return std::vector<Tensor>{std::move(d)};
      });
}

Var MulChannels(const Var& x, const Var& plane) {
  return MakeOp(
      "mul_channels", ops::MulChannels(x.value(), plane.value()), {x, plane},
      [](const Tensor& g, const Node& self) {
        std::vector<Tensor> out(2);
        const Tensor& xv = In(self, 0);
        const Tensor& mv = In(self, 1);
        if (NeedsGrad(self, 0)) out[0] = ops::MulChannels(g, mv);
        if (NeedsGrad(self, 1)) {
          const std::size_t p = xv.dim(1) * xv.dim(2);
          Tensor d(mv.shape());
          for (std::size_t c = 0; c < xv.dim(0); ++c) {
            for (std::size_t i = 0; i < p; ++i) d[i] += g[c * p + i] * xv[c * p + i];
          }
          out[1] = std::move(d);
        }
        return out;
      });
}

Var AddChannels(const Var& x, const Var& plane) {
  return MakeOp(
      "add_channels", ops::AddChannels(x.value(), plane.value()), {x, plane},
      [](const Tensor& g, const Node& self) {
        std::vector<Tensor> out(2);
        if (NeedsGrad(self, 0)) out[0] = g;
        if (NeedsGrad(self, 1)) {
          const Tensor& mv = In(self, 1);
          const std::size_t p = mv.size();
          Tensor d(mv.shape());
          for (std::size_t c = 0; c < g.dim(0); ++c) {
            for (std::size_t i = 0; i < p; ++i) d[i] += g[c * p + i];
          }
          out[1] = std::move(d);
        }
        return out;
      });
}

Var ScaleChannels(const Var& x, const Var& gate) {
  return MakeOp(
      "scale_channels", ops::ScaleChannels(x.value(), gate.value()),
      {x, gate}, [](const Tensor& g, const Node& self) {
        std::vector<Tensor> out(2);
        const Tensor& xv = In(self, 0);
        const Tensor& gv = In(self, 1);
        if (NeedsGrad(self, 0)) out[0] = ops::ScaleChannels(g, gv);
        if (NeedsGrad(self, 1)) {
          const std::size_t p = xv.dim(1) * xv.dim(2);
          Tensor d(gv.shape());
          for (std::size_t c = 0; c < xv.dim(0); ++c) {
            double acc = 0.0;
            for (std::size_t i = 0; i < p; ++i) acc += g[c * p + i] * xv[c * p + i];
            d[c] = acc;
          }
          out[1] = std::move(d);
        }
        return out;
      });
}

Var Matmul(const Var& a, const Var& b) {
  return MakeOp("matmul", ops::Matmul(a.value(), b.value()), {a, b},
                [](const Tensor& g, const Node& self) {
                  std::vector<Tensor> out(2);
                  if (NeedsGrad(self, 0)) {
                    out[0] = ops::Matmul(g, ops::Transpose(In(self, 1)));
                  }
                  if (NeedsGrad(self, 1)) {
                    out[1] = ops::Matmul(ops::Transpose(In(self, 0)), g);
                  }
                  return out;
                });
}

Var Transpose(const Var& a) {
  return MakeOp("transpose", ops::Transpose(a.value()), {a},
                [](const Tensor& g, const Node&) {
                  return std::vector<Tensor>{ops::Transpose(g)};
                });
}

Var Reshape(const Var& a, Shape shape) {
  return MakeOp("reshape", a.value().Reshaped(std::move(shape)), {a},
                [](const Tensor& g, const Node& self) {
                  return std::vector<Tensor>{g.Reshaped(In(self, 0).shape())};
                });
}

Var AddRowVector(const Var& m, const Var& b) {
  const Tensor& mv = m.value();
  const Tensor& bv = b.value();
  if (mv.rank() != 2 || bv.size() != mv.dim(1)) {
    throw InvalidArgument("AddRowVector: vector length " +
                          std::to_string(bv.size()) + " vs matrix " +
                          ShapeToString(mv.shape()));
  }
  Tensor v = mv;
  for (std::size_t r = 0; r < mv.dim(0); ++r) {
    for (std::size_t c = 0; c < mv.dim(1); ++c) v.at(r, c) += bv[c];
  }
  return MakeOp("add_row_vector", std::move(v), {m, b},
                [](const Tensor& g, const Node& self) {
                  std::vector<Tensor> out(2);
                  if (NeedsGrad(self, 0)) out[0] = g;
                  if (NeedsGrad(self, 1)) {
                    Tensor d(In(self, 1).shape());
                    for (std::size_t r = 0; r < g.dim(0); ++r) {
                      for (std::size_t c = 0; c < g.dim(1); ++c) d[c] += g.at(r, c);
                    }
                    out[1] = std::move(d);
                  }
                  return out;
                });
}

Var AddColumnVector(const Var& m, const Var& b) {
  const Tensor& mv = m.value();
  const Tensor& bv = b.value();
  if (mv.rank() != 2 || bv.size() != mv.dim(0)) {
    throw InvalidArgument("AddColumnVector: vector length " +
                          std::to_string(bv.size()) + " vs matrix " +
                          ShapeToString(mv.shape()));
  }
  Tensor v = mv;
  for (std::size_t r = 0; r < mv.dim(0); ++r) {
    for (std::size_t c = 0; c < mv.dim(1); ++c) v.at(r, c) += bv[r];
  }
  return MakeOp("add_column_vector", std::move(v), {m, b},
                [](const Tensor& g, const Node& self) {
                  std::vector<Tensor> out(2);
                  if (NeedsGrad(self, 0)) out[0] = g;
                  if (NeedsGrad(self, 1)) {
                    Tensor d(In(self, 1).shape());
                    for (std::size_t r = 0; r < g.dim(0); ++r) {
                      for (std::size_t c = 0; c < g.dim(1); ++c) d[r] += g.at(r, c);
                    }
                    out[1] = std::move(d);
                  }
                  return out;
                });
}

Var BilinearResize(const Var& t, std::size_t out_h, std::size_t out_w) {
  return MakeOp(
      "bilinear_resize", ops::BilinearResize(t.value(), out_h, out_w), {t},
      [out_h, out_w](const Tensor& g, const Node& self) {
        const Tensor& x = In(self, 0);
        const std::size_t ch = x.dim(0), h = x.dim(1), w = x.dim(2);
        if (h == out_h && w == out_w) return std::vector<Tensor>{g};
        auto source = [](std::size_t i, std::size_t in, std::size_t out) {
          if (out == 1) return 0.5 * static_cast<double>(in - 1);
          return static_cast<double>(i) * static_cast<double>(in - 1) /
                 static_cast<double>(out - 1);
        };
        Tensor d(x.shape());
        for (std::size_t oy = 0; oy < out_h; ++oy) {
          const double sy = source(oy, h, out_h);
          const std::size_t y0 = static_cast<std::size_t>(sy);
          const std::size_t y1 = std::min(y0 + 1, h - 1);
          const double fy = sy - static_cast<double>(y0);
          for (std::size_t ox = 0; ox < out_w; ++ox) {
            const double sx = source(ox, w, out_w);
            const std::size_t x0 = static_cast<std::size_t>(sx);
            const std::size_t x1 = std::min(x0 + 1, w - 1);
            const double fx = sx - static_cast<double>(x0);
            for (std::size_t c = 0; c < ch; ++c) {
              const double go = g.at(c, oy, ox);
              d.at(c, y0, x0) += go * (1.0 - fy) * (1.0 - fx);
              d.at(c, y0, x1) += go * (1.0 - fy) * fx;
              d.at(c, y1, x0) += go * fy * (1.0 - fx);
              d.at(c, y1, x1) += go * fy * fx;
            }
          }
        }
        return std::vector<Tensor>{std::move(d)};
      });
}

Var AvgPool(const Var& t, std::size_t k, std::size_t stride) {
  if (stride == 0) stride = k;
  return MakeOp(
      "avg_pool", ops::AvgPool(t.value(), k, stride), {t},
      [k, stride](const Tensor& g, const Node& self) {
        const Tensor& x = In(self, 0);
        const std::size_t h = x.dim(1), w = x.dim(2);
        const double inv = 1.0 / static_cast<double>(k * k);
        Tensor d(x.shape());
        for (std::size_t c = 0; c < g.dim(0); ++c) {
          for (std::size_t oy = 0; oy < g.dim(1); ++oy) {
            for (std::size_t ox = 0; ox < g.dim(2); ++ox) {
              const double go = g.at(c, oy, ox) * inv;
              for (std::size_t ky = 0; ky < k; ++ky) {
                const std::size_t y = std::min(oy * stride + ky, h - 1);
                for (std::size_t kx = 0; kx < k; ++kx) {
                  d.at(c, y, std::min(ox * stride + kx, w - 1)) += go;
                }
              }
            }
          }
        }
        return std::vector<Tensor>{std::move(d)};
      });
}

Var Conv2d(const Var& t, const Var& weights, const Var& bias,
           std::size_t stride, std::size_t pad) {
  const bool has_bias = bias.defined();
  Tensor value = ops::Conv2d(t.value(), weights.value(),
                             has_bias ? bias.value() : Tensor(), stride, pad);
  std::vector<Var> inputs{t, weights};
  if (has_bias) inputs.push_back(bias);
  return MakeOp(
      "conv2d", std::move(value), std::move(inputs),
      [stride, pad, has_bias](const Tensor& g, const Node& self) {
        const Tensor& x = In(self, 0);
        const Tensor& wt = In(self, 1);
        const std::size_t cin = x.dim(0), h = x.dim(1), w = x.dim(2);
        const std::size_t cout = wt.dim(0), kh = wt.dim(2), kw = wt.dim(3);
        const std::size_t oh = g.dim(1), ow = g.dim(2);
        const bool want_x = NeedsGrad(self, 0), want_w = NeedsGrad(self, 1);
        Tensor dx = want_x ? Tensor(x.shape()) : Tensor();
        Tensor dw = want_w ? Tensor(wt.shape()) : Tensor();
        for (std::size_t co = 0; co < cout; ++co) {
          for (std::size_t oy = 0; oy < oh; ++oy) {
            const std::ptrdiff_t y0 = static_cast<std::ptrdiff_t>(oy * stride) -
                                      static_cast<std::ptrdiff_t>(pad);
            const std::size_t ky_lo = y0 < 0 ? static_cast<std::size_t>(-y0) : 0;
            const std::size_t ky_hi = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(
                static_cast<std::ptrdiff_t>(h) - y0, 0, static_cast<std::ptrdiff_t>(kh)));
            for (std::size_t ox = 0; ox < ow; ++ox) {
              const double go = g.at(co, oy, ox);
              if (go == 0.0) continue;
              const std::ptrdiff_t x0 = static_cast<std::ptrdiff_t>(ox * stride) -
                                        static_cast<std::ptrdiff_t>(pad);
              const std::size_t kx_lo =
                  x0 < 0 ? static_cast<std::size_t>(-x0) : 0;
              const std::size_t kx_hi = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(
                  static_cast<std::ptrdiff_t>(w) - x0, 0, static_cast<std::ptrdiff_t>(kw)));
              for (std::size_t ci = 0; ci < cin; ++ci) {
                const std::size_t wbase = (co * cin + ci) * kh * kw;
                const std::size_t xbase = ci * h * w;
                for (std::size_t ky = ky_lo; ky < ky_hi; ++ky) {
                  const std::size_t row =
                      xbase + static_cast<std::size_t>(y0 + static_cast<std::ptrdiff_t>(ky)) * w;
                  for (std::size_t kx = kx_lo; kx < kx_hi; ++kx) {
                    const std::size_t xi =
                        row + static_cast<std::size_t>(x0 + static_cast<std::ptrdiff_t>(kx));
                    const std::size_t wi = wbase + ky * kw + kx;
                    if (want_w) dw[wi] += go * x[xi];
                    if (want_x) dx[xi] += go * wt[wi];
                  }
                }
              }
            }
          }
        }
        std::vector<Tensor> out{std::move(dx), std::move(dw)};
        if (has_bias) {
          Tensor db(In(self, 2).shape());
          const std::size_t plane = oh * ow;
          for (std::size_t co = 0; co < cout; ++co) {
            double acc = 0.0;
            for (std::size_t p = 0; p < plane; ++p) acc += g[co * plane + p];
            db[co] = acc;
          }
          out.push_back(std::move(db));
        }
        ops::CountMacs(2 * cout * oh * ow * cin * kh * kw);
        return out;
      });
}

Var DepthwiseConv(const Var& t, const Var& weights) {
  return MakeOp(
      "depthwise_conv", ops::DepthwiseConv(t.value(), weights.value()),
      {t, weights}, [](const Tensor& g, const Node& self) {
        const Tensor& x = In(self, 0);
        const Tensor& wt = In(self, 1);
        const std::size_t ch = x.dim(0), h = x.dim(1), w = x.dim(2);
        const std::size_t k = wt.dim(2);
        const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>((k - 1) / 2);
        Tensor dx(x.shape());
        Tensor dw(wt.shape());
        for (std::size_t c = 0; c < ch; ++c) {
          for (std::size_t oy = 0; oy < h; ++oy) {
            for (std::size_t ox = 0; ox < w; ++ox) {
              const double go = g.at(c, oy, ox);
              for (std::size_t ky = 0; ky < k; ++ky) {
                const std::ptrdiff_t y = static_cast<std::ptrdiff_t>(oy + ky) - pad;
                if (y < 0 || y >= static_cast<std::ptrdiff_t>(h)) continue;
                for (std::size_t kx = 0; kx < k; ++kx) {
                  const std::ptrdiff_t xx =
                      static_cast<std::ptrdiff_t>(ox + kx) - pad;
                  if (xx < 0 || xx >= static_cast<std::ptrdiff_t>(w)) continue;
                  const std::size_t wi = (c * k + ky) * k + kx;
                  dw[wi] += go * x.at(c, static_cast<std::size_t>(y),
                                      static_cast<std::size_t>(xx));
                  dx.at(c, static_cast<std::size_t>(y),
                        static_cast<std::size_t>(xx)) += go * wt[wi];
                }
              }
            }
          }
        }
        return std::vector<Tensor>{std::move(dx), std::move(dw)};
      });
}

Var DepthwiseSeparableConv(const Var& t, const Var& dw, const Var& pw) {
  const Tensor& pwv = pw.value();
  if (pwv.rank() != 4 || pwv.dim(2) != 1 || pwv.dim(3) != 1) {
    throw InvalidArgument("pointwise weights must be [Cout,C,1,1], got " +
                          ShapeToString(pwv.shape()));
  }
  return Conv2d(DepthwiseConv(t, dw), pw, Var(), 1, 0);
}

Var Dct2(const Var& t) {
  return MakeOp("dct2", ops::Dct2(t.value()), {t},
                [](const Tensor& g, const Node&) {
                  return std::vector<Tensor>{ops::Idct2(g)};
                });
}

Var Idct2(const Var& t) {
  return MakeOp("idct2", ops::Idct2(t.value()), {t},
                [](const Tensor& g, const Node&) {
                  return std::vector<Tensor>{ops::Dct2(g)};
                });
}

Var ChannelMean(const Var& t) {
  return MakeOp("channel_mean", ops::ChannelMean(t.value()), {t},
                [](const Tensor& g, const Node& self) {
                  const Tensor& x = In(self, 0);
                  const std::size_t ch = x.dim(0), p = g.size();
                  const double inv = 1.0 / static_cast<double>(ch);
                  Tensor d(x.shape());
                  for (std::size_t c = 0; c < ch; ++c) {
                    for (std::size_t i = 0; i < p; ++i) d[c * p + i] = g[i] * inv;
                  }
                  return std::vector<Tensor>{std::move(d)};
                });
}

Var ChannelMax(const Var& t) {
  return MakeOp("channel_max", ops::ChannelMax(t.value()), {t},
                [](const Tensor& g, const Node& self) {
                  const Tensor& x = In(self, 0);
                  const std::size_t ch = x.dim(0), p = g.size();
                  Tensor d(x.shape());
                  for (std::size_t i = 0; i < p; ++i) {
                    std::size_t best = 0;
                    for (std::size_t c = 1; c < ch; ++c) {
                      if (x[c * p + i] > x[best * p + i]) best = c;
                    }
                    d[best * p + i] = g[i];
                  }
                  return std::vector<Tensor>{std::move(d)};
                });
}

Var SpatialMean(const Var& t) {
  return MakeOp("spatial_mean", ops::SpatialMean(t.value()), {t},
                [](const Tensor& g, const Node& self) {
                  const Tensor& x = In(self, 0);
                  const std::size_t ch = x.dim(0), p = x.dim(1) * x.dim(2);
                  const double inv = 1.0 / static_cast<double>(p);
                  Tensor d(x.shape());
                  for (std::size_t c = 0; c < ch; ++c) {
                    for (std::size_t i = 0; i < p; ++i) d[c * p + i] = g[c] * inv;
                  }
                  return std::vector<Tensor>{std::move(d)};
                });
}

Var ConcatChannels(const Var& a, const Var& b) {
  return MakeOp("concat_channels", ops::ConcatChannels(a.value(), b.value()),
                {a, b}, [](const Tensor& g, const Node& self) {
                  const Tensor& av = In(self, 0);
                  const Tensor& bv = In(self, 1);
                  std::vector<double> ga(g.vec().begin(),
                                         g.vec().begin() + av.size());
                  std::vector<double> gb(g.vec().begin() + av.size(),
                                         g.vec().end());
                  return std::vector<Tensor>{Tensor(av.shape(), std::move(ga)),
                                             Tensor(bv.shape(), std::move(gb))};
                });
}

Var Sum(const Var& t) {
  return MakeOp("sum", Tensor::Scalar(t.value().Sum()), {t},
                [](const Tensor& g, const Node& self) {
                  return std::vector<Tensor>{
                      Tensor::Full(In(self, 0).shape(), g[0])};
                });
}

Var WeightedSum(const Var& t, const Tensor& weights) {
  if (weights.shape() != t.shape()) {
    throw InvalidArgument("WeightedSum: weight shape mismatch");
  }
  CompensatedSum acc;
  for (std::size_t i = 0; i < weights.size(); ++i) acc.Add(t.value()[i] * weights[i]);
  return MakeOp("weighted_sum", Tensor::Scalar(acc.value()), {t},
                [weights](const Tensor& g, const Node&) {
                  return std::vector<Tensor>{ops::Scale(weights, g[0])};
                });
}

Var MeanSquaredError(const Var& a, const Var& b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.shape() != bv.shape()) {
    throw InvalidArgument("MeanSquaredError: shape mismatch " +
                          ShapeToString(av.shape()) + " vs " +
                          ShapeToString(bv.shape()));
  }
  CompensatedSum acc;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = av[i] - bv[i];
    acc.Add(d * d);
  }
  const double n = static_cast<double>(av.size());
  return MakeOp("mse", Tensor::Scalar(acc.value() / n), {a, b},
                [n](const Tensor& g, const Node& self) {
                  const Tensor& x = In(self, 0);
                  const Tensor& y = In(self, 1);
                  Tensor d(x.shape());
                  for (std::size_t i = 0; i < d.size(); ++i) {
                    d[i] = 2.0 * (x[i] - y[i]) / n * g[0];
                  }
                  return std::vector<Tensor>{d, ops::Scale(d, -1.0)};
                });
}

Var StopGradientBarrier(const Var& source, Tensor value, std::string op) {
  std::string name = op;
  return MakeOp(std::move(op), std::move(value), {source},
                [name](const Tensor&, const Node&) -> std::vector<Tensor> {
                  throw UnsupportedOperation(
                      "gradient requested through non-differentiable '" +
                      name + "'; treat its output as a constant mask");
                });
}

}  // namespace densefocus::ag
