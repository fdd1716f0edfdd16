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
#include "densefocus/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "densefocus/errors.h"

namespace densefocus::ops {

std::uint64_t& MacCounter() {
  thread_local std::uint64_t counter = 0;
  return counter;
}

namespace {

void RequireSameShape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw InvalidArgument(std::string(op) + ": shape mismatch " +
                          ShapeToString(a.shape()) + " vs " +
                          ShapeToString(b.shape()));
  }
}

template <typename F>
Tensor Map(const Tensor& t, F f) {
  Tensor out(t.shape());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = f(t[i]);
  return out;
}

template <typename F>
Tensor Zip(const Tensor& a, const Tensor& b, const char* op, F f) {
  RequireSameShape(a, b, op);
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
  return out;
}

void RequireChannelPlane(const Tensor& x, const Tensor& m, const char* op) {
  RequireChw(x, op);
  if (m.rank() != 3 || m.dim(0) != 1 || m.dim(1) != x.dim(1) ||
      m.dim(2) != x.dim(2)) {
    throw InvalidArgument(std::string(op) + ": plane " +
                          ShapeToString(m.shape()) + " does not match " +
                          ShapeToString(x.shape()));
  }
}

}  // namespace

Tensor Add(const Tensor& a, const Tensor& b) {
  return Zip(a, b, "Add", [](double x, double y) { return x + y; });
}
Tensor Sub(const Tensor& a, const Tensor& b) {
  return Zip(a, b, "Sub", [](double x, double y) { return x - y; });
}
Tensor Mul(const Tensor& a, const Tensor& b) {
  return Zip(a, b, "Mul", [](double x, double y) { return x * y; });
}
Tensor Scale(const Tensor& a, double s) {
  return Map(a, [s](double x) { return x * s; });
}

double Sigmoid(double x) {
  constexpr double kLo = std::numeric_limits<double>::min();
  constexpr double kHi = 1.0 - 0x1.0p-53;
  double s;
  if (x >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    s = e / (1.0 + e);
  }
  return std::clamp(s, kLo, kHi);
}

Tensor Sigmoid(const Tensor& t) {
  return Map(t, [](double x) { return Sigmoid(x); });
}

Tensor Relu(const Tensor& t) {
  return Map(t, [](double x) { return x > 0.0 ? x : 0.0; });
}

Tensor Softmax(const Tensor& t, std::size_t axis) {
  if (axis >= t.rank()) {
    throw InvalidArgument("Softmax: axis " + std::to_string(axis) +
                          " out of range for " + ShapeToString(t.shape()));
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= t.dim(i);
  for (std::size_t i = axis + 1; i < t.rank(); ++i) inner *= t.dim(i);
  const std::size_t n = t.dim(axis);
  Tensor out(t.shape());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * n * inner + in;
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < n; ++k) m = std::max(m, t[base + k * inner]);
      double z = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double e = std::exp(t[base + k * inner] - m);
        out[base + k * inner] = e;
        z += e;
      }
      for (std::size_t k = 0; k < n; ++k) out[base + k * inner] /= z;
    }
  }
  return out;
}

Tensor MulChannels(const Tensor& x, const Tensor& m) {
  RequireChannelPlane(x, m, "MulChannels");
  const std::size_t plane = x.dim(1) * x.dim(2);
  Tensor out(x.shape());
  for (std::size_t c = 0; c < x.dim(0); ++c) {
    for (std::size_t p = 0; p < plane; ++p) {
      out[c * plane + p] = x[c * plane + p] * m[p];
    }
  }
  return out;
}

Tensor AddChannels(const Tensor& x, const Tensor& m) {
  RequireChannelPlane(x, m, "AddChannels");
  const std::size_t plane = x.dim(1) * x.dim(2);
  Tensor out(x.shape());
  for (std::size_t c = 0; c < x.dim(0); ++c) {
    for (std::size_t p = 0; p < plane; ++p) {
      out[c * plane + p] = x[c * plane + p] + m[p];
    }
  }
  return out;
}

Tensor ScaleChannels(const Tensor& x, const Tensor& g) {
  RequireChw(x, "ScaleChannels");
  if (g.size() != x.dim(0)) {
    throw InvalidArgument("ScaleChannels: gate length " +
                          std::to_string(g.size()) + " != channels " +
                          std::to_string(x.dim(0)));
  }
  const std::size_t plane = x.dim(1) * x.dim(2);
  Tensor out(x.shape());
  for (std::size_t c = 0; c < x.dim(0); ++c) {
    for (std::size_t p = 0; p < plane; ++p) {
      out[c * plane + p] = x[c * plane + p] * g[c];
    }
  }
  return out;
}

Tensor Matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw InvalidArgument("Matmul: incompatible shapes " +
                          ShapeToString(a.shape()) + " x " +
                          ShapeToString(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      out[i * n + j] = acc;
    }
  }
  CountMacs(m * n * k);
  return out;
}

Tensor Transpose(const Tensor& a) {
  if (a.rank() != 2) {
    throw InvalidArgument("Transpose needs rank 2, got " +
                          ShapeToString(a.shape()));
  }
  const std::size_t r = a.dim(0), c = a.dim(1);
  Tensor out({c, r});
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = a[i * c + j];
  }
  return out;
}

Tensor BilinearResize(const Tensor& t, std::size_t out_h, std::size_t out_w) {
  RequireChw(t, "BilinearResize input");
  if (out_h == 0 || out_w == 0) {
    throw InvalidArgument("BilinearResize: output extents must be positive");
  }
  const std::size_t ch = t.dim(0), h = t.dim(1), w = t.dim(2);
  if (h == out_h && w == out_w) return t;
  auto source = [](std::size_t i, std::size_t in, std::size_t out) {
    if (out == 1) return 0.5 * static_cast<double>(in - 1);
    return static_cast<double>(i) * static_cast<double>(in - 1) /
           static_cast<double>(out - 1);
  };
  Tensor out({ch, out_h, out_w});
  for (std::size_t oy = 0; oy < out_h; ++oy) {
    const double sy = source(oy, h, out_h);
    const std::size_t y0 = static_cast<std::size_t>(std::floor(sy));
    const std::size_t y1 = std::min(y0 + 1, h - 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::size_t ox = 0; ox < out_w; ++ox) {
      const double sx = source(ox, w, out_w);
      const std::size_t x0 = static_cast<std::size_t>(std::floor(sx));
      const std::size_t x1 = std::min(x0 + 1, w - 1);
      const double fx = sx - static_cast<double>(x0);
      for (std::size_t c = 0; c < ch; ++c) {
        const double a = t.at(c, y0, x0), b = t.at(c, y0, x1);
        const double d = t.at(c, y1, x0), e = t.at(c, y1, x1);
        const double top = a + fx * (b - a);
        const double bottom = d + fx * (e - d);
        out.at(c, oy, ox) = top + fy * (bottom - top);
      }
    }
  }
  CountMacs(3 * ch * out_h * out_w);
  return out;
}

std::size_t PoolExtent(std::size_t in, std::size_t k, std::size_t stride) {
  if (k == 0 || stride == 0) {
    throw InvalidArgument("pooling kernel and stride must be positive");
  }
  if (in <= k) return 1;
  return (in - k + stride - 1) / stride + 1;
}

Tensor AvgPool(const Tensor& t, std::size_t k, std::size_t stride) {
  RequireChw(t, "AvgPool input");
  if (stride == 0) stride = k;
  const std::size_t ch = t.dim(0), h = t.dim(1), w = t.dim(2);
  const std::size_t oh = PoolExtent(h, k, stride);
  const std::size_t ow = PoolExtent(w, k, stride);
  const double count = static_cast<double>(k * k);
  Tensor out({ch, oh, ow});
  for (std::size_t c = 0; c < ch; ++c) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        double acc = 0.0;
        for (std::size_t ky = 0; ky < k; ++ky) {
          const std::size_t y = std::min(oy * stride + ky, h - 1);
          for (std::size_t kx = 0; kx < k; ++kx) {
            const std::size_t x = std::min(ox * stride + kx, w - 1);
            acc += t.at(c, y, x);
          }
        }
        out.at(c, oy, ox) = acc / count;
      }
    }
  }
  CountMacs(ch * oh * ow * k * k);
  return out;
}

Tensor Conv2d(const Tensor& t, const Tensor& weights, const Tensor& bias,
              std::size_t stride, std::size_t pad) {
  RequireChw(t, "Conv2d input");
  if (weights.rank() != 4) {
    throw InvalidArgument("Conv2d weights must be [Cout,Cin,kh,kw], got " +
                          ShapeToString(weights.shape()));
  }
  const std::size_t cin = t.dim(0), h = t.dim(1), w = t.dim(2);
  const std::size_t cout = weights.dim(0), kh = weights.dim(2),
                    kw = weights.dim(3);
  if (weights.dim(1) != cin) {
    throw InvalidArgument("Conv2d: weights expect " +
                          std::to_string(weights.dim(1)) +
                          " input channels, got " + std::to_string(cin));
  }
  if (!bias.empty() && bias.size() != cout) {
    throw InvalidArgument("Conv2d: bias length mismatch");
  }
  if (stride == 0) throw InvalidArgument("Conv2d: stride must be positive");
  if (h + 2 * pad < kh || w + 2 * pad < kw) {
    throw InvalidArgument("Conv2d: kernel larger than padded input");
  }
  const std::size_t oh = (h + 2 * pad - kh) / stride + 1;
  const std::size_t ow = (w + 2 * pad - kw) / stride + 1;
  Tensor out({cout, oh, ow});
  const double* x = t.data().data();
  const double* wt = weights.data().data();
  for (std::size_t co = 0; co < cout; ++co) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      const std::ptrdiff_t y0 = static_cast<std::ptrdiff_t>(oy * stride) -
                                static_cast<std::ptrdiff_t>(pad);
      // Windows lying wholly in the padding get an empty range.
      const std::size_t ky_lo = y0 < 0 ? static_cast<std::size_t>(-y0) : 0;
      const std::size_t ky_hi = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(
          static_cast<std::ptrdiff_t>(h) - y0, 0, static_cast<std::ptrdiff_t>(kh)));
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const std::ptrdiff_t x0 = static_cast<std::ptrdiff_t>(ox * stride) -
                                  static_cast<std::ptrdiff_t>(pad);
        const std::size_t kx_lo = x0 < 0 ? static_cast<std::size_t>(-x0) : 0;
        const std::size_t kx_hi = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(
            static_cast<std::ptrdiff_t>(w) - x0, 0, static_cast<std::ptrdiff_t>(kw)));
        double acc = 0.0;
        for (std::size_t ci = 0; ci < cin; ++ci) {
          const double* wk = wt + ((co * cin + ci) * kh) * kw;
          const double* xc = x + ci * h * w;
          for (std::size_t ky = ky_lo; ky < ky_hi; ++ky) {
            const double* xr = xc + (y0 + static_cast<std::ptrdiff_t>(ky)) * w;
            for (std::size_t kx = kx_lo; kx < kx_hi; ++kx) {
              acc += wk[ky * kw + kx] * xr[x0 + static_cast<std::ptrdiff_t>(kx)];
            }
          }
        }
        out.at(co, oy, ox) = bias.empty() ? acc : acc + bias[co];
      }
    }
  }
  CountMacs(cout * oh * ow * cin * kh * kw);
  return out;
}

Tensor DepthwiseConv(const Tensor& t, const Tensor& weights) {
  RequireChw(t, "DepthwiseConv input");
  if (weights.rank() != 4 || weights.dim(0) != t.dim(0) ||
      weights.dim(1) != 1 || weights.dim(2) != weights.dim(3)) {
    throw InvalidArgument("DepthwiseConv weights must be [C,1,k,k], got " +
                          ShapeToString(weights.shape()) + " for input " +
                          ShapeToString(t.shape()));
  }
  const std::size_t k = weights.dim(2);
  if (k % 2 == 0) {
    throw InvalidArgument("DepthwiseConv: kernel extent must be odd, got " +
                          std::to_string(k));
  }
  const std::size_t ch = t.dim(0), h = t.dim(1), w = t.dim(2);
  const std::size_t plane = h * w;
  Tensor out(t.shape());
  for (std::size_t c = 0; c < ch; ++c) {
    Tensor slice({1, h, w},
                 std::vector<double>(t.vec().begin() + c * plane,
                                     t.vec().begin() + (c + 1) * plane));
    Tensor kernel({1, 1, k, k},
                  std::vector<double>(weights.vec().begin() + c * k * k,
                                      weights.vec().begin() + (c + 1) * k * k));
    Tensor r = Conv2d(slice, kernel, Tensor(), 1, (k - 1) / 2);
    std::copy(r.vec().begin(), r.vec().end(), out.vec().begin() + c * plane);
  }
  return out;
}

Tensor DepthwiseSeparableConv(const Tensor& t, const Tensor& dw,
                              const Tensor& pw) {
  if (pw.rank() != 4 || pw.dim(2) != 1 || pw.dim(3) != 1) {
    throw InvalidArgument("pointwise weights must be [Cout,C,1,1], got " +
                          ShapeToString(pw.shape()));
  }
  return Conv2d(DepthwiseConv(t, dw), pw, Tensor(), 1, 0);
}

const Tensor& DctMatrix(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::unique_ptr<Tensor>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) {
    auto m = std::make_unique<Tensor>(Shape{n, n});
    const double nd = static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double alpha = k == 0 ? std::sqrt(1.0 / nd) : std::sqrt(2.0 / nd);
      for (std::size_t i = 0; i < n; ++i) {
        m->at(k, i) = alpha * std::cos(std::numbers::pi *
                                       (2.0 * static_cast<double>(i) + 1.0) *
                                       static_cast<double>(k) / (2.0 * nd));
      }
    }
    slot = std::move(m);
  }
  return *slot;
}

namespace {

// Per channel: forward computes C_h X C_w^T, inverse computes C_h^T Y C_w.
Tensor SeparableTransform(const Tensor& t, bool inverse) {
  if (t.rank() == 2) {
    return SeparableTransform(t.Reshaped({1, t.dim(0), t.dim(1)}), inverse)
        .Reshaped(t.shape());
  }
  RequireChw(t, "DCT input");
  const std::size_t ch = t.dim(0), h = t.dim(1), w = t.dim(2);
  const Tensor& ch_mat = DctMatrix(h);
  const Tensor& cw_mat = DctMatrix(w);
  Tensor out(t.shape());
  std::vector<double> tmp(h * w);
  for (std::size_t c = 0; c < ch; ++c) {
    const double* x = t.data().data() + c * h * w;
    double* y = out.data().data() + c * h * w;
    // Transform along width.
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t l = 0; l < w; ++l) {
        double acc = 0.0;
        for (std::size_t j = 0; j < w; ++j) {
          acc += x[i * w + j] *
                 (inverse ? cw_mat.at(j, l) : cw_mat.at(l, j));
        }
        tmp[i * w + l] = acc;
      }
    }
    // Transform along height.
    for (std::size_t k = 0; k < h; ++k) {
      for (std::size_t l = 0; l < w; ++l) {
        double acc = 0.0;
        for (std::size_t i = 0; i < h; ++i) {
          acc += (inverse ? ch_mat.at(i, k) : ch_mat.at(k, i)) * tmp[i * w + l];
        }
        y[k * w + l] = acc;
      }
    }
  }
  CountMacs(ch * h * w * (h + w));
  return out;
}

}  // namespace

Tensor Dct2(const Tensor& t) { return SeparableTransform(t, false); }
Tensor Idct2(const Tensor& t) { return SeparableTransform(t, true); }

Tensor ChannelMean(const Tensor& t) {
  RequireChw(t, "ChannelMean input");
  const std::size_t ch = t.dim(0), plane = t.dim(1) * t.dim(2);
  Tensor out({1, t.dim(1), t.dim(2)});
  for (std::size_t p = 0; p < plane; ++p) {
    double acc = 0.0;
    for (std::size_t c = 0; c < ch; ++c) acc += t[c * plane + p];
    out[p] = acc / static_cast<double>(ch);
  }
  return out;
}

Tensor ChannelMax(const Tensor& t) {
  RequireChw(t, "ChannelMax input");
  const std::size_t ch = t.dim(0), plane = t.dim(1) * t.dim(2);
  Tensor out({1, t.dim(1), t.dim(2)});
  for (std::size_t p = 0; p < plane; ++p) {
    double m = t[p];
    for (std::size_t c = 1; c < ch; ++c) m = std::max(m, t[c * plane + p]);
    out[p] = m;
  }
  return out;
}

Tensor SpatialMean(const Tensor& t) {
  RequireChw(t, "SpatialMean input");
  const std::size_t ch = t.dim(0), plane = t.dim(1) * t.dim(2);
  Tensor out({ch});
  for (std::size_t c = 0; c < ch; ++c) {
    double acc = 0.0;
    for (std::size_t p = 0; p < plane; ++p) acc += t[c * plane + p];
    out[c] = acc / static_cast<double>(plane);
  }
  return out;
}

Tensor ConcatChannels(const Tensor& a, const Tensor& b) {
  RequireChw(a, "ConcatChannels lhs");
  RequireChw(b, "ConcatChannels rhs");
  if (a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2)) {
    throw InvalidArgument("ConcatChannels: spatial extents differ");
  }
  std::vector<double> data = a.vec();
  data.insert(data.end(), b.vec().begin(), b.vec().end());
  return Tensor({a.dim(0) + b.dim(0), a.dim(1), a.dim(2)}, std::move(data));
}

}  // namespace densefocus::ops
