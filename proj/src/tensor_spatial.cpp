#include <algorithm>
#include <cmath>
#include <utility>

#include "drivesal/tensor.hpp"

namespace drivesal {

using detail::Node;

namespace {

void accumulate(Node& dst, const std::vector<double>& src) {
  if (!dst.requires_grad) return;
  dst.ensure_grad();
  for (std::size_t i = 0; i < src.size(); ++i) dst.grad[i] += src[i];
}

struct SpatialPlan {
  int out = 0;
  int pad_begin = 0;
};

// Standard convolution arithmetic; "same" pads so out = ceil(in / stride).
SpatialPlan plan_axis(int in, int eff_window, int stride, Pad padding, const char* what) {
  SpatialPlan p;
  if (padding == Pad::Same) {
    p.out = (in + stride - 1) / stride;
    const int pad_total = std::max(0, (p.out - 1) * stride + eff_window - in);
    p.pad_begin = pad_total / 2;
  } else {
    if (eff_window > in) throw DimensionError(std::string(what) + " window exceeds input extent");
    p.out = (in - eff_window) / stride + 1;
    p.pad_begin = 0;
  }
  return p;
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernel, int stride, int dilation, Pad padding) {
  const auto& is = input.shape();
  const auto& ks = kernel.shape();
  if (is.size() != 3) throw DimensionError("conv2d input must be [H,W,Cin]");
  if (ks.size() != 4) throw DimensionError("conv2d kernel must be [kh,kw,Cin,Cout]");
  if (stride < 1) throw ArgumentError("conv2d stride must be >= 1");
  if (dilation < 1) throw ArgumentError("conv2d dilation must be >= 1");
  const int h = is[0], w = is[1], cin = is[2];
  const int kh = ks[0], kw = ks[1], cout = ks[3];
  if (kh % 2 == 0 || kw % 2 == 0) throw ArgumentError("conv2d kernel extents must be odd");
  if (ks[2] != cin) throw DimensionError("conv2d kernel Cin does not match input channels");

  const int eff_kh = kh + (kh - 1) * (dilation - 1);
  const int eff_kw = kw + (kw - 1) * (dilation - 1);
  const SpatialPlan py = plan_axis(h, eff_kh, stride, padding, "conv2d");
  const SpatialPlan px = plan_axis(w, eff_kw, stride, padding, "conv2d");
  const int ho = py.out, wo = px.out;

  const double* in = input.data().data();
  const double* kk = kernel.data().data();
  std::vector<double> out(static_cast<std::size_t>(ho) * wo * cout, 0.0);
  for (int oy = 0; oy < ho; ++oy) {
    for (int ox = 0; ox < wo; ++ox) {
      double* o = out.data() + (static_cast<std::size_t>(oy) * wo + ox) * cout;
      for (int ky = 0; ky < kh; ++ky) {
        const int iy = oy * stride - py.pad_begin + ky * dilation;
        if (iy < 0 || iy >= h) continue;
        for (int kx = 0; kx < kw; ++kx) {
          const int ix = ox * stride - px.pad_begin + kx * dilation;
          if (ix < 0 || ix >= w) continue;
          const double* xi = in + (static_cast<std::size_t>(iy) * w + ix) * cin;
          const double* kb = kk + (static_cast<std::size_t>(ky) * kw + kx) * cin * cout;
          for (int ci = 0; ci < cin; ++ci) {
            const double xv = xi[ci];
            const double* kr = kb + static_cast<std::size_t>(ci) * cout;
            for (int co = 0; co < cout; ++co) o[co] += xv * kr[co];
          }
        }
      }
    }
  }

  return make_op(
      {ho, wo, cout}, std::move(out), {input, kernel},
      [=](Node& self) {
        Node& nin = *self.parents[0];
        Node& nk = *self.parents[1];
        std::vector<double> gin(nin.value.size(), 0.0);
        std::vector<double> gk(nk.value.size(), 0.0);
        const double* in_v = nin.value.data();
        const double* k_v = nk.value.data();
        for (int oy = 0; oy < ho; ++oy) {
          for (int ox = 0; ox < wo; ++ox) {
            const double* g = self.grad.data() + (static_cast<std::size_t>(oy) * wo + ox) * cout;
            for (int ky = 0; ky < kh; ++ky) {
              const int iy = oy * stride - py.pad_begin + ky * dilation;
              if (iy < 0 || iy >= h) continue;
              for (int kx = 0; kx < kw; ++kx) {
                const int ix = ox * stride - px.pad_begin + kx * dilation;
                if (ix < 0 || ix >= w) continue;
                const std::size_t in_base = (static_cast<std::size_t>(iy) * w + ix) * cin;
                const std::size_t k_base = (static_cast<std::size_t>(ky) * kw + kx) * cin * cout;
                for (int ci = 0; ci < cin; ++ci) {
                  const double xv = in_v[in_base + ci];
                  const std::size_t kr = k_base + static_cast<std::size_t>(ci) * cout;
                  double dx = 0.0;
                  for (int co = 0; co < cout; ++co) {
                    dx += g[co] * k_v[kr + co];
                    gk[kr + co] += g[co] * xv;
                  }
                  gin[in_base + ci] += dx;
                }
              }
            }
          }
        }
        accumulate(nin, gin);
        accumulate(nk, gk);
      });
}

Tensor add_channel_bias(const Tensor& x, const Tensor& bias) {
  const auto& xs = x.shape();
  if (xs.size() != 3) throw DimensionError("add_channel_bias input must be [H,W,C]");
  if (bias.shape().size() != 1 || bias.dim(0) != xs[2])
    throw DimensionError("bias length must match channel count");
  const int c = xs[2];
  const auto& xv = x.data();
  const auto& bv = bias.data();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] + bv[i % c];
  return make_op(xs, std::move(out), {x, bias}, [c](Node& self) {
    Node& nx = *self.parents[0];
    Node& nb = *self.parents[1];
    accumulate(nx, self.grad);
    std::vector<double> gb(static_cast<std::size_t>(c), 0.0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) gb[i % c] += self.grad[i];
    accumulate(nb, gb);
  });
}

Tensor maxpool2d(const Tensor& x, int window, int stride, Pad padding) {
  const auto& xs = x.shape();
  if (xs.size() != 3) throw DimensionError("maxpool2d input must be [H,W,C]");
  if (window < 1 || stride < 1) throw ArgumentError("maxpool2d window and stride must be >= 1");
  const int h = xs[0], w = xs[1], c = xs[2];
  const SpatialPlan py = plan_axis(h, window, stride, padding, "maxpool2d");
  const SpatialPlan px = plan_axis(w, window, stride, padding, "maxpool2d");
  const int ho = py.out, wo = px.out;

  const double* in = x.data().data();
  std::vector<double> out(static_cast<std::size_t>(ho) * wo * c);
  // Ties resolve to the first tap in row-major scan order.
  std::vector<std::size_t> argmax(out.size());
  for (int oy = 0; oy < ho; ++oy) {
    for (int ox = 0; ox < wo; ++ox) {
      for (int ch = 0; ch < c; ++ch) {
        double best = 0.0;
        std::size_t best_i = 0;
        bool seen = false;
        for (int ky = 0; ky < window; ++ky) {
          const int iy = oy * stride - py.pad_begin + ky;
          if (iy < 0 || iy >= h) continue;
          for (int kx = 0; kx < window; ++kx) {
            const int ix = ox * stride - px.pad_begin + kx;
            if (ix < 0 || ix >= w) continue;
            const std::size_t idx = (static_cast<std::size_t>(iy) * w + ix) * c + ch;
            if (!seen || in[idx] > best) {
              best = in[idx];
              best_i = idx;
              seen = true;
            }
          }
        }
        const std::size_t o = (static_cast<std::size_t>(oy) * wo + ox) * c + ch;
        out[o] = best;
        argmax[o] = best_i;
      }
    }
  }
  return make_op({ho, wo, c}, std::move(out), {x}, [argmax = std::move(argmax)](Node& self) {
    Node& nx = *self.parents[0];
    std::vector<double> gx(nx.value.size(), 0.0);
    for (std::size_t o = 0; o < self.grad.size(); ++o) gx[argmax[o]] += self.grad[o];
    accumulate(nx, gx);
  });
}

Tensor avgpool2d(const Tensor& x, int window) {
  const auto& xs = x.shape();
  if (xs.size() != 3) throw DimensionError("avgpool2d input must be [H,W,C]");
  if (window < 1) throw ArgumentError("avgpool2d window must be >= 1");
  const int h = xs[0], w = xs[1], c = xs[2];
  if (h % window != 0 || w % window != 0)
    throw DimensionError("avgpool2d extents must be divisible by the window");
  const int ho = h / window, wo = w / window;
  const double inv = 1.0 / (static_cast<double>(window) * window);

  const double* in = x.data().data();
  std::vector<double> out(static_cast<std::size_t>(ho) * wo * c, 0.0);
  for (int oy = 0; oy < ho; ++oy)
    for (int ox = 0; ox < wo; ++ox)
      for (int ky = 0; ky < window; ++ky)
        for (int kx = 0; kx < window; ++kx) {
          const std::size_t src =
              (static_cast<std::size_t>(oy * window + ky) * w + (ox * window + kx)) * c;
          const std::size_t dst = (static_cast<std::size_t>(oy) * wo + ox) * c;
          for (int ch = 0; ch < c; ++ch) out[dst + ch] += in[src + ch] * inv;
        }
  return make_op({ho, wo, c}, std::move(out), {x}, [=](Node& self) {
    Node& nx = *self.parents[0];
    std::vector<double> gx(nx.value.size(), 0.0);
    for (int oy = 0; oy < ho; ++oy)
      for (int ox = 0; ox < wo; ++ox)
        for (int ky = 0; ky < window; ++ky)
          for (int kx = 0; kx < window; ++kx) {
            const std::size_t src =
                (static_cast<std::size_t>(oy * window + ky) * w + (ox * window + kx)) * c;
            const std::size_t dst = (static_cast<std::size_t>(oy) * wo + ox) * c;
            for (int ch = 0; ch < c; ++ch) gx[src + ch] += self.grad[dst + ch] * inv;
          }
    accumulate(nx, gx);
  });
}

Tensor upsample_bilinear(const Tensor& x, int factor) {
  const auto& xs = x.shape();
  if (xs.size() != 3) throw DimensionError("upsample_bilinear input must be [H,W,C]");
  if (factor < 1) throw ArgumentError("upsample factor must be >= 1");
  const int h = xs[0], w = xs[1], c = xs[2];
  const int ho = h * factor, wo = w * factor;

  // Half-pixel centers with edge replication at the borders.
  auto source = [factor](int o, int extent, int& i0, int& i1, double& frac) {
    const double s = (o + 0.5) / factor - 0.5;
    const double f = std::floor(s);
    frac = s - f;
    i0 = std::clamp(static_cast<int>(f), 0, extent - 1);
    i1 = std::clamp(static_cast<int>(f) + 1, 0, extent - 1);
  };

  const double* in = x.data().data();
  std::vector<double> out(static_cast<std::size_t>(ho) * wo * c);
  for (int oy = 0; oy < ho; ++oy) {
    int y0, y1;
    double wy;
    source(oy, h, y0, y1, wy);
    for (int ox = 0; ox < wo; ++ox) {
      int x0, x1;
      double wx;
      source(ox, w, x0, x1, wx);
      const std::size_t i00 = (static_cast<std::size_t>(y0) * w + x0) * c;
      const std::size_t i01 = (static_cast<std::size_t>(y0) * w + x1) * c;
      const std::size_t i10 = (static_cast<std::size_t>(y1) * w + x0) * c;
      const std::size_t i11 = (static_cast<std::size_t>(y1) * w + x1) * c;
      const std::size_t o = (static_cast<std::size_t>(oy) * wo + ox) * c;
      for (int ch = 0; ch < c; ++ch)
        out[o + ch] = (1.0 - wy) * ((1.0 - wx) * in[i00 + ch] + wx * in[i01 + ch]) +
                      wy * ((1.0 - wx) * in[i10 + ch] + wx * in[i11 + ch]);
    }
  }
  return make_op({ho, wo, c}, std::move(out), {x}, [=](Node& self) {
    Node& nx = *self.parents[0];
    std::vector<double> gx(nx.value.size(), 0.0);
    for (int oy = 0; oy < ho; ++oy) {
      int y0, y1;
      double wy;
      source(oy, h, y0, y1, wy);
      for (int ox = 0; ox < wo; ++ox) {
        int x0, x1;
        double wx;
        source(ox, w, x0, x1, wx);
        const std::size_t o = (static_cast<std::size_t>(oy) * wo + ox) * c;
        for (int ch = 0; ch < c; ++ch) {
          const double g = self.grad[o + ch];
          gx[(static_cast<std::size_t>(y0) * w + x0) * c + ch] += g * (1.0 - wy) * (1.0 - wx);
          gx[(static_cast<std::size_t>(y0) * w + x1) * c + ch] += g * (1.0 - wy) * wx;
          gx[(static_cast<std::size_t>(y1) * w + x0) * c + ch] += g * wy * (1.0 - wx);
          gx[(static_cast<std::size_t>(y1) * w + x1) * c + ch] += g * wy * wx;
        }
      }
    }
    accumulate(nx, gx);
  });
}

Tensor dense(const Tensor& x, const Tensor& weights, const Tensor& bias) {
  const auto& xs = x.shape();
  const auto& ws = weights.shape();
  const auto& bs = bias.shape();
  if (xs.size() != 1 || ws.size() != 2 || bs.size() != 1)
    throw DimensionError("dense expects x[n], W[n,m], b[m]");
  const int n = xs[0], m = ws[1];
  if (ws[0] != n || bs[0] != m) throw DimensionError("dense dimension mismatch");

  const double* xv = x.data().data();
  const double* wv = weights.data().data();
  const double* bv = bias.data().data();
  std::vector<double> out(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) out[j] = bv[j];
  for (int i = 0; i < n; ++i) {
    const double xi = xv[i];
    const double* row = wv + static_cast<std::size_t>(i) * m;
    for (int j = 0; j < m; ++j) out[j] += xi * row[j];
  }
  return make_op({m}, std::move(out), {x, weights, bias}, [n, m](Node& self) {
    Node& nx = *self.parents[0];
    Node& nw = *self.parents[1];
    Node& nb = *self.parents[2];
    const double* g = self.grad.data();
    std::vector<double> gx(static_cast<std::size_t>(n), 0.0);
    std::vector<double> gw(static_cast<std::size_t>(n) * m, 0.0);
    for (int i = 0; i < n; ++i) {
      const double xi = nx.value[i];
      const double* row = nw.value.data() + static_cast<std::size_t>(i) * m;
      double acc = 0.0;
      double* gwr = gw.data() + static_cast<std::size_t>(i) * m;
      for (int j = 0; j < m; ++j) {
        acc += g[j] * row[j];
        gwr[j] += g[j] * xi;
      }
      gx[i] = acc;
    }
    accumulate(nx, gx);
    accumulate(nw, gw);
    accumulate(nb, self.grad);
  });
}

}  // namespace drivesal
