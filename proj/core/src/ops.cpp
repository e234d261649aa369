#include "fingermi/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace fingermi {

namespace {

using Index = std::ptrdiff_t;

inline double dot(const double* __restrict a, const double* __restrict b, std::size_t n) {
  double s = 0.0;
#pragma omp simd reduction(+ : s)
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline void axpy(double alpha, const double* __restrict x, double* __restrict y, std::size_t n) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void require_rank(const Tensor& t, std::size_t rank, const char* op, const char* what) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": " + what + " must have rank " + std::to_string(rank) +
                     ", got " + shape_string(t.shape()));
  }
}

// Geometry of a grouped 2-D cross-correlation. Regular convolution is one
// group; depthwise convolution uses one group per input channel.
struct ConvGeom {
  std::size_t n, c, h, w;     // input
  std::size_t f, cg, kh, kw;  // kernel: f outputs, cg input channels per group
  std::size_t groups;
  std::size_t sh, sw;
  std::size_t pt, pl, pr;
  std::size_t oh, ow;

  std::size_t out_per_group() const { return f / groups; }
  std::size_t in_channel(std::size_t out, std::size_t k) const {
    return (out / out_per_group()) * cg + k;
  }

  // Range [lo, hi) of output columns whose input column ow*sw + j - pl is in bounds.
  std::pair<std::size_t, std::size_t> columns(std::size_t j) const {
    const Index shift = static_cast<Index>(j) - static_cast<Index>(pl);
    Index lo = 0;
    if (shift < 0) lo = (-shift + static_cast<Index>(sw) - 1) / static_cast<Index>(sw);
    const Index last_in = static_cast<Index>(w) - 1 - shift;
    if (last_in < 0) return {0, 0};
    Index hi = last_in / static_cast<Index>(sw) + 1;
    hi = std::min<Index>(hi, static_cast<Index>(ow));
    if (lo >= hi) return {0, 0};
    return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
  }

  // Input row for output row `o` and kernel row `i`, or -1 if it falls in padding.
  Index input_row(std::size_t o, std::size_t i) const {
    const Index r = static_cast<Index>(o * sh + i) - static_cast<Index>(pt);
    return (r < 0 || r >= static_cast<Index>(h)) ? -1 : r;
  }
};

ConvGeom make_geom(const char* op, const Tensor& x, const Tensor& k, std::size_t groups,
                   Extent stride, Padding pad) {
  require_rank(x, 4, op, "input");
  require_rank(k, 4, op, "kernel");
  if (stride.h == 0 || stride.w == 0) throw ShapeError(std::string(op) + ": stride must be >= 1");
  ConvGeom g{};
  g.n = x.dim(0);
  g.c = x.dim(1);
  g.h = x.dim(2);
  g.w = x.dim(3);
  g.f = k.dim(0);
  g.cg = k.dim(1);
  g.kh = k.dim(2);
  g.kw = k.dim(3);
  g.groups = groups;
  g.sh = stride.h;
  g.sw = stride.w;
  g.pt = pad.top;
  g.pl = pad.left;
  g.pr = pad.right;
  if (g.cg * groups != g.c) {
    throw ShapeError(std::string(op) + ": kernel expects " + std::to_string(g.cg * groups) +
                     " input channels, input " + shape_string(x.shape()) + " has " +
                     std::to_string(g.c));
  }
  if (g.f % groups != 0) {
    throw ShapeError(std::string(op) + ": kernel count " + std::to_string(g.f) +
                     " is not a multiple of " + std::to_string(groups));
  }
  if (g.kh > g.h + pad.top + pad.bottom || g.kw > g.w + pad.left + pad.right) {
    throw ShapeError(std::string(op) + ": kernel " + shape_string(k.shape()) +
                     " larger than padded input " + shape_string(x.shape()));
  }
  g.oh = sliding_output(g.h, pad.top, pad.bottom, g.kh, g.sh);
  g.ow = sliding_output(g.w, pad.left, pad.right, g.kw, g.sw);
  if (g.oh == 0 || g.ow == 0) throw ShapeError(std::string(op) + ": zero-size output");
  return g;
}

// out[i] += sum_{c < m} coeff[c] * src[i + c] for i < n; src holds n + m - 1 values.
// A block of V x 8 outputs stays in vector registers across the coefficient loop.
using Vec8 = double __attribute__((vector_size(64)));

inline Vec8 load8(const double* p) {
  Vec8 v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline void store8(double* p, Vec8 v) { std::memcpy(p, &v, sizeof v); }

template <std::size_t V>
std::size_t correlate_blocks(const double* __restrict src, const double* __restrict coeff,
                                    std::size_t m, double* __restrict out, std::size_t i,
                                    std::size_t n) {
  constexpr std::size_t B = 8 * V;
  for (; i + B <= n; i += B) {
    Vec8 acc[V];
    for (std::size_t v = 0; v < V; ++v) acc[v] = load8(out + i + 8 * v);
    for (std::size_t c = 0; c < m; ++c) {
      const double w = coeff[c];
      const double* s = src + i + c;
      for (std::size_t v = 0; v < V; ++v) acc[v] += w * load8(s + 8 * v);
    }
    for (std::size_t v = 0; v < V; ++v) store8(out + i + 8 * v, acc[v]);
  }
  return i;
}

__attribute__((noinline)) void correlate_add(const double* src, const double* coeff, std::size_t m,
                                             double* out, std::size_t n) {
  std::size_t i = correlate_blocks<8>(src, coeff, m, out, 0, n);
  i = correlate_blocks<4>(src, coeff, m, out, i, n);
  i = correlate_blocks<1>(src, coeff, m, out, i, n);
  for (; i < n; ++i) out[i] += dot(coeff, src + i, m);
}

// Input rows copied with `pl` zeros on the left and `pr` on the right.
std::vector<double> pad_columns(const ConvGeom& g, const double* x) {
  const std::size_t wp = g.w + g.pl + g.pr;
  std::vector<double> out(g.n * g.c * g.h * wp, 0.0);
  for (std::size_t row = 0; row < g.n * g.c * g.h; ++row) {
    std::copy(x + row * g.w, x + (row + 1) * g.w, out.data() + row * wp + g.pl);
  }
  return out;
}

// Convolutions with one input row per output row (cg * kh == 1 after the
// depthwise split, or any kernel with a single input channel) run as direct
// row correlations; everything else goes through im2col and a dense product.
bool direct_path(const ConvGeom& g) { return g.sw == 1 && g.cg == 1; }

// Rows of the unrolled input for samples [n0, n1) of one group:
// row (kc*kh + i)*kw + j, column (n - n0)*oh*ow + o*ow + q.
void im2col(const ConvGeom& g, const double* x, std::size_t group, std::size_t n0, std::size_t n1,
            std::vector<double>& cols) {
  const std::size_t plane = g.oh * g.ow;
  const std::size_t p_total = (n1 - n0) * plane;
  cols.assign(g.cg * g.kh * g.kw * p_total, 0.0);
  for (std::size_t kc = 0; kc < g.cg; ++kc) {
    const std::size_t c = group * g.cg + kc;
    for (std::size_t i = 0; i < g.kh; ++i) {
      for (std::size_t j = 0; j < g.kw; ++j) {
        double* row = cols.data() + ((kc * g.kh + i) * g.kw + j) * p_total;
        const auto [lo, hi] = g.columns(j);
        for (std::size_t n = n0; n < n1; ++n) {
          for (std::size_t o = 0; o < g.oh; ++o) {
            const Index r = g.input_row(o, i);
            if (r < 0) continue;
            const double* in_row = x + ((n * g.c + c) * g.h + static_cast<std::size_t>(r)) * g.w;
            double* dst = row + (n - n0) * plane + o * g.ow;
            for (std::size_t q = lo; q < hi; ++q) dst[q] = in_row[q * g.sw + j - g.pl];
          }
        }
      }
    }
  }
}

void col2im_add(const ConvGeom& g, const std::vector<double>& cols, std::size_t group, std::size_t n0,
                std::size_t n1, double* dx) {
  const std::size_t plane = g.oh * g.ow;
  const std::size_t p_total = (n1 - n0) * plane;
  for (std::size_t kc = 0; kc < g.cg; ++kc) {
    const std::size_t c = group * g.cg + kc;
    for (std::size_t i = 0; i < g.kh; ++i) {
      for (std::size_t j = 0; j < g.kw; ++j) {
        const double* row = cols.data() + ((kc * g.kh + i) * g.kw + j) * p_total;
        const auto [lo, hi] = g.columns(j);
        for (std::size_t n = n0; n < n1; ++n) {
          for (std::size_t o = 0; o < g.oh; ++o) {
            const Index r = g.input_row(o, i);
            if (r < 0) continue;
            double* in_row = dx + ((n * g.c + c) * g.h + static_cast<std::size_t>(r)) * g.w;
            const double* src = row + (n - n0) * plane + o * g.ow;
            for (std::size_t q = lo; q < hi; ++q) in_row[q * g.sw + j - g.pl] += src[q];
          }
        }
      }
    }
  }
}

// Samples per im2col chunk: enough columns to amortize the row loops while
// keeping the unrolled matrix to a few megabytes.
std::size_t chunk_samples(const ConvGeom& g) {
  const std::size_t plane = g.oh * g.ow;
  const std::size_t kd = g.cg * g.kh * g.kw;
  const std::size_t budget = std::size_t{1} << 19;  // doubles
  return std::clamp<std::size_t>(budget / std::max<std::size_t>(1, kd * plane), 1, g.n);
}

Tensor conv_forward(const ConvGeom& g, const Tensor& x, const Tensor& k, const Tensor* bias) {
  Tensor out(Shape{g.n, g.f, g.oh, g.ow});
  const double* xd = x.data().data();
  const double* kd = k.data().data();
  double* od = out.data().data();
  const std::size_t plane = g.oh * g.ow;
  for (std::size_t n = 0; n < g.n; ++n) {
    for (std::size_t f = 0; f < g.f; ++f) {
      std::fill(od + (n * g.f + f) * plane, od + (n * g.f + f + 1) * plane, bias ? (*bias)[f] : 0.0);
    }
  }

  if (direct_path(g)) {
    const std::vector<double> xpad = pad_columns(g, xd);
    const std::size_t wp = g.w + g.pl + g.pr;
    for (std::size_t n = 0; n < g.n; ++n) {
      for (std::size_t f = 0; f < g.f; ++f) {
        const std::size_t c = g.in_channel(f, 0);
        const double* kern = kd + f * g.kh * g.kw;
        double* out_plane = od + (n * g.f + f) * plane;
        for (std::size_t i = 0; i < g.kh; ++i) {
          for (std::size_t o = 0; o < g.oh; ++o) {
            const Index r = g.input_row(o, i);
            if (r < 0) continue;
            const double* src = xpad.data() + ((n * g.c + c) * g.h + static_cast<std::size_t>(r)) * wp;
            correlate_add(src, kern + i * g.kw, g.kw, out_plane + o * g.ow, g.ow);
          }
        }
      }
    }
    return out;
  }

  const std::size_t kdim = g.cg * g.kh * g.kw;
  const std::size_t fg = g.out_per_group();
  const std::size_t chunk = chunk_samples(g);
  std::vector<double> cols;
  std::vector<double> acc;
  for (std::size_t n0 = 0; n0 < g.n; n0 += chunk) {
    const std::size_t n1 = std::min(g.n, n0 + chunk);
    const std::size_t p_total = (n1 - n0) * plane;
    for (std::size_t group = 0; group < g.groups; ++group) {
      im2col(g, xd, group, n0, n1, cols);
      for (std::size_t f = group * fg; f < (group + 1) * fg; ++f) {
        acc.assign(p_total, 0.0);
        const double* wrow = kd + f * kdim;
        for (std::size_t r = 0; r < kdim; ++r) axpy(wrow[r], cols.data() + r * p_total, acc.data(), p_total);
        for (std::size_t n = n0; n < n1; ++n) {
          axpy(1.0, acc.data() + (n - n0) * plane, od + (n * g.f + f) * plane, plane);
        }
      }
    }
  }
  return out;
}

void conv_backward(const ConvGeom& g, const Tensor& x, const Tensor& k,
                   std::span<const double> dout, double* dx, double* dk, double* db) {
  const double* xd = x.data().data();
  const double* kd = k.data().data();
  const std::size_t plane = g.oh * g.ow;
  if (db) {
    for (std::size_t n = 0; n < g.n; ++n) {
      for (std::size_t f = 0; f < g.f; ++f) {
        const double* gp = dout.data() + (n * g.f + f) * plane;
        double s = 0.0;
        for (std::size_t q = 0; q < plane; ++q) s += gp[q];
        db[f] += s;
      }
    }
  }
  if (!dx && !dk) return;

  if (direct_path(g)) {
    const std::size_t wp = g.w + g.pl + g.pr;
    const std::vector<double> xpad = dk ? pad_columns(g, xd) : std::vector<double>{};
    // The input gradient is a correlation of the zero-extended output gradient
    // with the reversed kernel row, accumulated into column-padded rows.
    std::vector<double> dxpad = dx ? std::vector<double>(g.n * g.c * g.h * wp, 0.0) : std::vector<double>{};
    std::vector<double> gext(dx ? g.ow + 2 * (g.kw - 1) : 0, 0.0);
    std::vector<double> krev(g.kw);
    for (std::size_t n = 0; n < g.n; ++n) {
      for (std::size_t f = 0; f < g.f; ++f) {
        const std::size_t c = g.in_channel(f, 0);
        const double* gplane = dout.data() + (n * g.f + f) * plane;
        for (std::size_t i = 0; i < g.kh; ++i) {
          const std::size_t k_offset = (f * g.kh + i) * g.kw;
          if (dx) std::reverse_copy(kd + k_offset, kd + k_offset + g.kw, krev.begin());
          for (std::size_t o = 0; o < g.oh; ++o) {
            const Index r = g.input_row(o, i);
            if (r < 0) continue;
            const double* grow = gplane + o * g.ow;
            const std::size_t prow = ((n * g.c + c) * g.h + static_cast<std::size_t>(r)) * wp;
            if (dk) correlate_add(xpad.data() + prow, grow, g.ow, dk + k_offset, g.kw);
            if (dx) {
              std::copy(grow, grow + g.ow, gext.begin() + static_cast<Index>(g.kw - 1));
              correlate_add(gext.data(), krev.data(), g.kw, dxpad.data() + prow, wp);
            }
          }
        }
      }
    }
    if (dx) {
      for (std::size_t row = 0; row < g.n * g.c * g.h; ++row) axpy(1.0, dxpad.data() + row * wp + g.pl, dx + row * g.w, g.w);
    }
    return;
  }

  const std::size_t kdim = g.cg * g.kh * g.kw;
  const std::size_t fg = g.out_per_group();
  const std::size_t chunk = chunk_samples(g);
  std::vector<double> cols;
  std::vector<double> dcols;
  std::vector<double> grow;
  for (std::size_t n0 = 0; n0 < g.n; n0 += chunk) {
    const std::size_t n1 = std::min(g.n, n0 + chunk);
    const std::size_t p_total = (n1 - n0) * plane;
    for (std::size_t group = 0; group < g.groups; ++group) {
      if (dk) im2col(g, xd, group, n0, n1, cols);
      if (dx) dcols.assign(kdim * p_total, 0.0);
      grow.resize(p_total);
      for (std::size_t f = group * fg; f < (group + 1) * fg; ++f) {
        for (std::size_t n = n0; n < n1; ++n) {
          const double* src = dout.data() + (n * g.f + f) * plane;
          std::copy(src, src + plane, grow.begin() + static_cast<Index>((n - n0) * plane));
        }
        if (dk) {
          double* wgrad = dk + f * kdim;
          for (std::size_t r = 0; r < kdim; ++r) wgrad[r] += dot(grow.data(), cols.data() + r * p_total, p_total);
        }
        if (dx) {
          const double* wrow = kd + f * kdim;
          for (std::size_t r = 0; r < kdim; ++r) axpy(wrow[r], grow.data(), dcols.data() + r * p_total, p_total);
        }
      }
      if (dx) col2im_add(g, dcols, group, n0, n1, dx);
    }
  }
}

Var grouped_conv(const char* op, Var input, Var kernel, std::optional<Var> bias,
                 std::size_t groups_or_zero, Extent stride, Padding pad) {
  const Tensor& x = input.value();
  const Tensor& k = kernel.value();
  require_rank(x, 4, op, "input");
  const std::size_t groups = groups_or_zero == 0 ? x.dim(1) : groups_or_zero;
  const ConvGeom g = make_geom(op, x, k, groups, stride, pad);
  if (bias) {
    const Tensor& b = bias->value();
    if (b.rank() != 1 || b.dim(0) != g.f) {
      throw ShapeError(std::string(op) + ": bias shape " + shape_string(b.shape()) +
                       " does not match " + std::to_string(g.f) + " filters");
    }
  }
  Tensor out = conv_forward(g, x, k, bias ? &bias->value() : nullptr);
  std::vector<Var> inputs{input, kernel};
  if (bias) inputs.push_back(*bias);
  return input.tape().record(
      op, std::move(out), std::move(inputs),
      [g, input, kernel, bias](Tape& tape, std::span<const double> dout) {
        double* dx = tape.needs_grad(input) ? tape.grad_of(input).data() : nullptr;
        double* dk = tape.needs_grad(kernel) ? tape.grad_of(kernel).data() : nullptr;
        double* db = (bias && tape.needs_grad(*bias)) ? tape.grad_of(*bias).data() : nullptr;
        conv_backward(g, input.value(), kernel.value(), dout, dx, dk, db);
      });
}

struct PoolGeom {
  std::size_t n, c, h, w, ph, pw, sh, sw, oh, ow;
};

PoolGeom make_pool(const char* op, const Tensor& x, Extent window, Extent stride) {
  require_rank(x, 4, op, "input");
  if (window.h == 0 || window.w == 0 || stride.h == 0 || stride.w == 0) {
    throw ShapeError(std::string(op) + ": window and stride must be >= 1");
  }
  if (window.h > x.dim(2) || window.w > x.dim(3)) {
    throw ShapeError(std::string(op) + ": window (" + std::to_string(window.h) + "," +
                     std::to_string(window.w) + ") larger than input " + shape_string(x.shape()));
  }
  PoolGeom g{x.dim(0), x.dim(1), x.dim(2), x.dim(3), window.h, window.w, stride.h, stride.w, 0, 0};
  g.oh = sliding_output(g.h, 0, 0, g.ph, g.sh);
  g.ow = sliding_output(g.w, 0, 0, g.pw, g.sw);
  return g;
}

}  // namespace

std::size_t sliding_output(std::size_t input, std::size_t pad_before, std::size_t pad_after,
                           std::size_t window, std::size_t stride) {
  const std::size_t padded = input + pad_before + pad_after;
  if (window == 0 || stride == 0 || window > padded) return 0;
  return (padded - window) / stride + 1;
}

Var conv2d(Var input, Var kernel, std::optional<Var> bias, Extent stride, Padding padding) {
  return grouped_conv("conv2d", input, kernel, bias, 1, stride, padding);
}

Var depthwise_conv2d(Var input, Var kernel, std::size_t depth_multiplier, Padding padding,
                     Extent stride) {
  const Tensor& x = input.value();
  const Tensor& k = kernel.value();
  require_rank(x, 4, "depthwise_conv2d", "input");
  require_rank(k, 4, "depthwise_conv2d", "kernel");
  if (k.dim(1) != 1) {
    throw ShapeError("depthwise_conv2d: kernel must have one input channel, got " +
                     shape_string(k.shape()));
  }
  if (depth_multiplier == 0 || k.dim(0) != x.dim(1) * depth_multiplier) {
    throw ShapeError("depthwise_conv2d: kernel count " + std::to_string(k.dim(0)) +
                     " is not " + std::to_string(depth_multiplier) + " x " +
                     std::to_string(x.dim(1)) + " input channels");
  }
  return grouped_conv("depthwise_conv2d", input, kernel, std::nullopt, 0, stride, padding);
}

Var separable_conv2d(Var input, Var depthwise_kernel, Var pointwise_kernel,
                     std::size_t depth_multiplier, Padding padding) {
  const Tensor& p = pointwise_kernel.value();
  require_rank(p, 4, "separable_conv2d", "pointwise kernel");
  if (p.dim(2) != 1 || p.dim(3) != 1) {
    throw ShapeError("separable_conv2d: pointwise kernel must be 1x1, got " +
                     shape_string(p.shape()));
  }
  Var depthwise = depthwise_conv2d(input, depthwise_kernel, depth_multiplier, padding);
  if (p.dim(1) != depthwise.value().dim(1)) {
    throw ShapeError("separable_conv2d: pointwise kernel expects " + std::to_string(p.dim(1)) +
                     " channels, depthwise stage produced " +
                     std::to_string(depthwise.value().dim(1)));
  }
  return conv2d(depthwise, pointwise_kernel, std::nullopt);
}

Var avg_pool2d(Var input, Extent window, Extent stride) {
  const Tensor& x = input.value();
  const PoolGeom g = make_pool("avg_pool2d", x, window, stride);
  const double scale = 1.0 / static_cast<double>(g.ph * g.pw);
  Tensor out(Shape{g.n, g.c, g.oh, g.ow});
  const double* xd = x.data().data();
  double* od = out.data().data();
  for (std::size_t p = 0; p < g.n * g.c; ++p) {
    const double* in = xd + p * g.h * g.w;
    double* o = od + p * g.oh * g.ow;
    for (std::size_t r = 0; r < g.oh; ++r) {
      for (std::size_t q = 0; q < g.ow; ++q) {
        double s = 0.0;
        for (std::size_t i = 0; i < g.ph; ++i) {
          const double* row = in + (r * g.sh + i) * g.w + q * g.sw;
          for (std::size_t j = 0; j < g.pw; ++j) s += row[j];
        }
        o[r * g.ow + q] = s * scale;
      }
    }
  }
  return input.tape().record(
      "avg_pool2d", std::move(out), {input}, [g, input, scale](Tape& tape, std::span<const double> dout) {
        double* dx = tape.grad_of(input).data();
        for (std::size_t p = 0; p < g.n * g.c; ++p) {
          double* din = dx + p * g.h * g.w;
          const double* go = dout.data() + p * g.oh * g.ow;
          for (std::size_t r = 0; r < g.oh; ++r) {
            for (std::size_t q = 0; q < g.ow; ++q) {
              const double v = go[r * g.ow + q] * scale;
              for (std::size_t i = 0; i < g.ph; ++i) {
                double* row = din + (r * g.sh + i) * g.w + q * g.sw;
                for (std::size_t j = 0; j < g.pw; ++j) row[j] += v;
              }
            }
          }
        }
      });
}

Var max_pool2d(Var input, Extent window, Extent stride) {
  const Tensor& x = input.value();
  const PoolGeom g = make_pool("max_pool2d", x, window, stride);
  Tensor out(Shape{g.n, g.c, g.oh, g.ow});
  auto argmax = std::make_shared<std::vector<std::size_t>>(out.size());
  const double* xd = x.data().data();
  for (std::size_t p = 0; p < g.n * g.c; ++p) {
    const std::size_t base = p * g.h * g.w;
    for (std::size_t r = 0; r < g.oh; ++r) {
      for (std::size_t q = 0; q < g.ow; ++q) {
        std::size_t best = base + (r * g.sh) * g.w + q * g.sw;
        for (std::size_t i = 0; i < g.ph; ++i) {
          for (std::size_t j = 0; j < g.pw; ++j) {
            const std::size_t idx = base + (r * g.sh + i) * g.w + q * g.sw + j;
            if (xd[idx] > xd[best]) best = idx;
          }
        }
        const std::size_t o = (p * g.oh + r) * g.ow + q;
        out[o] = xd[best];
        (*argmax)[o] = best;
      }
    }
  }
  return input.tape().record("max_pool2d", std::move(out), {input},
                             [input, argmax](Tape& tape, std::span<const double> dout) {
                               auto dx = tape.grad_of(input);
                               for (std::size_t o = 0; o < dout.size(); ++o) {
                                 dx[(*argmax)[o]] += dout[o];
                               }
                             });
}

Var elu(Var input) {
  const Tensor& x = input.value();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = x[i] > 0.0 ? x[i] : std::expm1(x[i]);
  }
  return input.tape().record("elu", std::move(out), {input},
                             [input](Tape& tape, std::span<const double> dout) {
                               const Tensor& xv = input.value();
                               auto dx = tape.grad_of(input);
                               for (std::size_t i = 0; i < dout.size(); ++i) {
                                 dx[i] += dout[i] * (xv[i] > 0.0 ? 1.0 : std::exp(xv[i]));
                               }
                             });
}

Var linear(Var input, Var weight, std::optional<Var> bias) {
  const Tensor& x = input.value();
  const Tensor& w = weight.value();
  require_rank(x, 2, "linear", "input");
  require_rank(w, 2, "linear", "weight");
  const std::size_t n = x.dim(0), k = x.dim(1), m = w.dim(0);
  if (w.dim(1) != k) {
    throw ShapeError("linear: input " + shape_string(x.shape()) + " incompatible with weight " +
                     shape_string(w.shape()));
  }
  if (bias && (bias->value().rank() != 1 || bias->value().dim(0) != m)) {
    throw ShapeError("linear: bias shape " + shape_string(bias->value().shape()) +
                     " does not match " + std::to_string(m) + " outputs");
  }
  Tensor out(Shape{n, m});
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t o = 0; o < m; ++o) {
      out[r * m + o] = dot(x.data().data() + r * k, w.data().data() + o * k, k) +
                       (bias ? bias->value()[o] : 0.0);
    }
  }
  std::vector<Var> inputs{input, weight};
  if (bias) inputs.push_back(*bias);
  return input.tape().record(
      "linear", std::move(out), std::move(inputs),
      [input, weight, bias, n, k, m](Tape& tape, std::span<const double> dout) {
        const double* xd = input.value().data().data();
        const double* wd = weight.value().data().data();
        if (tape.needs_grad(input)) {
          double* dx = tape.grad_of(input).data();
          for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t o = 0; o < m; ++o) axpy(dout[r * m + o], wd + o * k, dx + r * k, k);
          }
        }
        if (tape.needs_grad(weight)) {
          double* dw = tape.grad_of(weight).data();
          for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t o = 0; o < m; ++o) axpy(dout[r * m + o], xd + r * k, dw + o * k, k);
          }
        }
        if (bias && tape.needs_grad(*bias)) {
          auto db = tape.grad_of(*bias);
          for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t o = 0; o < m; ++o) db[o] += dout[r * m + o];
          }
        }
      });
}

Var log_softmax(Var logits) {
  const Tensor& x = logits.value();
  require_rank(x, 2, "log_softmax", "logits");
  const std::size_t n = x.dim(0), k = x.dim(1);
  Tensor out(x.shape());
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = x.data().data() + r * k;
    const double mx = *std::max_element(row, row + k);
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += std::exp(row[j] - mx);
    const double lse = mx + std::log(s);
    for (std::size_t j = 0; j < k; ++j) out[r * k + j] = row[j] - lse;
  }
  return logits.tape().record(
      "log_softmax", std::move(out), {logits}, [logits, n, k](Tape& tape, std::span<const double> dout) {
        const Tensor& xv = logits.value();
        auto dx = tape.grad_of(logits);
        std::vector<double> p(k);
        for (std::size_t r = 0; r < n; ++r) {
          const double* row = xv.data().data() + r * k;
          const double mx = *std::max_element(row, row + k);
          double s = 0.0;
          for (std::size_t j = 0; j < k; ++j) {
            p[j] = std::exp(row[j] - mx);
            s += p[j];
          }
          double gsum = 0.0;
          for (std::size_t j = 0; j < k; ++j) gsum += dout[r * k + j];
          for (std::size_t j = 0; j < k; ++j) dx[r * k + j] += dout[r * k + j] - (p[j] / s) * gsum;
        }
      });
}

Var dropout(Var input, double rate, Pcg32& rng, bool training) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ValueError("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (!training || rate == 0.0) return input;
  const Tensor& x = input.value();
  const double keep = 1.0 / (1.0 - rate);
  auto mask = std::make_shared<std::vector<double>>(x.size());
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    (*mask)[i] = rng.uniform() >= rate ? keep : 0.0;
    out[i] = x[i] * (*mask)[i];
  }
  return input.tape().record("dropout", std::move(out), {input},
                             [input, mask](Tape& tape, std::span<const double> dout) {
                               auto dx = tape.grad_of(input);
                               for (std::size_t i = 0; i < dout.size(); ++i) dx[i] += dout[i] * (*mask)[i];
                             });
}

Var reshape(Var input, Shape shape) {
  Tensor out = input.value().reshaped(std::move(shape));
  return input.tape().record("reshape", std::move(out), {input},
                             [input](Tape& tape, std::span<const double> dout) {
                               auto dx = tape.grad_of(input);
                               for (std::size_t i = 0; i < dout.size(); ++i) dx[i] += dout[i];
                             });
}

Var sum(Var input) {
  double s = 0.0;
  for (double v : input.value().data()) s += v;
  return input.tape().record("sum", Tensor::scalar(s), {input},
                             [input](Tape& tape, std::span<const double> dout) {
                               auto dx = tape.grad_of(input);
                               for (auto& v : dx) v += dout[0];
                             });
}

Var mul(Var a, Var b) {
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  if (x.shape() != y.shape()) {
    throw ShapeError("mul: shapes " + shape_string(x.shape()) + " and " +
                     shape_string(y.shape()) + " differ");
  }
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
  return a.tape().record("mul", std::move(out), {a, b},
                         [a, b](Tape& tape, std::span<const double> dout) {
                           const Tensor& xa = a.value();
                           const Tensor& xb = b.value();
                           if (tape.needs_grad(a)) {
                             auto da = tape.grad_of(a);
                             for (std::size_t i = 0; i < dout.size(); ++i) da[i] += dout[i] * xb[i];
                           }
                           if (tape.needs_grad(b)) {
                             auto db = tape.grad_of(b);
                             for (std::size_t i = 0; i < dout.size(); ++i) db[i] += dout[i] * xa[i];
                           }
                         });
}

}  // namespace fingermi
