#include "docforensics/net/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace docforensics::net {

std::string shape_string(const std::vector<int>& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ')';
  return os.str();
}

// ---------------------------------------------------------------- convolution

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride, int pad) {
  if (x.shape.size() != 3 || w.shape.size() != 4 || w.dim(1) != x.dim(0) || w.dim(2) != w.dim(3) ||
      b.size() != static_cast<std::size_t>(w.dim(0))) {
    throw ShapeMismatch("conv2d: input " + shape_string(x.shape) + " weight " + shape_string(w.shape));
  }
  const int cin = x.dim(0), H = x.dim(1), W = x.dim(2), cout = w.dim(0), k = w.dim(2);
  const int oh = (H + 2 * pad - k) / stride + 1, ow = (W + 2 * pad - k) / stride + 1;
  Tensor<T> y({cout, oh, ow});
  for (int co = 0; co < cout; ++co) {
    T* out = &y.data[static_cast<std::size_t>(co) * oh * ow];
    std::fill(out, out + oh * ow, b[co]);
    for (int ci = 0; ci < cin; ++ci)
      for (int ky = 0; ky < k; ++ky)
        for (int kx = 0; kx < k; ++kx) {
          const T wv = w.data[((static_cast<std::size_t>(co) * cin + ci) * k + ky) * k + kx];
          for (int oy = 0; oy < oh; ++oy) {
            const int iy = oy * stride - pad + ky;
            if (iy < 0 || iy >= H) continue;
            const T* row = &x.data[(static_cast<std::size_t>(ci) * H + iy) * W];
            T* orow = out + static_cast<std::size_t>(oy) * ow;
            for (int ox = 0; ox < ow; ++ox) {
              const int ix = ox * stride - pad + kx;
              if (ix >= 0 && ix < W) orow[ox] += wv * row[ix];
            }
          }
        }
  }
  return y;
}

template <typename T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& w, int stride, int pad, const Tensor<T>& gout,
                     Tensor<T>* gx, Tensor<T>& gw, Tensor<T>& gb) {
  const int cin = x.dim(0), H = x.dim(1), W = x.dim(2), cout = w.dim(0), k = w.dim(2);
  const int oh = gout.dim(1), ow = gout.dim(2);
  if (gx) *gx = Tensor<T>(x.shape);
  for (int co = 0; co < cout; ++co) {
    const T* g = &gout.data[static_cast<std::size_t>(co) * oh * ow];
    T bsum = 0;
    for (int i = 0; i < oh * ow; ++i) bsum += g[i];
    gb[co] += bsum;
    for (int ci = 0; ci < cin; ++ci)
      for (int ky = 0; ky < k; ++ky)
        for (int kx = 0; kx < k; ++kx) {
          const std::size_t widx = ((static_cast<std::size_t>(co) * cin + ci) * k + ky) * k + kx;
          const T wv = w.data[widx];
          T acc = 0;
          for (int oy = 0; oy < oh; ++oy) {
            const int iy = oy * stride - pad + ky;
            if (iy < 0 || iy >= H) continue;
            const std::size_t rbase = (static_cast<std::size_t>(ci) * H + iy) * W;
            const T* grow = g + static_cast<std::size_t>(oy) * ow;
            for (int ox = 0; ox < ow; ++ox) {
              const int ix = ox * stride - pad + kx;
              if (ix < 0 || ix >= W) continue;
              acc += grow[ox] * x.data[rbase + ix];
              if (gx) gx->data[rbase + ix] += wv * grow[ox];
            }
          }
          gw.data[widx] += acc;
        }
  }
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> y = x;
  for (auto& v : y.data) v = v > T(0) ? v : T(0);
  return y;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& y, const Tensor<T>& gout) {
  Tensor<T> g = gout;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!(y.data[i] > T(0))) g.data[i] = 0;
  return g;
}

template <typename T>
Tensor<T> conv_block_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  return relu(conv2d(x, w, b, 2, 1));
}

// ---------------------------------------------------------------- squeeze-excitation

template <typename T>
Tensor<T> se_block(const Tensor<T>& x, const SeParams<T>& p, SeCache<T>* cache) {
  if (x.shape.size() != 3) throw ShapeMismatch("se_block: expected (C,H,W), got " + shape_string(x.shape));
  const int C = x.dim(0), HW = x.dim(1) * x.dim(2);
  const int hidden = p.w1.shape.empty() ? 0 : p.w1.dim(0);
  if (p.w1.shape != std::vector<int>{hidden, C} || p.w2.shape != std::vector<int>{C, hidden} ||
      static_cast<int>(p.b1.size()) != hidden || static_cast<int>(p.b2.size()) != C) {
    throw ShapeMismatch("se_block: parameters do not match " + std::to_string(C) + " channels");
  }
  SeCache<T> local;
  SeCache<T>& c = cache ? *cache : local;
  c.pooled.assign(C, T(0));
  for (int ch = 0; ch < C; ++ch) {
    T s = 0;
    for (int i = 0; i < HW; ++i) s += x.data[static_cast<std::size_t>(ch) * HW + i];
    c.pooled[ch] = s / HW;
  }
  c.hidden.assign(hidden, T(0));
  for (int h = 0; h < hidden; ++h) {
    T z = p.b1[h];
    for (int ch = 0; ch < C; ++ch) z += p.w1.data[static_cast<std::size_t>(h) * C + ch] * c.pooled[ch];
    c.hidden[h] = z > T(0) ? z : T(0);
  }
  c.scale.assign(C, T(0));
  for (int ch = 0; ch < C; ++ch) {
    T u = p.b2[ch];
    for (int h = 0; h < hidden; ++h) u += p.w2.data[static_cast<std::size_t>(ch) * hidden + h] * c.hidden[h];
    c.scale[ch] = static_cast<T>(sigmoid(static_cast<double>(u)));
  }
  Tensor<T> y = x;
  for (int ch = 0; ch < C; ++ch)
    for (int i = 0; i < HW; ++i) y.data[static_cast<std::size_t>(ch) * HW + i] *= c.scale[ch];
  return y;
}

template <typename T>
void se_block_backward(const Tensor<T>& x, const SeParams<T>& p, const SeCache<T>& c, const Tensor<T>& gout,
                       Tensor<T>& gx, SeParams<T>& g) {
  const int C = x.dim(0), HW = x.dim(1) * x.dim(2);
  const int hidden = p.w1.dim(0);
  gx = Tensor<T>(x.shape);
  std::vector<T> gscale(C, T(0));
  for (int ch = 0; ch < C; ++ch) {
    T acc = 0;
    for (int i = 0; i < HW; ++i) {
      const std::size_t idx = static_cast<std::size_t>(ch) * HW + i;
      acc += gout.data[idx] * x.data[idx];
      gx.data[idx] = gout.data[idx] * c.scale[ch];
    }
    gscale[ch] = acc;
  }
  std::vector<T> gu(C), ghidden(hidden, T(0));
  for (int ch = 0; ch < C; ++ch) {
    gu[ch] = gscale[ch] * c.scale[ch] * (T(1) - c.scale[ch]);
    g.b2[ch] += gu[ch];
    for (int h = 0; h < hidden; ++h) {
      g.w2.data[static_cast<std::size_t>(ch) * hidden + h] += gu[ch] * c.hidden[h];
      ghidden[h] += gu[ch] * p.w2.data[static_cast<std::size_t>(ch) * hidden + h];
    }
  }
  std::vector<T> gpooled(C, T(0));
  for (int h = 0; h < hidden; ++h) {
    if (!(c.hidden[h] > T(0))) continue;
    g.b1[h] += ghidden[h];
    for (int ch = 0; ch < C; ++ch) {
      g.w1.data[static_cast<std::size_t>(h) * C + ch] += ghidden[h] * c.pooled[ch];
      gpooled[ch] += ghidden[h] * p.w1.data[static_cast<std::size_t>(h) * C + ch];
    }
  }
  for (int ch = 0; ch < C; ++ch) {
    const T share = gpooled[ch] / HW;
    for (int i = 0; i < HW; ++i) gx.data[static_cast<std::size_t>(ch) * HW + i] += share;
  }
}

// ---------------------------------------------------------------- similarity detection

namespace {

// Descriptors as rows: out[n*C + c] = f[c, n].
template <typename T>
std::vector<T> descriptors(const Tensor<T>& f) {
  const int C = f.dim(0), N = f.dim(1) * f.dim(2);
  std::vector<T> d(static_cast<std::size_t>(N) * C);
  for (int c = 0; c < C; ++c)
    for (int n = 0; n < N; ++n) d[static_cast<std::size_t>(n) * C + c] = f.data[static_cast<std::size_t>(c) * N + n];
  return d;
}

template <typename T>
T norm_of(const T* v, int n) {
  T s = 0;
  for (int i = 0; i < n; ++i) s += v[i] * v[i];
  return std::sqrt(s);
}

}  // namespace

template <typename T>
std::vector<T> l2_normalize(const std::vector<T>& x) {
  const T n = std::max(norm_of(x.data(), static_cast<int>(x.size())), static_cast<T>(kNormEps));
  std::vector<T> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] / n;
  return y;
}

template <typename T>
std::vector<T> l2_normalize_backward(const std::vector<T>& x, const std::vector<T>& gout) {
  const T n = norm_of(x.data(), static_cast<int>(x.size()));
  std::vector<T> g(x.size());
  if (!(n > static_cast<T>(kNormEps))) {
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = gout[i] / static_cast<T>(kNormEps);
    return g;
  }
  T dot = 0;
  for (std::size_t i = 0; i < x.size(); ++i) dot += gout[i] * x[i];
  dot /= n;  // g . y
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = (gout[i] - dot * x[i] / n) / n;
  return g;
}

template <typename T>
Tensor<T> self_correlation(const Tensor<T>& f) {
  if (f.shape.size() != 3 || f.dim(0) < 1) throw ShapeMismatch("self_correlation: expected (C,H,W)");
  const int C = f.dim(0), H = f.dim(1), W = f.dim(2), N = H * W;
  auto d = descriptors(f);
  for (int n = 0; n < N; ++n) {
    T* v = &d[static_cast<std::size_t>(n) * C];
    const T len = std::max(norm_of(v, C), static_cast<T>(kNormEps));
    for (int c = 0; c < C; ++c) v[c] /= len;
  }
  Tensor<T> out({N, H, W});
  for (int n = 0; n < N; ++n)
    for (int m = n; m < N; ++m) {
      T s = 0;
      const T* a = &d[static_cast<std::size_t>(n) * C];
      const T* b = &d[static_cast<std::size_t>(m) * C];
      for (int c = 0; c < C; ++c) s += a[c] * b[c];
      out.data[static_cast<std::size_t>(n) * N + m] = s;
      out.data[static_cast<std::size_t>(m) * N + n] = s;
    }
  return out;
}

template <typename T>
Tensor<T> self_correlation_backward(const Tensor<T>& f, const Tensor<T>& gout) {
  const int C = f.dim(0), N = f.dim(1) * f.dim(2);
  const auto raw = descriptors(f);
  std::vector<T> d = raw;
  for (int n = 0; n < N; ++n) {
    T* v = &d[static_cast<std::size_t>(n) * C];
    const T len = std::max(norm_of(v, C), static_cast<T>(kNormEps));
    for (int c = 0; c < C; ++c) v[c] /= len;
  }
  Tensor<T> gf(f.shape);
  std::vector<T> gd(C), x(C);
  for (int n = 0; n < N; ++n) {
    std::fill(gd.begin(), gd.end(), T(0));
    for (int m = 0; m < N; ++m) {
      const T w = gout.data[static_cast<std::size_t>(n) * N + m] + gout.data[static_cast<std::size_t>(m) * N + n];
      const T* dm = &d[static_cast<std::size_t>(m) * C];
      for (int c = 0; c < C; ++c) gd[c] += w * dm[c];
    }
    std::copy_n(&raw[static_cast<std::size_t>(n) * C], C, x.begin());
    const auto g = l2_normalize_backward(x, gd);
    for (int c = 0; c < C; ++c) gf.data[static_cast<std::size_t>(c) * N + n] = g[c];
  }
  return gf;
}

int percentile_index(int k, int K, int N) {
  if (K <= 1) return 0;
  return static_cast<int>(std::lround(static_cast<double>(k) * (N - 1) / (K - 1)));
}

namespace {

template <typename T>
std::vector<int> descending_order(const Tensor<T>& corr, int loc, int N, int HW) {
  std::vector<int> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return corr.data[static_cast<std::size_t>(a) * HW + loc] > corr.data[static_cast<std::size_t>(b) * HW + loc];
  });
  return order;
}

}  // namespace

template <typename T>
Tensor<T> percentile_pool(const Tensor<T>& corr, int K, std::vector<int>* selected) {
  if (corr.shape.size() != 3) throw ShapeMismatch("percentile_pool: expected (N,H,W)");
  const int N = corr.dim(0), H = corr.dim(1), W = corr.dim(2), HW = H * W;
  if (K < 1 || K > N) throw ShapeMismatch("percentile_pool: K must lie in [1, N]");
  Tensor<T> out({K, H, W});
  if (selected) selected->assign(static_cast<std::size_t>(K) * HW, 0);
  for (int loc = 0; loc < HW; ++loc) {
    const auto order = descending_order(corr, loc, N, HW);
    for (int k = 0; k < K; ++k) {
      const int src = order[percentile_index(k, K, N)];
      out.data[static_cast<std::size_t>(k) * HW + loc] = corr.data[static_cast<std::size_t>(src) * HW + loc];
      if (selected) (*selected)[static_cast<std::size_t>(k) * HW + loc] = src;
    }
  }
  return out;
}

template <typename T>
Tensor<T> percentile_pool_backward(const std::vector<int>& selected, const std::vector<int>& corr_shape,
                                   const Tensor<T>& gout) {
  Tensor<T> g(corr_shape);
  const int HW = corr_shape[1] * corr_shape[2];
  const int K = gout.dim(0);
  for (int k = 0; k < K; ++k)
    for (int loc = 0; loc < HW; ++loc) {
      const std::size_t o = static_cast<std::size_t>(k) * HW + loc;
      g.data[static_cast<std::size_t>(selected[o]) * HW + loc] += gout.data[o];
    }
  return g;
}

template <typename T>
double percentile_tie_gap(const Tensor<T>& corr, int K) {
  const int N = corr.dim(0), HW = corr.dim(1) * corr.dim(2);
  double gap = std::numeric_limits<double>::infinity();
  for (int loc = 0; loc < HW; ++loc) {
    const auto order = descending_order(corr, loc, N, HW);
    auto value = [&](int rank) { return static_cast<double>(corr.data[static_cast<std::size_t>(order[rank]) * HW + loc]); };
    for (int k = 0; k < K; ++k) {
      const int r = percentile_index(k, K, N);
      if (r > 0) gap = std::min(gap, value(r - 1) - value(r));
      if (r + 1 < N) gap = std::min(gap, value(r) - value(r + 1));
    }
  }
  return gap;
}

// ---------------------------------------------------------------- NetVLAD

namespace {

template <typename T>
struct VladForward {
  std::vector<T> assign;  // (N, K)
  std::vector<T> v;       // (K, D) raw residual sums
  std::vector<T> intra;   // (K, D) after per-cluster normalization
};

template <typename T>
VladForward<T> vlad_core(const std::vector<T>& x, int N, int D, const Tensor<T>& centers, double alpha) {
  const int K = centers.dim(0);
  VladForward<T> r;
  r.assign.assign(static_cast<std::size_t>(N) * K, T(0));
  std::vector<T> logit(K);
  for (int n = 0; n < N; ++n) {
    const T* xn = &x[static_cast<std::size_t>(n) * D];
    for (int k = 0; k < K; ++k) {
      T d2 = 0;
      for (int j = 0; j < D; ++j) {
        const T diff = xn[j] - centers.data[static_cast<std::size_t>(k) * D + j];
        d2 += diff * diff;
      }
      logit[k] = static_cast<T>(-alpha) * d2;
    }
    const T mx = *std::max_element(logit.begin(), logit.end());
    T z = 0;
    for (int k = 0; k < K; ++k) z += std::exp(logit[k] - mx);
    for (int k = 0; k < K; ++k) r.assign[static_cast<std::size_t>(n) * K + k] = std::exp(logit[k] - mx) / z;
  }
  r.v.assign(static_cast<std::size_t>(K) * D, T(0));
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < K; ++k) {
      const T a = r.assign[static_cast<std::size_t>(n) * K + k];
      for (int j = 0; j < D; ++j)
        r.v[static_cast<std::size_t>(k) * D + j] +=
            a * (x[static_cast<std::size_t>(n) * D + j] - centers.data[static_cast<std::size_t>(k) * D + j]);
    }
  r.intra.resize(r.v.size());
  for (int k = 0; k < K; ++k) {
    std::vector<T> vk(r.v.begin() + static_cast<std::ptrdiff_t>(k) * D, r.v.begin() + static_cast<std::ptrdiff_t>(k + 1) * D);
    const auto nk = l2_normalize(vk);
    std::copy(nk.begin(), nk.end(), r.intra.begin() + static_cast<std::ptrdiff_t>(k) * D);
  }
  return r;
}

}  // namespace

template <typename T>
Tensor<T> netvlad(const Tensor<T>& f, const Tensor<T>& centers, double alpha) {
  if (f.shape.size() != 3 || centers.shape.size() != 2 || centers.dim(1) != f.dim(0)) {
    throw ShapeMismatch("netvlad: features " + shape_string(f.shape) + " centers " + shape_string(centers.shape));
  }
  const int D = f.dim(0), N = f.dim(1) * f.dim(2), K = centers.dim(0);
  const auto r = vlad_core(descriptors(f), N, D, centers, alpha);
  Tensor<T> out({K * D});
  out.data = l2_normalize(r.intra);
  return out;
}

template <typename T>
void netvlad_backward(const Tensor<T>& f, const Tensor<T>& centers, double alpha, const Tensor<T>& gout,
                      Tensor<T>& gf, Tensor<T>& gcenters) {
  const int D = f.dim(0), N = f.dim(1) * f.dim(2), K = centers.dim(0);
  const auto x = descriptors(f);
  const auto r = vlad_core(x, N, D, centers, alpha);

  const auto gintra = l2_normalize_backward(r.intra, gout.data);
  std::vector<T> gv(r.v.size());
  for (int k = 0; k < K; ++k) {
    std::vector<T> vk(r.v.begin() + static_cast<std::ptrdiff_t>(k) * D, r.v.begin() + static_cast<std::ptrdiff_t>(k + 1) * D);
    std::vector<T> gk(gintra.begin() + static_cast<std::ptrdiff_t>(k) * D, gintra.begin() + static_cast<std::ptrdiff_t>(k + 1) * D);
    const auto g = l2_normalize_backward(vk, gk);
    std::copy(g.begin(), g.end(), gv.begin() + static_cast<std::ptrdiff_t>(k) * D);
  }

  std::vector<T> gx(x.size(), T(0));
  std::vector<T> ga(K), glogit(K);
  for (int n = 0; n < N; ++n) {
    const T* xn = &x[static_cast<std::size_t>(n) * D];
    for (int k = 0; k < K; ++k) {
      const T a = r.assign[static_cast<std::size_t>(n) * K + k];
      T dot = 0;
      for (int j = 0; j < D; ++j) {
        const T res = xn[j] - centers.data[static_cast<std::size_t>(k) * D + j];
        const T g = gv[static_cast<std::size_t>(k) * D + j];
        dot += g * res;
        gx[static_cast<std::size_t>(n) * D + j] += a * g;
        gcenters.data[static_cast<std::size_t>(k) * D + j] -= a * g;
      }
      ga[k] = dot;
    }
    T mean = 0;
    for (int k = 0; k < K; ++k) mean += r.assign[static_cast<std::size_t>(n) * K + k] * ga[k];
    for (int k = 0; k < K; ++k) glogit[k] = r.assign[static_cast<std::size_t>(n) * K + k] * (ga[k] - mean);
    for (int k = 0; k < K; ++k) {
      const T s = static_cast<T>(2.0 * alpha) * glogit[k];
      for (int j = 0; j < D; ++j) {
        const T res = xn[j] - centers.data[static_cast<std::size_t>(k) * D + j];
        gx[static_cast<std::size_t>(n) * D + j] -= s * res;
        gcenters.data[static_cast<std::size_t>(k) * D + j] += s * res;
      }
    }
  }
  gf = Tensor<T>(f.shape);
  for (int c = 0; c < D; ++c)
    for (int n = 0; n < N; ++n) gf.data[static_cast<std::size_t>(c) * N + n] = gx[static_cast<std::size_t>(n) * D + c];
}

// ---------------------------------------------------------------- head and plumbing

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  if (w.shape.size() != 2 || static_cast<std::size_t>(w.dim(1)) != x.size() ||
      b.size() != static_cast<std::size_t>(w.dim(0))) {
    throw ShapeMismatch("linear: input of " + std::to_string(x.size()) + " values, weight " + shape_string(w.shape));
  }
  const int m = w.dim(0), n = w.dim(1);
  Tensor<T> y({m});
  for (int i = 0; i < m; ++i) {
    T s = b[i];
    for (int j = 0; j < n; ++j) s += w.data[static_cast<std::size_t>(i) * n + j] * x.data[j];
    y.data[i] = s;
  }
  return y;
}

template <typename T>
void linear_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& gout, Tensor<T>& gx, Tensor<T>& gw,
                     Tensor<T>& gb) {
  const int m = w.dim(0), n = w.dim(1);
  gx = Tensor<T>(x.shape);
  for (int i = 0; i < m; ++i) {
    gb.data[i] += gout.data[i];
    for (int j = 0; j < n; ++j) {
      gw.data[static_cast<std::size_t>(i) * n + j] += gout.data[i] * x.data[j];
      gx.data[j] += gout.data[i] * w.data[static_cast<std::size_t>(i) * n + j];
    }
  }
}

template <typename T>
Tensor<T> global_avgpool(const Tensor<T>& x) {
  const int C = x.dim(0), HW = x.dim(1) * x.dim(2);
  Tensor<T> y({C});
  for (int c = 0; c < C; ++c) {
    T s = 0;
    for (int i = 0; i < HW; ++i) s += x.data[static_cast<std::size_t>(c) * HW + i];
    y.data[c] = s / HW;
  }
  return y;
}

template <typename T>
Tensor<T> global_avgpool_backward(const std::vector<int>& x_shape, const Tensor<T>& gout) {
  Tensor<T> g(x_shape);
  const int C = x_shape[0], HW = x_shape[1] * x_shape[2];
  for (int c = 0; c < C; ++c)
    for (int i = 0; i < HW; ++i) g.data[static_cast<std::size_t>(c) * HW + i] = gout.data[c] / HW;
  return g;
}

template <typename T>
Tensor<T> concat_channels(const std::vector<const Tensor<T>*>& parts) {
  int C = 0;
  for (const auto* p : parts) {
    if (p->dim(1) != parts[0]->dim(1) || p->dim(2) != parts[0]->dim(2)) throw ShapeMismatch("concat: spatial sizes differ");
    C += p->dim(0);
  }
  Tensor<T> out({C, parts[0]->dim(1), parts[0]->dim(2)});
  auto it = out.data.begin();
  for (const auto* p : parts) it = std::copy(p->data.begin(), p->data.end(), it);
  return out;
}

template <typename T>
std::vector<Tensor<T>> split_channels(const Tensor<T>& x, const std::vector<int>& channels) {
  std::vector<Tensor<T>> out;
  const std::size_t plane = static_cast<std::size_t>(x.dim(1)) * x.dim(2);
  auto it = x.data.begin();
  for (int c : channels) {
    Tensor<T> t({c, x.dim(1), x.dim(2)});
    std::copy(it, it + static_cast<std::ptrdiff_t>(c * plane), t.data.begin());
    it += static_cast<std::ptrdiff_t>(c * plane);
    out.push_back(std::move(t));
  }
  return out;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double bce_with_logit(double logit, int label, double* grad) {
  const double p = sigmoid(logit);
  if (grad) *grad = p - label;
  // log(1 + exp(-|z|)) + max(z, 0) - z*y
  return std::log1p(std::exp(-std::abs(logit))) + std::max(logit, 0.0) - logit * label;
}

#define INSTANTIATE(T)                                                                                          \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, int);                  \
  template void conv2d_backward(const Tensor<T>&, const Tensor<T>&, int, int, const Tensor<T>&, Tensor<T>*,    \
                                Tensor<T>&, Tensor<T>&);                                                       \
  template Tensor<T> relu(const Tensor<T>&);                                                                   \
  template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);                                        \
  template Tensor<T> conv_block_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                 \
  template Tensor<T> se_block(const Tensor<T>&, const SeParams<T>&, SeCache<T>*);                              \
  template void se_block_backward(const Tensor<T>&, const SeParams<T>&, const SeCache<T>&, const Tensor<T>&,   \
                                  Tensor<T>&, SeParams<T>&);                                                   \
  template Tensor<T> self_correlation(const Tensor<T>&);                                                       \
  template Tensor<T> self_correlation_backward(const Tensor<T>&, const Tensor<T>&);                            \
  template Tensor<T> percentile_pool(const Tensor<T>&, int, std::vector<int>*);                                \
  template Tensor<T> percentile_pool_backward(const std::vector<int>&, const std::vector<int>&,                \
                                              const Tensor<T>&);                                               \
  template double percentile_tie_gap(const Tensor<T>&, int);                                                   \
  template Tensor<T> netvlad(const Tensor<T>&, const Tensor<T>&, double);                                      \
  template void netvlad_backward(const Tensor<T>&, const Tensor<T>&, double, const Tensor<T>&, Tensor<T>&,     \
                                 Tensor<T>&);                                                                  \
  template std::vector<T> l2_normalize(const std::vector<T>&);                                                 \
  template std::vector<T> l2_normalize_backward(const std::vector<T>&, const std::vector<T>&);                 \
  template Tensor<T> linear(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                             \
  template void linear_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&, Tensor<T>&,  \
                                Tensor<T>&);                                                                   \
  template Tensor<T> global_avgpool(const Tensor<T>&);                                                         \
  template Tensor<T> global_avgpool_backward(const std::vector<int>&, const Tensor<T>&);                       \
  template Tensor<T> concat_channels(const std::vector<const Tensor<T>*>&);                                    \
  template std::vector<Tensor<T>> split_channels(const Tensor<T>&, const std::vector<int>&);

INSTANTIATE(float)
INSTANTIATE(double)

#undef INSTANTIATE

}  // namespace docforensics::net
