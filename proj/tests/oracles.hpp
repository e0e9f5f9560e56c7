#pragma once

// Brute-force reference implementations used by the tests. They share no
// code with the library beyond the container types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "docforensics/image.hpp"
#include "docforensics/net/tensor.hpp"

namespace oracle {

using docforensics::net::Tensor;

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / (std::max(std::sqrt(na), 1e-12) * std::max(std::sqrt(nb), 1e-12));
}

inline std::vector<double> descriptor(const Tensor<double>& f, int i, int j) {
  std::vector<double> d(f.shape[0]);
  for (int c = 0; c < f.shape[0]; ++c) d[c] = f.at(c, i, j);
  return d;
}

/// out[n, i, j] for n = row-major index (p, q).
inline Tensor<double> self_correlation(const Tensor<double>& f) {
  const int H = f.shape[1], W = f.shape[2];
  Tensor<double> out({H * W, H, W});
  for (int p = 0; p < H; ++p)
    for (int q = 0; q < W; ++q)
      for (int i = 0; i < H; ++i)
        for (int j = 0; j < W; ++j) out.at(p * W + q, i, j) = cosine(descriptor(f, p, q), descriptor(f, i, j));
  return out;
}

inline Tensor<double> percentile_pool(const Tensor<double>& corr, int K) {
  const int N = corr.shape[0], H = corr.shape[1], W = corr.shape[2];
  Tensor<double> out({K, H, W});
  for (int i = 0; i < H; ++i)
    for (int j = 0; j < W; ++j) {
      std::vector<std::pair<double, int>> v;
      for (int n = 0; n < N; ++n) v.push_back({corr.at(n, i, j), n});
      std::sort(v.begin(), v.end(), [](auto a, auto b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
      for (int k = 0; k < K; ++k) {
        const double p = K == 1 ? 0.0 : static_cast<double>(k) / (K - 1);
        const int idx = static_cast<int>(std::floor(p * (N - 1) + 0.5));
        out.at(k, i, j) = v[idx].first;
      }
    }
  return out;
}

inline std::vector<double> netvlad(const std::vector<std::vector<double>>& xs,
                                   const std::vector<std::vector<double>>& centers, double alpha) {
  const std::size_t K = centers.size(), D = centers[0].size();
  std::vector<std::vector<double>> V(K, std::vector<double>(D, 0.0));
  for (const auto& x : xs) {
    std::vector<double> w(K);
    double z = 0;
    for (std::size_t k = 0; k < K; ++k) {
      double d2 = 0;
      for (std::size_t j = 0; j < D; ++j) d2 += (x[j] - centers[k][j]) * (x[j] - centers[k][j]);
      w[k] = std::exp(-alpha * d2);
      z += w[k];
    }
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t j = 0; j < D; ++j) V[k][j] += w[k] / z * (x[j] - centers[k][j]);
  }
  std::vector<double> flat;
  for (auto& vk : V) {
    double n = 0;
    for (double v : vk) n += v * v;
    n = std::max(std::sqrt(n), 1e-12);
    for (double v : vk) flat.push_back(v / n);
  }
  double n = 0;
  for (double v : flat) n += v * v;
  n = std::max(std::sqrt(n), 1e-12);
  for (double& v : flat) v /= n;
  return flat;
}

/// 2-D DCT-II straight from the definition.
inline std::vector<double> dct8x8(const std::vector<double>& px) {
  const double pi = std::acos(-1.0);
  std::vector<double> out(64);
  for (int v = 0; v < 8; ++v)
    for (int u = 0; u < 8; ++u) {
      double s = 0;
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
          s += px[y * 8 + x] * std::cos((2 * x + 1) * u * pi / 16) * std::cos((2 * y + 1) * v * pi / 16);
      const double cu = u == 0 ? std::sqrt(1.0 / 8) : std::sqrt(2.0 / 8);
      const double cv = v == 0 ? std::sqrt(1.0 / 8) : std::sqrt(2.0 / 8);
      out[v * 8 + u] = cu * cv * s;
    }
  return out;
}

inline double bt601(const docforensics::Raster& img, int x, int y) {
  return 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
}

/// |luma - median of the 3x3 neighbourhood| with edge replication, 8-bit units.
inline std::vector<double> median_residual(const docforensics::Raster& img) {
  const int W = img.width(), H = img.height();
  std::vector<double> out(static_cast<std::size_t>(W) * H);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      std::vector<double> win;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          win.push_back(bt601(img, std::clamp(x + dx, 0, W - 1), std::clamp(y + dy, 0, H - 1)));
      std::sort(win.begin(), win.end());
      out[static_cast<std::size_t>(y) * W + x] = std::abs(bt601(img, x, y) - win[4]);
    }
  return out;
}

/// Truncated |k * luma| for the three high-pass kernels, edge replication,
/// max-normalized per plane. Kernels written out from the literature.
inline std::vector<std::vector<double>> srm(const docforensics::Raster& img, double T) {
  static const double first[5][5] = {{0, 0, 0, 0, 0}, {0, 0, 0, 0, 0}, {0, 0, -1, 1, 0}, {0, 0, 0, 0, 0}, {0, 0, 0, 0, 0}};
  static const double second[5][5] = {{0, 0, 0, 0, 0}, {0, 0, 0, 0, 0}, {0, 0.5, -1, 0.5, 0}, {0, 0, 0, 0, 0}, {0, 0, 0, 0, 0}};
  static const double kv[5][5] = {{-1, 2, -2, 2, -1}, {2, -6, 8, -6, 2}, {-2, 8, -12, 8, -2}, {2, -6, 8, -6, 2}, {-1, 2, -2, 2, -1}};
  const int W = img.width(), H = img.height();
  std::vector<std::vector<double>> planes;
  for (int k = 0; k < 3; ++k) {
    std::vector<double> p(static_cast<std::size_t>(W) * H);
    double mx = 0;
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        double acc = 0;
        for (int j = 0; j < 5; ++j)
          for (int i = 0; i < 5; ++i) {
            const double w = k == 0 ? first[j][i] : k == 1 ? second[j][i] : kv[j][i] / 12.0;
            acc += w * bt601(img, std::clamp(x + i - 2, 0, W - 1), std::clamp(y + j - 2, 0, H - 1));
          }
        p[static_cast<std::size_t>(y) * W + x] = std::min(std::abs(acc), T);
        mx = std::max(mx, p[static_cast<std::size_t>(y) * W + x]);
      }
    if (mx > 0)
      for (double& v : p) v /= mx;
    planes.push_back(std::move(p));
  }
  return planes;
}

/// Every (possibly overlapping) start offset of `needle` in `hay`.
inline std::vector<std::size_t> find_all(const std::vector<std::uint8_t>& hay, const std::string& needle) {
  std::vector<std::size_t> out;
  if (needle.empty() || hay.size() < needle.size()) return out;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    bool ok = true;
    for (std::size_t j = 0; j < needle.size() && ok; ++j) ok = hay[i + j] == static_cast<std::uint8_t>(needle[j]);
    if (ok) out.push_back(i);
  }
  return out;
}

/// num/den rounded half-up to 4 decimals, computed in integers.
inline double ratio4(long num, long den) {
  const long long scaled = (static_cast<long long>(num) * 100000 / den + 5) / 10;
  return static_cast<double>(scaled) / 10000.0;
}

}  // namespace oracle
