#pragma once

// Layer kernels with hand-written backward passes. Every function is
// instantiated for float (training) and double (gradient checks).
// Backward functions accumulate parameter gradients (+=) and overwrite input
// gradients.

#include <vector>

#include "docforensics/net/tensor.hpp"

namespace docforensics::net {

inline constexpr double kNormEps = 1e-12;

// ---------------------------------------------------------------- convolution

/// x (Cin,H,W), w (Cout,Cin,k,k), b (Cout). Zero padding.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride, int pad);

template <typename T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& w, int stride, int pad, const Tensor<T>& gout,
                     Tensor<T>* gx, Tensor<T>& gw, Tensor<T>& gb);

template <typename T>
Tensor<T> relu(const Tensor<T>& x);

/// Gradient through ReLU given its output.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& y, const Tensor<T>& gout);

/// 3x3 conv, stride 2, pad 1, then ReLU.
template <typename T>
Tensor<T> conv_block_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b);

// ---------------------------------------------------------------- squeeze-excitation

template <typename T>
struct SeParams {
  Tensor<T> w1, b1;  // (C/r, C), (C/r)
  Tensor<T> w2, b2;  // (C, C/r), (C)
};

template <typename T>
struct SeCache {
  std::vector<T> pooled, hidden, scale;  // gap(x), relu(W1 g + b1), sigmoid(W2 h + b2)
};

template <typename T>
Tensor<T> se_block(const Tensor<T>& x, const SeParams<T>& p, SeCache<T>* cache = nullptr);

template <typename T>
void se_block_backward(const Tensor<T>& x, const SeParams<T>& p, const SeCache<T>& cache, const Tensor<T>& gout,
                       Tensor<T>& gx, SeParams<T>& grads);

// ---------------------------------------------------------------- similarity detection

/// f (C,H,W) -> (N,H,W), N = H*W; out[n,i,j] = <d_n, d_(i,j)> with d = f / max(|f|, eps).
template <typename T>
Tensor<T> self_correlation(const Tensor<T>& f);

template <typename T>
Tensor<T> self_correlation_backward(const Tensor<T>& f, const Tensor<T>& gout);

/// Index into the descending order statistics used for channel k.
int percentile_index(int k, int K, int N);

/// corr (N,H,W) -> (K,H,W). Stable descending sort (ties keep the lower
/// original index first). `selected` receives the source channel of each output.
template <typename T>
Tensor<T> percentile_pool(const Tensor<T>& corr, int K, std::vector<int>* selected = nullptr);

template <typename T>
Tensor<T> percentile_pool_backward(const std::vector<int>& selected, const std::vector<int>& corr_shape,
                                   const Tensor<T>& gout);

/// Smallest distance between a selected order statistic and its sorted
/// neighbours; 0 means the selection sits on a tie.
template <typename T>
double percentile_tie_gap(const Tensor<T>& corr, int K);

// ---------------------------------------------------------------- NetVLAD

/// f (D,H,W) as N = H*W descriptors; centers (K,D). Output (K*D).
template <typename T>
Tensor<T> netvlad(const Tensor<T>& f, const Tensor<T>& centers, double alpha);

template <typename T>
void netvlad_backward(const Tensor<T>& f, const Tensor<T>& centers, double alpha, const Tensor<T>& gout,
                      Tensor<T>& gf, Tensor<T>& gcenters);

/// y = x / max(|x|, eps) and its backward.
template <typename T>
std::vector<T> l2_normalize(const std::vector<T>& x);

template <typename T>
std::vector<T> l2_normalize_backward(const std::vector<T>& x, const std::vector<T>& gout);

// ---------------------------------------------------------------- head and plumbing

/// x (n), w (m,n), b (m) -> (m).
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b);

template <typename T>
void linear_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& gout, Tensor<T>& gx, Tensor<T>& gw,
                     Tensor<T>& gb);

/// (C,H,W) -> (C).
template <typename T>
Tensor<T> global_avgpool(const Tensor<T>& x);

template <typename T>
Tensor<T> global_avgpool_backward(const std::vector<int>& x_shape, const Tensor<T>& gout);

template <typename T>
Tensor<T> concat_channels(const std::vector<const Tensor<T>*>& parts);

template <typename T>
std::vector<Tensor<T>> split_channels(const Tensor<T>& x, const std::vector<int>& channels);

double sigmoid(double z);

/// Binary cross-entropy on a logit; returns the loss and writes dloss/dlogit.
double bce_with_logit(double logit, int label, double* grad);

}  // namespace docforensics::net
