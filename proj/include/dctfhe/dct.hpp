#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dctfhe/tensor.hpp"

namespace dctfhe {

// Orthonormal DCT-II basis: D(k,n) = a(k) cos(k*pi*(n+1/2)/N) with
// a(0) = sqrt(1/N), a(k>0) = sqrt(2/N). D * D^T = I, so the blockwise
// transform below is exactly invertible and energy preserving.
template <typename Scalar>
PlaneMatrix<Scalar> dct_matrix(int n) {
  if (n < 1) throw std::invalid_argument("dct_matrix: N must be >= 1");
  PlaneMatrix<Scalar> d(n, n);
  const Scalar pi = static_cast<Scalar>(EIGEN_PI);
  for (int k = 0; k < n; ++k) {
    const Scalar a = std::sqrt((k == 0 ? Scalar(1) : Scalar(2)) / Scalar(n));
    for (int i = 0; i < n; ++i) {
      d(k, i) = a * std::cos(pi * Scalar(k) * (Scalar(i) + Scalar(0.5)) / Scalar(n));
    }
  }
  return d;
}

// Blockwise 2-D DCT of an H×W plane. Output channel c = u*N + v (row-major
// frequency pair) over an (H/N)×(W/N) grid of blocks.
template <typename Scalar>
Tensor3<Scalar> forward_block_dct(const PlaneMatrix<Scalar>& plane, int n) {
  const int h = static_cast<int>(plane.rows());
  const int w = static_cast<int>(plane.cols());
  if (n < 1 || h % n != 0 || w % n != 0) {
    throw std::invalid_argument("forward_block_dct: plane dims must be divisible by N");
  }
  const PlaneMatrix<Scalar> d = dct_matrix<Scalar>(n);
  const int bh = h / n, bw = w / n;
  Tensor3<Scalar> out(n * n, bh, bw);
  PlaneMatrix<Scalar> coeff(n, n);
  for (int by = 0; by < bh; ++by) {
    for (int bx = 0; bx < bw; ++bx) {
      coeff.noalias() = d * plane.block(by * n, bx * n, n, n) * d.transpose();
      for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) out[u * n + v](by, bx) = coeff(u, v);
    }
  }
  return out;
}

// Exact inverse of forward_block_dct (up to floating-point rounding).
template <typename Scalar>
PlaneMatrix<Scalar> inverse_block_dct(const Tensor3<Scalar>& coeffs, int n) {
  if (coeffs.channels() != n * n) {
    throw std::invalid_argument("inverse_block_dct: expected N*N coefficient channels");
  }
  const PlaneMatrix<Scalar> d = dct_matrix<Scalar>(n);
  const int bh = coeffs.rows(), bw = coeffs.cols();
  PlaneMatrix<Scalar> plane(bh * n, bw * n);
  PlaneMatrix<Scalar> coeff(n, n);
  for (int by = 0; by < bh; ++by) {
    for (int bx = 0; bx < bw; ++bx) {
      for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) coeff(u, v) = coeffs[u * n + v](by, bx);
      plane.block(by * n, bx * n, n, n).noalias() = d.transpose() * coeff * d;
    }
  }
  return plane;
}

// JPEG zigzag scan: anti-diagonals from DC to the highest frequency,
// alternating direction. (0,0),(0,1),(1,0),(2,0),(1,1),(0,2),...
inline std::vector<std::pair<int, int>> zigzag_indices(int n) {
  if (n < 1) throw std::invalid_argument("zigzag_indices: N must be >= 1");
  std::vector<std::pair<int, int>> order;
  order.reserve(static_cast<size_t>(n) * n);
  for (int s = 0; s <= 2 * (n - 1); ++s) {
    const int lo = std::max(0, s - n + 1), hi = std::min(s, n - 1);
    if (s % 2 == 0) {
      for (int r = hi; r >= lo; --r) order.emplace_back(r, s - r);
    } else {
      for (int r = lo; r <= hi; ++r) order.emplace_back(r, s - r);
    }
  }
  return order;
}

}  // namespace dctfhe
