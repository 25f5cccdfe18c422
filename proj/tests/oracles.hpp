#pragma once

// Independent reference implementations used only by the test suites. These
// deliberately avoid the library's algorithms (matrix DCT, im2col GEMM,
// LutSpec tables) so agreement is meaningful.

#include <cmath>
#include <vector>

#include "dctfhe/graph.hpp"
#include "dctfhe/quantize.hpp"
#include "dctfhe/tensor.hpp"

namespace oracle {

// Direct double-sum 2-D DCT-II with orthonormal scaling.
inline dctfhe::PlaneD dct2d_reference(const dctfhe::PlaneD& block) {
  const int n = static_cast<int>(block.rows());
  dctfhe::PlaneD out(n, n);
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      double sum = 0.0;
      for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
          sum += block(y, x) * std::cos(EIGEN_PI * u * (2.0 * y + 1.0) / (2.0 * n)) *
                 std::cos(EIGEN_PI * v * (2.0 * x + 1.0) / (2.0 * n));
        }
      }
      const double au = u == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      const double av = v == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      out(u, v) = au * av * sum;
    }
  }
  return out;
}

// Plain sextuple-loop convolution (no im2col, no GEMM).
inline dctfhe::Tensor3f conv2d_reference(const dctfhe::Tensor3f& input,
                                         const dctfhe::PlaneF& weight,
                                         const Eigen::VectorXf& bias, int out_ch, int kernel,
                                         int stride, int pad) {
  const int out_r = (input.rows() + 2 * pad - kernel) / stride + 1;
  const int out_c = (input.cols() + 2 * pad - kernel) / stride + 1;
  dctfhe::Tensor3f out(out_ch, out_r, out_c);
  for (int oc = 0; oc < out_ch; ++oc) {
    for (int oy = 0; oy < out_r; ++oy) {
      for (int ox = 0; ox < out_c; ++ox) {
        double acc = bias.size() > 0 ? bias(oc) : 0.0;
        for (int ic = 0; ic < input.channels(); ++ic) {
          for (int ky = 0; ky < kernel; ++ky) {
            for (int kx = 0; kx < kernel; ++kx) {
              const int iy = oy * stride - pad + ky;
              const int ix = ox * stride - pad + kx;
              if (iy >= 0 && iy < input.rows() && ix >= 0 && ix < input.cols()) {
                acc += static_cast<double>(weight(oc, (ic * kernel + ky) * kernel + kx)) *
                       input[ic](iy, ix);
              }
            }
          }
        }
        out[oc](oy, ox) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

// Scalar LUT-entry oracle: what T[x] must hold, computed without LutSpec.
inline int64_t lut_entry_reference(int64_t x, double acc_scale, bool relu, double out_scale,
                                   int64_t out_zero, int64_t out_qmin, int64_t out_qmax) {
  double r = acc_scale * static_cast<double>(x);
  if (relu) r = std::max(0.0, r);
  const double v = r / out_scale + static_cast<double>(out_zero);
  if (v >= static_cast<double>(out_qmax)) return out_qmax;
  if (v <= static_cast<double>(out_qmin)) return out_qmin;
  int64_t q = static_cast<int64_t>(std::floor(v));
  if (q < out_qmin) q = out_qmin;
  if (q > out_qmax) q = out_qmax;
  return q;
}

}  // namespace oracle
