#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace dctfhe {

template <typename Scalar>
using PlaneMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using PlaneF = PlaneMatrix<float>;
using PlaneD = PlaneMatrix<double>;
using PlaneI64 = PlaneMatrix<int64_t>;

// C planes of H×W, the common shape flowing through the pipeline.
template <typename Scalar>
struct Tensor3 {
  std::vector<PlaneMatrix<Scalar>> planes;

  Tensor3() = default;
  Tensor3(int channels, int rows, int cols)
      : planes(channels, PlaneMatrix<Scalar>::Zero(rows, cols)) {}

  int channels() const { return static_cast<int>(planes.size()); }
  int rows() const { return planes.empty() ? 0 : static_cast<int>(planes[0].rows()); }
  int cols() const { return planes.empty() ? 0 : static_cast<int>(planes[0].cols()); }
  int64_t size() const { return int64_t{channels()} * rows() * cols(); }

  PlaneMatrix<Scalar>& operator[](int c) { return planes[c]; }
  const PlaneMatrix<Scalar>& operator[](int c) const { return planes[c]; }

  template <typename Other>
  Tensor3<Other> cast() const {
    Tensor3<Other> out;
    out.planes.reserve(planes.size());
    for (const auto& p : planes) out.planes.push_back(p.template cast<Other>());
    return out;
  }
};

using Tensor3f = Tensor3<float>;
using Tensor3d = Tensor3<double>;
using Tensor3i64 = Tensor3<int64_t>;

template <typename Scalar>
Scalar max_abs(const Tensor3<Scalar>& t) {
  Scalar m = 0;
  for (const auto& p : t.planes) {
    if (p.size() > 0) m = std::max(m, p.cwiseAbs().maxCoeff());
  }
  return m;
}

}  // namespace dctfhe
