#pragma once

#include "../core/linalg.hpp"

namespace comnet {

struct CoilCompression
{
  MultiCoilKspace kspace;
  CMatrix matrix; // [nc, target]; compressed = samples x matrix
  double retained_energy = 1.0;
};

// SVD coil compression: samples are stacked into a [ky*kx, nc] matrix and
// projected onto its leading target_nc right-singular vectors.
inline CoilCompression coil_compress(MultiCoilKspace const &ksp, Index target_nc)
{
  Index const nc = ksp.coils();
  if (target_nc < 1 || target_nc > nc) {
    throw InvalidArgument("coil_compress: target coil count " + std::to_string(target_nc) + " must be in [1, " +
                          std::to_string(nc) + "]");
  }
  Index const n = ksp.plane_size();
  CMatrix samples(n, nc);
  for (Index c = 0; c < nc; ++c) {
    samples.col(c) = Eigen::Map<CVector const>(ksp.flat().data() + c * n, n);
  }
  Svd const dec = svd(samples);
  CoilCompression out;
  out.matrix = dec.vh.adjoint().leftCols(target_nc);
  CMatrix const projected = samples * out.matrix;
  out.kspace = MultiCoilKspace(target_nc, ksp.rows(), ksp.cols());
  for (Index c = 0; c < target_nc; ++c) {
    Eigen::Map<CVector>(out.kspace.flat().data() + c * n, n) = projected.col(c);
  }
  double const total = dec.s.squaredNorm();
  out.retained_energy = total > 0.0 ? dec.s.head(target_nc).squaredNorm() / total : 1.0;
  return out;
}

} // namespace comnet
