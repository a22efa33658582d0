#pragma once

#include "../core/fft.hpp"
#include "../core/linalg.hpp"

#include <Eigen/Cholesky>

namespace comnet {

// SPIRiT interpolation weights. weights(co, ci, dy, dx) multiplies input coil
// ci at k-space offset (dy - kh/2, dx - kw/2) when synthesizing output coil
// co. The self-coil center tap is structurally zero.
class SpiritKernel
{
public:
  SpiritKernel() = default;
  SpiritKernel(Index nc, Index kh, Index kw, double tikhonov = 0.0)
    : nc_(nc)
    , kh_(kh)
    , kw_(kw)
    , tikhonov_(tikhonov)
    , weights_(static_cast<std::size_t>(nc * nc * kh * kw), Cx{0.0, 0.0})
  {
    if (nc < 1 || kh < 1 || kw < 1 || kh % 2 == 0 || kw % 2 == 0) {
      throw InvalidArgument("SpiritKernel: need nc >= 1 and odd kernel sizes, got " + shape_string(kh, kw));
    }
  }

  Index coils() const { return nc_; }
  Index kh() const { return kh_; }
  Index kw() const { return kw_; }
  double tikhonov() const { return tikhonov_; }

  Cx &operator()(Index co, Index ci, Index dy, Index dx) { return weights_[index(co, ci, dy, dx)]; }
  Cx operator()(Index co, Index ci, Index dy, Index dx) const { return weights_[index(co, ci, dy, dx)]; }

  std::span<Cx const> flat() const { return weights_; }

  // Restores the structural zero after external edits.
  void clear_self_taps()
  {
    for (Index c = 0; c < nc_; ++c) {
      (*this)(c, c, kh_ / 2, kw_ / 2) = Cx{0.0, 0.0};
    }
  }

private:
  std::size_t index(Index co, Index ci, Index dy, Index dx) const
  {
    return static_cast<std::size_t>(((co * nc_ + ci) * kh_ + dy) * kw_ + dx);
  }

  Index nc_ = 0;
  Index kh_ = 0;
  Index kw_ = 0;
  double tikhonov_ = 0.0;
  std::vector<Cx> weights_;
};

namespace detail {

// Rows: every position where the full kh x kw window fits inside the block.
// Columns: (coil, dy, dx) taps in kernel order.
inline CMatrix neighborhood_matrix(MultiCoilKspace const &block, Index kh, Index kw)
{
  Index const nc = block.coils();
  Index const ry = block.rows() - kh + 1;
  Index const rx = block.cols() - kw + 1;
  CMatrix p(ry * rx, nc * kh * kw);
  for (Index y = 0; y < ry; ++y) {
    for (Index x = 0; x < rx; ++x) {
      Index const row = y * rx + x;
      Index col = 0;
      for (Index c = 0; c < nc; ++c) {
        for (Index dy = 0; dy < kh; ++dy) {
          for (Index dx = 0; dx < kw; ++dx) {
            p(row, col++) = block(c, y + dy, x + dx);
          }
        }
      }
    }
  }
  return p;
}

} // namespace detail

// Per output coil c, solves
//   min_w ||P_c w - b_c||^2 + lambda ||w||^2,  lambda = tikhonov * tr(P^H P) / ncols
// where P_c is the neighborhood matrix without coil c's own center tap and
// b_c holds coil c's center samples. tikhonov is therefore relative to the
// mean column energy.
inline SpiritKernel fit_spirit_kernel(MultiCoilKspace const &acs, Index kh, Index kw, double tikhonov)
{
  if (kh < 1 || kw < 1 || kh % 2 == 0 || kw % 2 == 0) {
    throw InvalidArgument("fit_spirit_kernel: kernel size must be odd, got " + shape_string(kh, kw));
  }
  if (!(tikhonov >= 0.0)) {
    throw InvalidArgument("fit_spirit_kernel: tikhonov must be nonnegative");
  }
  if (acs.rows() < kh + 2 || acs.cols() < kw + 2) {
    throw InvalidArgument("fit_spirit_kernel: ACS " + shape_string(acs.rows(), acs.cols()) +
                          " is too small for a " + shape_string(kh, kw) + " kernel (need at least " +
                          shape_string(kh + 2, kw + 2) + ")");
  }
  require_finite(acs.flat(), "fit_spirit_kernel");
  Index const nc = acs.coils();
  Index const taps = kh * kw;
  Index const ncols = nc * taps;
  CMatrix const p = detail::neighborhood_matrix(acs, kh, kw);
  CMatrix const normal = p.adjoint() * p;
  double const lambda = tikhonov * normal.diagonal().real().sum() / static_cast<double>(ncols);

  SpiritKernel kernel(nc, kh, kw, tikhonov);
  Index const center = (kh / 2) * kw + kw / 2;
  for (Index c = 0; c < nc; ++c) {
    Index const skip = c * taps + center;
    std::vector<Index> keep;
    keep.reserve(static_cast<std::size_t>(ncols - 1));
    for (Index j = 0; j < ncols; ++j) {
      if (j != skip) {
        keep.push_back(j);
      }
    }
    Index const n = static_cast<Index>(keep.size());
    CMatrix a(n, n);
    CVector rhs(n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        a(i, j) = normal(keep[i], keep[j]);
      }
      a(i, i) += lambda;
      rhs(i) = normal(keep[i], skip);
    }
    Eigen::LLT<CMatrix> llt(a);
    if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-13)) {
      throw IllConditionedCalibration("fit_spirit_kernel: normal equations for coil " + std::to_string(c) +
                                      " are singular or ill-conditioned; use tikhonov > 0 or a larger ACS");
    }
    CVector const w = llt.solve(rhs);
    for (Index i = 0; i < n; ++i) {
      Index const j = keep[i];
      kernel(c, j / taps, (j % taps) / kw, j % kw) = w(i);
    }
  }
  kernel.clear_self_taps();
  return kernel;
}

// Direct circular cross-correlation:
//   out[co](y, x) = sum_{ci, dy, dx} w(co, ci, dy, dx) * in[ci](y + dy - kh/2, x + dx - kw/2)
inline MultiCoilKspace apply_kernel_direct(SpiritKernel const &g, MultiCoilKspace const &in)
{
  if (g.coils() != in.coils()) {
    throw InvalidArgument("apply_kernel: kernel has " + std::to_string(g.coils()) + " coils, data has " +
                          std::to_string(in.coils()));
  }
  Index const ny = in.rows();
  Index const nx = in.cols();
  MultiCoilKspace out(in.coils(), ny, nx);
  for (Index co = 0; co < g.coils(); ++co) {
    for (Index ci = 0; ci < g.coils(); ++ci) {
      for (Index dy = 0; dy < g.kh(); ++dy) {
        for (Index dx = 0; dx < g.kw(); ++dx) {
          Cx const w = g(co, ci, dy, dx);
          if (w == Cx{0.0, 0.0}) {
            continue;
          }
          Index const oy = dy - g.kh() / 2;
          Index const ox = dx - g.kw() / 2;
          for (Index y = 0; y < ny; ++y) {
            Index const sy = ((y + oy) % ny + ny) % ny;
            for (Index x = 0; x < nx; ++x) {
              out(co, y, x) += w * in(ci, sy, ((x + ox) % nx + nx) % nx);
            }
          }
        }
      }
    }
  }
  return out;
}

// The same circular operator realized in image space, where it is a per-pixel
// nc x nc matrix: G = F K F^-1 with
//   K[co][ci](r) = sum_t w(co, ci, t) exp(-2 pi i t.(r - center) / N).
// Exact up to rounding; its adjoint is F K^H F^-1.
class SpiritOperator
{
public:
  SpiritOperator(SpiritKernel const &g, Index ny, Index nx)
    : nc_(g.coils())
    , ny_(ny)
    , nx_(nx)
  {
    if (ny < g.kh() || nx < g.kw()) {
      throw InvalidArgument("SpiritOperator: grid smaller than kernel");
    }
    double const scale = std::sqrt(static_cast<double>(ny * nx));
    kernels_.reserve(static_cast<std::size_t>(nc_ * nc_));
    for (Index co = 0; co < nc_; ++co) {
      for (Index ci = 0; ci < nc_; ++ci) {
        ComplexImage placed = ComplexImage::Zero(ny, nx);
        for (Index dy = 0; dy < g.kh(); ++dy) {
          for (Index dx = 0; dx < g.kw(); ++dx) {
            Index const y = ((ny / 2 + dy - g.kh() / 2) % ny + ny) % ny;
            Index const x = ((nx / 2 + dx - g.kw() / 2) % nx + nx) % nx;
            placed(y, x) += g(co, ci, dy, dx);
          }
        }
        kernels_.push_back(fft2c(placed) * scale);
      }
    }
  }

  Index coils() const { return nc_; }

  MultiCoilKspace apply(MultiCoilKspace const &in) const { return run(in, false); }
  MultiCoilKspace adjoint(MultiCoilKspace const &in) const { return run(in, true); }

  // Image-space form, for callers that already hold coil images.
  MultiCoilImage apply_image(MultiCoilImage const &img, bool adjoint) const
  {
    MultiCoilImage out(nc_, ny_, nx_);
    for (Index co = 0; co < nc_; ++co) {
      for (Index ci = 0; ci < nc_; ++ci) {
        if (adjoint) {
          // out[ci] += conj(K[co][ci]) * img[co]
          out.coil(ci) += kernel(co, ci).conjugate() * img.coil(co);
        } else {
          out.coil(co) += kernel(co, ci) * img.coil(ci);
        }
      }
    }
    return out;
  }

private:
  ComplexImage const &kernel(Index co, Index ci) const { return kernels_[static_cast<std::size_t>(co * nc_ + ci)]; }

  MultiCoilKspace run(MultiCoilKspace const &in, bool adjoint) const
  {
    if (in.coils() != nc_ || in.rows() != ny_ || in.cols() != nx_) {
      throw InvalidArgument("SpiritOperator: data shape " + shape_string(in) + " does not match operator " +
                            std::to_string(nc_) + "x" + shape_string(ny_, nx_));
    }
    return fft2c(apply_image(ifft2c(in), adjoint));
  }

  Index nc_;
  Index ny_;
  Index nx_;
  std::vector<ComplexImage> kernels_;
};

inline MultiCoilKspace apply_kernel(SpiritKernel const &g, MultiCoilKspace const &in)
{
  if (g.coils() != in.coils()) {
    throw InvalidArgument("apply_kernel: kernel has " + std::to_string(g.coils()) + " coils, data has " +
                          std::to_string(in.coils()));
  }
  return SpiritOperator(g, in.rows(), in.cols()).apply(in);
}

// ||G(acs) - acs|| / ||acs|| over window positions that lie fully inside the
// block (no wrap-around).
inline double spirit_fit_residual(SpiritKernel const &g, MultiCoilKspace const &acs)
{
  Index const kh = g.kh();
  Index const kw = g.kw();
  CMatrix const p = detail::neighborhood_matrix(acs, kh, kw);
  Index const taps = kh * kw;
  double num = 0.0;
  double den = 0.0;
  CVector w(g.coils() * taps);
  for (Index c = 0; c < g.coils(); ++c) {
    for (Index j = 0; j < w.size(); ++j) {
      w(j) = g(c, j / taps, (j % taps) / kw, j % kw);
    }
    CVector const b = p.col(c * taps + (kh / 2) * kw + kw / 2);
    num += (p * w - b).squaredNorm();
    den += b.squaredNorm();
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

} // namespace comnet
