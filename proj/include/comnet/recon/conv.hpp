#pragma once

#include "../core/array.hpp"

#include <Eigen/Core>

#include <vector>

namespace comnet {

// Arithmetic used inside the convolution GEMMs. Storage is always double;
// Float rounds operands to single precision for the matrix products only.
enum class Precision
{
  Double,
  Float
};

// 3x3 convolution, stride 1, zero "same" padding.
struct ConvLayer
{
  Index out_channels = 0;
  Index in_channels = 0;
  std::vector<double> weight; // [out, in, 3, 3]
  std::vector<double> bias;   // [out]

  ConvLayer() = default;
  ConvLayer(Index out, Index in)
    : out_channels(out)
    , in_channels(in)
    , weight(static_cast<std::size_t>(out * in * 9), 0.0)
    , bias(static_cast<std::size_t>(out), 0.0)
  {
  }

  bool operator==(ConvLayer const &) const = default;
};

namespace detail {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Column matrix [channels * 9, h * w] built from a zero-padded copy of each
// plane so that every row is filled by contiguous copies.
template <typename T>
void im2col(double const *in, Index channels, Index h, Index w, RowMat<T> &col)
{
  col.resize(channels * 9, h * w);
  Index const pw = w + 2;
  std::vector<T> pad(static_cast<std::size_t>((h + 2) * pw), T(0));
  for (Index c = 0; c < channels; ++c) {
    double const *plane = in + c * h * w;
    for (Index y = 0; y < h; ++y) {
      T *dst = pad.data() + (y + 1) * pw + 1;
      double const *src = plane + y * w;
      for (Index x = 0; x < w; ++x) {
        dst[x] = static_cast<T>(src[x]);
      }
    }
    for (Index ky = 0; ky < 3; ++ky) {
      for (Index kx = 0; kx < 3; ++kx) {
        T *row = col.data() + (c * 9 + ky * 3 + kx) * h * w;
        for (Index y = 0; y < h; ++y) {
          T const *src = pad.data() + (y + ky) * pw + kx;
          std::copy(src, src + w, row + y * w);
        }
      }
    }
  }
}

template <typename T>
void col2im_add(RowMat<T> const &col, Index channels, Index h, Index w, double *out)
{
  Index const pw = w + 2;
  std::vector<T> pad(static_cast<std::size_t>((h + 2) * pw));
  for (Index c = 0; c < channels; ++c) {
    std::fill(pad.begin(), pad.end(), T(0));
    for (Index ky = 0; ky < 3; ++ky) {
      for (Index kx = 0; kx < 3; ++kx) {
        T const *row = col.data() + (c * 9 + ky * 3 + kx) * h * w;
        for (Index y = 0; y < h; ++y) {
          T *dst = pad.data() + (y + ky) * pw + kx;
          T const *src = row + y * w;
          for (Index x = 0; x < w; ++x) {
            dst[x] += src[x];
          }
        }
      }
    }
    double *plane = out + c * h * w;
    for (Index y = 0; y < h; ++y) {
      T const *src = pad.data() + (y + 1) * pw + 1;
      double *dst = plane + y * w;
      for (Index x = 0; x < w; ++x) {
        dst[x] += static_cast<double>(src[x]);
      }
    }
  }
}

// Reused per-thread buffers; fresh multi-megabyte allocations per call cost
// more in page faults than the copies they hold.
template <typename T>
RowMat<T> &workspace(int slot)
{
  thread_local RowMat<T> buffers[3];
  return buffers[slot];
}

template <typename T>
RowMat<T> weight_matrix(ConvLayer const &layer)
{
  return Eigen::Map<RowMat<double> const>(layer.weight.data(), layer.out_channels, layer.in_channels * 9)
    .template cast<T>();
}

template <typename T>
void conv_forward_impl(ConvLayer const &layer, double const *in, Index h, Index w, double *out)
{
  RowMat<T> &col = workspace<T>(0);
  RowMat<T> &res = workspace<T>(1);
  im2col<T>(in, layer.in_channels, h, w, col);
  res.noalias() = weight_matrix<T>(layer) * col;
  Eigen::Map<RowMat<double>> o(out, layer.out_channels, h * w);
  o = res.template cast<double>();
  for (Index c = 0; c < layer.out_channels; ++c) {
    o.row(c).array() += layer.bias[static_cast<std::size_t>(c)];
  }
}

template <typename T>
void conv_backward_impl(ConvLayer const &layer, double const *in, Index h, Index w, double const *dout, double *din,
                        double *dweight, double *dbias)
{
  Index const hw = h * w;
  RowMat<T> &g = workspace<T>(2);
  g = Eigen::Map<RowMat<double> const>(dout, layer.out_channels, hw).template cast<T>();
  if (dweight != nullptr) {
    RowMat<T> &col = workspace<T>(0);
    im2col<T>(in, layer.in_channels, h, w, col);
    RowMat<T> const dw = g * col.transpose();
    Eigen::Map<RowMat<double>>(dweight, layer.out_channels, layer.in_channels * 9) += dw.template cast<double>();
  }
  if (dbias != nullptr) {
    for (Index c = 0; c < layer.out_channels; ++c) {
      double acc = 0.0;
      for (Index i = 0; i < hw; ++i) {
        acc += dout[c * hw + i];
      }
      dbias[c] += acc;
    }
  }
  if (din != nullptr) {
    RowMat<T> &dcol = workspace<T>(1);
    dcol.noalias() = weight_matrix<T>(layer).transpose() * g;
    col2im_add<T>(dcol, layer.in_channels, h, w, din);
  }
}

} // namespace detail

// out: [out_channels, h, w]
inline void conv_forward(ConvLayer const &layer, double const *in, Index h, Index w, double *out, Precision p)
{
  if (p == Precision::Float) {
    detail::conv_forward_impl<float>(layer, in, h, w, out);
  } else {
    detail::conv_forward_impl<double>(layer, in, h, w, out);
  }
}

// Accumulates into din / dweight / dbias; any of them may be null.
inline void conv_backward(ConvLayer const &layer, double const *in, Index h, Index w, double const *dout, double *din,
                          double *dweight, double *dbias, Precision p)
{
  if (p == Precision::Float) {
    detail::conv_backward_impl<float>(layer, in, h, w, dout, din, dweight, dbias);
  } else {
    detail::conv_backward_impl<double>(layer, in, h, w, dout, din, dweight, dbias);
  }
}

} // namespace comnet
