#pragma once

#include "error.hpp"

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace comnet {

using Index = Eigen::Index;
using Cx = std::complex<double>;

// Row-major so that a [ny, nx] image is laid out exactly like one coil of a
// CoilArray and like the on-disk payload.
using ComplexImage = Eigen::Array<Cx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RealImage = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ByteImage = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ImageDomain
{
};
struct KspaceDomain
{
};

// Complex [nc, ny, nx] array, coil index slowest. The Domain tag keeps image
// space and k-space data from being mixed up; conversion happens only through
// the centered FFT (or an explicit retag).
template <typename Domain>
class CoilArray
{
public:
  CoilArray() = default;
  CoilArray(Index nc, Index ny, Index nx)
    : nc_(nc)
    , ny_(ny)
    , nx_(nx)
    , data_(static_cast<std::size_t>(nc * ny * nx), Cx{0.0, 0.0})
  {
    if (nc < 0 || ny < 0 || nx < 0) {
      throw InvalidArgument("CoilArray: negative dimension");
    }
  }

  Index coils() const { return nc_; }
  Index rows() const { return ny_; }
  Index cols() const { return nx_; }
  Index plane_size() const { return ny_ * nx_; }
  Index size() const { return nc_ * ny_ * nx_; }

  Cx &operator()(Index c, Index y, Index x) { return data_[static_cast<std::size_t>((c * ny_ + y) * nx_ + x)]; }
  Cx const &operator()(Index c, Index y, Index x) const
  {
    return data_[static_cast<std::size_t>((c * ny_ + y) * nx_ + x)];
  }

  Eigen::Map<ComplexImage> coil(Index c) { return {data_.data() + c * plane_size(), ny_, nx_}; }
  Eigen::Map<ComplexImage const> coil(Index c) const { return {data_.data() + c * plane_size(), ny_, nx_}; }

  std::span<Cx> flat() { return data_; }
  std::span<Cx const> flat() const { return data_; }

  template <typename Other>
  bool same_shape(CoilArray<Other> const &o) const
  {
    return nc_ == o.coils() && ny_ == o.rows() && nx_ == o.cols();
  }

  bool operator==(CoilArray const &) const = default;

private:
  Index nc_ = 0;
  Index ny_ = 0;
  Index nx_ = 0;
  // Aligned so Eigen maps of a coil never take the unaligned path, whose
  // peeling would make results depend on the heap address.
  std::vector<Cx, Eigen::aligned_allocator<Cx>> data_;
};

using MultiCoilImage = CoilArray<ImageDomain>;
using MultiCoilKspace = CoilArray<KspaceDomain>;

template <typename To, typename From>
CoilArray<To> retag(CoilArray<From> const &src)
{
  CoilArray<To> out(src.coils(), src.rows(), src.cols());
  std::copy(src.flat().begin(), src.flat().end(), out.flat().begin());
  return out;
}

inline bool all_finite(std::span<Cx const> v)
{
  for (Cx const &z : v) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      return false;
    }
  }
  return true;
}

inline std::span<Cx const> as_span(ComplexImage const &img) { return {img.data(), static_cast<std::size_t>(img.size())}; }
inline std::span<Cx> as_span(ComplexImage &img) { return {img.data(), static_cast<std::size_t>(img.size())}; }

inline void require_finite(std::span<Cx const> v, std::string const &what)
{
  if (!all_finite(v)) {
    throw InvalidInput(what + ": input contains NaN or Inf");
  }
}

// <a, b> = sum conj(a) * b
inline Cx vdot(std::span<Cx const> a, std::span<Cx const> b)
{
  if (a.size() != b.size()) {
    throw InvalidArgument("vdot: size mismatch");
  }
  Cx acc{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += std::conj(a[i]) * b[i];
  }
  return acc;
}

inline double norm2(std::span<Cx const> a)
{
  double acc = 0.0;
  for (Cx const &z : a) {
    acc += std::norm(z);
  }
  return std::sqrt(acc);
}

inline double distance(std::span<Cx const> a, std::span<Cx const> b)
{
  if (a.size() != b.size()) {
    throw InvalidArgument("distance: size mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += std::norm(a[i] - b[i]);
  }
  return std::sqrt(acc);
}

inline std::string shape_string(Index a, Index b) { return std::to_string(a) + "x" + std::to_string(b); }

template <typename D>
std::string shape_string(CoilArray<D> const &a)
{
  return std::to_string(a.coils()) + "x" + std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

} // namespace comnet
