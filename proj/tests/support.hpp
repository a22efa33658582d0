#pragma once

#include <comnet/comnet.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

namespace testing_support {

using namespace comnet;

inline Cx random_cx(SplitMix64 &rng) { return {rng.normal(), rng.normal()}; }

inline ComplexImage random_image(Index ny, Index nx, std::uint64_t seed)
{
  SplitMix64 rng(seed);
  ComplexImage img(ny, nx);
  for (Index i = 0; i < img.size(); ++i) {
    img.data()[i] = random_cx(rng);
  }
  return img;
}

template <typename D = KspaceDomain>
CoilArray<D> random_coils(Index nc, Index ny, Index nx, std::uint64_t seed)
{
  SplitMix64 rng(seed);
  CoilArray<D> a(nc, ny, nx);
  for (Cx &z : a.flat()) {
    z = random_cx(rng);
  }
  return a;
}

inline CMatrix random_matrix(Index m, Index n, std::uint64_t seed)
{
  SplitMix64 rng(seed);
  CMatrix a(m, n);
  for (Index i = 0; i < a.size(); ++i) {
    a.data()[i] = random_cx(rng);
  }
  return a;
}

inline double rel_error(std::span<Cx const> a, std::span<Cx const> b) { return distance(a, b) / norm2(b); }

inline double rel_error(ComplexImage const &a, ComplexImage const &b) { return rel_error(as_span(a), as_span(b)); }

template <typename D>
double rel_error(CoilArray<D> const &a, CoilArray<D> const &b)
{
  return rel_error(a.flat(), b.flat());
}

inline std::span<Cx const> span_of(CMatrix const &m) { return {m.data(), static_cast<std::size_t>(m.size())}; }

// Maximum over pixels of the phase-aligned map error between two coil-map
// sets, restricted to pixels where `use` is nonzero.
inline double aligned_map_error(MultiCoilImage const &est, MultiCoilImage const &truth, ByteImage const &use)
{
  double worst = 0.0;
  for (Index y = 0; y < est.rows(); ++y) {
    for (Index x = 0; x < est.cols(); ++x) {
      if (!use(y, x)) {
        continue;
      }
      Cx ip{0.0, 0.0};
      for (Index c = 0; c < est.coils(); ++c) {
        ip += std::conj(est(c, y, x)) * truth(c, y, x);
      }
      Cx const ph = std::abs(ip) > 0.0 ? ip / std::abs(ip) : Cx{1.0, 0.0};
      double e = 0.0;
      for (Index c = 0; c < est.coils(); ++c) {
        e += std::norm(est(c, y, x) * ph - truth(c, y, x));
      }
      worst = std::max(worst, std::sqrt(e));
    }
  }
  return worst;
}

// Scratch directory removed on scope exit.
class TempDir
{
public:
  TempDir()
  {
    auto const *info = ::testing::UnitTest::GetInstance()->current_test_info();
    std::string name = "comnet_test";
    if (info != nullptr) {
      name += std::string("_") + info->test_suite_name() + "_" + info->name();
    }
    for (char &ch : name) {
      if (ch == '/') {
        ch = '_';
      }
    }
    path_ = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(TempDir const &) = delete;
  TempDir &operator=(TempDir const &) = delete;

  std::filesystem::path const &path() const { return path_; }
  std::filesystem::path operator/(std::string const &leaf) const { return path_ / leaf; }

private:
  std::filesystem::path path_;
};

inline std::vector<std::uint8_t> read_bytes(std::filesystem::path const &p)
{
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline void write_bytes(std::filesystem::path const &p, std::vector<std::uint8_t> const &b)
{
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f.write(reinterpret_cast<char const *>(b.data()), static_cast<std::streamsize>(b.size()));
}

} // namespace testing_support
