#pragma once

#include "../calibration/sensitivities.hpp"
#include "../core/array.hpp"
#include "mask.hpp"

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace comnet::io {

// On-disk container shared by .cks / .cmsk / .cmod:
//
//   bytes 0..7   magic ("CKSPACE1", "CMASK001", "CMODEL01")
//   bytes 8..11  uint32 little-endian header length L
//   next L bytes UTF-8 JSON header; always has "version", "shape", "dtype",
//                "layout"
//   remainder    raw little-endian payload, row-major, coil index slowest,
//                complex values interleaved (re, im)
//
// The payload must be exactly as long as shape x dtype implies.

inline constexpr int format_version = 1;
inline constexpr std::string_view kspace_magic = "CKSPACE1";
inline constexpr std::string_view mask_magic = "CMASK001";
inline constexpr std::string_view model_magic = "CMODEL01";

using Json = nlohmann::json;
using Bytes = std::vector<std::uint8_t>;

struct Container
{
  Json header;
  Bytes payload;
};

inline std::size_t dtype_size(std::string const &dtype)
{
  if (dtype == "complex64") {
    return 8;
  }
  if (dtype == "float32") {
    return 4;
  }
  if (dtype == "uint8") {
    return 1;
  }
  throw MalformedHeader("unsupported dtype '" + dtype + "'");
}

inline void put_u32(Bytes &out, std::uint32_t v)
{
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

inline std::uint32_t get_u32(std::uint8_t const *p)
{
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  }
  return v;
}

inline void put_f32(Bytes &out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }
inline float get_f32(std::uint8_t const *p) { return std::bit_cast<float>(get_u32(p)); }

inline void write_container(std::filesystem::path const &path, std::string_view magic, Json const &header,
                            Bytes const &payload)
{
  std::string const text = header.dump();
  Bytes bytes(magic.begin(), magic.end());
  put_u32(bytes, static_cast<std::uint32_t>(text.size()));
  bytes.insert(bytes.end(), text.begin(), text.end());
  bytes.insert(bytes.end(), payload.begin(), payload.end());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  f.write(reinterpret_cast<char const *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) {
    throw IoError("write to '" + path.string() + "' failed");
  }
}

inline std::size_t payload_bytes(Json const &header)
{
  std::size_t count = 1;
  for (auto const &d : header.at("shape")) {
    auto const v = d.get<std::int64_t>();
    if (v < 0) {
      throw MalformedHeader("negative dimension in shape");
    }
    if (v > 0 && count > (std::size_t{1} << 40) / static_cast<std::size_t>(v)) {
      throw MalformedHeader("shape describes an implausibly large payload");
    }
    count *= static_cast<std::size_t>(v);
  }
  return count * dtype_size(header.at("dtype").get<std::string>());
}

inline Container read_container(std::filesystem::path const &path, std::string_view magic)
{
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw IoError("cannot open '" + path.string() + "' for reading");
  }
  Bytes bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  std::string const name = path.string();
  if (bytes.size() < magic.size()) {
    throw TruncatedFile(name + ": truncated, expected at least " + std::to_string(magic.size() + 4) +
                        " bytes, got " + std::to_string(bytes.size()));
  }
  if (std::memcmp(bytes.data(), magic.data(), magic.size()) != 0) {
    throw BadMagic(name + ": bad magic, expected '" + std::string(magic) + "'");
  }
  if (bytes.size() < magic.size() + 4) {
    throw TruncatedFile(name + ": truncated, expected at least " + std::to_string(magic.size() + 4) +
                        " bytes, got " + std::to_string(bytes.size()));
  }
  std::size_t const hlen = get_u32(bytes.data() + magic.size());
  std::size_t const hstart = magic.size() + 4;
  if (bytes.size() < hstart + hlen) {
    throw TruncatedFile(name + ": truncated header, expected " + std::to_string(hstart + hlen) +
                        " bytes, got " + std::to_string(bytes.size()));
  }
  Container out;
  try {
    out.header = Json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(hstart),
                             bytes.begin() + static_cast<std::ptrdiff_t>(hstart + hlen));
  } catch (Json::exception const &e) {
    throw MalformedHeader(name + ": header is not valid JSON (" + e.what() + ")");
  }
  std::size_t expected = 0;
  try {
    if (!out.header.is_object() || !out.header.contains("version")) {
      throw MalformedHeader(name + ": header lacks a version field");
    }
    int const version = out.header.at("version").get<int>();
    if (version != format_version) {
      throw VersionMismatch(name + ": format version " + std::to_string(version) + " is not supported (expected " +
                            std::to_string(format_version) + ")");
    }
    if (!out.header.contains("shape") || !out.header.contains("dtype") || !out.header.contains("layout")) {
      throw MalformedHeader(name + ": header must contain shape, dtype and layout");
    }
    expected = payload_bytes(out.header);
  } catch (Json::exception const &e) {
    throw MalformedHeader(name + ": malformed header (" + e.what() + ")");
  }
  std::size_t const actual = bytes.size() - hstart - hlen;
  if (actual < expected) {
    throw TruncatedFile(name + ": truncated payload, expected " + std::to_string(expected) + " bytes, got " +
                        std::to_string(actual));
  }
  if (actual > expected) {
    throw MalformedHeader(name + ": " + std::to_string(actual - expected) + " unexpected trailing payload bytes");
  }
  out.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(hstart + hlen), bytes.end());
  return out;
}

inline std::vector<std::int64_t> shape_of(Container const &c, std::size_t rank, std::string const &what)
{
  auto shape = c.header.at("shape").get<std::vector<std::int64_t>>();
  if (shape.size() != rank) {
    throw MalformedHeader(what + ": expected rank-" + std::to_string(rank) + " shape, got rank " +
                          std::to_string(shape.size()));
  }
  return shape;
}

// Complex arrays are stored as complex64; values are rounded to single
// precision on save, and a load/save cycle is bit-exact.
template <typename D>
void save_coil_array(std::filesystem::path const &path, CoilArray<D> const &a, Json extra = Json::object())
{
  Json h = std::move(extra);
  h["version"] = format_version;
  h["shape"] = {a.coils(), a.rows(), a.cols()};
  h["dtype"] = "complex64";
  h["layout"] = "row-major,coil-slowest,interleaved";
  Bytes payload;
  payload.reserve(static_cast<std::size_t>(a.size()) * 8);
  for (Cx const &z : a.flat()) {
    put_f32(payload, static_cast<float>(z.real()));
    put_f32(payload, static_cast<float>(z.imag()));
  }
  write_container(path, kspace_magic, h, payload);
}

template <typename D>
CoilArray<D> load_coil_array(std::filesystem::path const &path, Json *header = nullptr)
{
  Container c = read_container(path, kspace_magic);
  if (c.header.at("dtype") != "complex64") {
    throw MalformedHeader(path.string() + ": expected dtype complex64");
  }
  auto const shape = shape_of(c, 3, path.string());
  CoilArray<D> a(shape[0], shape[1], shape[2]);
  std::uint8_t const *p = c.payload.data();
  for (Cx &z : a.flat()) {
    z = Cx{get_f32(p), get_f32(p + 4)};
    p += 8;
  }
  if (!all_finite(a.flat())) {
    throw MalformedHeader(path.string() + ": payload contains NaN or Inf");
  }
  if (header != nullptr) {
    *header = std::move(c.header);
  }
  return a;
}

inline void save_kspace(std::filesystem::path const &path, MultiCoilKspace const &k) { save_coil_array(path, k); }

inline MultiCoilKspace load_kspace(std::filesystem::path const &path) { return load_coil_array<KspaceDomain>(path); }

// Coil maps share the complex64 container; the header marks the content.
inline void save_sensitivities(std::filesystem::path const &path, CoilSensitivities const &s)
{
  save_coil_array(path, s.maps, Json{{"content", "coil_sensitivities"}});
}

inline CoilSensitivities load_sensitivities(std::filesystem::path const &path)
{
  Json h;
  CoilSensitivities s;
  s.maps = load_coil_array<ImageDomain>(path, &h);
  if (h.value("content", std::string{}) != "coil_sensitivities") {
    throw MalformedHeader(path.string() + ": not a coil sensitivity file");
  }
  s.support = ByteImage::Ones(s.maps.rows(), s.maps.cols());
  return s;
}

inline void save_mask(std::filesystem::path const &path, SamplingMask const &m)
{
  Json h;
  h["version"] = format_version;
  h["shape"] = {m.rows(), m.cols()};
  h["dtype"] = "uint8";
  h["layout"] = "row-major";
  h["acceleration"] = m.acceleration;
  h["acs"] = {m.acs_height, m.acs_width};
  h["seed"] = m.seed;
  Bytes payload(m.pattern.data(), m.pattern.data() + m.pattern.size());
  write_container(path, mask_magic, h, payload);
}

inline SamplingMask load_mask(std::filesystem::path const &path)
{
  Container c = read_container(path, mask_magic);
  std::string const name = path.string();
  SamplingMask m;
  try {
    if (c.header.at("dtype") != "uint8") {
      throw MalformedHeader(name + ": expected dtype uint8");
    }
    auto const shape = shape_of(c, 2, name);
    m.pattern = ByteImage(shape[0], shape[1]);
    std::memcpy(m.pattern.data(), c.payload.data(), c.payload.size());
    m.acceleration = c.header.at("acceleration").get<double>();
    auto const acs = c.header.at("acs").get<std::vector<Index>>();
    if (acs.size() != 2) {
      throw MalformedHeader(name + ": acs must have two entries");
    }
    m.acs_height = acs[0];
    m.acs_width = acs[1];
    m.seed = c.header.at("seed").get<std::uint64_t>();
  } catch (Json::exception const &e) {
    throw MalformedHeader(name + ": malformed mask header (" + e.what() + ")");
  }
  if ((m.pattern > 1).any()) {
    throw MalformedHeader(name + ": mask payload must be 0/1");
  }
  if (m.acs_height < 0 || m.acs_width < 0 || m.acs_height > m.rows() || m.acs_width > m.cols()) {
    throw MalformedHeader(name + ": ACS block does not fit the mask");
  }
  return m;
}

} // namespace comnet::io
