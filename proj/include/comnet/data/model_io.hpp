#pragma once

#include "../recon/model.hpp"
#include "container.hpp"

namespace comnet::io {

// .cmod payload (float32, in order): real branch then imag branch, each as
// [weight, bias] for layers 0..4; then gammas[P]; then etas[P].
inline void save_model(std::filesystem::path const &path, ComnetModel const &m)
{
  m.validate();
  Json h;
  h["version"] = format_version;
  h["dtype"] = "float32";
  h["layout"] = "real-branch,imag-branch,gammas,etas";
  h["mode"] = to_string(m.mode);
  h["stages"] = m.stages();
  h["channels"] = m.nc.channels;
  h["cc_projections"] = m.cc_projections;
  h["dc"] = m.dc.hard ? Json{{"mode", "hard"}} : Json{{"mode", "soft"}, {"lambda", m.dc.lambda}};
  Bytes payload;
  Index count = 0;
  m.nc.for_each_tensor([&](std::vector<double> const &t) {
    for (double v : t) {
      put_f32(payload, static_cast<float>(v));
    }
    count += static_cast<Index>(t.size());
  });
  for (double v : m.gammas) {
    put_f32(payload, static_cast<float>(v));
  }
  for (double v : m.etas) {
    put_f32(payload, static_cast<float>(v));
  }
  count += 2 * m.stages();
  h["shape"] = {count};
  write_container(path, model_magic, h, payload);
}

inline ComnetModel load_model(std::filesystem::path const &path)
{
  Container c = read_container(path, model_magic);
  std::string const name = path.string();
  ComnetModel m;
  try {
    if (c.header.at("dtype") != "float32") {
      throw MalformedHeader(name + ": expected dtype float32");
    }
    m.mode = parse_mode(c.header.at("mode").get<std::string>());
    Index const stages = c.header.at("stages").get<Index>();
    Index const channels = c.header.at("channels").get<Index>();
    m.cc_projections = c.header.at("cc_projections").get<Index>();
    auto const &dc = c.header.at("dc");
    m.dc = dc.at("mode") == "hard" ? DCConfig::hard_mode() : DCConfig::soft(dc.at("lambda").get<double>());
    if (stages < 1 || stages > 10 || channels < 1 || channels > 4096) {
      throw MalformedHeader(name + ": implausible stages/channels");
    }
    m.nc = NCWeights::zeros(channels);
    auto const shape = shape_of(c, 1, name);
    if (shape[0] != m.nc.parameter_count() + 2 * stages) {
      throw MalformedHeader(name + ": payload holds " + std::to_string(shape[0]) + " values, model needs " +
                            std::to_string(m.nc.parameter_count() + 2 * stages));
    }
    std::uint8_t const *p = c.payload.data();
    m.nc.for_each_tensor([&](std::vector<double> &t) {
      for (double &v : t) {
        v = get_f32(p);
        p += 4;
      }
    });
    m.gammas.resize(static_cast<std::size_t>(stages));
    m.etas.resize(static_cast<std::size_t>(stages));
    for (double &v : m.gammas) {
      v = get_f32(p);
      p += 4;
    }
    for (double &v : m.etas) {
      v = get_f32(p);
      p += 4;
    }
  } catch (Json::exception const &e) {
    throw MalformedHeader(name + ": malformed model header (" + e.what() + ")");
  } catch (InvalidArgument const &e) {
    throw MalformedHeader(name + ": " + e.what());
  }
  try {
    m.validate();
  } catch (InvalidArgument const &e) {
    throw MalformedHeader(name + ": " + e.what());
  }
  return m;
}

// Rounds every weight to single precision, i.e. the values a save/load
// cycle would produce.
inline ComnetModel quantized(ComnetModel m)
{
  m.nc.for_each_tensor([](std::vector<double> &t) {
    for (double &v : t) {
      v = static_cast<float>(v);
    }
  });
  for (double &v : m.gammas) {
    v = static_cast<float>(v);
  }
  for (double &v : m.etas) {
    v = static_cast<float>(v);
  }
  return m;
}

} // namespace comnet::io
