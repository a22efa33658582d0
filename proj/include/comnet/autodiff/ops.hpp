#pragma once

#include "../calibration/sensitivities.hpp"
#include "../calibration/spirit.hpp"
#include "../core/fft.hpp"
#include "../recon/conv.hpp"
#include "../recon/dc.hpp"
#include "tape.hpp"

#include <cmath>

// Primitive operations recorded on a Tape. Operations that take operators or
// data by pointer (sensitivities, masks, measurements, SPIRiT operators,
// references) do not copy them: those objects must outlive the backward
// pass.
namespace comnet::ad {

namespace detail {

inline std::vector<double> from_complex(Cx const *p, Index n)
{
  std::vector<double> v(static_cast<std::size_t>(2 * n));
  std::copy(p, p + n, as_complex(v));
  return v;
}

template <typename D>
CoilArray<D> to_coils(Tape const &t, Var v)
{
  Node const &n = t.node(v);
  if (!n.complex || n.dims.size() != 3) {
    throw InternalError("ad: expected a complex [nc, ny, nx] node");
  }
  CoilArray<D> a(n.dims[0], n.dims[1], n.dims[2]);
  std::copy(as_complex(n.value), as_complex(n.value) + a.size(), a.flat().begin());
  return a;
}

template <typename D>
CoilArray<D> grad_coils(Tape &t, int id)
{
  Node &n = t.node(id);
  CoilArray<D> a(n.dims[0], n.dims[1], n.dims[2]);
  std::copy(as_complex(n.grad), as_complex(n.grad) + a.size(), a.flat().begin());
  return a;
}

template <typename D>
void accumulate(Tape &t, int id, CoilArray<D> const &g)
{
  auto &slot = t.grad_slot(id);
  Cx *p = as_complex(slot);
  for (Index i = 0; i < g.size(); ++i) {
    p[i] += g.flat()[static_cast<std::size_t>(i)];
  }
}

inline void accumulate(Tape &t, int id, ComplexImage const &g)
{
  auto &slot = t.grad_slot(id);
  Cx *p = as_complex(slot);
  for (Index i = 0; i < g.size(); ++i) {
    p[i] += g.data()[i];
  }
}

inline ComplexImage image_of(std::vector<double> const &v, Index ny, Index nx)
{
  ComplexImage img(ny, nx);
  std::copy(as_complex(v), as_complex(v) + ny * nx, img.data());
  return img;
}

} // namespace detail

inline Var image_constant(Tape &t, ComplexImage const &img)
{
  return t.constant(detail::from_complex(img.data(), img.size()), {img.rows(), img.cols()}, true);
}

template <typename D>
Var coil_constant(Tape &t, CoilArray<D> const &a)
{
  return t.constant(detail::from_complex(a.flat().data(), a.size()), {a.coils(), a.rows(), a.cols()}, true);
}

inline ComplexImage image_value(Tape const &t, Var v)
{
  Node const &n = t.node(v);
  if (!n.complex || n.dims.size() != 2) {
    throw InternalError("ad: expected a complex [ny, nx] node");
  }
  return detail::image_of(n.value, n.dims[0], n.dims[1]);
}

template <typename D>
CoilArray<D> coil_value(Tape const &t, Var v)
{
  return detail::to_coils<D>(t, v);
}

// Real [1, ny, nx] channel from a complex [ny, nx] image.
inline Var real_part(Tape &t, Var z, bool imaginary = false)
{
  Node const &n = t.node(z);
  Index const count = n.dims[0] * n.dims[1];
  std::vector<double> out(static_cast<std::size_t>(count));
  std::size_t const off = imaginary ? 1 : 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = n.value[2 * i + off];
  }
  return t.record(std::move(out), {1, n.dims[0], n.dims[1]}, false, {z.id}, [zid = z.id, off](Tape &tp, int self) {
    auto const &g = tp.node(self).grad;
    auto &gz = tp.grad_slot(zid);
    for (std::size_t i = 0; i < g.size(); ++i) {
      gz[2 * i + off] += g[i];
    }
  });
}

inline Var imag_part(Tape &t, Var z) { return real_part(t, z, true); }

inline Var make_complex(Tape &t, Var re, Var im)
{
  Node const &a = t.node(re);
  Node const &b = t.node(im);
  if (a.value.size() != b.value.size() || a.complex || b.complex) {
    throw InternalError("ad::make_complex: operands must be real and equally sized");
  }
  std::vector<double> out(2 * a.value.size());
  for (std::size_t i = 0; i < a.value.size(); ++i) {
    out[2 * i] = a.value[i];
    out[2 * i + 1] = b.value[i];
  }
  std::vector<Index> dims{a.dims[a.dims.size() - 2], a.dims[a.dims.size() - 1]};
  return t.record(std::move(out), dims, true, {re.id, im.id}, [rid = re.id, iid = im.id](Tape &tp, int self) {
    auto const g = tp.node(self).grad;
    if (tp.wants_grad(rid)) {
      auto &gr = tp.grad_slot(rid);
      for (std::size_t i = 0; i < gr.size(); ++i) {
        gr[i] += g[2 * i];
      }
    }
    if (tp.wants_grad(iid)) {
      auto &gi = tp.grad_slot(iid);
      for (std::size_t i = 0; i < gi.size(); ++i) {
        gi[i] += g[2 * i + 1];
      }
    }
  });
}

// x: real [in, h, w]; weight: [out, in, 3, 3]; bias: [out].
inline Var conv2d(Tape &t, Var x, Var weight, Var bias, Precision p)
{
  Node const &xn = t.node(x);
  Node const &wn = t.node(weight);
  Node const &bn = t.node(bias);
  if (xn.complex || xn.dims.size() != 3 || wn.dims.size() != 4 || wn.dims[1] != xn.dims[0] ||
      wn.dims[2] != 3 || wn.dims[3] != 3 || bn.dims.size() != 1 || bn.dims[0] != wn.dims[0]) {
    throw InternalError("ad::conv2d: incompatible shapes");
  }
  Index const h = xn.dims[1];
  Index const w = xn.dims[2];
  ConvLayer layer(wn.dims[0], wn.dims[1]);
  layer.weight = wn.value;
  layer.bias = bn.value;
  std::vector<double> out(static_cast<std::size_t>(layer.out_channels * h * w));
  conv_forward(layer, xn.value.data(), h, w, out.data(), p);
  return t.record(std::move(out), {layer.out_channels, h, w}, false, {x.id, weight.id, bias.id},
                  [layer = std::move(layer), h, w, p, xid = x.id, wid = weight.id, bid = bias.id](Tape &tp, int self) {
                    double *dx = tp.wants_grad(xid) ? tp.grad_slot(xid).data() : nullptr;
                    double *dw = tp.wants_grad(wid) ? tp.grad_slot(wid).data() : nullptr;
                    double *db = tp.wants_grad(bid) ? tp.grad_slot(bid).data() : nullptr;
                    conv_backward(layer, tp.node(xid).value.data(), h, w, tp.node(self).grad.data(), dx, dw, db, p);
                  });
}

// ReLU with derivative 0 at 0.
inline Var relu(Tape &t, Var x)
{
  Node const &n = t.node(x);
  std::vector<double> out(n.value.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = n.value[i] > 0.0 ? n.value[i] : 0.0;
  }
  return t.record(std::move(out), n.dims, n.complex, {x.id}, [xid = x.id](Tape &tp, int self) {
    auto const &g = tp.node(self).grad;
    auto const &v = tp.node(xid).value;
    auto &gx = tp.grad_slot(xid);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (v[i] > 0.0) {
        gx[i] += g[i];
      }
    }
  });
}

inline Var add(Tape &t, Var a, Var b)
{
  Node const &an = t.node(a);
  Node const &bn = t.node(b);
  if (an.value.size() != bn.value.size() || an.complex != bn.complex) {
    throw InternalError("ad::add: operand mismatch");
  }
  std::vector<double> out(an.value.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = an.value[i] + bn.value[i];
  }
  return t.record(std::move(out), an.dims, an.complex, {a.id, b.id}, [aid = a.id, bid = b.id](Tape &tp, int self) {
    auto const g = tp.node(self).grad;
    for (int id : {aid, bid}) {
      if (tp.wants_grad(id)) {
        auto &gs = tp.grad_slot(id);
        for (std::size_t i = 0; i < g.size(); ++i) {
          gs[i] += g[i];
        }
      }
    }
  });
}

// s * x with s a real scalar node; x real or complex.
inline Var scale(Tape &t, Var x, Var s)
{
  Node const &xn = t.node(x);
  Node const &sn = t.node(s);
  if (sn.value.size() != 1 || sn.complex) {
    throw InternalError("ad::scale: factor must be a real scalar");
  }
  double const f = sn.value[0];
  std::vector<double> out(xn.value.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = f * xn.value[i];
  }
  return t.record(std::move(out), xn.dims, xn.complex, {x.id, s.id}, [xid = x.id, sid = s.id](Tape &tp, int self) {
    auto const &g = tp.node(self).grad;
    if (tp.wants_grad(sid)) {
      auto const &v = tp.node(xid).value;
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        acc += v[i] * g[i];
      }
      tp.grad_slot(sid)[0] += acc;
    }
    if (tp.wants_grad(xid)) {
      double const f = tp.node(sid).value[0];
      auto &gx = tp.grad_slot(xid);
      for (std::size_t i = 0; i < g.size(); ++i) {
        gx[i] += f * g[i];
      }
    }
  });
}

// Sum of all entries of a real node.
inline Var sum(Tape &t, Var x)
{
  Node const &n = t.node(x);
  if (n.complex) {
    throw InternalError("ad::sum: real input required");
  }
  double acc = 0.0;
  for (double v : n.value) {
    acc += v;
  }
  return t.record({acc}, {1}, false, {x.id}, [xid = x.id](Tape &tp, int self) {
    double const g = tp.node(self).grad[0];
    for (double &v : tp.grad_slot(xid)) {
      v += g;
    }
  });
}

// Centered unitary FFT of every coil of a complex [nc, ny, nx] node; the
// pullback is the inverse transform.
inline Var fft2c(Tape &t, Var k, bool inverse = false)
{
  auto const in = detail::to_coils<ImageDomain>(t, k);
  MultiCoilImage out(in.coils(), in.rows(), in.cols());
  for (Index c = 0; c < in.coils(); ++c) {
    comnet::detail::fft2c_impl(in.coil(c), out.coil(c), inverse);
  }
  Node const &n = t.node(k);
  return t.record(detail::from_complex(out.flat().data(), out.size()), n.dims, true, {k.id},
                  [kid = k.id, inverse](Tape &tp, int self) {
                    auto const g = detail::grad_coils<ImageDomain>(tp, self);
                    MultiCoilImage back(g.coils(), g.rows(), g.cols());
                    for (Index c = 0; c < g.coils(); ++c) {
                      comnet::detail::fft2c_impl(g.coil(c), back.coil(c), !inverse);
                    }
                    detail::accumulate(tp, kid, back);
                  });
}

inline Var ifft2c(Tape &t, Var k) { return fft2c(t, k, true); }

// A: complex [ny, nx] -> [nc, ny, nx]; pullback A*.
inline Var coil_project(Tape &t, Var img, CoilSensitivities const *sens)
{
  auto const x = image_value(t, img);
  auto const out = comnet::coil_project(x, *sens);
  return t.record(detail::from_complex(out.flat().data(), out.size()), {out.coils(), out.rows(), out.cols()}, true,
                  {img.id}, [iid = img.id, sens](Tape &tp, int self) {
                    auto const g = detail::grad_coils<ImageDomain>(tp, self);
                    detail::accumulate(tp, iid, comnet::coil_combine(g, *sens));
                  });
}

// A*: complex [nc, ny, nx] -> [ny, nx]; pullback A.
inline Var coil_combine(Tape &t, Var mimg, CoilSensitivities const *sens)
{
  auto const m = detail::to_coils<ImageDomain>(t, mimg);
  ComplexImage const out = comnet::coil_combine(m, *sens);
  return t.record(detail::from_complex(out.data(), out.size()), {out.rows(), out.cols()}, true, {mimg.id},
                  [mid = mimg.id, sens](Tape &tp, int self) {
                    Node const &n = tp.node(self);
                    ComplexImage const g = detail::image_of(n.grad, n.dims[0], n.dims[1]);
                    detail::accumulate(tp, mid, comnet::coil_project(g, *sens));
                  });
}

// Data consistency with fixed measurements y. Affine in k, so the pullback
// masks (hard) or damps (soft) the sampled entries.
inline Var dc_project(Tape &t, Var k, MultiCoilKspace const *y, SamplingMask const *mask, DCConfig dc)
{
  auto const in = detail::to_coils<KspaceDomain>(t, k);
  auto const out = comnet::dc_project(in, *y, *mask, dc);
  Node const &n = t.node(k);
  return t.record(detail::from_complex(out.flat().data(), out.size()), n.dims, true, {k.id},
                  [kid = k.id, mask, dc](Tape &tp, int self) {
                    auto g = detail::grad_coils<KspaceDomain>(tp, self);
                    double const keep = dc.hard ? 0.0 : 1.0 / (1.0 + dc.lambda);
                    Index const plane = g.plane_size();
                    for (Index c = 0; c < g.coils(); ++c) {
                      for (Index i = 0; i < plane; ++i) {
                        if (mask->pattern.data()[i]) {
                          g.flat()[static_cast<std::size_t>(c * plane + i)] *= keep;
                        }
                      }
                    }
                    detail::accumulate(tp, kid, g);
                  });
}

// SPIRiT kernel application; pullback is the adjoint operator.
inline Var spirit_apply(Tape &t, Var k, SpiritOperator const *op)
{
  auto const in = detail::to_coils<KspaceDomain>(t, k);
  auto const out = op->apply(in);
  Node const &n = t.node(k);
  return t.record(detail::from_complex(out.flat().data(), out.size()), n.dims, true, {k.id},
                  [kid = k.id, op](Tape &tp, int self) {
                    detail::accumulate(tp, kid, op->adjoint(detail::grad_coils<KspaceDomain>(tp, self)));
                  });
}

// l1_weight * (sum|d_re| + sum|d_im|) / N + l2_weight * sqrt((sum d_re^2 + d_im^2) / N),
// d = recon - ref, N = pixel count. Subgradient of |.| at 0 is 0.
inline Var l1l2_loss(Tape &t, Var recon, ComplexImage const *ref, double l1_weight, double l2_weight)
{
  Node const &n = t.node(recon);
  if (!n.complex || n.dims.size() != 2 || n.dims[0] != ref->rows() || n.dims[1] != ref->cols()) {
    throw InvalidArgument("loss: reconstruction and reference differ in shape");
  }
  double const count = static_cast<double>(ref->size());
  double l1 = 0.0;
  double l2 = 0.0;
  Cx const *r = as_complex(n.value);
  for (Index i = 0; i < ref->size(); ++i) {
    Cx const d = r[i] - ref->data()[i];
    l1 += std::abs(d.real()) + std::abs(d.imag());
    l2 += std::norm(d);
  }
  double const rms = std::sqrt(l2 / count);
  double const value = l1_weight * l1 / count + l2_weight * rms;
  return t.record({value}, {1}, false, {recon.id}, [rid = recon.id, ref, l1_weight, l2_weight, rms, count](Tape &tp, int self) {
    double const g = tp.node(self).grad[0];
    auto const &v = tp.node(rid).value;
    auto &gr = tp.grad_slot(rid);
    Cx const *rr = ref->data();
    auto sgn = [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); };
    for (std::size_t i = 0; i < v.size() / 2; ++i) {
      double const dr = v[2 * i] - rr[i].real();
      double const di = v[2 * i + 1] - rr[i].imag();
      double const l2r = rms > 0.0 ? dr / (count * rms) : 0.0;
      double const l2i = rms > 0.0 ? di / (count * rms) : 0.0;
      gr[2 * i] += g * (l1_weight * sgn(dr) / count + l2_weight * l2r);
      gr[2 * i + 1] += g * (l1_weight * sgn(di) / count + l2_weight * l2i);
    }
  });
}

} // namespace comnet::ad
