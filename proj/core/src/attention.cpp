#include "seld3d/attention.hpp"

#include <cmath>
#include <random>

#include "linalg.hpp"
#include "seld3d/errors.hpp"

namespace seld3d {

using detail::leaky_relu;
using detail::leaky_relu_slope;
using detail::matvec;
using detail::matvec_transposed;
using detail::outer_accumulate;

AttentionDims AttentionParams::dims() const {
  AttentionDims d;
  d.n = u_a.rank() == 2 ? u_a.dim(0) : 0;
  d.k = u_v.rank() == 2 ? u_v.dim(0) : 0;
  d.d = w_a.rank() == 2 ? w_a.dim(0) : 0;
  return d;
}

AttentionParams attention_zeros(const AttentionDims& dims) {
  if (dims.n == 0 || dims.k == 0 || dims.d == 0) {
    throw ShapeMismatchError("attention: dimensions must be positive");
  }
  AttentionParams p;
  p.u_a = TensorD({dims.n, dims.n});
  p.b_ua = TensorD({dims.n});
  p.u_v = TensorD({dims.k, dims.k});
  p.b_uv = TensorD({dims.k});
  p.w_a = TensorD({dims.d, dims.n});
  p.b_wa = TensorD({dims.d});
  p.w_v = TensorD({dims.d, dims.k});
  p.b_wv = TensorD({dims.d});
  p.w_av = TensorD({dims.k, dims.d});
  p.b_wav = TensorD({dims.k});
  return p;
}

AttentionParams attention_init(const AttentionDims& dims, std::uint64_t seed) {
  AttentionParams p = attention_zeros(dims);
  std::mt19937_64 rng(seed);
  for (auto& [name, tensor] : attention_fields(p)) {
    // Matrices draw with fan_in = columns; each bias shares its matrix's bound.
    const std::size_t fan_in = tensor->rank() == 2 ? tensor->dim(1)
                               : name == "b_ua"    ? dims.n
                               : name == "b_uv"    ? dims.k
                               : name == "b_wa"    ? dims.n
                               : name == "b_wv"    ? dims.k
                                                   : dims.d;
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : tensor->values()) v = dist(rng);
  }
  return p;
}

std::vector<std::pair<std::string, TensorD*>> attention_fields(AttentionParams& p) {
  return {{"u_a", &p.u_a},   {"b_ua", &p.b_ua}, {"u_v", &p.u_v},   {"b_uv", &p.b_uv},
          {"w_a", &p.w_a},   {"b_wa", &p.b_wa}, {"w_v", &p.w_v},   {"b_wv", &p.b_wv},
          {"w_av", &p.w_av}, {"b_wav", &p.b_wav}};
}

std::vector<std::pair<std::string, const TensorD*>> attention_fields(
    const AttentionParams& p) {
  std::vector<std::pair<std::string, const TensorD*>> out;
  for (auto& [name, tensor] : attention_fields(const_cast<AttentionParams&>(p))) {
    out.emplace_back(name, tensor);
  }
  return out;
}

namespace {

void check_dims(const AttentionParams& p) {
  const AttentionDims d = p.dims();
  const bool ok = d.n > 0 && d.k > 0 && d.d > 0 &&
                  p.u_a.shape() == std::vector<std::size_t>{d.n, d.n} &&
                  p.b_ua.shape() == std::vector<std::size_t>{d.n} &&
                  p.u_v.shape() == std::vector<std::size_t>{d.k, d.k} &&
                  p.b_uv.shape() == std::vector<std::size_t>{d.k} &&
                  p.w_a.shape() == std::vector<std::size_t>{d.d, d.n} &&
                  p.b_wa.shape() == std::vector<std::size_t>{d.d} &&
                  p.w_v.shape() == std::vector<std::size_t>{d.d, d.k} &&
                  p.b_wv.shape() == std::vector<std::size_t>{d.d} &&
                  p.w_av.shape() == std::vector<std::size_t>{d.k, d.d} &&
                  p.b_wav.shape() == std::vector<std::size_t>{d.k};
  if (!ok) throw ShapeMismatchError("attention: inconsistent parameter shapes");
}

}  // namespace

AttentionForward att_forward(const TensorD& v_t, const TensorD& a_t,
                             const AttentionParams& p) {
  check_dims(p);
  const AttentionDims d = p.dims();
  if (a_t.rank() != 1 || a_t.dim(0) != d.n || v_t.rank() != 1 || v_t.dim(0) != d.k) {
    throw ShapeMismatchError("att_forward: input lengths disagree with parameters");
  }

  AttentionForward out;
  AttentionCache& c = out.cache;
  c.a_in = a_t;
  c.v_in = v_t;
  c.ha = TensorD({d.n});
  c.ra = TensorD({d.n});
  c.hv = TensorD({d.k});
  c.rv = TensorD({d.k});
  c.ts = TensorD({d.d});
  c.v_att = TensorD({d.k});

  matvec(p.u_a, a_t.data(), p.b_ua.data(), c.ha.data());
  for (std::size_t i = 0; i < d.n; ++i) c.ra[i] = leaky_relu(c.ha[i]);
  matvec(p.u_v, v_t.data(), p.b_uv.data(), c.hv.data());
  for (std::size_t i = 0; i < d.k; ++i) c.rv[i] = leaky_relu(c.hv[i]);

  TensorD a_proj({d.d});
  TensorD v_proj({d.d});
  matvec(p.w_a, c.ra.data(), p.b_wa.data(), a_proj.data());
  matvec(p.w_v, c.rv.data(), p.b_wv.data(), v_proj.data());
  for (std::size_t i = 0; i < d.d; ++i) c.ts[i] = std::tanh(a_proj[i] + v_proj[i]);

  TensorD z({d.k});
  matvec(p.w_av, c.ts.data(), p.b_wav.data(), z.data());
  for (std::size_t i = 0; i < d.k; ++i) c.v_att[i] = 1.0 / (1.0 + std::exp(-z[i]));

  out.v_att = c.v_att;
  return out;
}

TensorD apply_gate(const TensorD& v_t, const TensorD& v_att) {
  if (!v_t.same_shape(v_att)) {
    throw ShapeMismatchError("apply_gate: vector lengths differ");
  }
  TensorD out(v_t.shape());
  for (std::size_t i = 0; i < v_t.size(); ++i) out[i] = v_t[i] * v_att[i];
  return out;
}

AttentionGrad att_backward(const TensorD& d_v_out, const AttentionCache& cache,
                           const AttentionParams& p) {
  check_dims(p);
  const AttentionDims d = p.dims();
  const bool cache_ok =
      cache.a_in.rank() == 1 && cache.a_in.dim(0) == d.n && cache.v_in.rank() == 1 &&
      cache.v_in.dim(0) == d.k && cache.ha.size() == d.n && cache.ra.size() == d.n &&
      cache.hv.size() == d.k && cache.rv.size() == d.k && cache.ts.size() == d.d &&
      cache.v_att.size() == d.k;
  if (!cache_ok) {
    throw StaleCacheError("att_backward: cache shapes do not match parameters");
  }
  if (d_v_out.rank() != 1 || d_v_out.dim(0) != d.k) {
    throw ShapeMismatchError("att_backward: upstream gradient must have length k");
  }

  AttentionGrad g;
  g.params = attention_zeros(d);
  g.d_a = TensorD({d.n});
  g.d_v = TensorD({d.k});

  // Gate: V_out = V * V_att.
  TensorD d_att({d.k});
  for (std::size_t i = 0; i < d.k; ++i) {
    d_att[i] = d_v_out[i] * cache.v_in[i];
    g.d_v[i] = d_v_out[i] * cache.v_att[i];
  }

  // Sigmoid and the k x d projection.
  TensorD dz({d.k});
  for (std::size_t i = 0; i < d.k; ++i) {
    dz[i] = d_att[i] * cache.v_att[i] * (1.0 - cache.v_att[i]);
  }
  outer_accumulate(g.params.w_av, dz.data(), cache.ts.data());
  for (std::size_t i = 0; i < d.k; ++i) g.params.b_wav[i] = dz[i];

  // tanh of the summed projections.
  TensorD ds({d.d});
  matvec_transposed(p.w_av, dz.data(), ds.data());
  for (std::size_t i = 0; i < d.d; ++i) ds[i] *= 1.0 - cache.ts[i] * cache.ts[i];

  // Audio branch.
  outer_accumulate(g.params.w_a, ds.data(), cache.ra.data());
  for (std::size_t i = 0; i < d.d; ++i) g.params.b_wa[i] = ds[i];
  TensorD dha({d.n});
  matvec_transposed(p.w_a, ds.data(), dha.data());
  for (std::size_t i = 0; i < d.n; ++i) dha[i] *= leaky_relu_slope(cache.ha[i]);
  outer_accumulate(g.params.u_a, dha.data(), cache.a_in.data());
  for (std::size_t i = 0; i < d.n; ++i) g.params.b_ua[i] = dha[i];
  matvec_transposed(p.u_a, dha.data(), g.d_a.data());

  // Visual branch; the gate path gradient is already in d_v.
  outer_accumulate(g.params.w_v, ds.data(), cache.rv.data());
  for (std::size_t i = 0; i < d.d; ++i) g.params.b_wv[i] = ds[i];
  TensorD dhv({d.k});
  matvec_transposed(p.w_v, ds.data(), dhv.data());
  for (std::size_t i = 0; i < d.k; ++i) dhv[i] *= leaky_relu_slope(cache.hv[i]);
  outer_accumulate(g.params.u_v, dhv.data(), cache.v_in.data());
  for (std::size_t i = 0; i < d.k; ++i) g.params.b_uv[i] = dhv[i];
  TensorD dv_branch({d.k});
  matvec_transposed(p.u_v, dhv.data(), dv_branch.data());
  for (std::size_t i = 0; i < d.k; ++i) g.d_v[i] += dv_branch[i];

  return g;
}

}  // namespace seld3d
