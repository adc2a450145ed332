#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "seld3d/tensor.hpp"

namespace seld3d {

/// n = audio embedding dim, k = visual feature dim, d = shared projection dim.
struct AttentionDims {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t d = 256;
};

/// Parameters of one audio-guided visual attention stage. Both input
/// streams pass through a biased linear map and LeakyReLU, are projected
/// into the shared d-dim space, summed, squashed by tanh, projected back to
/// k dims and turned into per-component gate weights by a sigmoid.
struct AttentionParams {
  TensorD u_a, b_ua;    // {n, n}, {n}
  TensorD u_v, b_uv;    // {k, k}, {k}
  TensorD w_a, b_wa;    // {d, n}, {d}
  TensorD w_v, b_wv;    // {d, k}, {d}
  TensorD w_av, b_wav;  // {k, d}, {k}

  AttentionDims dims() const;
};

/// Zero-valued parameters with the given dimensions.
AttentionParams attention_zeros(const AttentionDims& dims);

/// Seeded uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) initialization.
AttentionParams attention_init(const AttentionDims& dims, std::uint64_t seed);

/// Field registry in a fixed order; names are stable and usable as file
/// stems. The same order is shared by parameters and gradients.
std::vector<std::pair<std::string, TensorD*>> attention_fields(AttentionParams& p);
std::vector<std::pair<std::string, const TensorD*>> attention_fields(
    const AttentionParams& p);

/// Intermediates retained for the backward pass.
struct AttentionCache {
  TensorD a_in, v_in;  // {n}, {k}
  TensorD ha, ra;      // audio branch pre/post LeakyReLU, {n}
  TensorD hv, rv;      // visual branch pre/post LeakyReLU, {k}
  TensorD ts;          // tanh of the summed projections, {d}
  TensorD v_att;       // sigmoid gate weights, {k}
};

struct AttentionForward {
  TensorD v_att;  // gate weights in (0,1)^k
  AttentionCache cache;
};

/// Gate weights for one (visual, audio) vector pair.
/// Throws ShapeMismatchError when inputs disagree with the parameters.
AttentionForward att_forward(const TensorD& v_t, const TensorD& a_t,
                             const AttentionParams& p);

/// Elementwise product v_t * v_att. Throws ShapeMismatchError.
TensorD apply_gate(const TensorD& v_t, const TensorD& v_att);

/// Gradients of the gated output w.r.t. parameters and both inputs.
struct AttentionGrad {
  AttentionParams params;  // same field shapes as the forward parameters
  TensorD d_a;             // {n}
  TensorD d_v;             // {k}
};

/// Backward through gate + attention for upstream gradient d_v_out (dL/dV_out,
/// length k). Throws StaleCacheError when the cache does not match the
/// parameter dimensions.
AttentionGrad att_backward(const TensorD& d_v_out, const AttentionCache& cache,
                           const AttentionParams& p);

}  // namespace seld3d
