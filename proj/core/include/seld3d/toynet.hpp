#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "seld3d/attention.hpp"
#include "seld3d/losses.hpp"
#include "seld3d/tensor.hpp"

namespace seld3d {

/// Audio-visual net: four audio conv stages, each gating the visual stream
/// through attention at video rate, then concatenation, one dilated
/// temporal conv context block, and two 2-layer FC heads (SED sigmoid,
/// SCE linear).
struct ToyNetConfig {
  int n_classes = 3;
  std::array<int, 4> stage_channels = {8, 8, 8, 8};
  int n_mels = 64;        // input frequency dim; must be divisible by 16
  int visual_dim = 49;    // k
  int attention_dim = 16; // d
  int context_width = 32;
  int head_hidden = 32;
  std::uint64_t seed = 0;
  bool use_attention = true;  // false forces every gate weight to 1
};

struct ConvLayer {
  TensorD weight;  // {C_out, C_in, 3, 3}
  TensorD bias;    // {C_out}
};

struct DenseLayer {
  TensorD weight;  // {out, in}
  TensorD bias;    // {out}
};

struct ToyNetParams {
  std::array<ConvLayer, 4> conv;
  std::array<AttentionParams, 4> att;
  TensorD ctx_weight;  // {H, 3, fused_dim}, taps at t-2, t, t+2
  TensorD ctx_bias;    // {H}
  DenseLayer sed1, sed2;
  DenseLayer sce1, sce2;
};

struct ToyNet {
  ToyNetConfig config;
  ToyNetParams params;
};

/// Seeded net with uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) parameters.
/// Throws ConfigError on invalid dimensions.
ToyNet make_toynet(const ToyNetConfig& cfg);

/// Flattened parameter registry in a stable order; names double as
/// checkpoint file stems. fan_in drives initialization bounds.
struct ParamField {
  std::string name;
  TensorD* tensor = nullptr;
  std::size_t fan_in = 0;
};
std::vector<ParamField> toynet_fields(ToyNetParams& p);

struct ToyNetOutput {
  TensorD sed;  // {Tv, C} sigmoid probabilities
  TensorD sce;  // {Tv, C, 3} linear coordinates
};

/// audio_feats {7, T, n_mels} with T = 5 * Tv; visual_feats {Tv, 49}.
/// Throws ShapeMismatchError on disagreement.
ToyNetOutput toynet_forward(const ToyNet& net, const TensorD& audio_feats,
                            const TensorD& visual_feats);

struct ToyNetBackward {
  LossBreakdown loss;
  ToyNetParams grads;  // shapes mirror net.params
};

/// Forward, combined loss against {Tv, C} activity / {Tv, C, 3} targets,
/// and analytic gradients for every parameter.
ToyNetBackward toynet_forward_backward(const ToyNet& net, const TensorD& audio_feats,
                                       const TensorD& visual_feats,
                                       const TensorD& activity,
                                       const TensorD& targets);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam on one tensor; step is 1-based.
void adam_update_tensor(TensorD& param, const TensorD& grad, TensorD& m, TensorD& v,
                        long long step, double lr, const AdamConfig& cfg = {});

struct AdamState {
  ToyNetParams m;
  ToyNetParams v;
  long long step = 0;
};

AdamState make_adam_state(const ToyNet& net);

void adam_step(ToyNetParams& params, const ToyNetParams& grads, AdamState& state,
               double lr, const AdamConfig& cfg = {});

/// One optimization step on a single clip. Throws NonFiniteLossError when
/// the loss is NaN or infinite.
LossBreakdown train_step(ToyNet& net, AdamState& state, const TensorD& audio_feats,
                         const TensorD& visual_feats, const TensorD& activity,
                         const TensorD& targets, double lr);

/// Warmup / hold / decay schedule over total_steps: linear warmup from
/// peak * floor_factor to peak across the first warmup_frac of steps, hold
/// at peak until warmup_frac + hold_frac, then exponential decay back to
/// peak * floor_factor at the final step.
double tri_stage_lr(long long step, long long total_steps, double peak = 5e-4,
                    double warmup_frac = 0.1, double hold_frac = 0.4,
                    double floor_factor = 0.01);

/// Checkpoint = key=value manifest (config + tensor list) plus one
/// tensor-store file per parameter in `dir`.
void save_checkpoint(const std::filesystem::path& dir, const ToyNet& net);
ToyNet load_checkpoint(const std::filesystem::path& dir);

}  // namespace seld3d
