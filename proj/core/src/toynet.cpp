#include "seld3d/toynet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "linalg.hpp"
#include "seld3d/errors.hpp"
#include "seld3d/keyvalue.hpp"
#include "seld3d/tensor_store.hpp"

namespace seld3d {

using detail::leaky_relu;
using detail::leaky_relu_slope;
using detail::matvec;
using detail::matvec_transposed;
using detail::outer_accumulate;

namespace {

void validate(const ToyNetConfig& cfg) {
  const bool widths_ok = std::all_of(cfg.stage_channels.begin(), cfg.stage_channels.end(),
                                     [](int c) { return c > 0; });
  if (cfg.n_classes <= 0 || !widths_ok || cfg.n_mels <= 0 || cfg.n_mels % 16 != 0 ||
      cfg.visual_dim <= 0 || cfg.attention_dim <= 0 || cfg.context_width <= 0 ||
      cfg.head_hidden <= 0) {
    throw ConfigError("toynet: invalid configuration (widths positive, n_mels a multiple of 16)");
  }
}

// Frequency dim after stage s (0-based); each stage halves it.
std::size_t stage_freq(const ToyNetConfig& cfg, int s) {
  return static_cast<std::size_t>(cfg.n_mels) >> (s + 1);
}

std::size_t stage_embed_dim(const ToyNetConfig& cfg, int s) {
  return static_cast<std::size_t>(cfg.stage_channels[s]) * stage_freq(cfg, s);
}

std::size_t fused_dim(const ToyNetConfig& cfg) {
  return stage_embed_dim(cfg, 3) + static_cast<std::size_t>(cfg.visual_dim);
}

ToyNetParams make_params(const ToyNetConfig& cfg) {
  ToyNetParams p;
  std::size_t c_in = 7;
  for (int s = 0; s < 4; ++s) {
    const auto c_out = static_cast<std::size_t>(cfg.stage_channels[s]);
    p.conv[s].weight = TensorD({c_out, c_in, 3, 3});
    p.conv[s].bias = TensorD({c_out});
    AttentionDims dims;
    dims.n = stage_embed_dim(cfg, s);
    dims.k = static_cast<std::size_t>(cfg.visual_dim);
    dims.d = static_cast<std::size_t>(cfg.attention_dim);
    p.att[s] = attention_zeros(dims);
    c_in = c_out;
  }
  const auto h = static_cast<std::size_t>(cfg.context_width);
  const auto h2 = static_cast<std::size_t>(cfg.head_hidden);
  const auto c = static_cast<std::size_t>(cfg.n_classes);
  p.ctx_weight = TensorD({h, 3, fused_dim(cfg)});
  p.ctx_bias = TensorD({h});
  p.sed1 = {TensorD({h2, h}), TensorD({h2})};
  p.sed2 = {TensorD({c, h2}), TensorD({c})};
  p.sce1 = {TensorD({h2, h}), TensorD({h2})};
  p.sce2 = {TensorD({3 * c, h2}), TensorD({3 * c})};
  return p;
}

void append_dense(std::vector<ParamField>& out, const std::string& name, DenseLayer& l) {
  out.push_back({name + ".weight", &l.weight, l.weight.dim(1)});
  out.push_back({name + ".bias", &l.bias, l.weight.dim(1)});
}

}  // namespace

std::vector<ParamField> toynet_fields(ToyNetParams& p) {
  std::vector<ParamField> out;
  for (int s = 0; s < 4; ++s) {
    const std::string stem = "conv" + std::to_string(s);
    const std::size_t fan = p.conv[s].weight.dim(1) * 9;
    out.push_back({stem + ".weight", &p.conv[s].weight, fan});
    out.push_back({stem + ".bias", &p.conv[s].bias, fan});
    const std::string att_stem = "att" + std::to_string(s) + ".";
    const std::size_t n = p.att[s].u_a.dim(1);
    const std::size_t k = p.att[s].u_v.dim(1);
    const std::size_t d = p.att[s].w_av.dim(1);
    out.push_back({att_stem + "u_a", &p.att[s].u_a, n});
    out.push_back({att_stem + "b_ua", &p.att[s].b_ua, n});
    out.push_back({att_stem + "u_v", &p.att[s].u_v, k});
    out.push_back({att_stem + "b_uv", &p.att[s].b_uv, k});
    out.push_back({att_stem + "w_a", &p.att[s].w_a, n});
    out.push_back({att_stem + "b_wa", &p.att[s].b_wa, n});
    out.push_back({att_stem + "w_v", &p.att[s].w_v, k});
    out.push_back({att_stem + "b_wv", &p.att[s].b_wv, k});
    out.push_back({att_stem + "w_av", &p.att[s].w_av, d});
    out.push_back({att_stem + "b_wav", &p.att[s].b_wav, d});
  }
  out.push_back({"ctx.weight", &p.ctx_weight, p.ctx_weight.dim(1) * p.ctx_weight.dim(2)});
  out.push_back({"ctx.bias", &p.ctx_bias, p.ctx_weight.dim(1) * p.ctx_weight.dim(2)});
  append_dense(out, "sed1", p.sed1);
  append_dense(out, "sed2", p.sed2);
  append_dense(out, "sce1", p.sce1);
  append_dense(out, "sce2", p.sce2);
  return out;
}

ToyNet make_toynet(const ToyNetConfig& cfg) {
  validate(cfg);
  ToyNet net;
  net.config = cfg;
  net.params = make_params(cfg);
  std::mt19937_64 rng(cfg.seed);
  for (ParamField& f : toynet_fields(net.params)) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(f.fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : f.tensor->values()) v = dist(rng);
  }
  return net;
}

namespace {

// out = conv3x3(in) + bias, zero-padded same; in {Ci,T,F}, out {Co,T,F}.
void conv3x3_forward(const TensorD& in, const TensorD& w, const TensorD& b,
                     TensorD& out) {
  const std::size_t co_n = w.dim(0);
  const std::size_t ci_n = w.dim(1);
  const std::size_t t_n = in.dim(1);
  const std::size_t f_n = in.dim(2);
  for (std::size_t co = 0; co < co_n; ++co) {
    double* plane = out.data() + co * t_n * f_n;
    std::fill(plane, plane + t_n * f_n, b[co]);
    for (std::size_t ci = 0; ci < ci_n; ++ci) {
      for (int dt = -1; dt <= 1; ++dt) {
        const std::size_t t0 = dt < 0 ? 1 : 0;
        const std::size_t t1 = dt > 0 ? t_n - 1 : t_n;
        for (int df = -1; df <= 1; ++df) {
          const double wv = w(co, ci, static_cast<std::size_t>(dt + 1),
                              static_cast<std::size_t>(df + 1));
          const std::size_t f0 = df < 0 ? 1 : 0;
          const std::size_t f1 = df > 0 ? f_n - 1 : f_n;
          for (std::size_t t = t0; t < t1; ++t) {
            const double* irow = in.data() + (ci * t_n + t + dt) * f_n + df;
            double* orow = plane + t * f_n;
            for (std::size_t f = f0; f < f1; ++f) orow[f] += wv * irow[f];
          }
        }
      }
    }
  }
}

// Accumulates dw/db and (when din != null) the input gradient for dz.
void conv3x3_backward(const TensorD& in, const TensorD& w, const TensorD& dz,
                      TensorD& dw, TensorD& db, TensorD* din) {
  const std::size_t co_n = w.dim(0);
  const std::size_t ci_n = w.dim(1);
  const std::size_t t_n = in.dim(1);
  const std::size_t f_n = in.dim(2);
  for (std::size_t co = 0; co < co_n; ++co) {
    const double* plane = dz.data() + co * t_n * f_n;
    double acc = 0.0;
    for (std::size_t i = 0; i < t_n * f_n; ++i) acc += plane[i];
    db[co] += acc;
  }
  for (std::size_t co = 0; co < co_n; ++co) {
    for (std::size_t ci = 0; ci < ci_n; ++ci) {
      for (int dt = -1; dt <= 1; ++dt) {
        const std::size_t t0 = dt < 0 ? 1 : 0;
        const std::size_t t1 = dt > 0 ? t_n - 1 : t_n;
        for (int df = -1; df <= 1; ++df) {
          const double wv = w(co, ci, static_cast<std::size_t>(dt + 1),
                              static_cast<std::size_t>(df + 1));
          const std::size_t f0 = df < 0 ? 1 : 0;
          const std::size_t f1 = df > 0 ? f_n - 1 : f_n;
          double wacc = 0.0;
          for (std::size_t t = t0; t < t1; ++t) {
            const double* dzrow = dz.data() + (co * t_n + t) * f_n;
            const double* irow = in.data() + (ci * t_n + t + dt) * f_n + df;
            double* drow =
                din ? din->data() + (ci * t_n + t + dt) * f_n + df : nullptr;
            for (std::size_t f = f0; f < f1; ++f) {
              wacc += dzrow[f] * irow[f];
              if (drow) drow[f] += wv * dzrow[f];
            }
          }
          dw(co, ci, static_cast<std::size_t>(dt + 1), static_cast<std::size_t>(df + 1)) +=
              wacc;
        }
      }
    }
  }
}

struct StageCache {
  TensorD z;                         // conv preactivation {C, T, Fin}
  TensorD a;                         // frequency-pooled activation {C, T, Fout}
  TensorD e;                         // time-pooled embedding {Tv, n}
  std::vector<std::uint8_t> argmax;  // winning window offset per (v, j)
  std::vector<AttentionCache> att;   // one per video frame when gating
  TensorD v;                         // visual stream after this stage {Tv, k}
};

struct ForwardCache {
  std::array<StageCache, 4> stage;
  TensorD x;                  // {Tv, fused}
  TensorD ctx_z, ctx;         // {Tv, H}
  TensorD sed_hz, sed_h;      // {Tv, H2}
  TensorD sce_hz, sce_h;      // {Tv, H2}
  ToyNetOutput out;
};

void forward_impl(const ToyNet& net, const TensorD& audio, const TensorD& visual,
                  ForwardCache& fc) {
  const ToyNetConfig& cfg = net.config;
  validate(cfg);
  if (audio.rank() != 3 || audio.dim(0) != 7 ||
      audio.dim(2) != static_cast<std::size_t>(cfg.n_mels)) {
    throw ShapeMismatchError("toynet_forward: audio features must be {7, T, n_mels}");
  }
  const std::size_t t_audio = audio.dim(1);
  if (t_audio % 5 != 0 || t_audio == 0) {
    throw ShapeMismatchError("toynet_forward: audio frame count must be a positive multiple of 5");
  }
  const std::size_t tv = t_audio / 5;
  const auto k = static_cast<std::size_t>(cfg.visual_dim);
  if (visual.rank() != 2 || visual.dim(0) != tv || visual.dim(1) != k) {
    throw ShapeMismatchError("toynet_forward: visual features must be {T/5, visual_dim}");
  }

  const TensorD* stage_in = &audio;
  const TensorD* v_prev = &visual;
  TensorD erow, vrow({k});
  for (int s = 0; s < 4; ++s) {
    StageCache& sc = fc.stage[s];
    const auto c_out = static_cast<std::size_t>(cfg.stage_channels[s]);
    const std::size_t f_in = stage_in->dim(2);
    const std::size_t f_out = f_in / 2;
    const std::size_t n = c_out * f_out;

    sc.z = TensorD({c_out, t_audio, f_in});
    conv3x3_forward(*stage_in, net.params.conv[s].weight, net.params.conv[s].bias, sc.z);

    sc.a = TensorD({c_out, t_audio, f_out});
    for (std::size_t c = 0; c < c_out; ++c) {
      for (std::size_t t = 0; t < t_audio; ++t) {
        const double* zr = sc.z.data() + (c * t_audio + t) * f_in;
        double* ar = sc.a.data() + (c * t_audio + t) * f_out;
        for (std::size_t f = 0; f < f_out; ++f) {
          ar[f] = 0.5 * (leaky_relu(zr[2 * f]) + leaky_relu(zr[2 * f + 1]));
        }
      }
    }

    // Sum of mean and max over non-overlapping windows of 5 audio frames.
    sc.e = TensorD({tv, n});
    sc.argmax.assign(tv * n, 0);
    for (std::size_t v = 0; v < tv; ++v) {
      for (std::size_t c = 0; c < c_out; ++c) {
        for (std::size_t f = 0; f < f_out; ++f) {
          const std::size_t j = c * f_out + f;
          double sum = 0.0;
          double best = -std::numeric_limits<double>::infinity();
          std::uint8_t best_w = 0;
          for (std::size_t w = 0; w < 5; ++w) {
            const double val = sc.a(c, v * 5 + w, f);
            sum += val;
            if (val > best) {
              best = val;
              best_w = static_cast<std::uint8_t>(w);
            }
          }
          sc.e(v, j) = sum / 5.0 + best;
          sc.argmax[v * n + j] = best_w;
        }
      }
    }

    sc.v = TensorD({tv, k});
    if (cfg.use_attention) {
      sc.att.resize(tv);
      erow = TensorD({n});
      for (std::size_t v = 0; v < tv; ++v) {
        std::copy(sc.e.data() + v * n, sc.e.data() + (v + 1) * n, erow.data());
        std::copy(v_prev->data() + v * k, v_prev->data() + (v + 1) * k, vrow.data());
        AttentionForward af = att_forward(vrow, erow, net.params.att[s]);
        for (std::size_t i = 0; i < k; ++i) sc.v(v, i) = vrow[i] * af.v_att[i];
        sc.att[v] = std::move(af.cache);
      }
    } else {
      sc.v = *v_prev;
    }

    stage_in = &sc.a;
    v_prev = &sc.v;
  }

  const std::size_t n4 = stage_embed_dim(cfg, 3);
  const std::size_t fused = n4 + k;
  fc.x = TensorD({tv, fused});
  for (std::size_t v = 0; v < tv; ++v) {
    std::copy(fc.stage[3].e.data() + v * n4, fc.stage[3].e.data() + (v + 1) * n4,
              fc.x.data() + v * fused);
    std::copy(fc.stage[3].v.data() + v * k, fc.stage[3].v.data() + (v + 1) * k,
              fc.x.data() + v * fused + n4);
  }

  // Dilated temporal mixing with taps at t-2, t, t+2.
  const auto h = static_cast<std::size_t>(cfg.context_width);
  fc.ctx_z = TensorD({tv, h});
  fc.ctx = TensorD({tv, h});
  for (std::size_t t = 0; t < tv; ++t) {
    double* zr = fc.ctx_z.data() + t * h;
    std::copy(net.params.ctx_bias.data(), net.params.ctx_bias.data() + h, zr);
    for (int tap = 0; tap < 3; ++tap) {
      const long long ts = static_cast<long long>(t) + 2 * (tap - 1);
      if (ts < 0 || ts >= static_cast<long long>(tv)) continue;
      const double* xr = fc.x.data() + static_cast<std::size_t>(ts) * fused;
      for (std::size_t hh = 0; hh < h; ++hh) {
        const double* wr = net.params.ctx_weight.data() + (hh * 3 + tap) * fused;
        double acc = 0.0;
        for (std::size_t i = 0; i < fused; ++i) acc += wr[i] * xr[i];
        zr[hh] += acc;
      }
    }
    for (std::size_t hh = 0; hh < h; ++hh) fc.ctx(t, hh) = leaky_relu(zr[hh]);
  }

  const auto h2 = static_cast<std::size_t>(cfg.head_hidden);
  const auto classes = static_cast<std::size_t>(cfg.n_classes);
  fc.sed_hz = TensorD({tv, h2});
  fc.sed_h = TensorD({tv, h2});
  fc.sce_hz = TensorD({tv, h2});
  fc.sce_h = TensorD({tv, h2});
  fc.out.sed = TensorD({tv, classes});
  fc.out.sce = TensorD({tv, classes, 3});
  for (std::size_t t = 0; t < tv; ++t) {
    const double* cr = fc.ctx.data() + t * h;
    double* shz = fc.sed_hz.data() + t * h2;
    double* sh = fc.sed_h.data() + t * h2;
    matvec(net.params.sed1.weight, cr, net.params.sed1.bias.data(), shz);
    for (std::size_t i = 0; i < h2; ++i) sh[i] = leaky_relu(shz[i]);
    std::vector<double> z2(classes);
    matvec(net.params.sed2.weight, sh, net.params.sed2.bias.data(), z2.data());
    for (std::size_t c = 0; c < classes; ++c) {
      fc.out.sed(t, c) = 1.0 / (1.0 + std::exp(-z2[c]));
    }

    double* chz = fc.sce_hz.data() + t * h2;
    double* ch = fc.sce_h.data() + t * h2;
    matvec(net.params.sce1.weight, cr, net.params.sce1.bias.data(), chz);
    for (std::size_t i = 0; i < h2; ++i) ch[i] = leaky_relu(chz[i]);
    matvec(net.params.sce2.weight, ch, net.params.sce2.bias.data(),
           fc.out.sce.data() + t * classes * 3);
  }
}

void accumulate_attention(AttentionParams& dst, const AttentionParams& src) {
  auto d = attention_fields(dst);
  const auto s = attention_fields(src);
  for (std::size_t i = 0; i < d.size(); ++i) {
    double* out = d[i].second->data();
    const double* in = s[i].second->data();
    for (std::size_t j = 0; j < d[i].second->size(); ++j) out[j] += in[j];
  }
}

}  // namespace

ToyNetOutput toynet_forward(const ToyNet& net, const TensorD& audio_feats,
                            const TensorD& visual_feats) {
  ForwardCache fc;
  forward_impl(net, audio_feats, visual_feats, fc);
  return std::move(fc.out);
}

ToyNetBackward toynet_forward_backward(const ToyNet& net, const TensorD& audio_feats,
                                       const TensorD& visual_feats,
                                       const TensorD& activity, const TensorD& targets) {
  ForwardCache fc;
  forward_impl(net, audio_feats, visual_feats, fc);

  const ToyNetConfig& cfg = net.config;
  const std::size_t tv = fc.out.sed.dim(0);
  const auto classes = static_cast<std::size_t>(cfg.n_classes);
  const auto k = static_cast<std::size_t>(cfg.visual_dim);
  const auto h = static_cast<std::size_t>(cfg.context_width);
  const auto h2 = static_cast<std::size_t>(cfg.head_hidden);
  const std::size_t n4 = stage_embed_dim(cfg, 3);
  const std::size_t fused = n4 + k;

  SeldLoss loss = seld_loss(fc.out.sed, fc.out.sce, activity, targets);

  ToyNetBackward out;
  out.loss = loss.breakdown;
  out.grads = make_params(cfg);

  // Heads.
  TensorD dctx({tv, h});
  for (std::size_t t = 0; t < tv; ++t) {
    const double* cr = fc.ctx.data() + t * h;
    double* dcr = dctx.data() + t * h;

    std::vector<double> dz2(classes);
    for (std::size_t c = 0; c < classes; ++c) {
      const double p = fc.out.sed(t, c);
      dz2[c] = loss.sed_grad(t, c) * p * (1.0 - p);
    }
    const double* sh = fc.sed_h.data() + t * h2;
    outer_accumulate(out.grads.sed2.weight, dz2.data(), sh);
    for (std::size_t c = 0; c < classes; ++c) out.grads.sed2.bias[c] += dz2[c];
    std::vector<double> dh(h2);
    matvec_transposed(net.params.sed2.weight, dz2.data(), dh.data());
    const double* shz = fc.sed_hz.data() + t * h2;
    for (std::size_t i = 0; i < h2; ++i) dh[i] *= leaky_relu_slope(shz[i]);
    outer_accumulate(out.grads.sed1.weight, dh.data(), cr);
    for (std::size_t i = 0; i < h2; ++i) out.grads.sed1.bias[i] += dh[i];
    std::vector<double> dc(h);
    matvec_transposed(net.params.sed1.weight, dh.data(), dc.data());
    for (std::size_t i = 0; i < h; ++i) dcr[i] = dc[i];

    const double* dz3 = loss.sce_grad.data() + t * classes * 3;
    const double* ch = fc.sce_h.data() + t * h2;
    outer_accumulate(out.grads.sce2.weight, dz3, ch);
    for (std::size_t c = 0; c < classes * 3; ++c) out.grads.sce2.bias[c] += dz3[c];
    std::vector<double> dch(h2);
    matvec_transposed(net.params.sce2.weight, dz3, dch.data());
    const double* chz = fc.sce_hz.data() + t * h2;
    for (std::size_t i = 0; i < h2; ++i) dch[i] *= leaky_relu_slope(chz[i]);
    outer_accumulate(out.grads.sce1.weight, dch.data(), cr);
    for (std::size_t i = 0; i < h2; ++i) out.grads.sce1.bias[i] += dch[i];
    matvec_transposed(net.params.sce1.weight, dch.data(), dc.data());
    for (std::size_t i = 0; i < h; ++i) dcr[i] += dc[i];
  }

  // Context block.
  TensorD dx({tv, fused});
  for (std::size_t t = 0; t < tv; ++t) {
    double* dzr = dctx.data() + t * h;
    const double* zr = fc.ctx_z.data() + t * h;
    for (std::size_t i = 0; i < h; ++i) dzr[i] *= leaky_relu_slope(zr[i]);
    for (std::size_t i = 0; i < h; ++i) out.grads.ctx_bias[i] += dzr[i];
    for (int tap = 0; tap < 3; ++tap) {
      const long long ts = static_cast<long long>(t) + 2 * (tap - 1);
      if (ts < 0 || ts >= static_cast<long long>(tv)) continue;
      const double* xr = fc.x.data() + static_cast<std::size_t>(ts) * fused;
      double* dxr = dx.data() + static_cast<std::size_t>(ts) * fused;
      for (std::size_t hh = 0; hh < h; ++hh) {
        const double g = dzr[hh];
        if (g == 0.0) continue;
        double* dwr = out.grads.ctx_weight.data() + (hh * 3 + tap) * fused;
        const double* wr = net.params.ctx_weight.data() + (hh * 3 + tap) * fused;
        for (std::size_t i = 0; i < fused; ++i) {
          dwr[i] += g * xr[i];
          dxr[i] += g * wr[i];
        }
      }
    }
  }

  // Split the fused gradient.
  std::array<TensorD, 4> de;
  for (int s = 0; s < 4; ++s) {
    de[s] = TensorD({tv, stage_embed_dim(cfg, s)});
  }
  TensorD dv({tv, k});
  for (std::size_t v = 0; v < tv; ++v) {
    std::copy(dx.data() + v * fused, dx.data() + v * fused + n4, de[3].data() + v * n4);
    std::copy(dx.data() + v * fused + n4, dx.data() + (v + 1) * fused, dv.data() + v * k);
  }

  // Stages in reverse; d_conv_in carries the conv input gradient downward.
  TensorD d_conv_in;
  TensorD drow({k});
  for (int s = 3; s >= 0; --s) {
    const StageCache& sc = fc.stage[s];
    const auto c_out = static_cast<std::size_t>(cfg.stage_channels[s]);
    const std::size_t f_out = sc.a.dim(2);
    const std::size_t f_in = sc.z.dim(2);
    const std::size_t t_audio = sc.z.dim(1);
    const std::size_t n = c_out * f_out;

    if (cfg.use_attention) {
      TensorD dv_prev({tv, k});
      for (std::size_t v = 0; v < tv; ++v) {
        std::copy(dv.data() + v * k, dv.data() + (v + 1) * k, drow.data());
        AttentionGrad g = att_backward(drow, sc.att[v], net.params.att[s]);
        accumulate_attention(out.grads.att[s], g.params);
        for (std::size_t i = 0; i < n; ++i) de[s](v, i) += g.d_a[i];
        std::copy(g.d_v.data(), g.d_v.data() + k, dv_prev.data() + v * k);
      }
      dv = std::move(dv_prev);
    }

    // Time pooling backward; stages below 3 also inherit the next conv's
    // input gradient, which lands on this stage's pooled activation.
    TensorD da = s == 3 ? TensorD({c_out, t_audio, f_out}) : std::move(d_conv_in);
    for (std::size_t v = 0; v < tv; ++v) {
      for (std::size_t c = 0; c < c_out; ++c) {
        for (std::size_t f = 0; f < f_out; ++f) {
          const std::size_t j = c * f_out + f;
          const double g = de[s](v, j);
          if (g == 0.0) continue;
          const std::uint8_t best = sc.argmax[v * n + j];
          for (std::size_t w = 0; w < 5; ++w) {
            da(c, v * 5 + w, f) += g * (0.2 + (w == best ? 1.0 : 0.0));
          }
        }
      }
    }

    // Frequency pooling + LeakyReLU backward.
    TensorD dz({c_out, t_audio, f_in});
    for (std::size_t c = 0; c < c_out; ++c) {
      for (std::size_t t = 0; t < t_audio; ++t) {
        const double* dar = da.data() + (c * t_audio + t) * f_out;
        const double* zr = sc.z.data() + (c * t_audio + t) * f_in;
        double* dzr = dz.data() + (c * t_audio + t) * f_in;
        for (std::size_t f = 0; f < f_out; ++f) {
          const double g = 0.5 * dar[f];
          dzr[2 * f] = g * leaky_relu_slope(zr[2 * f]);
          dzr[2 * f + 1] = g * leaky_relu_slope(zr[2 * f + 1]);
        }
      }
    }

    const TensorD& stage_in = s == 0 ? audio_feats : fc.stage[s - 1].a;
    if (s > 0) {
      d_conv_in = TensorD(stage_in.shape());
      conv3x3_backward(stage_in, net.params.conv[s].weight, dz,
                       out.grads.conv[s].weight, out.grads.conv[s].bias, &d_conv_in);
    } else {
      conv3x3_backward(stage_in, net.params.conv[s].weight, dz,
                       out.grads.conv[s].weight, out.grads.conv[s].bias, nullptr);
    }
  }

  return out;
}

void adam_update_tensor(TensorD& param, const TensorD& grad, TensorD& m, TensorD& v,
                        long long step, double lr, const AdamConfig& cfg) {
  if (!param.same_shape(grad) || !param.same_shape(m) || !param.same_shape(v)) {
    throw ShapeMismatchError("adam_update_tensor: shape disagreement");
  }
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    param[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.epsilon);
  }
}

AdamState make_adam_state(const ToyNet& net) {
  AdamState s;
  s.m = make_params(net.config);
  s.v = make_params(net.config);
  return s;
}

void adam_step(ToyNetParams& params, const ToyNetParams& grads, AdamState& state,
               double lr, const AdamConfig& cfg) {
  ++state.step;
  auto pf = toynet_fields(params);
  const auto gf = toynet_fields(const_cast<ToyNetParams&>(grads));
  auto mf = toynet_fields(state.m);
  auto vf = toynet_fields(state.v);
  for (std::size_t i = 0; i < pf.size(); ++i) {
    adam_update_tensor(*pf[i].tensor, *gf[i].tensor, *mf[i].tensor, *vf[i].tensor,
                       state.step, lr, cfg);
  }
}

LossBreakdown train_step(ToyNet& net, AdamState& state, const TensorD& audio_feats,
                         const TensorD& visual_feats, const TensorD& activity,
                         const TensorD& targets, double lr) {
  ToyNetBackward back =
      toynet_forward_backward(net, audio_feats, visual_feats, activity, targets);
  if (!std::isfinite(back.loss.total)) {
    throw NonFiniteLossError("train_step: loss diverged");
  }
  adam_step(net.params, back.grads, state, lr);
  return back.loss;
}

double tri_stage_lr(long long step, long long total_steps, double peak,
                    double warmup_frac, double hold_frac, double floor_factor) {
  if (total_steps <= 0) return peak;
  step = std::clamp(step, 0LL, total_steps);
  const double floor = peak * floor_factor;
  const long long warm_end = std::llround(warmup_frac * static_cast<double>(total_steps));
  const long long hold_end =
      std::llround((warmup_frac + hold_frac) * static_cast<double>(total_steps));
  if (step <= warm_end) {
    if (warm_end == 0) return peak;
    return floor + (peak - floor) * static_cast<double>(step) / static_cast<double>(warm_end);
  }
  if (step <= hold_end) return peak;
  const double progress = static_cast<double>(step - hold_end) /
                          static_cast<double>(total_steps - hold_end);
  return peak * std::pow(floor_factor, progress);
}

void save_checkpoint(const std::filesystem::path& dir, const ToyNet& net) {
  std::filesystem::create_directories(dir);
  KeyValueFile kv;
  kv.set("format", "toynet-checkpoint-v1");
  kv.set_int("n_classes", net.config.n_classes);
  for (int s = 0; s < 4; ++s) {
    kv.set_int("stage" + std::to_string(s), net.config.stage_channels[s]);
  }
  kv.set_int("n_mels", net.config.n_mels);
  kv.set_int("visual_dim", net.config.visual_dim);
  kv.set_int("attention_dim", net.config.attention_dim);
  kv.set_int("context_width", net.config.context_width);
  kv.set_int("head_hidden", net.config.head_hidden);
  kv.set_uint64("seed", net.config.seed);
  kv.set_bool("use_attention", net.config.use_attention);

  const auto fields = toynet_fields(const_cast<ToyNetParams&>(net.params));
  kv.set_int("n_tensors", static_cast<long long>(fields.size()));
  for (std::size_t i = 0; i < fields.size(); ++i) {
    kv.set("tensor" + std::to_string(i), fields[i].name);
    tensor_store::save(dir / (fields[i].name + ".tnsr"), *fields[i].tensor);
  }
  kv.save(dir / "checkpoint.txt");
}

ToyNet load_checkpoint(const std::filesystem::path& dir) {
  const KeyValueFile kv = KeyValueFile::parse_file(dir / "checkpoint.txt");
  if (kv.get("format") != "toynet-checkpoint-v1") {
    throw FormatError("load_checkpoint: unknown manifest format");
  }
  ToyNetConfig cfg;
  cfg.n_classes = static_cast<int>(kv.get_int("n_classes"));
  for (int s = 0; s < 4; ++s) {
    cfg.stage_channels[s] = static_cast<int>(kv.get_int("stage" + std::to_string(s)));
  }
  cfg.n_mels = static_cast<int>(kv.get_int("n_mels"));
  cfg.visual_dim = static_cast<int>(kv.get_int("visual_dim"));
  cfg.attention_dim = static_cast<int>(kv.get_int("attention_dim"));
  cfg.context_width = static_cast<int>(kv.get_int("context_width"));
  cfg.head_hidden = static_cast<int>(kv.get_int("head_hidden"));
  cfg.seed = kv.get_uint64("seed");
  cfg.use_attention = kv.get_bool("use_attention");

  ToyNet net;
  net.config = cfg;
  net.params = make_params(cfg);
  for (ParamField& f : toynet_fields(net.params)) {
    TensorD loaded = tensor_store::load_as<double>(dir / (f.name + ".tnsr"));
    if (!loaded.same_shape(*f.tensor)) {
      throw FormatError("load_checkpoint: tensor " + f.name + " has the wrong shape");
    }
    *f.tensor = std::move(loaded);
  }
  return net;
}

}  // namespace seld3d
