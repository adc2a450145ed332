#include "seld3d/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fft.hpp"
#include "seld3d/errors.hpp"
#include "seld3d/wav.hpp"

namespace seld3d {

namespace {

constexpr double kLogFloor = 1e-8;
constexpr double kIvNormEps = 1e-8;

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Reflection at the clip edges without repeating the edge sample.
std::size_t reflect_index(long long i, std::size_t n) {
  const long long len = static_cast<long long>(n);
  while (i < 0 || i >= len) {
    if (i < 0) i = -i;
    if (i >= len) i = 2 * len - 2 - i;
  }
  return static_cast<std::size_t>(i);
}

}  // namespace

FoaClip load_foa_wav(const std::filesystem::path& path) {
  const wav::AudioBuffer audio = wav::read_wav(path);
  if (audio.num_channels() != kFoaChannels) {
    throw ShapeMismatchError("FOA clip needs 4 channels, got " +
                             std::to_string(audio.num_channels()) + ": " + path.string());
  }
  const std::size_t n = audio.num_samples();
  if (n == 0) {
    throw EmptyClipError("FOA clip has no samples: " + path.string());
  }
  FoaClip clip;
  clip.sample_rate = audio.sample_rate;
  clip.samples = TensorD({kFoaChannels, n});
  for (std::size_t c = 0; c < kFoaChannels; ++c) {
    std::copy(audio.channels[c].begin(), audio.channels[c].end(),
              clip.samples.data() + c * n);
  }
  return clip;
}

void save_foa_wav(const std::filesystem::path& path, const FoaClip& clip) {
  const std::size_t n = clip.num_samples();
  wav::AudioBuffer audio;
  audio.sample_rate = clip.sample_rate;
  audio.channels.assign(kFoaChannels, std::vector<double>(n));
  for (std::size_t c = 0; c < kFoaChannels; ++c) {
    std::copy(clip.samples.data() + c * n, clip.samples.data() + (c + 1) * n,
              audio.channels[c].begin());
  }
  wav::write_wav(path, audio, wav::SampleFormat::Int32);
}

Spectrogram stft(const FoaClip& clip, const StftConfig& cfg) {
  if (clip.samples.rank() != 2 || clip.samples.dim(0) != kFoaChannels) {
    throw ShapeMismatchError("stft: clip samples must be {4, N}");
  }
  const std::size_t n = clip.num_samples();
  if (n == 0) {
    throw EmptyClipError("stft: empty clip");
  }
  if (cfg.hop <= 0 || cfg.window <= 0 || !detail::is_power_of_two(cfg.nfft) ||
      cfg.window > cfg.nfft) {
    throw ShapeMismatchError("stft: bad hop/window/nfft configuration");
  }

  const std::size_t frames = n / static_cast<std::size_t>(cfg.hop);
  if (frames == 0) {
    throw EmptyClipError("stft: clip shorter than one hop");
  }
  const std::size_t bins = static_cast<std::size_t>(cfg.nfft) / 2 + 1;

  // Periodic Hann.
  std::vector<double> window(cfg.window);
  for (int i = 0; i < cfg.window; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / cfg.window);
  }
  const int pad = (cfg.nfft - cfg.window) / 2;

  Spectrogram spec;
  spec.channels = kFoaChannels;
  spec.frames = frames;
  spec.bins = bins;
  spec.data.resize(kFoaChannels * frames * bins);

  std::vector<std::complex<double>> buf(cfg.nfft);
  for (std::size_t c = 0; c < kFoaChannels; ++c) {
    const double* x = clip.samples.data() + c * n;
    for (std::size_t t = 0; t < frames; ++t) {
      std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
      const long long center = static_cast<long long>(t) * cfg.hop;
      for (int i = 0; i < cfg.window; ++i) {
        const long long src = center - cfg.window / 2 + i;
        buf[pad + i] = x[reflect_index(src, n)] * window[i];
      }
      detail::fft_radix2(buf);
      for (std::size_t f = 0; f < bins; ++f) {
        spec.at(c, t, f) = buf[f];
      }
    }
  }
  return spec;
}

MelFilterbank::MelFilterbank(int nfft, int sample_rate, const MelConfig& cfg)
    : n_mels_(cfg.n_mels) {
  if (n_mels_ <= 0 || nfft <= 0 || sample_rate <= 0 || cfg.fmin_hz < 0.0 ||
      cfg.fmax_hz <= cfg.fmin_hz) {
    throw ShapeMismatchError("MelFilterbank: bad configuration");
  }
  const std::size_t bins = static_cast<std::size_t>(nfft) / 2 + 1;
  weights_.assign(static_cast<std::size_t>(n_mels_) * bins, 0.0);

  const double mel_lo = hz_to_mel(cfg.fmin_hz);
  const double mel_hi = hz_to_mel(cfg.fmax_hz);
  std::vector<double> edges_hz(static_cast<std::size_t>(n_mels_) + 2);
  for (std::size_t m = 0; m < edges_hz.size(); ++m) {
    edges_hz[m] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(m) /
                                         (n_mels_ + 1));
  }

  for (int m = 0; m < n_mels_; ++m) {
    const double lo = edges_hz[m];
    const double mid = edges_hz[m + 1];
    const double hi = edges_hz[m + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / nfft;
      double w = 0.0;
      if (f > lo && f < hi) {
        w = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
      }
      weights_[static_cast<std::size_t>(m) * bins + k] = w;
    }
  }
}

void MelFilterbank::apply(const double* bins, double* out) const {
  const std::size_t nb = n_bins();
  for (int m = 0; m < n_mels_; ++m) {
    const double* w = weights_.data() + static_cast<std::size_t>(m) * nb;
    double acc = 0.0;
    for (std::size_t k = 0; k < nb; ++k) acc += w[k] * bins[k];
    out[m] = acc;
  }
}

TensorD log_mel(const Spectrogram& spec, int sample_rate, const MelConfig& cfg) {
  const int nfft = static_cast<int>((spec.bins - 1) * 2);
  const MelFilterbank fb(nfft, sample_rate, cfg);
  const auto n_mels = static_cast<std::size_t>(cfg.n_mels);

  TensorD out({spec.channels, spec.frames, n_mels});
  std::vector<double> power(spec.bins);
  std::vector<double> mel(n_mels);
  for (std::size_t c = 0; c < spec.channels; ++c) {
    for (std::size_t t = 0; t < spec.frames; ++t) {
      for (std::size_t f = 0; f < spec.bins; ++f) {
        power[f] = std::norm(spec.at(c, t, f));
      }
      fb.apply(power.data(), mel.data());
      for (std::size_t m = 0; m < n_mels; ++m) {
        out(c, t, m) = std::log(mel[m] + kLogFloor);
      }
    }
  }
  return out;
}

TensorD intensity_vectors(const Spectrogram& spec, int sample_rate,
                          const MelConfig& cfg) {
  if (spec.channels != kFoaChannels) {
    throw ShapeMismatchError("intensity_vectors: expected a 4-channel spectrogram");
  }
  const int nfft = static_cast<int>((spec.bins - 1) * 2);
  const MelFilterbank fb(nfft, sample_rate, cfg);
  const auto n_mels = static_cast<std::size_t>(cfg.n_mels);

  TensorD out({3, spec.frames, n_mels});
  std::vector<double> iv_bin(spec.bins);
  std::vector<double> iv_mel(n_mels);
  // Axis order in the output is x, y, z; FOA channels are W, Y, Z, X.
  constexpr std::size_t axis_chan[3] = {kChanX, kChanY, kChanZ};

  for (std::size_t axis = 0; axis < 3; ++axis) {
    for (std::size_t t = 0; t < spec.frames; ++t) {
      for (std::size_t f = 0; f < spec.bins; ++f) {
        iv_bin[f] = std::real(std::conj(spec.at(kChanW, t, f)) *
                              spec.at(axis_chan[axis], t, f));
      }
      fb.apply(iv_bin.data(), iv_mel.data());
      for (std::size_t m = 0; m < n_mels; ++m) {
        out(axis, t, m) = iv_mel[m];
      }
    }
  }

  for (std::size_t t = 0; t < spec.frames; ++t) {
    for (std::size_t m = 0; m < n_mels; ++m) {
      const double x = out(0, t, m);
      const double y = out(1, t, m);
      const double z = out(2, t, m);
      const double inv = 1.0 / (std::sqrt(x * x + y * y + z * z) + kIvNormEps);
      out(0, t, m) = x * inv;
      out(1, t, m) = y * inv;
      out(2, t, m) = z * inv;
    }
  }
  return out;
}

TensorD stack_audio_features(const TensorD& logmel, const TensorD& ivs) {
  if (logmel.rank() != 3 || ivs.rank() != 3 || logmel.dim(0) != 4 || ivs.dim(0) != 3 ||
      logmel.dim(1) != ivs.dim(1) || logmel.dim(2) != ivs.dim(2)) {
    throw ShapeMismatchError("stack_audio_features: need {4,T,M} log-mel and {3,T,M} IVs");
  }
  const std::size_t t = logmel.dim(1);
  const std::size_t m = logmel.dim(2);
  TensorD out({7, t, m});
  std::copy(logmel.begin(), logmel.end(), out.begin());
  std::copy(ivs.begin(), ivs.end(), out.begin() + 4 * t * m);
  return out;
}

TensorD compute_audio_features(const FoaClip& clip, const StftConfig& stft_cfg,
                               const MelConfig& mel_cfg) {
  const Spectrogram spec = stft(clip, stft_cfg);
  return stack_audio_features(log_mel(spec, clip.sample_rate, mel_cfg),
                              intensity_vectors(spec, clip.sample_rate, mel_cfg));
}

TensorD repeat_visual(const TensorD& visual) {
  if (visual.rank() != 2) {
    throw ShapeMismatchError("repeat_visual: expected a {T, D} tensor");
  }
  const std::size_t t = visual.dim(0);
  const std::size_t d = visual.dim(1);
  TensorD out({t * 5, d});
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t r = 0; r < 5; ++r) {
      std::copy(visual.data() + i * d, visual.data() + (i + 1) * d,
                out.data() + (i * 5 + r) * d);
    }
  }
  return out;
}

TensorD pool_audio_to_video_rate(const TensorD& time_major) {
  if (time_major.rank() != 2) {
    throw ShapeMismatchError("pool_audio_to_video_rate: expected a {T, D} tensor");
  }
  const std::size_t t = time_major.dim(0);
  const std::size_t d = time_major.dim(1);
  if (t % 5 != 0) {
    throw ShapeMismatchError("pool_audio_to_video_rate: T must be divisible by 5");
  }
  TensorD out({t / 5, d});
  for (std::size_t v = 0; v < t / 5; ++v) {
    for (std::size_t j = 0; j < d; ++j) {
      double sum = 0.0;
      double mx = time_major(v * 5, j);
      for (std::size_t w = 0; w < 5; ++w) {
        const double val = time_major(v * 5 + w, j);
        sum += val;
        mx = std::max(mx, val);
      }
      out(v, j) = sum / 5.0 + mx;
    }
  }
  return out;
}

Vec3 mean_intensity_direction(const Spectrogram& spec, std::size_t frame_begin,
                              std::size_t frame_end, int sample_rate, double fmin_hz,
                              double fmax_hz) {
  if (spec.channels != kFoaChannels) {
    throw ShapeMismatchError("mean_intensity_direction: expected 4 channels");
  }
  frame_end = std::min(frame_end, spec.frames);
  const int nfft = static_cast<int>((spec.bins - 1) * 2);
  Vec3 acc;
  for (std::size_t t = frame_begin; t < frame_end; ++t) {
    for (std::size_t f = 0; f < spec.bins; ++f) {
      const double freq = static_cast<double>(f) * sample_rate / nfft;
      if (freq < fmin_hz || freq > fmax_hz) continue;
      const std::complex<double> w = std::conj(spec.at(kChanW, t, f));
      acc.x += std::real(w * spec.at(kChanX, t, f));
      acc.y += std::real(w * spec.at(kChanY, t, f));
      acc.z += std::real(w * spec.at(kChanZ, t, f));
    }
  }
  return acc;
}

}  // namespace seld3d
