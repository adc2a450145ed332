#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "seld3d/geom.hpp"
#include "seld3d/tensor.hpp"

namespace seld3d {

/// First-order-ambisonics clip, ACN channel order W, Y, Z, X under SN3D.
struct FoaClip {
  int sample_rate = 24000;
  TensorD samples;  // {4, N}

  std::size_t num_samples() const { return samples.rank() == 2 ? samples.dim(1) : 0; }
  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(num_samples()) / sample_rate : 0.0;
  }
};

inline constexpr std::size_t kFoaChannels = 4;
inline constexpr std::size_t kChanW = 0;
inline constexpr std::size_t kChanY = 1;
inline constexpr std::size_t kChanZ = 2;
inline constexpr std::size_t kChanX = 3;

/// Loads a 4-channel WAV into a FoaClip; channel order in the file is taken
/// to be ACN (W, Y, Z, X). Throws ShapeMismatchError on other channel counts.
FoaClip load_foa_wav(const std::filesystem::path& path);
void save_foa_wav(const std::filesystem::path& path, const FoaClip& clip);

/// Complex STFT frames, channel-major.
struct Spectrogram {
  std::size_t channels = 0;
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<std::complex<double>> data;

  std::complex<double>& at(std::size_t c, std::size_t t, std::size_t f) {
    return data[(c * frames + t) * bins + f];
  }
  const std::complex<double>& at(std::size_t c, std::size_t t, std::size_t f) const {
    return data[(c * frames + t) * bins + f];
  }
};

struct StftConfig {
  int hop = 480;    // 20 ms at 24 kHz
  int window = 960; // 40 ms Hann
  int nfft = 1024;
};

/// Centered frames at t*hop with reflection padding; Hann window zero-padded
/// symmetrically to nfft. Produces floor(N / hop) frames and nfft/2+1 bins.
/// Throws EmptyClipError when the clip has no samples.
Spectrogram stft(const FoaClip& clip, const StftConfig& cfg = {});

struct MelConfig {
  int n_mels = 64;
  double fmin_hz = 50.0;
  double fmax_hz = 12000.0;
};

/// Triangular filterbank on the HTK mel scale (2595*log10(1+f/700)),
/// unit-peak triangles over FFT bin frequencies.
class MelFilterbank {
public:
  MelFilterbank(int nfft, int sample_rate, const MelConfig& cfg = {});

  int n_mels() const { return n_mels_; }
  std::size_t n_bins() const { return weights_.size() / n_mels_; }

  /// weights()[m * n_bins + k] is filter m's weight on FFT bin k.
  const std::vector<double>& weights() const { return weights_; }

  /// out[m] = sum_k w[m][k] * bins[k]; out must hold n_mels values.
  void apply(const double* bins, double* out) const;

private:
  int n_mels_;
  std::vector<double> weights_;
};

/// 4-channel log-mel energies: log(mel(|X|^2) + 1e-8). Shape {4, T, n_mels}.
TensorD log_mel(const Spectrogram& spec, int sample_rate, const MelConfig& cfg = {});

/// Acoustic intensity vectors Re{conj(W) * (X, Y, Z)} aggregated through the
/// mel filterbank and normalized per (time, mel) cell to at most unit norm.
/// Shape {3, T, n_mels} with channel order x, y, z.
TensorD intensity_vectors(const Spectrogram& spec, int sample_rate,
                          const MelConfig& cfg = {});

/// Channels 0-3 log-mel (W, Y, Z, X), channels 4-6 intensity (x, y, z).
TensorD stack_audio_features(const TensorD& logmel, const TensorD& ivs);

/// Full clip pipeline: stft -> log_mel + intensity_vectors -> stack.
TensorD compute_audio_features(const FoaClip& clip, const StftConfig& stft_cfg = {},
                               const MelConfig& mel_cfg = {});

/// Repeats each visual frame 5x in time: {Tv, D} -> {5*Tv, D}.
TensorD repeat_visual(const TensorD& visual);

/// Sum of average and max pooling over non-overlapping windows of 5:
/// {T, D} -> {T/5, D}. Throws ShapeMismatchError when T % 5 != 0.
TensorD pool_audio_to_video_rate(const TensorD& time_major);

/// Energy-weighted mean intensity direction over an STFT frame range
/// [frame_begin, frame_end); the free-field DOA oracle. Optionally restricts
/// to FFT bins whose center frequency lies in [fmin_hz, fmax_hz].
Vec3 mean_intensity_direction(const Spectrogram& spec, std::size_t frame_begin,
                              std::size_t frame_end, int sample_rate,
                              double fmin_hz = 0.0, double fmax_hz = 1e12);

}  // namespace seld3d
