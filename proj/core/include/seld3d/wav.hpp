#pragma once

#include <filesystem>
#include <vector>

namespace seld3d::wav {

/// Channel-major PCM audio with samples normalized to [-1, 1].
struct AudioBuffer {
  int sample_rate = 0;
  std::vector<std::vector<double>> channels;

  std::size_t num_channels() const { return channels.size(); }
  std::size_t num_samples() const { return channels.empty() ? 0 : channels[0].size(); }
};

enum class SampleFormat {
  Int16,    // PCM, 16-bit
  Int32,    // PCM, 32-bit
  Float32,  // IEEE float, 32-bit
};

/// Reads a RIFF/WAVE file. Accepts PCM 16/32-bit and IEEE float 32-bit;
/// unknown chunks are skipped. Throws IoError / FormatError.
AudioBuffer read_wav(const std::filesystem::path& path);

/// Writes a RIFF/WAVE file, clamping samples to [-1, 1].
void write_wav(const std::filesystem::path& path, const AudioBuffer& audio,
               SampleFormat format = SampleFormat::Int32);

}  // namespace seld3d::wav
