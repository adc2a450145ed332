#include "seld3d/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "seld3d/errors.hpp"

namespace seld3d::wav {

static_assert(std::endian::native == std::endian::little,
              "wav reader assumes a little-endian host");

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatIeeeFloat = 3;

template <typename T>
T read_le(std::ifstream& in, const std::filesystem::path& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (static_cast<std::size_t>(in.gcount()) != sizeof(T)) {
    throw FormatError("wav: truncated file: " + path.string());
  }
  return v;
}

template <typename T>
void write_le(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

double clamp_sample(double x) { return std::clamp(x, -1.0, 1.0); }

}  // namespace

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("wav: cannot open: " + path.string());
  }

  char riff[4];
  in.read(riff, 4);
  if (in.gcount() != 4 || std::memcmp(riff, "RIFF", 4) != 0) {
    throw FormatError("wav: missing RIFF header: " + path.string());
  }
  read_le<std::uint32_t>(in, path);  // overall size, unused
  char wave[4];
  in.read(wave, 4);
  if (in.gcount() != 4 || std::memcmp(wave, "WAVE", 4) != 0) {
    throw FormatError("wav: missing WAVE tag: " + path.string());
  }

  std::uint16_t format = 0;
  std::uint16_t num_channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits_per_sample = 0;
  bool have_fmt = false;
  std::vector<char> payload;

  while (true) {
    char id[4];
    in.read(id, 4);
    if (in.gcount() == 0) break;  // clean EOF after last chunk
    if (in.gcount() != 4) {
      throw FormatError("wav: truncated chunk id: " + path.string());
    }
    const auto chunk_size = read_le<std::uint32_t>(in, path);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (chunk_size < 16) {
        throw FormatError("wav: fmt chunk too small: " + path.string());
      }
      format = read_le<std::uint16_t>(in, path);
      num_channels = read_le<std::uint16_t>(in, path);
      sample_rate = read_le<std::uint32_t>(in, path);
      read_le<std::uint32_t>(in, path);  // byte rate
      read_le<std::uint16_t>(in, path);  // block align
      bits_per_sample = read_le<std::uint16_t>(in, path);
      in.seekg(chunk_size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      payload.resize(chunk_size);
      in.read(payload.data(), chunk_size);
      if (static_cast<std::uint32_t>(in.gcount()) != chunk_size) {
        throw FormatError("wav: truncated data chunk: " + path.string());
      }
    } else {
      // Skip unknown chunk; chunks are word-aligned.
      in.seekg(chunk_size + (chunk_size & 1u), std::ios::cur);
    }
    if (!in) break;
  }

  if (!have_fmt) {
    throw FormatError("wav: no fmt chunk: " + path.string());
  }
  if (num_channels == 0) {
    throw FormatError("wav: zero channels: " + path.string());
  }

  const std::size_t bytes_per_sample = bits_per_sample / 8;
  if (format == kFormatPcm) {
    if (bits_per_sample != 16 && bits_per_sample != 32) {
      throw FormatError("wav: unsupported PCM depth " + std::to_string(bits_per_sample) +
                        ": " + path.string());
    }
  } else if (format == kFormatIeeeFloat) {
    if (bits_per_sample != 32) {
      throw FormatError("wav: unsupported float depth: " + path.string());
    }
  } else {
    throw FormatError("wav: unsupported format code " + std::to_string(format) + ": " +
                      path.string());
  }

  const std::size_t frame_bytes = bytes_per_sample * num_channels;
  const std::size_t n_frames = frame_bytes == 0 ? 0 : payload.size() / frame_bytes;

  AudioBuffer audio;
  audio.sample_rate = static_cast<int>(sample_rate);
  audio.channels.assign(num_channels, std::vector<double>(n_frames));

  const char* p = payload.data();
  for (std::size_t i = 0; i < n_frames; ++i) {
    for (std::size_t c = 0; c < num_channels; ++c) {
      double v = 0.0;
      if (format == kFormatIeeeFloat) {
        float f;
        std::memcpy(&f, p, 4);
        v = f;
      } else if (bits_per_sample == 16) {
        std::int16_t s;
        std::memcpy(&s, p, 2);
        v = s / 32768.0;
      } else {
        std::int32_t s;
        std::memcpy(&s, p, 4);
        v = s / 2147483648.0;
      }
      audio.channels[c][i] = v;
      p += bytes_per_sample;
    }
  }
  return audio;
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio,
               SampleFormat fmt) {
  if (audio.channels.empty()) {
    throw FormatError("wav: no channels to write");
  }
  const std::size_t n = audio.num_samples();
  for (const auto& ch : audio.channels) {
    if (ch.size() != n) {
      throw ShapeMismatchError("wav: channel lengths differ");
    }
  }

  const std::uint16_t channels = static_cast<std::uint16_t>(audio.num_channels());
  const std::uint16_t bits = fmt == SampleFormat::Int16 ? 16 : 32;
  const std::uint16_t code = fmt == SampleFormat::Float32 ? kFormatIeeeFloat : kFormatPcm;
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(n * channels * (bits / 8));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("wav: cannot open for writing: " + path.string());
  }

  out.write("RIFF", 4);
  write_le<std::uint32_t>(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_le<std::uint32_t>(out, 16);
  write_le<std::uint16_t>(out, code);
  write_le<std::uint16_t>(out, channels);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(audio.sample_rate));
  write_le<std::uint32_t>(out,
                          static_cast<std::uint32_t>(audio.sample_rate) * channels *
                              (bits / 8));
  write_le<std::uint16_t>(out, static_cast<std::uint16_t>(channels * (bits / 8)));
  write_le<std::uint16_t>(out, bits);
  out.write("data", 4);
  write_le<std::uint32_t>(out, data_bytes);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::uint16_t c = 0; c < channels; ++c) {
      const double v = clamp_sample(audio.channels[c][i]);
      switch (fmt) {
        case SampleFormat::Int16: {
          const auto s = static_cast<std::int16_t>(
              std::clamp<long long>(std::llround(v * 32768.0), -32768, 32767));
          write_le(out, s);
          break;
        }
        case SampleFormat::Int32: {
          const auto s = static_cast<std::int32_t>(std::clamp<long long>(
              std::llround(v * 2147483648.0), -2147483648LL, 2147483647LL));
          write_le(out, s);
          break;
        }
        case SampleFormat::Float32:
          write_le(out, static_cast<float>(v));
          break;
      }
    }
  }
  if (!out) {
    throw IoError("wav: write failed: " + path.string());
  }
}

}  // namespace seld3d::wav
