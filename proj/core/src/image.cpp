#include "seld3d/image.hpp"

#include <cctype>
#include <fstream>
#include <string>

#include "seld3d/errors.hpp"

namespace seld3d {

namespace {

// Reads the next whitespace-delimited token, skipping '#' comments.
std::string next_token(std::ifstream& in, const std::filesystem::path& path) {
  std::string tok;
  int c;
  while ((c = in.get()) != std::ifstream::traits_type::eof()) {
    if (c == '#') {
      while ((c = in.get()) != std::ifstream::traits_type::eof() && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  if (tok.empty()) {
    throw FormatError("ppm: truncated header: " + path.string());
  }
  return tok;
}

int parse_dim(const std::string& tok, const std::filesystem::path& path) {
  try {
    const int v = std::stoi(tok);
    if (v <= 0) throw FormatError("ppm: non-positive dimension: " + path.string());
    return v;
  } catch (const std::invalid_argument&) {
    throw FormatError("ppm: bad header token '" + tok + "': " + path.string());
  } catch (const std::out_of_range&) {
    throw FormatError("ppm: header value out of range: " + path.string());
  }
}

}  // namespace

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("ppm: cannot open: " + path.string());
  }
  if (next_token(in, path) != "P6") {
    throw FormatError("ppm: not a P6 file: " + path.string());
  }
  const int width = parse_dim(next_token(in, path), path);
  const int height = parse_dim(next_token(in, path), path);
  const int maxval = parse_dim(next_token(in, path), path);
  if (maxval != 255) {
    throw FormatError("ppm: only maxval 255 supported: " + path.string());
  }
  Image img(width, height);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (static_cast<std::size_t>(in.gcount()) != img.pixels.size()) {
    throw FormatError("ppm: truncated pixel data: " + path.string());
  }
  return img;
}

void write_ppm(const std::filesystem::path& path, const Image& img) {
  if (img.width <= 0 || img.height <= 0 ||
      img.pixels.size() != static_cast<std::size_t>(img.width) * img.height * 3) {
    throw ShapeMismatchError("ppm: image buffer does not match dimensions");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("ppm: cannot open for writing: " + path.string());
  }
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) {
    throw IoError("ppm: write failed: " + path.string());
  }
}

}  // namespace seld3d
