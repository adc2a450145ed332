#include "seld3d/tensor_store.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace seld3d::tensor_store {

static_assert(std::endian::native == std::endian::little,
              "tensor_store assumes a little-endian host");

namespace {

constexpr std::uint8_t kMaxRank = 8;

template <typename T>
DType dtype_tag() {
  return std::is_same_v<T, float> ? DType::F32 : DType::F64;
}

template <typename T>
void save_impl(const std::filesystem::path& path, const Tensor<T>& t) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("tensor_store: cannot open for writing: " + path.string());
  }
  out.write(kMagic, sizeof(kMagic));
  const auto dtype = static_cast<std::uint8_t>(dtype_tag<T>());
  const auto rank = static_cast<std::uint8_t>(t.rank());
  out.put(static_cast<char>(dtype));
  out.put(static_cast<char>(rank));
  for (std::size_t d : t.shape()) {
    const std::uint64_t d64 = d;
    out.write(reinterpret_cast<const char*>(&d64), sizeof(d64));
  }
  out.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(T)));
  if (!out) {
    throw IoError("tensor_store: write failed: " + path.string());
  }
}

template <typename T>
Tensor<T> read_payload(std::ifstream& in, std::vector<std::size_t> shape,
                       const std::filesystem::path& path) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  std::vector<T> data(n);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(n * sizeof(T)));
  if (static_cast<std::size_t>(in.gcount()) != n * sizeof(T)) {
    throw FormatError("tensor_store: truncated payload: " + path.string());
  }
  if (in.peek() != std::ifstream::traits_type::eof()) {
    throw FormatError("tensor_store: trailing bytes after payload: " + path.string());
  }
  return Tensor<T>(std::move(shape), std::move(data));
}

}  // namespace

void save(const std::filesystem::path& path, const TensorF& t) { save_impl(path, t); }
void save(const std::filesystem::path& path, const TensorD& t) { save_impl(path, t); }

AnyTensor load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("tensor_store: cannot open for reading: " + path.string());
  }
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (static_cast<std::size_t>(in.gcount()) != sizeof(magic) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("tensor_store: bad magic: " + path.string());
  }
  const int dtype = in.get();
  const int rank = in.get();
  if (dtype == std::ifstream::traits_type::eof() ||
      rank == std::ifstream::traits_type::eof()) {
    throw FormatError("tensor_store: truncated header: " + path.string());
  }
  if (dtype != static_cast<int>(DType::F32) && dtype != static_cast<int>(DType::F64)) {
    throw FormatError("tensor_store: unknown dtype code: " + path.string());
  }
  if (rank < 1 || rank > kMaxRank) {
    throw FormatError("tensor_store: unsupported rank: " + path.string());
  }
  std::vector<std::size_t> shape(static_cast<std::size_t>(rank));
  for (auto& d : shape) {
    std::uint64_t d64 = 0;
    in.read(reinterpret_cast<char*>(&d64), sizeof(d64));
    if (static_cast<std::size_t>(in.gcount()) != sizeof(d64)) {
      throw FormatError("tensor_store: truncated dims: " + path.string());
    }
    if (d64 == 0) {
      throw FormatError("tensor_store: zero dimension: " + path.string());
    }
    d = static_cast<std::size_t>(d64);
  }
  if (dtype == static_cast<int>(DType::F32)) {
    return read_payload<float>(in, std::move(shape), path);
  }
  return read_payload<double>(in, std::move(shape), path);
}

DType dtype_of(const AnyTensor& t) {
  return std::holds_alternative<TensorF>(t) ? DType::F32 : DType::F64;
}

template <typename T>
Tensor<T> load_as(const std::filesystem::path& path) {
  AnyTensor any = load(path);
  if (auto* exact = std::get_if<Tensor<T>>(&any)) {
    return std::move(*exact);
  }
  return std::visit(
      [](const auto& src) {
        std::vector<T> data(src.size());
        for (std::size_t i = 0; i < src.size(); ++i) {
          data[i] = static_cast<T>(src[i]);
        }
        return Tensor<T>(src.shape(), std::move(data));
      },
      any);
}

template TensorF load_as<float>(const std::filesystem::path&);
template TensorD load_as<double>(const std::filesystem::path&);

}  // namespace seld3d::tensor_store
