#pragma once

#include <cstdint>
#include <filesystem>
#include <variant>

#include "seld3d/tensor.hpp"

namespace seld3d::tensor_store {

/// On-disk layout, little-endian throughout:
///   8-byte magic "SELDTNSR" | u8 dtype (0=f32, 1=f64) | u8 rank |
///   rank x u64 dims | raw payload.
enum class DType : std::uint8_t { F32 = 0, F64 = 1 };

inline constexpr char kMagic[8] = {'S', 'E', 'L', 'D', 'T', 'N', 'S', 'R'};

void save(const std::filesystem::path& path, const TensorF& t);
void save(const std::filesystem::path& path, const TensorD& t);

using AnyTensor = std::variant<TensorF, TensorD>;

/// Loads whichever dtype the file holds. Throws IoError if the file cannot
/// be read and FormatError if it is not a well-formed tensor file.
AnyTensor load(const std::filesystem::path& path);

DType dtype_of(const AnyTensor& t);

/// Loads and converts to the requested payload type if the stored dtype
/// differs.
template <typename T>
Tensor<T> load_as(const std::filesystem::path& path);

}  // namespace seld3d::tensor_store
