#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pasnet/params.hpp"

namespace pasnet {

inline constexpr std::string_view kCheckpointMagic = "PASIA1";
inline constexpr std::uint16_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor<float> value;
};

// Little-endian binary: magic, u16 version, u32 count, then per tensor a
// u16-prefixed name, u8 rank, u32 dims and float32 data.
template <typename T>
std::string save_checkpoint(const ParamStore<T>& store);

// Throws FormatError on bad magic or version, truncation or trailing bytes.
std::vector<NamedTensor> load_checkpoint(std::string_view bytes);

// Loads into an existing store. Every store tensor must be present with
// the same shape; mismatches throw FormatError naming the tensor.
template <typename T>
void load_checkpoint_into(ParamStore<T>& store, std::string_view bytes);

std::string read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::string_view bytes);

}  // namespace pasnet
