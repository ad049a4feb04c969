#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gprseg/common.hpp"

namespace gprseg {

// Binary tensor container.
//
// Layout, all integers little-endian:
//   bytes 0..3   magic "GPRT"
//   u32          format version (currently 1)
//   u32          dtype code: 1 = float32, 2 = uint8
//   u32          rank
//   u64 * rank   extents
//   payload      product(extents) * dtype size bytes
struct TensorBlob {
    uint32_t dtype = 0;  // 1 float32, 2 uint8
    std::vector<uint64_t> extents;
    std::vector<uint8_t> payload;

    uint64_t element_count() const;
};

inline constexpr uint32_t kContainerVersion = 1;
inline constexpr uint32_t kDtypeF32 = 1;
inline constexpr uint32_t kDtypeU8 = 2;

std::vector<uint8_t> serialize_blob(const TensorBlob& blob);
TensorBlob deserialize_blob(const std::vector<uint8_t>& bytes);

void write_blob(const std::string& path, const TensorBlob& blob);
TensorBlob read_blob(const std::string& path);

// Grid adapters. Float grids use dtype 1, label grids dtype 2.
TensorBlob blob_from_grid(const GridF& g);
TensorBlob blob_from_grid(const GridU8& g);
GridF grid_f_from_blob(const TensorBlob& blob);
GridU8 grid_u8_from_blob(const TensorBlob& blob);

void write_grid(const std::string& path, const GridF& g);
void write_grid(const std::string& path, const GridU8& g);
GridF read_grid_f(const std::string& path);
GridU8 read_grid_u8(const std::string& path);

// Flat float vector with explicit shape (network parameters, moments).
TensorBlob blob_from_floats(const std::vector<float>& v, const std::vector<uint64_t>& extents);
std::vector<float> floats_from_blob(const TensorBlob& blob);

std::string file_checksum(const std::string& path);

}  // namespace gprseg
