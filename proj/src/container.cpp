#include "gprseg/container.hpp"

#include <cstring>
#include <fstream>

namespace gprseg {

namespace {

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<uint8_t>& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
uint32_t get_u32(const std::vector<uint8_t>& in, size_t& pos) {
    if (pos + 4 > in.size()) throw IoError("container truncated in header");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(in[pos + i]) << (8 * i);
    pos += 4;
    return v;
}
uint64_t get_u64(const std::vector<uint8_t>& in, size_t& pos) {
    if (pos + 8 > in.size()) throw IoError("container truncated in header");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(in[pos + i]) << (8 * i);
    pos += 8;
    return v;
}

size_t dtype_size(uint32_t dtype) {
    switch (dtype) {
        case kDtypeF32: return 4;
        case kDtypeU8: return 1;
        default: throw IoError("unknown container dtype code " + std::to_string(dtype));
    }
}

}  // namespace

uint64_t TensorBlob::element_count() const {
    uint64_t n = 1;
    for (uint64_t e : extents) n *= e;
    return n;
}

std::vector<uint8_t> serialize_blob(const TensorBlob& blob) {
    if (blob.payload.size() != blob.element_count() * dtype_size(blob.dtype))
        throw IoError("container payload size does not match extents");
    std::vector<uint8_t> out;
    out.reserve(20 + 8 * blob.extents.size() + blob.payload.size());
    out.push_back('G');
    out.push_back('P');
    out.push_back('R');
    out.push_back('T');
    put_u32(out, kContainerVersion);
    put_u32(out, blob.dtype);
    put_u32(out, static_cast<uint32_t>(blob.extents.size()));
    for (uint64_t e : blob.extents) put_u64(out, e);
    out.insert(out.end(), blob.payload.begin(), blob.payload.end());
    return out;
}

TensorBlob deserialize_blob(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 4 || bytes[0] != 'G' || bytes[1] != 'P' || bytes[2] != 'R' ||
        bytes[3] != 'T')
        throw IoError("bad container magic");
    size_t pos = 4;
    uint32_t version = get_u32(bytes, pos);
    if (version != kContainerVersion)
        throw IoError("unsupported container version " + std::to_string(version));
    TensorBlob blob;
    blob.dtype = get_u32(bytes, pos);
    size_t dsize = dtype_size(blob.dtype);
    uint32_t rank = get_u32(bytes, pos);
    blob.extents.resize(rank);
    for (uint32_t i = 0; i < rank; ++i) blob.extents[i] = get_u64(bytes, pos);
    uint64_t payload_len = blob.element_count() * dsize;
    if (bytes.size() - pos != payload_len) throw IoError("container payload truncated");
    blob.payload.assign(bytes.begin() + pos, bytes.end());
    return blob;
}

void write_blob(const std::string& path, const TensorBlob& blob) {
    auto bytes = serialize_blob(blob);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed: " + path);
}

TensorBlob read_blob(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                               std::istreambuf_iterator<char>());
    return deserialize_blob(bytes);
}

TensorBlob blob_from_grid(const GridF& g) {
    TensorBlob blob;
    blob.dtype = kDtypeF32;
    blob.extents = {static_cast<uint64_t>(g.rows()), static_cast<uint64_t>(g.cols())};
    blob.payload.resize(g.size() * 4);
    std::memcpy(blob.payload.data(), g.data(), blob.payload.size());
    return blob;
}

TensorBlob blob_from_grid(const GridU8& g) {
    TensorBlob blob;
    blob.dtype = kDtypeU8;
    blob.extents = {static_cast<uint64_t>(g.rows()), static_cast<uint64_t>(g.cols())};
    blob.payload.assign(g.data(), g.data() + g.size());
    return blob;
}

GridF grid_f_from_blob(const TensorBlob& blob) {
    if (blob.dtype != kDtypeF32 || blob.extents.size() != 2)
        throw IoError("expected rank-2 float32 container");
    GridF g(static_cast<int>(blob.extents[0]), static_cast<int>(blob.extents[1]));
    std::memcpy(g.data(), blob.payload.data(), blob.payload.size());
    return g;
}

GridU8 grid_u8_from_blob(const TensorBlob& blob) {
    if (blob.dtype != kDtypeU8 || blob.extents.size() != 2)
        throw IoError("expected rank-2 uint8 container");
    GridU8 g(static_cast<int>(blob.extents[0]), static_cast<int>(blob.extents[1]));
    std::memcpy(g.data(), blob.payload.data(), blob.payload.size());
    return g;
}

void write_grid(const std::string& path, const GridF& g) { write_blob(path, blob_from_grid(g)); }
void write_grid(const std::string& path, const GridU8& g) { write_blob(path, blob_from_grid(g)); }
GridF read_grid_f(const std::string& path) { return grid_f_from_blob(read_blob(path)); }
GridU8 read_grid_u8(const std::string& path) { return grid_u8_from_blob(read_blob(path)); }

TensorBlob blob_from_floats(const std::vector<float>& v, const std::vector<uint64_t>& extents) {
    TensorBlob blob;
    blob.dtype = kDtypeF32;
    blob.extents = extents;
    if (blob.element_count() != v.size())
        throw IoError("float vector length does not match extents");
    blob.payload.resize(v.size() * 4);
    std::memcpy(blob.payload.data(), v.data(), blob.payload.size());
    return blob;
}

std::vector<float> floats_from_blob(const TensorBlob& blob) {
    if (blob.dtype != kDtypeF32) throw IoError("expected float32 container");
    std::vector<float> v(blob.element_count());
    std::memcpy(v.data(), blob.payload.data(), blob.payload.size());
    return v;
}

std::string file_checksum(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for checksum: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                               std::istreambuf_iterator<char>());
    return fnv1a64_hex(bytes.data(), bytes.size());
}

}  // namespace gprseg
