#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "gprseg/common.hpp"
#include "gprseg/container.hpp"

using namespace gprseg;

namespace {

std::filesystem::path temp_path(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

TensorBlob sample_blob() {
    GridF g(3, 4);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) g(r, c) = static_cast<float>(r * 10 + c) * 0.25f;
    return blob_from_grid(g);
}

}  // namespace

// === serialization round trips ===

TEST_CASE("blob serialize/deserialize round trip is bitwise") {
    const TensorBlob blob = sample_blob();
    const auto bytes = serialize_blob(blob);
    const TensorBlob back = deserialize_blob(bytes);
    CHECK(back.dtype == blob.dtype);
    CHECK(back.extents == blob.extents);
    CHECK(back.payload == blob.payload);
}

TEST_CASE("file write/read round trip is bitwise") {
    const auto path = temp_path("gprseg_blob_roundtrip.gprt");
    const TensorBlob blob = sample_blob();
    write_blob(path.string(), blob);
    const TensorBlob back = read_blob(path.string());
    CHECK(back.payload == blob.payload);
    CHECK(back.extents == blob.extents);
    std::filesystem::remove(path);
}

TEST_CASE("float32 grid round trip preserves every value") {
    GridF g(5, 7);
    Rng rng(123);
    for (size_t i = 0; i < g.size(); ++i)
        g.data()[i] = static_cast<float>(rng.uniform(-3, 3));
    const GridF back = grid_f_from_blob(blob_from_grid(g));
    CHECK(back == g);
}

TEST_CASE("u8 grid round trip preserves every value") {
    GridU8 g(4, 9);
    Rng rng(77);
    for (size_t i = 0; i < g.size(); ++i)
        g.data()[i] = static_cast<uint8_t>(rng.uniform_int(0, 8));
    const GridU8 back = grid_u8_from_blob(blob_from_grid(g));
    CHECK(back == g);
}

TEST_CASE("flat float vector round trip") {
    std::vector<float> v = {1.5f, -2.25f, 0.0f, 1e-30f, 3e30f};
    const auto back = floats_from_blob(blob_from_floats(v, {5}));
    CHECK(back == v);
}

// === header layout ===

TEST_CASE("scan-sized payload is 800*99*4 bytes plus header") {
    GridF g(800, 99, 0.5f);
    const auto bytes = serialize_blob(blob_from_grid(g));
    const size_t header = 4 + 4 + 4 + 4 + 2 * 8;  // magic, version, dtype, rank, extents
    CHECK(bytes.size() == 316800 + header);
}

TEST_CASE("header fields are little-endian at fixed offsets") {
    const auto bytes = serialize_blob(sample_blob());
    CHECK(bytes[0] == 'G');
    CHECK(bytes[1] == 'P');
    CHECK(bytes[2] == 'R');
    CHECK(bytes[3] == 'T');
    CHECK(bytes[4] == kContainerVersion);
    CHECK(bytes[5] == 0);
    CHECK(bytes[8] == kDtypeF32);
    CHECK(bytes[12] == 2);  // rank
    CHECK(bytes[16] == 3);  // extent 0 = rows
    CHECK(bytes[24] == 4);  // extent 1 = cols
}

// === corruption detection ===

TEST_CASE("corrupt magic is rejected") {
    auto bytes = serialize_blob(sample_blob());
    bytes[0] = 'X';
    CHECK_THROWS_AS(deserialize_blob(bytes), IoError);
}

TEST_CASE("version mismatch is rejected") {
    auto bytes = serialize_blob(sample_blob());
    bytes[4] = kContainerVersion + 1;
    CHECK_THROWS_AS(deserialize_blob(bytes), IoError);
}

TEST_CASE("truncated payload is rejected") {
    auto bytes = serialize_blob(sample_blob());
    bytes.resize(bytes.size() - 1);
    CHECK_THROWS_AS(deserialize_blob(bytes), IoError);
}

TEST_CASE("unknown dtype is rejected") {
    auto bytes = serialize_blob(sample_blob());
    bytes[8] = 9;
    CHECK_THROWS_AS(deserialize_blob(bytes), IoError);
}

TEST_CASE("dtype/grid adapter mismatch is rejected") {
    CHECK_THROWS_AS(grid_u8_from_blob(sample_blob()), IoError);
}

// === checksums ===

TEST_CASE("fnv1a64 matches the published reference digests") {
    // Reference values for the 64-bit FNV-1a test vectors "" and "a".
    CHECK(fnv1a64(nullptr, 0) == 0xcbf29ce484222325ULL);
    const uint8_t a = 'a';
    CHECK(fnv1a64(&a, 1) == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("file checksum detects any single-byte corruption") {
    const auto path = temp_path("gprseg_checksum_probe.gprt");
    const TensorBlob blob = sample_blob();
    write_blob(path.string(), blob);
    const std::string clean = file_checksum(path.string());

    auto bytes = serialize_blob(blob);
    for (size_t i = 0; i < bytes.size(); i += 7) {
        auto corrupted = bytes;
        corrupted[i] ^= 0x40;
        const auto cpath = temp_path("gprseg_checksum_corrupt.gprt");
        std::FILE* f = std::fopen(cpath.string().c_str(), "wb");
        REQUIRE(f != nullptr);
        std::fwrite(corrupted.data(), 1, corrupted.size(), f);
        std::fclose(f);
        CHECK(file_checksum(cpath.string()) != clean);
        std::filesystem::remove(cpath);
    }
    std::filesystem::remove(path);
}

TEST_CASE("missing file raises IoError") {
    CHECK_THROWS_AS(read_blob("/nonexistent/gprseg/blob.gprt"), IoError);
}
