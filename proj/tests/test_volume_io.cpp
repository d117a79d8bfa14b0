#include <cstring>
#include <fstream>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qsr/volume_io.hpp"
#include "test_util.hpp"

using namespace qsr;
namespace fs = std::filesystem;

namespace {

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    out << s;
}

}  // namespace

TEST_CASE("constant payload loads verbatim") {
    testutil::TempDir dir("vol");
    const Volume v{"c", {Image2D(256, 256, 0.5), Image2D(256, 256, 0.5)}};
    save_volume(v, dir / "c.vol");
    CHECK(fs::file_size(dir / "c.vol") == 256u * 256u * 2u * 4u);
    const Volume back = load_volume(dir / "c.vol");
    REQUIRE(back.slices.size() == 2);
    CHECK(back == v);
}

TEST_CASE("1x1x1 payload is the little-endian float32 encoding") {
    testutil::TempDir dir("vol");
    save_volume(Volume{"one", {Image2D(1, 1, 0.25)}}, dir / "one.vol");
    const std::string bytes = read_bytes(dir / "one.vol");
    REQUIRE(bytes.size() == 4);
    const unsigned char expect[4] = {0x00, 0x00, 0x80, 0x3e};  // 0.25f
    CHECK(std::memcmp(bytes.data(), expect, 4) == 0);
}

TEST_CASE("save/load round trip is bit-exact for float values") {
    testutil::TempDir dir("vol");
    std::mt19937_64 rng(3);
    Volume v{"r", {}};
    for (int s = 0; s < 3; ++s) v.slices.push_back(quantize_to_float(oracle::random_image(rng, 17, 9)));
    save_volume(v, dir / "r.vol");
    CHECK(load_volume(dir / "r.vol") == v);
}

TEST_CASE("load_volume errors") {
    testutil::TempDir dir("vol");
    save_volume(Volume{"x", {Image2D(4, 4, 0.1), Image2D(4, 4, 0.2)}}, dir / "x.vol");

    SUBCASE("header claims more slices than the payload holds") {
        write_text(dir / "x.vol.json", R"({"patient_id":"x","height":4,"width":4,"slices":3})");
        CHECK_THROWS_WITH_AS(load_volume(dir / "x.vol"), doctest::Contains("length mismatch"), Error);
    }
    SUBCASE("missing header field") {
        write_text(dir / "x.vol.json", R"({"patient_id":"x","height":4,"slices":2})");
        CHECK_THROWS_WITH_AS(load_volume(dir / "x.vol"), doctest::Contains("width"), Error);
    }
    SUBCASE("malformed header") {
        write_text(dir / "x.vol.json", "{not json");
        CHECK_THROWS_AS(load_volume(dir / "x.vol"), Error);
    }
    SUBCASE("non-finite sample") {
        std::string bytes = read_bytes(dir / "x.vol");
        const unsigned char nan_bits[4] = {0x00, 0x00, 0xc0, 0x7f};
        std::memcpy(bytes.data() + 20, nan_bits, 4);
        write_text(dir / "x.vol", bytes);
        CHECK_THROWS_WITH_AS(load_volume(dir / "x.vol"), doctest::Contains("non-finite"), Error);
    }
    SUBCASE("missing files") { CHECK_THROWS_AS(load_volume(dir / "absent.vol"), Error); }
}

TEST_CASE("save to an unwritable path fails") {
    testutil::TempDir dir("vol");
    write_text(dir / "file", "x");
    CHECK_THROWS_AS(save_volume(Volume{"a", {Image2D(1, 1)}}, dir / "file" / "a.vol"), Error);
}

TEST_CASE("datasets round trip through a directory") {
    testutil::TempDir dir("vol");
    const Dataset ds(DatasetLabel::HR, {Volume{"p1", {Image2D(3, 3, 0.5)}}, Volume{"p0", {Image2D(3, 3, 0.25)}}});
    save_dataset(ds, dir / "set");
    const Dataset back = load_dataset(dir / "set", DatasetLabel::HR);
    CHECK(back == ds);
    CHECK(fingerprint(back) == fingerprint(ds));
    const Dataset other(DatasetLabel::HR, {Volume{"p0", {Image2D(3, 3, 0.25)}}});
    CHECK(fingerprint(other) != fingerprint(ds));
    CHECK_THROWS_AS(load_dataset(dir / "missing", DatasetLabel::LR), Error);
}

TEST_CASE("normalize_volume") {
    SUBCASE("values {2,4,6} map to {0,0.5,1}") {
        const Volume v{"n", {Image2D(1, 3, {2, 4, 6})}};
        CHECK(normalize_volume(v).slices[0] == Image2D(1, 3, {0, 0.5, 1}));
    }
    SUBCASE("already spanning [0,1] is unchanged") {
        const Volume v{"n", {Image2D(1, 3, {0, 0.3, 1}), Image2D(1, 3, {0.7, 0.2, 0.9})}};
        CHECK(normalize_volume(v) == v);
    }
    SUBCASE("constant volume becomes zeros") {
        const Volume v{"n", {Image2D(2, 2, 7.0), Image2D(2, 2, 7.0)}};
        const Volume z = normalize_volume(v);
        CHECK(z.slices[0] == Image2D(2, 2, 0.0));
        CHECK(z.slices[1] == Image2D(2, 2, 0.0));
    }
    SUBCASE("range is the whole volume, not each slice") {
        const Volume v{"n", {Image2D(1, 2, {0, 1}), Image2D(1, 2, {2, 4})}};
        const Volume z = normalize_volume(v);
        CHECK(z.slices[0] == Image2D(1, 2, {0, 0.25}));
        CHECK(z.slices[1] == Image2D(1, 2, {0.5, 1}));
    }
}

TEST_CASE("write_pgm16 writes a 16-bit big-endian P5 image") {
    testutil::TempDir dir("vol");
    write_pgm16(Image2D(1, 3, {0.0, 1.0, 2.0}), dir / "a.pgm");
    const std::string bytes = read_bytes(dir / "a.pgm");
    const std::string header = "P5\n3 1\n65535\n";
    REQUIRE(bytes.size() == header.size() + 6);
    CHECK(bytes.substr(0, header.size()) == header);
    const auto* px = reinterpret_cast<const unsigned char*>(bytes.data() + header.size());
    CHECK(px[0] == 0);
    CHECK(px[1] == 0);
    CHECK(px[2] == 0xff);
    CHECK(px[3] == 0xff);
    CHECK(px[4] == 0xff);  // clamped
    CHECK(px[5] == 0xff);
}
