#include <doctest.h>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "qdpc/config_io.hpp"
#include "qdpc/pfm.hpp"

using namespace qdpc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "qdpc_unit_io";
    fs::create_directories(dir);
    return dir / name;
}

void write_bytes(const fs::path& p, const std::string& bytes) {
    std::ofstream f(p, std::ios::binary);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string be_float(float v) {
    auto u = std::bit_cast<std::uint32_t>(v);
    std::string out(4, '\0');
    for (int i = 0; i < 4; ++i) out[i] = static_cast<char>((u >> (24 - 8 * i)) & 0xff);
    return out;
}

}  // namespace

TEST_CASE("PFM round trip keeps float32 values and orientation") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.0, 1.0);
    RealImage img(7, 5);
    for (double& v : img) v = g(rng);
    const fs::path p = scratch("rt.pfm");
    write_pfm(p, img);
    const RealImage back = read_pfm(p);
    REQUIRE(back.width() == 7);
    REQUIRE(back.height() == 5);
    for (std::size_t i = 0; i < img.size(); ++i) CHECK(back[i] == static_cast<double>(static_cast<float>(img[i])));
    CHECK(fs::file_size(p) == std::string("Pf\n7 5\n-1.0\n").size() + 7 * 5 * 4);
}

TEST_CASE("PFM reader handles big-endian files and rejects junk") {
    // 2x2, stored bottom row first.
    const fs::path be = scratch("be.pfm");
    write_bytes(be, "Pf\n2 2\n1.0\n" + be_float(3) + be_float(4) + be_float(1) + be_float(2));
    const RealImage img = read_pfm(be);
    CHECK(img(0, 0) == 1.0);
    CHECK(img(1, 0) == 2.0);
    CHECK(img(0, 1) == 3.0);
    CHECK(img(1, 1) == 4.0);

    const fs::path bad = scratch("bad.pfm");
    write_bytes(bad, "PF\n2 2\n-1.0\n");
    CHECK_THROWS_AS((void)read_pfm(bad), IoError);
    write_bytes(bad, "Pf\n2 2\n-1.0\n" + std::string(12, '\0'));
    CHECK_THROWS_AS((void)read_pfm(bad), IoError);
    write_bytes(bad, "Pf\n-2 2\n-1.0\n");
    CHECK_THROWS_AS((void)read_pfm(bad), IoError);
    CHECK_THROWS_AS((void)read_pfm(scratch("missing.pfm")), IoError);
}

TEST_CASE("SHA-256 known vectors") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    const fs::path p = scratch("abc.txt");
    write_bytes(p, "abc");
    CHECK(sha256_file(p) == sha256_hex("abc"));
}

TEST_CASE("JSON configs parse and reject unknown keys") {
    const OpticalConfig o = optical_config_from_json(Json::parse(R"({"na": 0.4, "width": 64})"));
    CHECK(o.na == 0.4);
    CHECK(o.width == 64);
    CHECK(o.height == OpticalConfig{}.height);
    CHECK_THROWS_AS((void)optical_config_from_json(Json::parse(R"({"NA": 0.4})")), ConfigError);
    CHECK_THROWS_AS((void)optical_config_from_json(Json::parse(R"({"na": "big"})")), ConfigError);

    const NoiseSpec n = noise_spec_from_json(Json::parse(R"({"mode": "snr-db", "level": "inf"})"));
    CHECK(std::isinf(n.level));
    CHECK_THROWS_AS((void)noise_spec_from_json(Json::parse(R"({"mode": "loud"})")), ConfigError);

    const SourceGeometry ring = source_geometry_from_json(Json::parse(R"({"shape": "half-annulus", "inner_factor": 0.5})"));
    CHECK(ring.inner_factor == 0.5);
    CHECK(source_geometry_from_json(to_json(ring)).inner_factor == 0.5);

    const PhantomSpec ps = phantom_spec_from_json(to_json(PhantomSpec{}));
    CHECK(ps.kind == PhantomSpec{}.kind);

    const fs::path p = scratch("broken.json");
    write_bytes(p, "{\"optics\": ");
    CHECK_THROWS_AS((void)read_json_file(p), ConfigError);
    CHECK_THROWS_AS((void)read_json_file(scratch("nope.json")), IoError);
    write_json_file(p, Json{{"x", 1}});
    CHECK(read_json_file(p).at("x") == 1);
}
