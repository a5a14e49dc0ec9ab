// Container types and binary/CSV round-trip tests.
//
// The byte-level oracle re-encodes a scan header by hand (memcpy of
// little-endian scalars) so the on-disk layout is pinned independently of the
// writer implementation.

#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "oce/errors.hpp"
#include "oce/ocb_io.hpp"
#include "oce/types.hpp"

namespace fs = std::filesystem;
using namespace oce;

namespace {

fs::path temp_dir() {
  static int counter = 0;
  fs::path p = fs::temp_directory_path() / ("oce_io_test_" + std::to_string(++counter));
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), std::streamsize(bytes.size()));
}

template <typename T>
void push(std::string& buf, T v) {
  char raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  buf.append(raw, sizeof(T));
}

ComplexBScan small_scan() {
  ComplexBScan scan{1, 1};
  scan.axial_pitch_um = 2.5;
  scan.lateral_pitch_um = 12.0;
  scan.lambda0_um = 0.878;
  scan.refractive_index = 1.0;
  scan.samples[0] = {1.5, -2.25};
  return scan;
}

} // namespace

TEST_CASE("scan file bytes match a hand-written encoding") {
  const fs::path dir = temp_dir();
  const fs::path file = dir / "one.ocb";
  write_bscan(file, small_scan());

  std::string expect;
  expect += "OCB1";
  push<std::uint32_t>(expect, 1);
  push<std::uint32_t>(expect, 1);
  push<double>(expect, 2.5);
  push<double>(expect, 12.0);
  push<double>(expect, 0.878);
  push<double>(expect, 1.0);
  push<float>(expect, 1.5f);
  push<float>(expect, -2.25f);

  CHECK(slurp(file) == expect);
  CHECK(fs::file_size(file) == 44 + 8);
}

TEST_CASE("scan round-trip is bit-exact for float-valued samples") {
  const fs::path dir = temp_dir();
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<float> dist(-10.0f, 10.0f);
  std::uniform_int_distribution<int> dim(1, 30);
  for (int t = 0; t < 20; ++t) {
    ComplexBScan scan{dim(rng), dim(rng)};
    scan.axial_pitch_um = double(dist(rng)) + 11.0;
    scan.lateral_pitch_um = double(dist(rng)) + 11.0;
    scan.lambda0_um = 0.878;
    scan.refractive_index = 1.38;
    for (auto& s : scan.samples) s = {double(dist(rng)), double(dist(rng))};
    const fs::path file = dir / ("rt_" + std::to_string(t) + ".ocb");
    write_bscan(file, scan);
    const ComplexBScan back = read_bscan(file);
    REQUIRE(back.m == scan.m);
    REQUIRE(back.n == scan.n);
    CHECK(back.axial_pitch_um == scan.axial_pitch_um);
    CHECK(back.lateral_pitch_um == scan.lateral_pitch_um);
    CHECK(back.lambda0_um == scan.lambda0_um);
    CHECK(back.refractive_index == scan.refractive_index);
    bool same = true;
    for (std::size_t k = 0; k < scan.samples.size(); ++k)
      same = same && scan.samples[k] == back.samples[k];
    CHECK(same);
  }
}

TEST_CASE("corrupted or truncated scan files are rejected") {
  const fs::path dir = temp_dir();
  const fs::path good = dir / "good.ocb";
  write_bscan(good, small_scan());
  const std::string bytes = slurp(good);

  SUBCASE("bad magic") {
    std::string bad = bytes;
    bad[0] = 'X';
    spit(dir / "bad.ocb", bad);
    CHECK_THROWS_WITH_AS(read_bscan(dir / "bad.ocb"), doctest::Contains("bad magic"), IoError);
  }
  SUBCASE("truncated header") {
    spit(dir / "bad.ocb", bytes.substr(0, 20));
    CHECK_THROWS_AS(read_bscan(dir / "bad.ocb"), IoError);
  }
  SUBCASE("truncated payload") {
    spit(dir / "bad.ocb", bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_WITH_AS(read_bscan(dir / "bad.ocb"), doctest::Contains("truncated"), IoError);
  }
  SUBCASE("zero dimension") {
    std::string bad = bytes;
    std::uint32_t zero = 0;
    std::memcpy(bad.data() + 4, &zero, 4);
    spit(dir / "bad.ocb", bad);
    CHECK_THROWS_WITH_AS(read_bscan(dir / "bad.ocb"), doctest::Contains("bad dimensions"),
                         IoError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_bscan(dir / "nope.ocb"), IoError);
  }
  SUBCASE("non-finite sample is refused on write and nothing is written") {
    ComplexBScan scan = small_scan();
    scan.samples[0] = {std::numeric_limits<double>::quiet_NaN(), 0.0};
    const fs::path target = dir / "nan.ocb";
    CHECK_THROWS_AS(write_bscan(target, scan), NumericError);
    CHECK(!fs::exists(target));
  }
}

TEST_CASE("displacement binary round-trip preserves values and validity") {
  const fs::path dir = temp_dir();
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<float> dist(-150.0f, 150.0f);
  DisplacementField field{7, 5};
  for (std::size_t k = 0; k < field.axial_um.size(); ++k) {
    field.axial_um[k] = double(dist(rng));
    field.lateral_um[k] = double(dist(rng));
    field.valid[k] = std::uint8_t(k % 3 != 0);
  }
  FieldMeta meta;
  meta.axial_pitch_um = 2.2439;
  meta.lateral_pitch_um = 12.0;
  meta.lambda0_um = 0.878;
  meta.refractive_index = 1.0;
  const fs::path file = dir / "f.ocd";
  write_displacement_bin(file, field, meta);
  FieldMeta back_meta;
  const DisplacementField back = read_displacement_bin(file, &back_meta);
  REQUIRE(back.m == field.m);
  REQUIRE(back.n == field.n);
  CHECK(back_meta.axial_pitch_um == meta.axial_pitch_um);
  CHECK(back_meta.lambda0_um == meta.lambda0_um);
  for (std::size_t k = 0; k < field.axial_um.size(); ++k) {
    CHECK(back.axial_um[k] == field.axial_um[k]);
    CHECK(back.lateral_um[k] == field.lateral_um[k]);
    CHECK(back.valid[k] == field.valid[k]);
  }
}

TEST_CASE("displacement CSV round-trip preserves float-valued fields") {
  const fs::path dir = temp_dir();
  DisplacementField field{3, 4};
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<float> dist(-9.0f, 9.0f);
  for (std::size_t k = 0; k < field.axial_um.size(); ++k) {
    field.axial_um[k] = double(dist(rng));
    field.lateral_um[k] = double(dist(rng));
    field.valid[k] = std::uint8_t(k % 2);
  }
  const fs::path file = dir / "f.csv";
  write_displacement_csv(file, field);
  const DisplacementField back = read_displacement_csv(file);
  REQUIRE(back.m == field.m);
  REQUIRE(back.n == field.n);
  for (std::size_t k = 0; k < field.axial_um.size(); ++k) {
    CHECK(back.axial_um[k] == field.axial_um[k]);
    CHECK(back.lateral_um[k] == field.lateral_um[k]);
    CHECK(back.valid[k] == field.valid[k]);
  }
  SUBCASE("header tampering is rejected") {
    std::string text = slurp(file);
    spit(file, "x" + text);
    CHECK_THROWS_AS(read_displacement_csv(file), IoError);
  }
}

TEST_CASE("container validation rejects inconsistent buffers") {
  ComplexBScan scan = small_scan();
  CHECK_NOTHROW(scan.validate());
  scan.samples.pop_back();
  CHECK_THROWS_WITH_AS(scan.validate(), doctest::Contains("buffer size"), ConfigError);

  ComplexBScan nonfinite = small_scan();
  nonfinite.samples[0] = {0.0, std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(nonfinite.validate(), NumericError);

  ComplexBScan nopitch = small_scan();
  nopitch.axial_pitch_um = 0.0;
  CHECK_THROWS_AS(nopitch.validate(), ConfigError);

  DisplacementField field{2, 3};
  CHECK_NOTHROW(field.validate());
  field.valid.pop_back();
  CHECK_THROWS_AS(field.validate(), ConfigError);

  DisplacementField zero;
  CHECK_THROWS_AS(zero.validate(), ConfigError);
  StrainField zstrain;
  CHECK_THROWS_AS(zstrain.validate(), ConfigError);
}

TEST_CASE("metadata comparison detects mismatched acquisitions") {
  ComplexBScan a = small_scan();
  ComplexBScan b = small_scan();
  CHECK(a.metadata_matches(b));
  b.lambda0_um = 1.3;
  CHECK(!a.metadata_matches(b));
}
