#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>

#include <thermowave/datacube.hpp>
#include <thermowave/errors.hpp>
#include <thermowave/phantom.hpp>

#include "support.hpp"

using namespace thermowave;

namespace {

std::vector<char> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

DataCube small_cube(int nx, int ny, int nt, std::uint64_t seed) {
  std::vector<Grid> frames;
  for (int t = 0; t < nt; ++t) frames.push_back(testing::random_grid(nx, ny, seed + t));
  return DataCube::from_frames(frames, 2.0);
}

}  // namespace

TEST_CASE("cube construction validates shape and values") {
  CHECK_THROWS_AS(DataCube(2, 2, 1, 1.0, std::vector<float>(3)), ShapeError);
  CHECK_THROWS_AS(DataCube(0, 2, 1, 1.0, {}), ShapeError);
  std::vector<float> v(4, 1.0f);
  v[2] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(DataCube(2, 2, 1, 1.0, v), DataError);
  v[2] = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(DataCube(2, 2, 1, 1.0, v), DataError);
}

TEST_CASE("2x2x1 cube round trips bit for bit") {
  testing::TempDir dir("cube");
  const DataCube c(2, 2, 1, 0.5, {1.0f, -2.5f, 3.25e-7f, 4.0e20f});
  write_cube(c, dir / "c.tic");
  const DataCube back = read_cube(dir / "c.tic");
  CHECK(back == c);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::bit_cast<std::uint32_t>(back.values()[i]) ==
          std::bit_cast<std::uint32_t>(c.values()[i]));
  }
}

TEST_CASE("round trip holds for random cubes") {
  testing::TempDir dir("cube");
  for (int k = 0; k < 10; ++k) {
    const auto c = small_cube(3 + k, 5 + 2 * k, 1 + k % 3, 100 + k);
    write_cube(c, dir / "r.tic");
    CHECK(read_cube(dir / "r.tic") == c);
    CHECK(decode_cube(encode_cube(c)) == c);
  }
}

TEST_CASE("golden TIC1 file decodes to the expected values and re-encodes identically") {
  const auto bytes = slurp(testing::data_path("cube_3x4x2.tic"));
  const DataCube c = decode_cube(bytes);
  CHECK(c.nx() == 3);
  CHECK(c.ny() == 4);
  CHECK(c.nt() == 2);
  CHECK(c.te_s() == 5.0);
  CHECK(c.flipped_y());
  CHECK(c.at(0, 0, 0) == 0.25f);
  CHECK(c.at(0, 1, 1) == -1.5f);
  CHECK(c.at(0, 1, 2) == 1e-30f);
  CHECK(c.at(1, 2, 3) == 123.25f);
  CHECK(encode_cube(c) == bytes);
}

TEST_CASE("header with nt 128 and te 10 matches the excitation table") {
  testing::TempDir dir("cube");
  {
    std::ofstream out(dir / "h.tic", std::ios::binary);
    out << "TIC1\n8 8 128\n10\n0\n";
    const std::vector<char> zeros(8 * 8 * 128 * 4, 0);
    out.write(zeros.data(), static_cast<std::streamsize>(zeros.size()));
  }
  const auto c = read_cube(dir / "h.tic");
  CHECK(c.nt() == 128);
  CHECK(c.te_s() == 10.0);
  CHECK(frames_for_excitation_time(c.te_s()) == c.nt());
}

TEST_CASE("malformed files raise the documented errors") {
  const auto good = encode_cube(small_cube(4, 4, 2, 1));
  SUBCASE("truncated payload") {
    std::vector<char> cut(good.begin(), good.end() - 3);
    CHECK_THROWS_AS(decode_cube(cut), TruncationError);
  }
  SUBCASE("bad magic") {
    auto bad = good;
    bad[3] = '2';
    CHECK_THROWS_AS(decode_cube(bad), FormatError);
  }
  SUBCASE("trailing bytes") {
    auto extra = good;
    extra.push_back(0);
    CHECK_THROWS_AS(decode_cube(extra), FormatError);
  }
  SUBCASE("non-finite payload") {
    auto nan = good;
    const float q = std::numeric_limits<float>::quiet_NaN();
    const auto bits = std::bit_cast<std::uint32_t>(q);
    const std::size_t at = nan.size() - 4;
    for (int b = 0; b < 4; ++b) nan[at + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
    CHECK_THROWS_AS(decode_cube(nan), DataError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_cube("/nonexistent/dir/x.tic"), IoError);
  }
}

TEST_CASE("standard phantom file size is header plus 4 bytes per sample") {
  auto cfg = PhantomConfig::standard(5.0, 42);
  cfg.noise_sigma = 0.0;
  const auto ph = generate_phantom(cfg);
  const auto bytes = encode_cube(ph.cube);
  const std::string header = "TIC1\n160 200 256\n5\n0\n";
  CHECK(bytes.size() == header.size() + 160u * 200u * 256u * 4u);
  CHECK(std::string(bytes.begin(), bytes.begin() + header.size()) == header);
}

TEST_CASE("flip_y mirrors columns and is an involution") {
  const DataCube c(2, 2, 1, 1.0, {1, 2, 3, 4});
  const DataCube f = flip_y(c);
  CHECK(f.flipped_y());
  CHECK(f.at(0, 0, 0) == 2.0f);
  CHECK(f.at(0, 0, 1) == 1.0f);
  CHECK(f.at(0, 1, 0) == 4.0f);
  CHECK(f.at(0, 1, 1) == 3.0f);
  CHECK(flip_y(f) == c);

  const auto r = small_cube(7, 9, 3, 5);
  CHECK(flip_y(flip_y(r)) == r);
  auto a = std::vector<float>(r.values().begin(), r.values().end());
  const DataCube fr = flip_y(r);
  auto b = std::vector<float>(fr.values().begin(), fr.values().end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);
}

TEST_CASE("hole 1 column maps to ny-1-167 after a flip") {
  const auto truth = standard_ground_truth();
  const auto flipped = truth.flipped_y(200);
  CHECK(truth.fault(1).center == Pixel{39, 167});
  CHECK(flipped.fault(1).center == Pixel{39, 200 - 1 - 167});

  // A marker pixel at hole 1 moves to the mirrored column in the cube too.
  std::vector<float> v(160 * 200, 0.0f);
  v[39 * 200 + 167] = 1.0f;
  const auto f = flip_y(DataCube(160, 200, 1, 5.0, v));
  CHECK(f.at(0, 39, 32) == 1.0f);
}

TEST_CASE("extract_window copies the neighbourhood") {
  const Grid frame = testing::random_grid(160, 200, 3);
  CHECK(extract_window(frame, FrameWindow{{4, 6}, 0})(0, 0) == frame(4, 6));

  const FrameWindow hole1{{39, 167}, 5};
  const Grid w = extract_window(frame, hole1);
  CHECK(w.rows() == 11);
  CHECK(w.cols() == 11);
  CHECK(w.sum() == doctest::Approx(frame.block(34, 162, 11, 11).sum()).epsilon(1e-14));
  CHECK(w == frame.block(34, 162, 11, 11));

  CHECK_THROWS_AS(extract_window(frame, FrameWindow{{0, 0}, 1}), BoundsError);
  CHECK_THROWS_AS(extract_window(frame, FrameWindow{{159, 100}, 1}), BoundsError);
}

TEST_CASE("window sums match the source region for random placements") {
  std::mt19937 rng(11);
  const Grid frame = testing::random_grid(40, 30, 8);
  for (int k = 0; k < 50; ++k) {
    const int h = static_cast<int>(rng() % 5);
    const int r = h + static_cast<int>(rng() % (40 - 2 * h));
    const int c = h + static_cast<int>(rng() % (30 - 2 * h));
    const Grid w = extract_window(frame, FrameWindow{{r, c}, h});
    double s = 0.0;
    for (int i = r - h; i <= r + h; ++i)
      for (int j = c - h; j <= c + h; ++j) s += frame(i, j);
    CHECK(w.sum() == doctest::Approx(s).epsilon(1e-12));
  }
}

TEST_CASE("excitation files round trip and reject junk") {
  testing::TempDir dir("exc");
  const ExcitationSequence seq({1, 0, 0, 1, 1}, 2.0);
  write_excitation(seq, dir / "e.txt");
  CHECK(read_excitation(dir / "e.txt", 2.0) == seq);
  {
    std::ofstream out(dir / "bad.txt");
    out << "1\n0\n2\n";
  }
  CHECK_THROWS_AS(read_excitation(dir / "bad.txt"), FormatError);
  CHECK_THROWS_AS(ExcitationSequence({1, 1, 1}, 1.0), DataError);
}

TEST_CASE("temporal mean and scaling") {
  const DataCube c(1, 2, 2, 1.0, {1, 2, 3, 6});
  const Grid m = c.temporal_mean();
  CHECK(m(0, 0) == 2.0);
  CHECK(m(0, 1) == 4.0);
  CHECK(c.scaled(2.0).at(1, 0, 1) == 12.0f);
}
