#include <doctest.h>

#include <fstream>
#include <iterator>

#include <thermowave/errors.hpp>
#include <thermowave/pgm.hpp>

#include "support.hpp"

using namespace thermowave;

namespace {

std::vector<char> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("golden greymap decodes and re-encodes byte for byte") {
  const auto bytes = slurp(testing::data_path("grey_2x3.pgm"));
  const auto img = decode_pgm(bytes);
  CHECK(img.rows == 2);
  CHECK(img.cols == 3);
  CHECK(img.pixels == std::vector<std::uint16_t>{0, 1, 255, 256, 32768, 65535});
  CHECK(encode_pgm(img) == bytes);
}

TEST_CASE("ramp renders to the golden image") {
  Grid ramp(3, 4);
  for (int i = 0; i < 12; ++i) ramp.data()[i] = i;
  GreyScaling s;
  const auto img = to_grey(ramp, &s);
  CHECK(s.min == 0.0);
  CHECK(s.max == 11.0);
  CHECK(encode_pgm(img) == slurp(testing::data_path("ramp_3x4.pgm")));
  CHECK((from_grey(img, s) - ramp).cwiseAbs().maxCoeff() < 11.0 / 65535.0);
}

TEST_CASE("constant and single-peak maps") {
  const auto flat = to_grey(Grid::Constant(4, 5, -2.0));
  for (auto p : flat.pixels) CHECK(p == 32768);

  Grid peak = Grid::Zero(6, 6);
  peak(2, 3) = 5.0;
  const auto img = to_grey(peak);
  CHECK(img.pixels[2 * 6 + 3] == 65535);
  CHECK(img.pixels[0] == 0);
}

TEST_CASE("files and sidecars round trip") {
  testing::TempDir dir("pgm");
  const Grid m = testing::random_grid(17, 9, 3);
  render_map(m, dir / "m.pgm");
  const auto img = read_pgm(dir / "m.pgm");
  CHECK(img == to_grey(m));
  const auto s = read_scaling(scaling_sidecar_path(dir / "m.pgm"));
  CHECK(s.min == m.minCoeff());
  CHECK(s.max == m.maxCoeff());
  write_pgm(img, dir / "again.pgm");
  CHECK(slurp(dir / "again.pgm") == slurp(dir / "m.pgm"));
}

TEST_CASE("malformed greymaps") {
  const auto good = encode_pgm(GreyImage{2, 2, {1, 2, 3, 4}});
  auto p2 = good;
  p2[1] = '2';
  CHECK_THROWS_AS(decode_pgm(p2), FormatError);
  std::vector<char> cut(good.begin(), good.end() - 1);
  CHECK_THROWS_AS(decode_pgm(cut), TruncationError);
  const std::string eight = "P5\n2 2\n255\nabcd";
  CHECK_THROWS_AS(decode_pgm(std::vector<char>(eight.begin(), eight.end())), FormatError);
  const std::string comment = "P5\n# made by hand\n1 1\n65535\n\x01\x02";
  CHECK(decode_pgm(std::vector<char>(comment.begin(), comment.end())).pixels[0] == 0x0102);
}
