#include <doctest.h>

#include <cmath>

#include "molpack/elements.hpp"
#include "molpack/error.hpp"
#include "molpack/xyz.hpp"

using namespace molpack;

namespace {
const char* kTwoFrames =
    "3\n"
    "E=-76.4  water\n"
    "O 0.0 0.0 0.119\n"
    "H 0.0 0.763 -0.477\n"
    "H 0.0 -0.763 -0.477\n"
    "2\n"
    "no label here\n"
    "N 0.0 0.0 0.0\n"
    "N 0.0 0.0 1.098\n";
}

TEST_CASE("parse_xyz reads frames, symbols, coordinates and labels") {
  const auto mols = parse_xyz(kTwoFrames, "g");
  REQUIRE(mols.size() == 2);
  CHECK(mols[0].id == "g0");
  CHECK(mols[1].id == "g1");
  REQUIRE(mols[0].size() == 3);
  CHECK(mols[0].atomic_numbers[0] == 8);
  CHECK(mols[0].atomic_numbers[1] == 1);
  CHECK(mols[0].positions[0][2] == doctest::Approx(0.119));
  REQUIRE(mols[0].label.has_value());
  CHECK(*mols[0].label == doctest::Approx(-76.4));
  CHECK(mols[1].size() == 2);
  CHECK_FALSE(mols[1].label.has_value());
}

TEST_CASE("parse_xyz tolerates blank separator lines and CRLF endings") {
  const auto mols = parse_xyz("1\r\ncomment\r\nH 1 2 3\r\n\r\n\r\n1\ncomment\nHe 0 0 0\n");
  REQUIRE(mols.size() == 2);
  CHECK(mols[0].atomic_numbers[0] == 1);
  CHECK(mols[0].positions[0][0] == 1.0);
  CHECK(mols[1].atomic_numbers[0] == 2);
}

TEST_CASE("a malformed E= token is plain comment text, not an error") {
  const auto mols = parse_xyz("1\nE=not-a-number rest\nC 0 0 0\n");
  REQUIRE(mols.size() == 1);
  CHECK_FALSE(mols[0].label.has_value());
}

TEST_CASE("parse_xyz reports 1-based line numbers for malformed input") {
  CHECK_THROWS_WITH_AS(parse_xyz("banana\n"), doctest::Contains("line 1"), ParseError);
  CHECK_THROWS_WITH_AS(parse_xyz("1\nc\nC zero 0 0\n"), doctest::Contains("line 3"), ParseError);
  CHECK_THROWS_WITH_AS(parse_xyz("2\nc\nC 0 0 0\n"), doctest::Contains("ends after"),
                       ParseError);
  CHECK_THROWS_AS(parse_xyz("1\nc\nXx 0 0 0\n"), ParseError);      // unknown element
  CHECK_THROWS_AS(parse_xyz("1\nc\nC 0 0\n"), ParseError);         // missing coordinate
  CHECK_THROWS_AS(parse_xyz("1\nc\nC 0 0 0 junk\n"), ParseError);  // trailing field
  CHECK_THROWS_AS(parse_xyz("-1\nc\n"), ParseError);
}

TEST_CASE("format_xyz round-trips coordinates and labels bit-exactly") {
  auto mols = parse_xyz(kTwoFrames);
  mols[0].positions[1][1] = 0.1 + 0.2;  // not representable tidily
  const auto again = parse_xyz(format_xyz(mols));
  REQUIRE(again.size() == mols.size());
  for (std::size_t i = 0; i < mols.size(); ++i) {
    CHECK(again[i].atomic_numbers == mols[i].atomic_numbers);
    CHECK(again[i].label == mols[i].label);
    REQUIRE(again[i].size() == mols[i].size());
    for (std::size_t a = 0; a < mols[i].size(); ++a) {
      CHECK(again[i].positions[a] == mols[i].positions[a]);
    }
  }
}

TEST_CASE("element table maps symbols both ways") {
  CHECK(element_number("H") == 1);
  CHECK(element_number("C") == 6);
  CHECK(element_number("Og") == 118);
  CHECK_FALSE(element_number("h").has_value());  // case-sensitive
  CHECK_FALSE(element_number("Zz").has_value());
  CHECK(element_symbol(8) == "O");
  CHECK_THROWS_AS(element_symbol(0), BoundsError);
  CHECK_THROWS_AS(element_symbol(119), BoundsError);
}
