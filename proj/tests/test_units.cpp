#include <charconv>

#include "doctest.h"
#include "iontrap/constants.hpp"
#include "iontrap/units.hpp"

using namespace iontrap;

TEST_CASE("quantity parsing applies unit factors and dimensions") {
  auto q = parse_quantity("500 um");
  REQUIRE(q.has_value());
  CHECK(q->value == doctest::Approx(500e-6).epsilon(1e-15));
  CHECK(q->dim == Dimension::Length);

  q = parse_quantity("22.5 MHz");
  REQUIRE(q.has_value());
  CHECK(q->value == doctest::Approx(22.5e6));
  CHECK(q->dim == Dimension::Frequency);

  q = parse_quantity("-10 V");
  REQUIRE(q.has_value());
  CHECK(q->value == -10.0);
  CHECK(q->dim == Dimension::Voltage);

  q = parse_quantity("1.5 deg");
  REQUIRE(q.has_value());
  CHECK(q->value == doctest::Approx(1.5 * constants::deg));

  CHECK(parse_quantity("500 kg") == std::nullopt);   // unknown unit
  CHECK(parse_quantity("abc") == std::nullopt);
  CHECK(parse_quantity("42")->dim == Dimension::Dimensionless);
}

TEST_CASE("format_double round-trips exactly") {
  for (double v : {0.0, 1.0, -1.5, 3.14159265358979, 1e-300, 6.02214076e23,
                   -0.1, 25.2e-3, 1.0 / 3.0}) {
    std::string s = format_double(v);
    double back = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), back);
    REQUIRE(ec == std::errc{});
    CHECK(back == v);
  }
}
