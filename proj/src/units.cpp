#include "iontrap/units.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>

#include "iontrap/constants.hpp"

namespace iontrap {

const char* dimension_name(Dimension d) {
  switch (d) {
    case Dimension::Length: return "length";
    case Dimension::Voltage: return "voltage";
    case Dimension::Frequency: return "frequency";
    case Dimension::Angle: return "angle";
    case Dimension::Energy: return "energy";
    case Dimension::Dimensionless: return "dimensionless";
  }
  return "?";
}

std::string trim(std::string_view s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string_view::npos) return {};
  size_t b = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(a, b - a + 1));
}

namespace {

struct UnitDef {
  double factor;
  Dimension dim;
};

const std::map<std::string, UnitDef, std::less<>>& unit_table() {
  using D = Dimension;
  static const std::map<std::string, UnitDef, std::less<>> table = {
      {"m", {1.0, D::Length}},       {"cm", {1e-2, D::Length}},
      {"mm", {1e-3, D::Length}},     {"um", {1e-6, D::Length}},
      {"nm", {1e-9, D::Length}},
      {"V", {1.0, D::Voltage}},      {"kV", {1e3, D::Voltage}},
      {"mV", {1e-3, D::Voltage}},
      {"Hz", {1.0, D::Frequency}},   {"kHz", {1e3, D::Frequency}},
      {"MHz", {1e6, D::Frequency}},  {"GHz", {1e9, D::Frequency}},
      {"rad", {1.0, D::Angle}},      {"deg", {constants::deg, D::Angle}},
      {"eV", {constants::elementary_charge, D::Energy}},
      {"meV", {1e-3 * constants::elementary_charge, D::Energy}},
      {"ueV", {1e-6 * constants::elementary_charge, D::Energy}},
      {"neV", {1e-9 * constants::elementary_charge, D::Energy}},
  };
  return table;
}

}  // namespace

std::optional<Quantity> parse_quantity(std::string_view text) {
  std::string s = trim(text);
  if (s.empty()) return std::nullopt;

  const char* begin = s.data();
  const char* end = s.data() + s.size();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr == begin) return std::nullopt;

  std::string unit = trim(std::string_view(ptr, end - ptr));
  if (unit.empty()) return Quantity{value, Dimension::Dimensionless};

  auto it = unit_table().find(unit);
  if (it == unit_table().end()) return std::nullopt;
  return Quantity{value * it->second.factor, it->second.dim};
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
  }
  return std::string(buf, ptr - buf);
}

}  // namespace iontrap
