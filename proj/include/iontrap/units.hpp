#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace iontrap {

enum class Dimension {
  Length,
  Voltage,
  Frequency,
  Angle,
  Energy,
  Dimensionless,
};

const char* dimension_name(Dimension d);

struct Quantity {
  double value = 0.0;  // SI (m, V, Hz, rad, J)
  Dimension dim = Dimension::Dimensionless;
};

// Parses "500 um", "600 V", "22.5 MHz", "1.5 deg", "1 eV".
// Scenario files require an explicit unit on every dimensioned value, so a
// bare number parses as Dimensionless and the caller rejects it where a
// dimension is expected.
std::optional<Quantity> parse_quantity(std::string_view text);

// Shortest round-trip decimal representation (std::to_chars).
std::string format_double(double v);

std::string trim(std::string_view s);

}  // namespace iontrap
