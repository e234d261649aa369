#pragma once

#include <string>

namespace fingermi {

/// Fixed-point rendering used by every report writer ("-0" is normalized to "0").
std::string format_number(double value, int digits = 6);

}  // namespace fingermi
