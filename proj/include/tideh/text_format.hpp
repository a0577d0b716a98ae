#pragma once

#include <string>

namespace tideh {

/// Shortest decimal text that parses back to the same double.
[[nodiscard]] std::string format_double(double v);

} // namespace tideh
