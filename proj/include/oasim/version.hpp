#pragma once

namespace oasim {

inline constexpr const char* kGeneratorVersion = "oasim 0.1.0";

} // namespace oasim
