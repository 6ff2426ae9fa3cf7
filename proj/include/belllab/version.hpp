#pragma once

namespace belllab {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace belllab
