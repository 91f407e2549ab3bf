#pragma once

namespace panmc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace panmc
