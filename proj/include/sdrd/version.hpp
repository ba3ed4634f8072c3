#pragma once

namespace sdrd {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sdrd
