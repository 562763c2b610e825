#pragma once

namespace fairaes {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fairaes
