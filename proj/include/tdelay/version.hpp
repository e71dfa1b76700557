#pragma once

namespace tdelay {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace tdelay
