#pragma once

namespace varlux {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace varlux
