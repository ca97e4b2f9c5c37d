#pragma once

namespace lzkit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace lzkit
