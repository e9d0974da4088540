#pragma once

namespace dtqw {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dtqw
