#pragma once

namespace ballbot {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ballbot
