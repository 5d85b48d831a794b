#pragma once

namespace onearm {
inline constexpr const char* kVersion = "0.1.0";
}
