#pragma once

namespace outerlab {
inline constexpr const char* kVersion = "0.1.0";
}
