#pragma once

namespace mpdarcy {

inline constexpr const char* version = "0.1.0";

}  // namespace mpdarcy
