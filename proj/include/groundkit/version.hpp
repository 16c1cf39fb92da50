#pragma once

namespace groundkit {

inline constexpr char kVersion[] = "0.1.0";

} // namespace groundkit
