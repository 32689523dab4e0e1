#pragma once

namespace meanmax {

inline constexpr const char* kToolVersion = "0.1.0";

// Report schema. Readers accept any report whose major component matches;
// minor bumps only ever add keys.
inline constexpr const char* kSchemaVersion = "1.0";

}  // namespace meanmax
