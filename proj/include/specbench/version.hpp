#pragma once

namespace specbench {

// Bumped whenever the on-disk formats (results store, basis cache) change
// incompatibly.  Readers refuse files written with a different schema.
inline constexpr int kStoreSchemaVersion = 1;
inline constexpr int kBasisCacheVersion = 1;

// Version of the eigenvector sign convention baked into cached bases.
inline constexpr int kSignConventionVersion = 1;

inline constexpr const char* kToolName = "specbench";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace specbench
