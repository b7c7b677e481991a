#pragma once

namespace wba {

inline constexpr long kStartBits = 128;
inline constexpr long kDefaultMaxBits = 8192;
inline constexpr long kGuardBits = 8;

// Ceiling on working precision. WBA_LAB_MAX_BITS overrides the default.
long default_max_bits();

// Bits needed to follow a flow orbit up to time t.
long bits_for_time(double t, double max_weight);

}  // namespace wba
