#pragma once

namespace qho::kernels::detail {

inline constexpr double kPiQuarterInv = 0.75112554446494248286;  // pi^{-1/4}
inline constexpr double kSqrt2 = 1.41421356237309504880;

}  // namespace qho::kernels::detail
