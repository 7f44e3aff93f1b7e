#pragma once

namespace corrlasso {
namespace calib {

// Prefactors frozen after a one-off calibration sweep; tests assert against
// these exact values. kDeviationC0 scales the deviation bound
// phi * sqrt(log p / n); kReTauC scales the tolerance tau = c * log(p) / n
// used when spot-checking restricted curvature on random sparse probes.
inline constexpr double kDeviationC0 = 4.0;
inline constexpr double kReTauC = 0.5;

}  // namespace calib
}  // namespace corrlasso
