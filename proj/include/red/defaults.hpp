#pragma once

// Every tunable default in one place. CLI flags override these per run and
// the effective values are recorded in each run manifest.

namespace red::defaults {

/// Logarithm applied to rate (kb/s) and energy (J). Natural log, fixed library-wide.
inline constexpr const char* log_base = "e";

/// Stability test: two-sided Student-t interval at level 1 - alpha; pass
/// when half-width / mean <= beta.
inline constexpr double alpha = 0.01;
inline constexpr double beta = 0.02;

/// Dominance grids.
inline constexpr int grid_cells = 200;
inline constexpr double tie_tolerance = 1e-6;       // dB on R-E, log-rate on E-D
inline constexpr double inversion_tolerance = 1e-8; // dB
inline constexpr int monotone_samples = 64;
inline constexpr double monotone_slack = 1e-9;

/// Occlusion: any strict dominance counts.
inline constexpr double margin_threshold = 0.0;

}  // namespace red::defaults
