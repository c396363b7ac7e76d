#pragma once

#include <cmath>
#include <concepts>
#include <string>

#include "red/error.hpp"

namespace red::numerics {

inline constexpr int kMaxBisectIterations = 200;

struct BisectOptions {
    /// Stop once the bracket is this narrow. Negative means the default
    /// tol * max(1, |hi - lo|); zero means stop only on the value test or
    /// when the bracket can no longer be split.
    double x_tol = -1.0;
    int max_iterations = kMaxBisectIterations;
};

/// Finds x in [lo, hi] with |f(x) - target| <= tol, or a bracket narrower than
/// the x tolerance. f(lo) - target and f(hi) - target must differ in sign (or
/// one of them be zero). Throws ConvergenceFailure after max_iterations.
template <typename F>
    requires std::invocable<F&, double>
double bisect_root(F&& f, double lo, double hi, double target, double tol, BisectOptions options = {}) {
    if (!(tol > 0.0)) throw InvalidArgument("bisection tolerance must be positive");
    if (!(lo < hi)) throw InvalidArgument("bisection bracket must satisfy lo < hi");
    const double x_tol = options.x_tol < 0.0 ? tol * std::max(1.0, std::abs(hi - lo)) : options.x_tol;

    double f_lo = static_cast<double>(f(lo)) - target;
    double f_hi = static_cast<double>(f(hi)) - target;
    if (!std::isfinite(f_lo) || !std::isfinite(f_hi)) throw NumericalError("function is not finite on the bracket ends");
    if (std::abs(f_lo) <= tol && std::abs(f_lo) <= std::abs(f_hi)) return lo;
    if (std::abs(f_hi) <= tol) return hi;
    if ((f_lo < 0.0) == (f_hi < 0.0))
        throw NoSignChange("no sign change on [" + std::to_string(lo) + ", " + std::to_string(hi) + "] for target " +
                           std::to_string(target));

    for (int it = 0; it < options.max_iterations; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) {
            // Bracket exhausted at machine resolution.
            const double best = std::abs(f_lo) <= std::abs(f_hi) ? lo : hi;
            if (std::abs(f(best) - target) <= tol || options.x_tol != 0.0) return best;
            throw ConvergenceFailure("bracket collapsed before reaching tolerance " + std::to_string(tol));
        }
        const double f_mid = static_cast<double>(f(mid)) - target;
        if (!std::isfinite(f_mid)) throw NumericalError("function is not finite inside the bracket");
        if (std::abs(f_mid) <= tol) return mid;
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
        if (x_tol > 0.0 && hi - lo <= x_tol) return std::abs(f_lo) <= std::abs(f_hi) ? lo : hi;
    }
    throw ConvergenceFailure("bisection did not converge in " + std::to_string(options.max_iterations) + " iterations");
}

}  // namespace red::numerics
