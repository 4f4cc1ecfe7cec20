#pragma once

#include <cmath>
#include <stdexcept>

// Entropy and concentration-inequality primitives shared by the whole
// toolkit. All inputs and outputs are doubles; counts are carried as real
// numbers because expected values can be fractional.

namespace tfqds {

// Binary Shannon entropy H2(p) = -p log2 p - (1-p) log2(1-p), with the
// convention 0 log2 0 = 0.
inline double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::domain_error("binary_entropy: p must lie in [0, 1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

// Inverse of H2 on [0, 0.5]. H2 is strictly increasing there, so plain
// bisection is unconditionally robust (its derivative diverges at 0, which
// rules out Newton). Runs to full double resolution, well inside the 1e-12
// absolute tolerance required of it.
inline double inverse_binary_entropy(double h) {
    if (!(h >= 0.0 && h <= 1.0))
        throw std::domain_error("inverse_binary_entropy: h must lie in [0, 1]");
    if (h == 0.0) return 0.0;
    if (h >= 1.0) return 0.5;
    double lo = 0.0, hi = 0.5;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;  // interval is one ulp wide
        if (binary_entropy(mid) < h)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

namespace detail {
inline double check_eps(double eps, const char* who) {
    // eps = 1 is admitted so callers can express the zero-fluctuation limit
    // (ln 1 = 0) used by the soundness checks.
    if (!(eps > 0.0 && eps <= 1.0))
        throw std::domain_error(std::string(who) + ": eps must lie in (0, 1]");
    return std::log(1.0 / eps);
}
}  // namespace detail

// Hoeffding deviation delta(x, eps) = sqrt(x ln(1/eps) / 2).
inline double hoeffding_delta(double x, double eps) {
    if (!(x >= 0.0))
        throw std::domain_error("hoeffding_delta: x must be nonnegative");
    return std::sqrt(x * detail::check_eps(eps, "hoeffding_delta") / 2.0);
}

enum class Tail { lower, upper };

// x -> x -+ delta(x, eps). Lower fluctuations clamp at zero: counts cannot
// be negative.
inline double fluctuate(double x, double eps, Tail tail) {
    const double d = hoeffding_delta(x, eps);
    return tail == Tail::lower ? std::max(x - d, 0.0) : x + d;
}

// Serfling deviation for estimating a sample of size x drawn alongside a
// reference sample of size y: Upsilon(x, y, eps) =
// sqrt((x+1)(x+y) ln(1/eps) / (2y)).
inline double serfling_upsilon(double x, double y, double eps) {
    if (!(x >= 0.0))
        throw std::domain_error("serfling_upsilon: x must be nonnegative");
    if (!(y > 0.0))
        throw std::domain_error("serfling_upsilon: y must be positive");
    return std::sqrt((x + 1.0) * (x + y) * detail::check_eps(eps, "serfling_upsilon") / (2.0 * y));
}

// Serfling deviation for a size-y subsample of a size-x population:
// Lambda(x, y, eps) = sqrt((x-y+1) y ln(1/eps) / (2x)).
inline double serfling_lambda(double x, double y, double eps) {
    if (!(x > 0.0))
        throw std::domain_error("serfling_lambda: x must be positive");
    if (!(y >= 0.0 && y <= x))
        throw std::domain_error("serfling_lambda: y must lie in [0, x]");
    return std::sqrt((x - y + 1.0) * y * detail::check_eps(eps, "serfling_lambda") / (2.0 * x));
}

}  // namespace tfqds
