#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "error.hpp"

namespace fractrace {

inline constexpr double pi = std::numbers::pi;

// ln Γ(x) for x > 0. Boost's implementation is reentrant, unlike glibc's
// lgamma which writes the global signgam.
inline double log_gamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw regime_error("log_gamma: argument must be positive and finite, got " + std::to_string(x));
    return boost::math::lgamma(x);
}

// Γ(a)/Γ(b) as a log-gamma difference.
inline double gamma_ratio(double a, double b) { return std::exp(log_gamma(a) - log_gamma(b)); }

inline double log_gamma_ratio(double a, double b) { return log_gamma(a) - log_gamma(b); }

// Surface area of the unit sphere S^{n-1} in R^n (counting measure on S^0, so 2).
inline double sphere_area(int n) {
    return 2.0 * std::pow(pi, 0.5 * n) / std::exp(log_gamma(0.5 * n));
}

// Finite positive value or a regime error carrying the formula name.
inline double checked_positive(double v, const char* what) {
    if (!std::isfinite(v) || !(v > 0.0))
        throw divergence_error(std::string(what) + ": value is not finite and positive");
    return v;
}

} // namespace fractrace
