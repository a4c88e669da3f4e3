#pragma once

#include <cmath>
#include <utility>

#include "roq/errors.hpp"

namespace roq::envmath {

// Threshold constants of the iterated-logarithm envelope.
inline const double kExpE = std::exp(std::exp(1.0));    // e^e  ~ 15.1543
inline const double kExp2E = std::exp(2.0 * std::exp(1.0)); // e^{2e} ~ 229.92

/// LIL envelope function: sqrt(x ln ln x) for x >= e^e, 1 below.
/// The jump at x = e^e (1 -> e^{e/2}) is intentional; the branch point
/// itself belongs to the sqrt branch.
inline double phi(double x) {
    if (x >= kExpE) {
        return std::sqrt(x * std::log(std::log(x)));
    }
    return 1.0;
}

inline double lnln(double x) { return std::log(std::log(x)); }

/// Drift-plus-fluctuation curve U(x) = -a*x + 2*b*phi(x) + c.
/// a: drift per unit, b: fluctuation coefficient, c: offset.
struct UShape {
    double a = 1.0;
    double b = 1.0;
    double c = 0.0;

    void validate() const {
        if (!(a > 0.0) || !(b > 0.0) || !(c >= 0.0)) {
            fail_precondition("InvalidShape", "require a > 0, b > 0, c >= 0");
        }
    }

    // b/a >= e^{2e}; gates every closed-form result below.
    bool ratio_ok() const { return b / a >= kExp2E; }
};

inline double u_value(const UShape& s, double x) {
    return -s.a * x + 2.0 * s.b * phi(x) + s.c;
}

// Derivative of U on the x > e^e branch.
inline double u_derivative(const UShape& s, double x) {
    const double ll = std::log(std::log(x));
    return -s.a + s.b * std::sqrt(ll / x) + s.b / (std::log(x) * std::sqrt(x * ll));
}

struct NumericMax {
    double x_star = 0.0;
    double value = 0.0;
};

/// Numeric oracle for the supremum of U over [0, search_cap].
/// The x < e^e regime is linear and decreasing (max at 0); the x >= e^e
/// regime is strictly concave and solved by golden-section search.
NumericMax u_numeric_max(const UShape& shape, double search_cap);

/// Closed-form supremum bound 7*(b^2/a)*lnln(b/a) + c; needs ratio_ok.
double umax_bound(const UShape& shape);

/// Returns (18 b^2/a^2) * lnln(3b/a); U is strictly negative above it.
/// Needs ratio_ok and e^e > (c/b)^2.
double negativity_threshold(const UShape& shape);

/// Analytic bracket [alpha^2 lnln alpha, 4 alpha^2 lnln alpha], alpha = b/a,
/// containing the stationary point of the concave branch when it exists.
/// Independent of c.
std::pair<double, double> bracket_xstar(const UShape& shape);

} // namespace roq::envmath
