#include "roq/envelope_math.hpp"

#include <cmath>

namespace roq::envmath {

namespace {

// Golden-section maximization of U on [lo, hi]; U is strictly concave
// there, so the unique maximum (possibly at an endpoint) is found to
// relative tolerance rel_tol on x.
NumericMax golden_section_max(const UShape& s, double lo, double hi, double rel_tol) {
    static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = u_value(s, x1);
    double f2 = u_value(s, x2);
    while (b - a > rel_tol * (std::abs(b) + 1.0)) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = u_value(s, x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = u_value(s, x1);
        }
    }
    const double xm = 0.5 * (a + b);
    return {xm, u_value(s, xm)};
}

} // namespace

NumericMax u_numeric_max(const UShape& shape, double search_cap) {
    shape.validate();
    if (!(search_cap > kExpE)) {
        fail_precondition("CapTooSmall", "search_cap must exceed e^e");
    }
    if (u_value(shape, search_cap) > 0.0 && u_derivative(shape, search_cap) > 0.0) {
        fail_precondition("CapTooSmall", "U still positive and increasing at search_cap");
    }

    // Linear regime [0, e^e): slope -a < 0, max at x = 0.
    NumericMax best{0.0, u_value(shape, 0.0)};

    // Concave regime [e^e, cap]. Includes the branch point x = e^e.
    NumericMax concave = golden_section_max(shape, kExpE, search_cap, 1e-10);
    if (concave.value > best.value) best = concave;
    return best;
}

double umax_bound(const UShape& shape) {
    shape.validate();
    if (!shape.ratio_ok()) {
        fail_precondition("RatioViolation", "b/a must be >= e^{2e}");
    }
    const double ratio = shape.b / shape.a;
    return 7.0 * (shape.b * shape.b / shape.a) * lnln(ratio) + shape.c;
}

double negativity_threshold(const UShape& shape) {
    shape.validate();
    if (!shape.ratio_ok()) {
        fail_precondition("RatioViolation", "b/a must be >= e^{2e}");
    }
    const double cb = shape.c / shape.b;
    if (!(kExpE > cb * cb)) {
        fail_precondition("OffsetTooLarge", "require e^e > (c/b)^2");
    }
    const double ba = shape.b / shape.a;
    return 18.0 * ba * ba * lnln(3.0 * ba);
}

std::pair<double, double> bracket_xstar(const UShape& shape) {
    shape.validate();
    if (!shape.ratio_ok()) {
        fail_precondition("RatioViolation", "b/a must be >= e^{2e}");
    }
    const double alpha = shape.b / shape.a;
    const double base = alpha * alpha * lnln(alpha);
    return {base, 4.0 * base};
}

} // namespace roq::envmath
