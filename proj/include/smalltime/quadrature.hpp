#pragma once

#include <cmath>
#include <cstddef>

#include "smalltime/errors.hpp"

// Adaptive Simpson integration with the standard Richardson correction:
// an interval is accepted when |S(left)+S(right)-S(whole)| <= 15 * tol,
// and the accepted value gets the (S2-S1)/15 extrapolation term. Tolerance
// is absolute and is split across subintervals, so the final error estimate
// is a conservative bound for the whole integral.

namespace smalltime::quad {

struct Result {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
};

namespace detail {

inline double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
void adapt(F& f, double a, double b, double fa, double fm, double fb, double whole,
           double tol, int depth, Result& out) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    out.evaluations += 2;

    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    const double delta = left + right - whole;

    if (depth <= 0) throw QuadratureFailure("adaptive Simpson: depth limit before tolerance");

    if (std::fabs(delta) <= 15.0 * tol) {
        out.value += left + right + delta / 15.0;
        out.error_estimate += std::fabs(delta) / 15.0;
        return;
    }
    adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, out);
    adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, out);
}

} // namespace detail

template <class F>
Result adaptive_simpson(F f, double a, double b, double tol, int max_depth = 60) {
    Result out;
    if (a == b) return out;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    out.evaluations = 3;
    const double whole = detail::simpson(a, b, fa, fm, fb);
    detail::adapt(f, a, b, fa, fm, fb, whole, tol, max_depth, out);
    return out;
}

} // namespace smalltime::quad
