#pragma once

#include <cmath>
#include <limits>

#include "kgflrw/errors.hpp"

namespace kgflrw {

// Brent's method on a sign-changing bracket [a,b].
template <class F>
double brent(F&& f, double a, double b, double xtol = 1e-14, int max_iter = 200) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw domain_error("brent: root not bracketed");
    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 0; it < max_iter; ++it) {
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::fabs(b) + 0.5 * xtol;
        const double xm = 0.5 * (c - b);
        if (std::fabs(xm) <= tol1 || fb == 0.0) return b;
        if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::fabs(p);
            if (2.0 * p < std::fmin(3.0 * xm * q - std::fabs(tol1 * q), std::fabs(e * q))) {
                e = d; d = p / q;
            } else {
                d = xm; e = d;
            }
        } else {
            d = xm; e = d;
        }
        a = b; fa = fb;
        b += (std::fabs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
        fb = f(b);
        if ((fb > 0.0) == (fc > 0.0)) { c = a; fc = fa; d = b - a; e = d; }
    }
    return b;
}

// Least-squares line fit y ~ slope*x + intercept.
struct line_fit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
};

template <class XIt, class YIt>
line_fit fit_line(XIt xb, XIt xe, YIt yb) {
    line_fit out;
    std::size_t n = static_cast<std::size_t>(xe - xb);
    if (n < 2) throw domain_error("fit_line: need at least two points");
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) { sx += xb[i]; sy += yb[i]; }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xb[i] - mx) * (xb[i] - mx);
        sxy += (xb[i] - mx) * (yb[i] - my);
    }
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = yb[i] - (out.slope * xb[i] + out.intercept);
        ss += r * r;
    }
    out.rms_residual = std::sqrt(ss / n);
    return out;
}

// Aitken extrapolation of a (roughly geometric) convergent sequence; returns
// the extrapolated limit and an error estimate from the last correction.
struct sequence_limit {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = false;
};

inline sequence_limit aitken_limit(const std::vector<double>& s, double tol_rel) {
    sequence_limit out;
    if (s.size() < 3) {
        out.value = s.empty() ? 0.0 : s.back();
        out.error_estimate = std::numeric_limits<double>::infinity();
        return out;
    }
    double best = s.back();
    const std::size_t n = s.size();
    const double d1 = s[n - 1] - s[n - 2];
    const double d0 = s[n - 2] - s[n - 3];
    const double denom = d1 - d0;
    if (denom != 0.0 && std::fabs(d1) < std::fabs(d0)) {
        best = s[n - 1] - d1 * d1 / denom;
    }
    out.value = best;
    out.error_estimate = std::fabs(s[n - 1] - best) + std::fabs(d1);
    out.converged = std::fabs(d1) <= tol_rel * (1.0 + std::fabs(best));
    return out;
}

} // namespace kgflrw
