#pragma once

#include <cmath>
#include <limits>

#include "kgflrw/errors.hpp"

namespace kgflrw {

struct bessel_eval {
    double order = 0;
    double argument = 0;
    double J = 0, Y = 0, dJ = 0, dY = 0;
};

namespace detail {

inline constexpr double euler_gamma = 0.57721566490153286060651209;
inline constexpr double pi = 3.14159265358979323846264338;

// Power series, accumulated in long double. Cancellation limits x to the
// lower range; the switch point below is set where series and asymptotic
// branch agree to ~1e-13 (seam checked in the test suite).
inline constexpr double bessel_x_switch = 18.0;

inline long double j_series(double nu, double x) {
    const long double xh = 0.5L * (long double)x;
    const long double x2 = -xh * xh;
    long double term = std::pow(xh, (long double)nu) / std::tgamma((long double)nu + 1.0L);
    long double sum = term;
    for (int k = 1; k < 400; ++k) {
        term *= x2 / ((long double)k * ((long double)k + (long double)nu));
        sum += term;
        if (std::fabs((double)term) < 1e-20L * (1.0L + std::fabs((double)sum))) break;
    }
    return sum;
}

// Y_n for integer n >= 0 by the logarithmic series (NIST 10.8.1).
inline long double y_series_int(int n, double x) {
    const long double xh = 0.5L * (long double)x;
    const long double lg = std::log(xh);
    long double sum = 0.0L;

    // finite sum with negative powers: sum_k (n-k-1)!/k! (x^2/4)^k
    if (n > 0) {
        long double pref = std::pow(xh, (long double)(-n));
        long double x2 = xh * xh;
        long double fnk = 1.0L;
        for (int j = 1; j <= n - 1; ++j) fnk *= j; // (n-1)!
        long double kfac = 1.0L;
        long double pw = 1.0L;
        long double s = 0.0L;
        for (int k = 0; k <= n - 1; ++k) {
            s += fnk / kfac * pw;
            pw *= x2;
            kfac *= (k + 1);
            if (n - k - 2 >= 1) fnk /= (n - k - 1); else fnk = 1.0L;
        }
        sum -= pref * s / pi;
    }

    sum += (2.0L / pi) * (lg + euler_gamma) * j_series(n, x);

    // the psi-weighted ascending series; psi(k+1) = -gamma + h_k absorbed above
    long double x2 = -xh * xh;
    long double hk = 0.0L, hnk = 0.0L;
    for (int j = 1; j <= n; ++j) hnk += 1.0L / j;
    long double kfac = 1.0L, nkfac = 1.0L;
    for (int j = 1; j <= n; ++j) nkfac *= j;
    long double pw = std::pow(xh, (long double)n);
    long double s2 = (hk + hnk) / (kfac * nkfac) * pw;
    long double pwk = pw;
    for (int k = 1; k < 400; ++k) {
        pwk *= x2;
        kfac *= k;
        nkfac *= (n + k);
        hk += 1.0L / k;
        hnk += 1.0L / (n + k);
        const long double term = (hk + hnk) / (kfac * nkfac) * pwk;
        s2 += term;
        if (std::fabs((double)term) < 1e-20L * (1.0L + std::fabs((double)s2))) break;
    }
    sum -= s2 / pi;
    return sum;
}

// Hankel asymptotic expansion, valid for x >~ 18: optimally truncated error
// is below 1e-15 there.
inline void jy_asymptotic(double nu, double x, double& J, double& Y) {
    const double mu = 4.0 * nu * nu;
    double P = 1.0, Q = 0.0;
    double ak = 1.0;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 60; ++k) {
        ak *= (mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * k * x);
        const double mag = std::fabs(ak);
        if (mag > prev) break; // divergent tail reached
        prev = mag;
        switch (k % 4) {
            case 1: Q += ak; break;
            case 2: P -= ak; break;
            case 3: Q -= ak; break;
            case 0: P += ak; break;
        }
        if (mag < 1e-18) break;
    }
    const double chi = x - (0.5 * nu + 0.25) * pi;
    const double c = std::cos(chi), s = std::sin(chi);
    const double f = std::sqrt(2.0 / (pi * x));
    J = f * (P * c - Q * s);
    Y = f * (P * s + Q * c);
}

inline double j_value(double nu, double x) {
    if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
    if (x <= bessel_x_switch) return (double)j_series(nu, x);
    double J, Y;
    jy_asymptotic(nu, x, J, Y);
    return J;
}

inline double y_value(double nu, double x) {
    if (x <= 0.0) throw domain_error("Y_nu requires x > 0");
    if (x > bessel_x_switch) {
        double J, Y;
        jy_asymptotic(nu, x, J, Y);
        return Y;
    }
    const double nr = std::round(nu);
    if (std::fabs(nu - nr) < 1e-12) return (double)y_series_int((int)nr, x);
    // connection formula (accuracy degrades near integer orders)
    const double s = std::sin(nu * pi);
    return ((double)j_series(nu, x) * std::cos(nu * pi) - (double)j_series(-nu, x)) / s;
}

} // namespace detail

// J_nu and Y_nu with derivatives, nu >= 0 real. Series below the switch
// point, Hankel expansion above; integer orders use the logarithmic Y series.
inline bessel_eval bessel_jy(double order, double x) {
    if (order < 0.0) throw domain_error("bessel_jy requires order >= 0");
    if (x < 0.0) throw domain_error("bessel_jy requires x >= 0");
    bessel_eval out;
    out.order = order;
    out.argument = x;
    out.J = detail::j_value(order, x);
    if (x == 0.0) {
        // J only; Y diverges at 0
        out.dJ = (order == 1.0) ? 0.5 : (order == 0.0 ? 0.0 : (order < 1.0 ? std::numeric_limits<double>::infinity() : 0.0));
        out.Y = out.dY = -std::numeric_limits<double>::infinity();
        return out;
    }
    out.Y = detail::y_value(order, x);
    // Z'_nu = (nu/x) Z_nu - Z_{nu+1}
    const double Jp1 = detail::j_value(order + 1.0, x);
    const double Yp1 = detail::y_value(order + 1.0, x);
    out.dJ = (order / x) * out.J - Jp1;
    out.dY = (order / x) * out.Y - Yp1;
    return out;
}

inline double bessel_j(double order, double x) { return detail::j_value(order, x); }
inline double bessel_y(double order, double x) { return detail::y_value(order, x); }

// Complete elliptic integral of the first kind, modulus k in [0,1);
// arithmetic-geometric mean iteration.
inline double elliptic_K(double k) {
    if (!(k >= 0.0 && k < 1.0)) throw domain_error("elliptic_K requires 0 <= k < 1");
    double a = 1.0, b = std::sqrt(1.0 - k * k);
    for (int i = 0; i < 64 && std::fabs(a - b) > 1e-17 * a; ++i) {
        const double an = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = an;
    }
    return detail::pi / (2.0 * a);
}

// Jacobi cn(z, k), modulus convention (k, not m=k^2); descending Landen /
// AGM with backward angle recovery.
inline double jacobi_cn(double z, double k) {
    if (!(k >= 0.0 && k < 1.0)) throw domain_error("jacobi_cn requires 0 <= k < 1");
    if (k == 0.0) return std::cos(z);
    if (z == 0.0) return 1.0;
    // reduce large arguments by the full period to keep the AGM phase small
    const double K = elliptic_K(k);
    double zr = std::remainder(z, 4.0 * K);

    double a[64], c[64];
    double an = 1.0, bn = std::sqrt(1.0 - k * k), cn_ = k;
    int n = 0;
    for (; n < 62; ++n) {
        a[n] = an;
        c[n] = cn_;
        if (std::fabs(cn_) < 1e-17 * an) break;
        const double a1 = 0.5 * (an + bn);
        cn_ = 0.5 * (an - bn);
        bn = std::sqrt(an * bn);
        an = a1;
    }
    a[n] = an;
    c[n] = cn_;
    double phi = std::ldexp(1.0, n) * an * zr;
    for (int i = n; i >= 1; --i)
        phi = 0.5 * (phi + std::asin(std::fmax(-1.0, std::fmin(1.0, c[i] / a[i] * std::sin(phi)))));
    return std::cos(phi);
}

} // namespace kgflrw
