#pragma once

#include <cmath>
#include <vector>

#include "kgflrw/errors.hpp"
#include "kgflrw/ode.hpp"
#include "kgflrw/rootfind.hpp"
#include "kgflrw/specfun.hpp"

namespace kgflrw {

// subcritical weight nu = (d + 3 - p(d-1))/2 of the damped nonlinearity
inline double subcritical_nu(int d, double p) {
    if (d < 3) throw domain_error("dimension must be >= 3");
    if (!(p >= 1.0 && p <= static_cast<double>(d) / (d - 2.0)))
        throw supercritical_exponent("exponent must satisfy 1 <= p <= d/(d-2)");
    const double nu = 0.5 * (d + 3.0 - p * (d - 1.0));
    return nu;
}

// The homogeneous quartic-oscillator mode phi'' + phi + phi^3 = 0 with
// phi(0) = phi0, phi'(0) = 0:
//   phi(tau) = phi0 cn(omega tau, k), omega = sqrt(1 + phi0^2),
//   k^2 = phi0^2 / (2 (1 + phi0^2)),
// so the period is T = 4 K(k) / omega. (The energy integral
// T = 4 int_0^{phi0} dphi / sqrt((phi0^2-phi^2)(1 + (phi0^2+phi^2)/2))
// fixes the frequency normalization.)
inline double duffing_frequency(double phi0) { return std::sqrt(1.0 + phi0 * phi0); }

inline double duffing_modulus(double phi0) {
    return std::fabs(phi0) / std::sqrt(2.0 * (1.0 + phi0 * phi0));
}

inline double duffing_period(double phi0) {
    if (phi0 == 0.0) throw domain_error("period is defined for phi0 != 0");
    return 4.0 * elliptic_K(duffing_modulus(phi0)) / duffing_frequency(phi0);
}

inline double duffing_closed_form(double phi0, double tau) {
    return phi0 * jacobi_cn(duffing_frequency(phi0) * tau, duffing_modulus(phi0));
}

inline double duffing_energy(double phi, double dphi) {
    return 0.5 * dphi * dphi + 0.5 * phi * phi + 0.25 * phi * phi * phi * phi;
}

struct duffing_trajectory {
    std::vector<double> tau, phi, dphi;
    double energy_drift = 0.0;
};

namespace detail {

inline void duffing_rhs(double, const std::array<double, 2>& y, std::array<double, 2>& dy) {
    dy[0] = y[1];
    dy[1] = -y[0] - y[0] * y[0] * y[0];
}

} // namespace detail

// period by dense-output root polishing of the fourth zero of phi'
inline double duffing_period_numeric(double phi0, double rtol = 1e-12) {
    if (phi0 == 0.0) throw domain_error("period is defined for phi0 != 0");
    ode_options oo;
    oo.rtol = rtol;
    oo.atol = 1e-14;
    const double horizon = 2.5 * duffing_period(phi0) + 1.0;
    std::array<double, 2> y{phi0, 0.0};
    double t_prev = 0.0, v_prev = 0.0;
    int crossings = 0;
    double fourth = -1.0;
    dopri5<2, void (*)(double, const std::array<double, 2>&, std::array<double, 2>&)> solver(
        detail::duffing_rhs, oo);
    solver.integrate(0.0, y, horizon,
                     [&](double t, const std::array<double, 2>& yy, const dense_step<2>& ds) {
                         const double v = yy[1];
                         if (fourth < 0.0 && t_prev > 0.0 && v_prev != 0.0 &&
                             ((v_prev < 0.0 && v >= 0.0) || (v_prev > 0.0 && v <= 0.0))) {
                             ++crossings;
                             if (crossings == 4) {
                                 fourth = brent(
                                     [&ds](double tt) { return ds.eval(tt)[1]; }, ds.t0,
                                     ds.t0 + ds.h, 1e-15);
                             }
                         }
                         t_prev = t;
                         v_prev = v;
                     });
    if (fourth < 0.0) throw no_convergence("fourth derivative zero not found inside the horizon");
    return fourth / 2.0;
}

// dense trajectory sampled on a uniform grid, plus the energy drift
inline duffing_trajectory duffing_evolve(double phi0, double tau_max, std::size_t samples,
                                         double rtol = 1e-12) {
    duffing_trajectory out;
    ode_options oo;
    oo.rtol = rtol;
    oo.atol = 1e-14;
    const double E0 = duffing_energy(phi0, 0.0);
    std::array<double, 2> y{phi0, 0.0};
    double next = 0.0;
    const double dt = tau_max / static_cast<double>(samples - 1);
    out.tau.push_back(0.0);
    out.phi.push_back(phi0);
    out.dphi.push_back(0.0);
    next = dt;
    dopri5<2, void (*)(double, const std::array<double, 2>&, std::array<double, 2>&)> solver(
        detail::duffing_rhs, oo);
    solver.integrate(0.0, y, tau_max,
                     [&](double t, const std::array<double, 2>& yy, const dense_step<2>& ds) {
                         while (next <= t + 1e-15 && out.tau.size() < samples) {
                             const auto s = ds.eval(next);
                             out.tau.push_back(next);
                             out.phi.push_back(s[0]);
                             out.dphi.push_back(s[1]);
                             next += dt;
                         }
                         out.energy_drift = std::fmax(
                             out.energy_drift,
                             std::fabs(duffing_energy(yy[0], yy[1]) / E0 - 1.0));
                     });
    return out;
}

} // namespace kgflrw
