#pragma once

#include <cmath>
#include <vector>

#include "kgflrw/dynamics.hpp"
#include "kgflrw/errors.hpp"

namespace kgflrw {

// Fundamental pair of psi'' + lambda^2 psi + q (tau_p - tau)^{-2} psi = 0 on
// [0, tau_p): R0 has unit value, R1 unit slope at tau = 0. Evaluated by
// direct high-accuracy integration (the inverse-square endpoint makes the
// solutions oscillate in ln(tau_p - tau) and vanish like sqrt(tau_p - tau)).
struct riemann_eval {
    double R0 = 0, R1 = 0, dR0 = 0, dR1 = 0;
    double wronskian() const { return R0 * dR1 - R1 * dR0; }
};

inline synthetic_mode_system make_inverse_square_system(double lambda, double q, double tau_p,
                                                        solver_options opts = {}) {
    synthetic_mode_system sys(
        [q, tau_p](double tau) {
            const double s = tau_p - tau;
            return q / (s * s);
        },
        -1e300, tau_p, false, true, lambda * lambda, opts);
    sys.set_V_sigma([q](side, double sig) { return q / (sig * sig); });
    return sys;
}

inline riemann_eval riemann_functions(double lambda, double q, double tau, double tau_p,
                                      solver_options opts = {}) {
    if (!(q > 0.25)) throw precondition_violated("riemann functions require q > 1/4");
    if (!(lambda > 0.0)) throw domain_error("lambda must be positive");
    if (!(tau >= 0.0 && tau < tau_p)) throw domain_error("tau must lie in [0, tau_p)");
    opts.rtol = std::fmin(opts.rtol, 1e-12);
    opts.atol = std::fmin(opts.atol, 1e-14);
    const auto sys = make_inverse_square_system(lambda, q, tau_p, opts);
    mode_state r0, r1;
    r0.mu = r1.mu = lambda * lambda;
    r0.psi = 1.0;
    r0.dpsi = 0.0;
    r1.psi = 0.0;
    r1.dpsi = 1.0;
    riemann_eval out;
    if (tau > 0.0) {
        r0 = sys.evolve_to_sigma(r0, side::future, tau_p - tau);
        r1 = sys.evolve_to_sigma(r1, side::future, tau_p - tau);
    }
    out.R0 = r0.psi.real();
    out.dR0 = r0.dpsi.real();
    out.R1 = r1.psi.real();
    out.dR1 = r1.dpsi.real();
    return out;
}

// Empirical constants of the two-region bounds
//   inner  [0, tau_lambda]:        |R_k| + |dR_k|/lambda      <= C lambda^{-k}
//   outer  [tau_lambda, tau_p):   |R_k| + (tau_p - tau)|dR_k| <= C lambda^{1/2-k} sqrt(tau_p - tau)
// with tau_lambda = (1 - M/lambda) tau_p.
struct riemann_bound_report {
    struct per_lambda {
        double lambda = 0;
        double C_inner[2] = {0, 0};
        double C_outer[2] = {0, 0};
        double C_max = 0;
    };
    std::vector<per_lambda> rows;
    double stability = 0.0; // max/min of C_max across the lambda grid
    bool stable = false;
};

inline riemann_bound_report verify_riemann_bounds(double q, double M,
                                                  const std::vector<double>& lambda_grid,
                                                  double tau_p, double sigma_inner = 1e-6,
                                                  double stability_limit = 3.0,
                                                  solver_options opts = {}) {
    if (!(q > 0.25)) throw precondition_violated("riemann bounds require q > 1/4");
    opts.rtol = std::fmin(opts.rtol, 1e-12);
    opts.atol = std::fmin(opts.atol, 1e-14);
    riemann_bound_report rep;
    for (double lambda : lambda_grid) {
        if (!(lambda >= M)) throw domain_error("lambda grid must satisfy lambda >= M");
        const double tau_l = (1.0 - M / lambda) * tau_p;
        const auto sys = make_inverse_square_system(lambda, q, tau_p, opts);
        riemann_bound_report::per_lambda row;
        row.lambda = lambda;
        for (int k = 0; k < 2; ++k) {
            mode_state s;
            s.mu = lambda * lambda;
            s.psi = (k == 0) ? 1.0 : 0.0;
            s.dpsi = (k == 0) ? 0.0 : 1.0;
            double ci = 0.0, co = 0.0;
            auto watch = [&](const mode_state& st) {
                const double sig = tau_p - st.tau;
                if (st.tau <= tau_l) {
                    const double v = std::abs(st.psi) + std::abs(st.dpsi) / lambda;
                    ci = std::fmax(ci, v * std::pow(lambda, k));
                } else {
                    const double v = std::abs(st.psi) + sig * std::abs(st.dpsi);
                    co = std::fmax(co, v * std::pow(lambda, k - 0.5) / std::sqrt(sig));
                }
            };
            watch(s);
            if (tau_l > 0.0) s = sys.evolve_observed(s, tau_l, watch);
            // descend through the outer region on a step-capped sigma leg
            sys.evolve_to_sigma_observed(s, side::future, sigma_inner, watch);
            row.C_inner[k] = ci;
            row.C_outer[k] = co;
            row.C_max = std::fmax(row.C_max, std::fmax(ci, co));
        }
        rep.rows.push_back(row);
    }
    double cmin = std::numeric_limits<double>::infinity(), cmax = 0.0;
    for (const auto& r : rep.rows) {
        cmin = std::fmin(cmin, r.C_max);
        cmax = std::fmax(cmax, r.C_max);
    }
    rep.stability = cmax / cmin;
    rep.stable = rep.stability <= stability_limit;
    return rep;
}

} // namespace kgflrw
