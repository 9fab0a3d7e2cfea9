#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "kgflrw/conformal_chart.hpp"
#include "kgflrw/errors.hpp"
#include "kgflrw/scale_factor.hpp"

namespace kgflrw {

// Coupling xi, dimension d, mass m. Conformal coupling xi = (d-1)/(4d) is a
// symbolic selection: the flag, not a floating comparison, drives the
// classification, and the curvature term is dropped exactly when it is set.
struct coupling_spec {
    double xi = 0.0;
    int d = 3;
    double m = 0.0;
    bool conformal = false;

    static double conformal_xi(int d) { return (d - 1.0) / (4.0 * d); }

    static coupling_spec conformal_coupling(int d, double m) {
        if (d < 3) throw domain_error("dimension must be >= 3");
        return {conformal_xi(d), d, m, true};
    }
    static coupling_spec with_xi(double xi, int d, double m) {
        if (d < 3) throw domain_error("dimension must be >= 3");
        return {xi, d, m, xi == conformal_xi(d)};
    }

    double xi_minus_conformal() const { return conformal ? 0.0 : xi - conformal_xi(d); }
};

// V(tau) = m^2 alpha^2 + (xi - (d-1)/4d) Q with
// Q = d(d-3)(alpha'/alpha)^2 + 2d alpha''/alpha. In terms of t-derivatives of
// the scale factor (alpha' = a' a, alpha'' = (a'' a + a'^2) a) this is the
// division-free form Q = d[(d-1) a'^2 + 2 a'' a], finite at crunch endpoints.
struct potential_terms {
    double V = 0.0;
    double dV = 0.0;  // d/dtau
    double d2V = 0.0; // d^2/dtau^2
};

namespace detail {

inline potential_terms potential_from_a(const coupling_spec& cp, double a, double a1, double a2,
                                        double a3, double a4) {
    const int d = cp.d;
    const double xc = cp.xi_minus_conformal();
    const double m2 = cp.m * cp.m;
    potential_terms out;
    const double Q = d * ((d - 1.0) * a1 * a1 + 2.0 * a2 * a);
    out.V = m2 * a * a + xc * Q;
    // d/dtau = a d/dt
    const double dQ_dt = 2.0 * d * (d * a1 * a2 + a3 * a);
    out.dV = a * (2.0 * m2 * a * a1 + xc * dQ_dt);
    const double d2Q_dt2 = 2.0 * d * (d * (a2 * a2 + a1 * a3) + a4 * a + a3 * a1);
    const double dV_dt = 2.0 * m2 * a * a1 + xc * dQ_dt;
    out.d2V = a * (a1 * dV_dt + a * (2.0 * m2 * (a1 * a1 + a * a2) + xc * d2Q_dt2));
    return out;
}

} // namespace detail

inline potential_terms potential_derivs_at_t(const conformal_chart& chart,
                                             const coupling_spec& cp, double t) {
    double a[5] = {0, 0, 0, 0, 0};
    chart.model().derivative_block(t, a);
    return detail::potential_from_a(cp, a[0], a[1], a[2], a[3], a[4]);
}

inline potential_terms potential_derivs_at_distance(const conformal_chart& chart,
                                                    const coupling_spec& cp, side s, double v) {
    double a[5] = {0, 0, 0, 0, 0};
    if (s == side::future)
        chart.model().derivative_block_from_plus(v, a);
    else
        chart.model().derivative_block_from_minus(v, a);
    return detail::potential_from_a(cp, a[0], a[1], a[2], a[3], a[4]);
}

inline double potential(const conformal_chart& chart, const coupling_spec& cp, double tau) {
    const double t = chart.invert(tau);
    return potential_derivs_at_t(chart, cp, t).V;
}

// R_g = R_gamma / a^2 + 2d a''/a + d(d-1) (a'/a)^2
inline double ricci_scalar_from(double a, double a1, double a2, int d, double R_gamma) {
    return R_gamma / (a * a) + 2.0 * d * a2 / a + d * (d - 1.0) * (a1 / a) * (a1 / a);
}

inline double ricci_scalar(const conformal_chart& chart, int d, double R_gamma, double tau) {
    const double t = chart.invert(tau);
    const auto& m = chart.model();
    return ricci_scalar_from(m.value(t), m.derivative(t, 1), m.derivative(t, 2), d, R_gamma);
}

// q = (xi - (d-1)/4d)(d+1-2/eta0) d eta0^2 / (1-eta0); the classification
// gate is q > 1/4. Note the sharp sigma^-2 coefficient of V carries one more
// factor 1/(1-eta0) (see predicted_V_asymptotics).
inline double q_coefficient(double eta0, double xi, int d) {
    if (eta0 == 0.0 || eta0 == 1.0)
        throw degenerate_exponent("q is undefined for eta0 in {0, 1}");
    const double xc = xi - coupling_spec::conformal_xi(d);
    return xc * (d + 1.0 - 2.0 / eta0) * d * eta0 * eta0 / (1.0 - eta0);
}

enum class singularity_class {
    c1_big_crunch,
    c0_big_crunch,
    sudden_singularity,
    big_brake,
    slow_big_rip,
    strong_big_rip,
};

inline const char* to_string(singularity_class c) {
    switch (c) {
        case singularity_class::c1_big_crunch: return "C1BigCrunch";
        case singularity_class::c0_big_crunch: return "C0BigCrunch";
        case singularity_class::sudden_singularity: return "SuddenSingularity";
        case singularity_class::big_brake: return "BigBrake";
        case singularity_class::slow_big_rip: return "SlowBigRip";
        case singularity_class::strong_big_rip: return "StrongBigRip";
    }
    return "?";
}

struct regime_report {
    side which = side::future;
    singularity_class cls = singularity_class::c0_big_crunch;
    bool needs_infrared_cutoff = false;
    bool phi0_exists = false;
    bool phi1_exists = false;
    bool phi0_is_zero = false;
    bool w_isomorphism = false;
    bool tau_endpoint_finite = true;
    double V_limit = 0.0;
    bool has_V_singular_exponent = false;
    double V_singular_exponent = 0.0; // power of sigma (finite endpoint) or tau (infinite)
    bool has_q = false;
    double q = 0.0;
    bool condichi_applicable = false;
    bool condichi_holds = false;
    std::string table_row;
};

namespace detail {

struct classify_row {
    const char* name;
    bool conformal;       // which coupling the row covers
    double e0_lo, e0_hi;  // eta0 range
    bool lo_closed, hi_closed;
    int eta1_req;        // 0: any, 1: eta1 > 1, 2: eta1 in (0,1)
    bool requires_condichi;
    bool cutoff, phi0, phi1, phi0_zero;
};

inline constexpr double inf = std::numeric_limits<double>::infinity();

// Existence table for (cutoff, phi0, phi1); one row per regime.
inline constexpr classify_row classification_table[] = {
    {"conformal C1 crunch",      true,  1.0,  inf, true,  false, 0, false, true,  true,  true,  false},
    {"conformal C0 crunch",      true,  0.0,  1.0, false, false, 0, false, false, true,  true,  false},
    {"conformal sudden",         true,  0.0,  0.0, true,  true,  0, false, false, true,  true,  false},
    {"conformal slow rip",       true, -1.0,  0.0, false, false, 0, false, false, true,  true,  false},
    {"conformal strong rip",     true, -inf, -1.0, false, true,  0, false, false, true,  false, false},
    {"nonconformal C1 crunch",   false, 1.0,  inf, true,  false, 0, false, true,  true,  true,  false},
    {"nonconformal C0 crunch",   false, 0.0,  1.0, false, false, 0, true,  false, true,  false, true},
    {"nonconformal big brake",   false, 0.0,  0.0, true,  true,  1, false, false, true,  true,  false},
    {"nonconformal sudden",      false, 0.0,  0.0, true,  true,  2, false, false, true,  false, false},
    {"nonconformal rip",         false, -inf, 0.0, false, false, 0, true,  false, true,  false, true},
};

inline bool row_matches(const classify_row& r, bool conformal, double e0, double e1) {
    if (r.conformal != conformal) return false;
    if (r.lo_closed ? !(e0 >= r.e0_lo) : !(e0 > r.e0_lo)) return false;
    if (r.hi_closed ? !(e0 <= r.e0_hi) : !(e0 < r.e0_hi)) return false;
    if (r.eta1_req == 1 && !(e1 > 1.0)) return false;
    if (r.eta1_req == 2 && !(e1 > 0.0 && e1 < 1.0)) return false;
    return true;
}

} // namespace detail

inline regime_report classify(const scale_factor_model& model, const coupling_spec& cp, side s) {
    if (!model.side_singular(s))
        throw no_singularity_on_side("classify requires a singular endpoint on the chosen side");
    const power_pair eff = model.effective(s);
    const double e0 = eff.eta0;
    const double e1 = eff.eta1;
    const bool has_correction = eff.c1 != 0.0;

    if (e0 == 0.0 && has_correction && e1 == std::floor(e1) && e1 >= 0.0)
        throw unclassified_regime("eta0 = 0 with integer eta1 is a smooth endpoint, not a "
                                  "singularity");

    regime_report rep;
    rep.which = s;
    rep.tau_endpoint_finite = e0 < 1.0;

    // condichi gate for the non-conformal eta0 not in {0, 1} rows
    if (!cp.conformal && e0 != 0.0 && e0 != 1.0 && e0 < 1.0) {
        rep.has_q = true;
        rep.q = q_coefficient(e0, cp.xi, cp.d);
        rep.condichi_applicable = true;
        rep.condichi_holds = rep.q > 0.25;
    }

    const detail::classify_row* hit = nullptr;
    for (const auto& r : detail::classification_table) {
        if (!detail::row_matches(r, cp.conformal, e0, e1)) continue;
        if (r.requires_condichi && !rep.condichi_holds) {
            throw unclassified_regime(
                std::string("no table row applies: eta0 = ") + std::to_string(e0) +
                " with q = " + std::to_string(rep.q) +
                " <= 1/4 (the barrier condition fails; the xi = 0, d = 3 window is the open "
                "silent-singularity case)");
        }
        hit = &r;
        break;
    }
    if (!hit) throw unclassified_regime("parameters fall outside every classification row");

    rep.table_row = hit->name;
    rep.needs_infrared_cutoff = hit->cutoff;
    rep.phi0_exists = hit->phi0;
    rep.phi1_exists = hit->phi1;
    rep.phi0_is_zero = hit->phi0_zero;
    rep.w_isomorphism = rep.phi0_exists && rep.phi1_exists;

    // singularity class name
    if (e0 >= 1.0) rep.cls = singularity_class::c1_big_crunch;
    else if (e0 > 0.0) rep.cls = singularity_class::c0_big_crunch;
    else if (e0 == 0.0)
        rep.cls = (eff.c1 > 0.0 && e1 > 1.0) ? singularity_class::big_brake
                                             : singularity_class::sudden_singularity;
    else if (e0 > -1.0) rep.cls = singularity_class::slow_big_rip;
    else rep.cls = singularity_class::strong_big_rip;

    // potential limit and sharp approach exponent
    const double m2 = cp.m * cp.m;
    const double xc = cp.xi_minus_conformal();
    const double r_exp = e0 / (1.0 - e0); // alpha ~ sigma^r or tau^r
    if (cp.conformal) {
        if (e0 == 0.0) {
            rep.V_limit = m2 * eff.c0 * eff.c0;
            rep.has_V_singular_exponent = false;
        } else if (e0 == 1.0) {
            rep.V_limit = 0.0;
            rep.has_V_singular_exponent = false; // exponential approach
        } else {
            rep.has_V_singular_exponent = true;
            rep.V_singular_exponent = 2.0 * r_exp;
            rep.V_limit = (e0 > 0.0) ? 0.0 : detail::inf;
        }
    } else {
        if (e0 == 0.0) {
            const double corr = xc * 2.0 * cp.d * e1 * (e1 - 1.0) * std::pow(eff.c0, e1 - 1.0) * eff.c1;
            if (e1 < 2.0 && corr != 0.0) {
                rep.V_limit = corr > 0.0 ? detail::inf : -detail::inf;
                rep.has_V_singular_exponent = true;
                rep.V_singular_exponent = e1 - 2.0;
            } else {
                rep.V_limit = m2 * eff.c0 * eff.c0;
                rep.has_V_singular_exponent = false;
            }
        } else if (e0 == 1.0) {
            rep.V_limit = eff.c0 * eff.c0 * cp.d * (cp.d - 1.0) * xc;
            rep.has_V_singular_exponent = false;
        } else {
            // sharp sigma^-2 (or tau^-2) coefficient
            const double coeff =
                xc * cp.d * e0 * ((cp.d + 1.0) * e0 - 2.0) / ((1.0 - e0) * (1.0 - e0));
            rep.has_V_singular_exponent = true;
            rep.V_singular_exponent = -2.0;
            if (coeff != 0.0 && e0 < 1.0)
                rep.V_limit = coeff > 0.0 ? detail::inf : -detail::inf;
            else
                rep.V_limit = 0.0; // eta0 > 1: V -> 0 like tau^-2
        }
    }
    return rep;
}

// Sharp asymptotics of V at the singular endpoint, per coupling.
struct v_asymptotics {
    double V_limit = 0.0;
    asymptotic_form::variable var = asymptotic_form::variable::sigma;
    bool has_power = false;
    double exponent = 0.0;     // of sigma (finite endpoint) or tau (infinite)
    double coefficient = 0.0;  // of the singular/leading correction power (0 if not known)
    bool approaches_limit = true;
};

inline v_asymptotics predicted_V_asymptotics(const scale_factor_model& model,
                                             const coupling_spec& cp, side s) {
    const regime_report rep = classify(model, cp, s); // throws UnclassifiedRegime on gaps
    const power_pair eff = model.effective(s);
    const double e0 = eff.eta0, e1 = eff.eta1;
    const double m2 = cp.m * cp.m;
    const double xc = cp.xi_minus_conformal();
    v_asymptotics out;
    out.V_limit = rep.V_limit;
    out.var = (e0 < 1.0) ? asymptotic_form::variable::sigma : asymptotic_form::variable::tau;
    if (e0 == 1.0) out.var = asymptotic_form::variable::exp_minus_tau;

    const double r_exp = e0 / (1.0 - e0);
    const double K = std::pow(eff.c0 * std::pow(std::fabs(1.0 - e0), e0), 1.0 / (1.0 - e0));
    if (cp.conformal) {
        if (e0 == 0.0) {
            // V = m^2 alpha^2 -> m^2 c0^2 + 2 m^2 c1 c0^(eta1+1) sigma^eta1
            out.has_power = true;
            out.exponent = e1;
            out.coefficient = 2.0 * m2 * eff.c1 * std::pow(eff.c0, e1 + 1.0);
        } else if (e0 == 1.0) {
            out.has_power = false; // exponential decay, rate 2 c0
        } else {
            out.has_power = true;
            out.exponent = 2.0 * r_exp;
            out.coefficient = m2 * K * K;
        }
    } else {
        if (e0 == 0.0) {
            out.has_power = (eff.c1 != 0.0);
            out.exponent = e1 - 2.0;
            out.coefficient = xc * 2.0 * cp.d * e1 * (e1 - 1.0) * std::pow(eff.c0, e1 - 1.0) * eff.c1;
        } else if (e0 == 1.0) {
            out.has_power = false;
        } else {
            out.has_power = true;
            out.exponent = -2.0;
            out.coefficient = xc * cp.d * e0 * ((cp.d + 1.0) * e0 - 2.0) / ((1.0 - e0) * (1.0 - e0));
        }
    }
    return out;
}

} // namespace kgflrw
