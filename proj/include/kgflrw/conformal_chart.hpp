#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "kgflrw/errors.hpp"
#include "kgflrw/quadrature.hpp"
#include "kgflrw/rootfind.hpp"
#include "kgflrw/scale_factor.hpp"

namespace kgflrw {

struct chart_options {
    std::size_t table_size = 513;
    double quad_tol = 1e-12;
    double margin_factor = 1e-13; // refusal margin for t/tau-based queries, in units of span
};

// Conformal time map tau(t) = int_{t0}^t ds/a(s) with tau(t0) = 0.
//
// Near a singular endpoint the integrand 1/a is handled by subtracting the
// leading power (integrated in closed form) and integrating the remainder
// with a double-exponential rule; all near-endpoint arithmetic is done in
// the endpoint-distance variable to avoid cancellation.
class conformal_chart {
public:
    struct alpha_state {
        double alpha = 0;       // alpha(tau) = a(t(tau))
        double dalpha = 0;      // d alpha / d tau   = a' a
        double d2alpha = 0;     // d^2 alpha / d tau^2 = (a'' a + a'^2) a
    };

    conformal_chart(scale_factor_model model, double t0, chart_options opt = {})
        : model_(std::move(model)), t0_(t0), opt_(opt) {
        const double L = model_.span();
        if (!(t0 > model_.t_minus() && t0 < model_.t_plus()))
            throw domain_error("t0 must lie inside (t_minus, t_plus)");
        margin_t_ = opt_.margin_factor * L;

        setup_zone(plus_, side::future);
        setup_zone(minus_, side::past);

        // forward table over the mid region, anchored so that tau(t0) = 0
        const double tL = model_.t_minus() + minus_.z;
        const double tR = model_.t_plus() - plus_.z;
        build_table(tL, tR);

        tau_m_plus_ = table_tau_.back();
        tau_m_minus_ = table_tau_.front();

        if (plus_.active) {
            plus_finite_ = plus_.eff.eta0 < 1.0;
            if (plus_finite_) tau_plus_ = tau_m_plus_ + plus_.sigma(plus_.z);
        } else {
            plus_finite_ = true;
            tau_plus_ = tau_m_plus_; // table extends to the regular endpoint
        }
        if (minus_.active) {
            minus_finite_ = minus_.eff.eta0 < 1.0;
            if (minus_finite_) tau_minus_ = tau_m_minus_ - minus_.sigma(minus_.z);
        } else {
            minus_finite_ = true;
            tau_minus_ = tau_m_minus_;
        }
    }

    const scale_factor_model& model() const { return model_; }
    double t0() const { return t0_; }

    bool tau_finite(side s) const { return s == side::future ? plus_finite_ : minus_finite_; }

    double tau_endpoint(side s) const {
        if (!tau_finite(s))
            throw non_integrable_endpoint("1/a is non-integrable at this endpoint (eta0 >= 1); "
                                          "query tau_finite instead");
        return s == side::future ? tau_plus_ : tau_minus_;
    }

    double tau_plus() const { return tau_endpoint(side::future); }
    double tau_minus() const { return tau_endpoint(side::past); }

    double conformal_time(double t) const {
        require_inside_t(t);
        if (plus_.active && t > model_.t_plus() - plus_.z) {
            const double v = model_.t_plus() - t;
            return tau_m_plus_ + plus_.segment(v, plus_.z);
        }
        if (minus_.active && t < model_.t_minus() + minus_.z) {
            const double w = t - model_.t_minus();
            return tau_m_minus_ - minus_.segment(w, minus_.z);
        }
        // mid region: short smooth integral from the nearest table node
        const auto it = std::upper_bound(table_t_.begin(), table_t_.end(), t);
        std::size_t i = (it == table_t_.begin()) ? 0 : static_cast<std::size_t>(it - table_t_.begin()) - 1;
        const double base = table_tau_[i];
        const auto& m = model_;
        return base + integrate([&m](double s) { return 1.0 / m.value(s); }, table_t_[i], t, opt_.quad_tol);
    }

    double invert(double tau) const {
        if ((minus_finite_ && tau <= tau_minus_) || (plus_finite_ && tau >= tau_plus_))
            throw out_of_chart("tau outside (tau_minus, tau_plus)");
        if (plus_.active && tau > tau_m_plus_) {
            const double v = invert_zone(plus_, tau - tau_m_plus_,
                                         plus_finite_ ? std::optional<double>(tau_plus_ - tau)
                                                      : std::nullopt);
            return model_.t_plus() - v;
        }
        if (minus_.active && tau < tau_m_minus_) {
            const double w = invert_zone(minus_, tau_m_minus_ - tau,
                                         minus_finite_ ? std::optional<double>(tau - tau_minus_)
                                                       : std::nullopt);
            return model_.t_minus() + w;
        }
        // mid region: bracketed by the table, safeguarded Newton (dtau/dt = 1/a)
        const auto it = std::upper_bound(table_tau_.begin(), table_tau_.end(), tau);
        std::size_t i = (it == table_tau_.begin()) ? 0 : static_cast<std::size_t>(it - table_tau_.begin()) - 1;
        i = std::min(i, table_t_.size() - 2);
        double lo = table_t_[i], hi = table_t_[i + 1];
        double t = 0.5 * (lo + hi);
        for (int iter = 0; iter < 60; ++iter) {
            const double r = conformal_time(t) - tau;
            if (std::fabs(r) <= 1e-14 * (1.0 + std::fabs(tau))) break;
            if (r > 0) hi = t; else lo = t;
            double tn = t - r * model_.value(t);
            if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
            if (std::fabs(tn - t) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                          (std::fabs(t) + model_.span())) {
                t = tn;
                break;
            }
            t = tn;
        }
        return std::clamp(t, model_.t_minus() + margin_t_, model_.t_plus() - margin_t_);
    }

    // endpoint distance in t at conformal time tau, computed without forming
    // t itself (t = t_plus - v destroys the relative precision of small v)
    double endpoint_distance_at_tau(side s, double tau) const {
        const zone& zn = (s == side::future) ? plus_ : minus_;
        const double boundary = (s == side::future) ? tau_m_plus_ : tau_m_minus_;
        const bool in_zone = zn.active && ((s == side::future) ? tau > boundary : tau < boundary);
        if (!in_zone) {
            const double t = invert(tau);
            return (s == side::future) ? model_.t_plus() - t : t - model_.t_minus();
        }
        const double from_boundary = (s == side::future) ? tau - boundary : boundary - tau;
        return invert_zone(zn, from_boundary,
                           tau_finite(s) ? std::optional<double>((s == side::future)
                                                                     ? tau_endpoint(s) - tau
                                                                     : tau - tau_endpoint(s))
                                         : std::nullopt);
    }

    // distance-to-endpoint in t corresponding to a conformal-time distance
    // sigma from a finite singular endpoint (cancellation-free)
    double v_from_sigma(side s, double sigma) const {
        const zone& zn = (s == side::future) ? plus_ : minus_;
        if (!zn.active) {
            // regular endpoint: plain inversion
            const double tau = (s == side::future) ? tau_plus_ - sigma : tau_minus_ + sigma;
            const double t = invert(tau);
            return (s == side::future) ? model_.t_plus() - t : t - model_.t_minus();
        }
        if (!tau_finite(s)) throw non_integrable_endpoint("sigma is measured from a finite endpoint");
        if (sigma <= 0.0) throw out_of_chart("sigma must be positive");
        if (sigma >= zn.sigma(zn.z)) {
            const double tau = (s == side::future) ? tau_plus_ - sigma : tau_minus_ + sigma;
            const double t = invert(tau);
            return (s == side::future) ? model_.t_plus() - t : t - model_.t_minus();
        }
        if (zn.pure_power) return zn.v_of_sigma_pure(sigma);
        // bracket around the leading-order guess, then Brent on sigma(v)
        double guess = zn.v_of_sigma_pure(sigma);
        double lo = guess, hi = guess;
        while (zn.sigma(lo) > sigma) lo *= 0.5;
        while (hi < zn.z && zn.sigma(hi) < sigma) hi = std::min(zn.z, hi * 2.0);
        return brent([&](double v) { return zn.sigma(v) - sigma; }, lo, hi, 0.0);
    }

    double sigma_of_v(side s, double v) const {
        const zone& zn = (s == side::future) ? plus_ : minus_;
        if (!tau_finite(s)) throw non_integrable_endpoint("sigma is measured from a finite endpoint");
        if (!zn.active) {
            const double t = (s == side::future) ? model_.t_plus() - v : model_.t_minus() + v;
            return (s == side::future) ? tau_plus_ - conformal_time(t) : conformal_time(t) - tau_minus_;
        }
        if (v >= zn.z) {
            const double t = (s == side::future) ? model_.t_plus() - v : model_.t_minus() + v;
            return (s == side::future) ? tau_plus_ - conformal_time(t) : conformal_time(t) - tau_minus_;
        }
        return zn.sigma(v);
    }

    double alpha(double tau) const { return alpha_derivs(tau).alpha; }

    alpha_state alpha_derivs(double tau) const {
        const double t = invert(tau);
        return alpha_derivs_at_t(t);
    }

    alpha_state alpha_derivs_at_t(double t) const {
        const double a = model_.value(t);
        const double a1 = model_.derivative(t, 1);
        const double a2 = model_.derivative(t, 2);
        return assemble(a, a1, a2);
    }

    // evaluation at an exact endpoint distance (v in t-units)
    alpha_state alpha_derivs_at_distance(side s, double v) const {
        const double a = (s == side::future) ? model_.derivative_from_plus(v, 0)
                                             : model_.derivative_from_minus(v, 0);
        const double a1 = (s == side::future) ? model_.derivative_from_plus(v, 1)
                                              : model_.derivative_from_minus(v, 1);
        const double a2 = (s == side::future) ? model_.derivative_from_plus(v, 2)
                                              : model_.derivative_from_minus(v, 2);
        return assemble(a, a1, a2);
    }

    double zone_width(side s) const { return (s == side::future) ? plus_.z : minus_.z; }
    double tau_zone_boundary(side s) const { return (s == side::future) ? tau_m_plus_ : tau_m_minus_; }
    double margin_t() const { return margin_t_; }

    const std::vector<double>& table_t() const { return table_t_; }
    const std::vector<double>& table_tau() const { return table_tau_; }

private:
    struct zone {
        bool active = false;
        double z = 0.0;
        power_pair eff{};
        bool pure_power = false;
        const scale_factor_model* model = nullptr;
        side which = side::future;
        double I0 = 0.0;   // int_0^vmin of the remainder (finite-tau sides)
        double vmin = 0.0;
        cumulative_integral Rc; // int_vmin^v of the remainder

        double abar(double v) const {
            return which == side::future ? model->derivative_from_plus(v, 0)
                                         : model->derivative_from_minus(v, 0);
        }
        double remainder(double v) const {
            return 1.0 / abar(v) - std::pow(v, -eff.eta0) / eff.c0;
        }
        // antiderivative of the subtracted leading power
        double P(double v) const {
            if (eff.eta0 == 1.0) return std::log(v) / eff.c0;
            return std::pow(v, 1.0 - eff.eta0) / (eff.c0 * (1.0 - eff.eta0));
        }
        // int_0^v of the leading remainder term -(c1/c0^2) v'^(eta1-2 eta0);
        // below the table floor the higher corrections are O(v^(eta1-eta0))
        // relative, far under every tolerance in play
        double remainder_tail(double v) const {
            const double e = eff.eta1 - 2.0 * eff.eta0;
            return -(eff.c1 / (eff.c0 * eff.c0)) * std::pow(v, 1.0 + e) / (1.0 + e);
        }
        double Rcum(double v) const {
            if (pure_power) return 0.0;
            if (v >= vmin) return Rc(v);
            if (eff.eta0 < 1.0) return remainder_tail(v) - I0; // Rcum anchored at vmin
            // infinite side: differences only, same closed-form tail about vmin
            return Rc(vmin) + remainder_tail(v) - remainder_tail(vmin);
        }
        // int_{v_lo}^{v_hi} dv / abar
        double segment(double v_lo, double v_hi) const {
            return (P(v_hi) - P(v_lo)) + (Rcum(v_hi) - Rcum(v_lo));
        }
        // int_0^v dv' / abar  (finite-tau sides only: eta0 < 1)
        double sigma(double v) const { return P(v) + I0 + Rcum(v); }
        double v_of_sigma_pure(double s) const {
            return std::pow(eff.c0 * (1.0 - eff.eta0) * s, 1.0 / (1.0 - eff.eta0));
        }
    };

    static alpha_state assemble(double a, double a1, double a2) {
        alpha_state st;
        st.alpha = a;
        st.dalpha = a1 * a;
        st.d2alpha = (a2 * a + a1 * a1) * a;
        return st;
    }

    void setup_zone(zone& zn, side s) {
        zn.model = &model_;
        zn.which = s;
        zn.active = model_.side_singular(s);
        if (!zn.active) { zn.z = 0.0; return; }
        zn.z = 0.25 * model_.span();
        zn.eff = model_.effective(s);
        zn.pure_power = (zn.eff.c1 == 0.0) &&
                        (model_.kind() != model_kind::two_sided_product);
        if (!zn.pure_power) {
            zn.vmin = zn.z * 1e-12;
            auto r = [&zn](double v) { return zn.remainder(v); };
            zn.Rc = cumulative_integral(
                r, geometric_nodes_from(zn.vmin, zn.z, 24));
            if (zn.eff.eta0 < 1.0)
                zn.I0 = integrate_endpoint_singular(r, 0.0, zn.vmin, 1e-15);
        }
    }

    // ascending geometric nodes from a to b (a > 0)
    static std::vector<double> geometric_nodes_from(double a, double b, std::size_t per_decade) {
        std::vector<double> v;
        const double decades = std::log10(b / a);
        const std::size_t n = static_cast<std::size_t>(std::ceil(decades * per_decade)) + 1;
        v.reserve(n + 1);
        for (std::size_t i = 0; i <= n; ++i)
            v.push_back(a * std::pow(b / a, static_cast<double>(i) / n));
        v.back() = b;
        return v;
    }

    void build_table(double tL, double tR) {
        const std::size_t n = opt_.table_size;
        table_t_.clear();
        table_t_.reserve(n + 1);
        for (std::size_t i = 0; i < n; ++i)
            table_t_.push_back(tL + (tR - tL) * static_cast<double>(i) / (n - 1));
        table_t_.push_back(t0_);
        std::sort(table_t_.begin(), table_t_.end());
        table_t_.erase(std::unique(table_t_.begin(), table_t_.end()), table_t_.end());

        table_tau_.assign(table_t_.size(), 0.0);
        const auto it = std::lower_bound(table_t_.begin(), table_t_.end(), t0_);
        const std::size_t i0 = static_cast<std::size_t>(it - table_t_.begin());
        const auto& m = model_;
        auto inv_a = [&m](double s) { return 1.0 / m.value(s); };
        for (std::size_t i = i0; i + 1 < table_t_.size(); ++i)
            table_tau_[i + 1] = table_tau_[i] + integrate(inv_a, table_t_[i], table_t_[i + 1], opt_.quad_tol);
        for (std::size_t i = i0; i > 0; --i)
            table_tau_[i - 1] = table_tau_[i] - integrate(inv_a, table_t_[i - 1], table_t_[i], opt_.quad_tol);
    }

    double invert_zone(const zone& zn, double tau_from_boundary,
                       std::optional<double> sigma_opt) const {
        // solve segment(v, z) = tau_from_boundary for v in (0, z)
        if (sigma_opt && zn.pure_power) return zn.v_of_sigma_pure(*sigma_opt);
        if (sigma_opt) {
            const double s = *sigma_opt;
            double guess = zn.v_of_sigma_pure(s);
            double lo = guess, hi = std::min(guess, zn.z);
            while (lo > 0.0 && zn.sigma(lo) > s) lo *= 0.5;
            while (hi < zn.z && zn.sigma(hi) < s) hi = std::min(zn.z, hi * 2.0);
            return brent([&](double v) { return zn.sigma(v) - s; }, lo, hi, 0.0);
        }
        // infinite endpoint: asymptotic first guess, then bracket on segment()
        double guess;
        if (zn.eff.eta0 == 1.0) {
            guess = zn.z * std::exp(-zn.eff.c0 * tau_from_boundary);
            guess = std::max(guess, 1e-280);
        } else {
            const double e = zn.eff.eta0;
            guess = std::pow(zn.eff.c0 * (e - 1.0) * std::max(tau_from_boundary, 1e-300),
                             -1.0 / (e - 1.0));
        }
        guess = std::min(std::max(guess, 1e-280), zn.z * 0.999999);
        double lo = guess, hi = guess;
        while (zn.segment(lo, zn.z) < tau_from_boundary) {
            lo *= 0.25;
            if (lo < 1e-290) throw out_of_chart("tau too close to the non-integrable endpoint");
        }
        while (hi < zn.z && zn.segment(hi, zn.z) > tau_from_boundary) hi = std::min(zn.z, hi * 4.0);
        return brent([&](double v) { return zn.segment(v, zn.z) - tau_from_boundary; }, lo, hi, 0.0);
    }

    void require_inside_t(double t) const {
        if (!(t >= model_.t_minus() + margin_t_ && t <= model_.t_plus() - margin_t_))
            throw out_of_chart("t within the refusal margin of an endpoint");
    }

    scale_factor_model model_;
    double t0_;
    chart_options opt_;
    double margin_t_ = 0.0;

    zone minus_{}, plus_{};
    std::vector<double> table_t_, table_tau_;
    double tau_m_plus_ = 0, tau_m_minus_ = 0;
    bool plus_finite_ = true, minus_finite_ = true;
    double tau_plus_ = std::numeric_limits<double>::infinity();
    double tau_minus_ = -std::numeric_limits<double>::infinity();
};

// Closed-form asymptotics of alpha(tau) at a singular endpoint.
struct asymptotic_form {
    enum class variable { sigma, tau, exp_minus_tau };
    variable var = variable::sigma;
    double coefficient = 0.0;          // leading amplitude
    double exponent = 0.0;             // power of sigma or tau; decay rate (-c0) for exp
    double correction_exponent = 0.0;  // next-order power (sigma/tau variable)
    double correction_coefficient = 0.0;
    double k0 = 0.0;                   // offset entering the eta0 = 1 form

    // argument is the positive distance variable: sigma = |tau_pm - tau| for
    // finite endpoints, |tau| for infinite ones
    double evaluate(double sigma_or_tau) const {
        switch (var) {
            case variable::sigma:
            case variable::tau: {
                double v = coefficient * std::pow(sigma_or_tau, exponent);
                if (correction_coefficient != 0.0)
                    v += correction_coefficient * std::pow(sigma_or_tau, correction_exponent);
                return v;
            }
            case variable::exp_minus_tau:
                return coefficient * std::exp(exponent * sigma_or_tau);
        }
        return 0.0;
    }
};

// The eta0 = 1 form alpha ~ c0 e^{c0 k0} e^{-c0 tau} leaves k0 to the chart
// anchor; it is recovered numerically as lim (tau + ln(t_plus - t)/c0).
inline double chart_offset_k0(const conformal_chart& chart, side s) {
    const power_pair eff = chart.model().effective(s);
    const double L = chart.model().span();
    double k0 = 0.0;
    for (int j = 0; j < 3; ++j) {
        const double v = L * std::pow(10.0, -4.0 - 2.0 * j);
        const double t = (s == side::future) ? chart.model().t_plus() - v
                                             : chart.model().t_minus() + v;
        const double tau = chart.conformal_time(t);
        k0 = (s == side::future) ? tau + std::log(v) / eff.c0 : -(tau - std::log(v) / eff.c0);
    }
    return k0;
}

inline asymptotic_form appendix_asymptotics(const conformal_chart& chart, side s) {
    const power_pair eff = chart.model().effective(s);
    asymptotic_form out;
    const double e0 = eff.eta0, e1 = eff.eta1, c0 = eff.c0, c1 = eff.c1;
    if (e0 < 1.0 && e0 != 0.0) {
        out.var = asymptotic_form::variable::sigma;
        out.coefficient = std::pow(c0 * std::pow(1.0 - e0, e0), 1.0 / (1.0 - e0));
        out.exponent = e0 / (1.0 - e0);
        out.correction_exponent = e1 / (1.0 - e0);
    } else if (e0 == 0.0) {
        out.var = asymptotic_form::variable::sigma;
        out.coefficient = c0;
        out.exponent = 0.0;
        out.correction_coefficient = c1 * std::pow(c0, e1);
        out.correction_exponent = e1;
    } else if (e0 == 1.0) {
        out.var = asymptotic_form::variable::exp_minus_tau;
        out.k0 = chart_offset_k0(chart, s);
        out.coefficient = c0 * std::exp(c0 * out.k0);
        out.exponent = -c0;
    } else {
        out.var = asymptotic_form::variable::tau;
        out.coefficient = std::pow(c0, 1.0 / (1.0 - e0)) * std::pow(e0 - 1.0, e0 / (1.0 - e0));
        out.exponent = e0 / (1.0 - e0);
        out.correction_exponent = out.exponent - (e1 - e0) / (e0 - 1.0);
    }
    return out;
}

} // namespace kgflrw
