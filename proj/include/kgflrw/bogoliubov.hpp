#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "kgflrw/dynamics.hpp"
#include "kgflrw/errors.hpp"
#include "kgflrw/potential.hpp"
#include "kgflrw/rootfind.hpp"
#include "kgflrw/spectrum.hpp"

namespace kgflrw {

// Asymptotic one-particle data at one end of the chart.
struct in_out_basis {
    side which = side::past;
    bool tau_finite = true;
    double tau_endpoint = 0.0; // meaningful for finite ends
    double V_limit = 0.0;
};

inline in_out_basis make_basis(const conformal_chart& chart, const coupling_spec& cp, side s) {
    in_out_basis b;
    b.which = s;
    b.tau_finite = chart.tau_finite(s);
    if (b.tau_finite) b.tau_endpoint = chart.tau_endpoint(s);
    if (chart.model().side_singular(s)) {
        b.V_limit = predicted_V_asymptotics(chart.model(), cp, s).V_limit;
        if (!std::isfinite(b.V_limit))
            throw unsupported_regime("the potential has no finite limit at this endpoint");
    } else {
        // regular boundary: V extends continuously to it
        b.V_limit = potential_derivs_at_distance(chart, cp, s, 0.0).V;
    }
    return b;
}

// positive-frequency vacuum data of one mode:
//   psi = 2^{-1/2} omega^{-1/2}, psi' = i 2^{-1/2} omega^{1/2}
// at a finite endpoint, or the oscillatory form at an infinite one.
inline mode_state in_vacuum_seed(const in_out_basis& basis, double mu,
                                 double horizon_tau = -1e2) {
    if (!(mu + basis.V_limit > 0.0))
        throw negative_frequency("mu + V_limit must be positive; raise the infrared cutoff");
    const double omega = std::sqrt(mu + basis.V_limit);
    const complexd i{0.0, 1.0};
    mode_state s;
    s.mu = mu;
    if (basis.tau_finite) {
        s.tau = basis.tau_endpoint;
        s.psi = std::pow(2.0 * omega, -0.5);
        s.dpsi = i * omega * s.psi;
    } else {
        s.tau = horizon_tau;
        s.psi = std::pow(2.0 * omega, -0.5) * std::exp(i * omega * s.tau);
        s.dpsi = i * omega * s.psi;
    }
    return s;
}

struct bogoliubov_result {
    double mu = 0.0;
    complexd alpha{}, beta{};
    double wronskian_residual = 0.0; // | |alpha|^2 - |beta|^2 - 1 |
    double V_minus = 0.0, V_plus = 0.0;
};

struct bogoliubov_options {
    solver_options solver{};
    probe_options probes{1e-2, 10.0, 6, 1e-7};
    double seed_sigma = 1e-9;          // Taylor nudge off a finite endpoint
    std::vector<double> horizons = {1e2, 1e3, 1e4};
    double freeze_tol = 1e-13;         // |V - V_limit| threshold for free tails
    bool reversed = false;             // seed at the future end, read at the past
};

namespace detail {

// second-order Taylor step off the endpoint where the seed data live
inline mode_state nudge_off_endpoint(const mode_state& seed, side sd, double sigma, double V_end) {
    const double dt = (sd == side::past) ? sigma : -sigma;
    const double w = seed.mu + V_end;
    mode_state s = seed;
    s.tau = seed.tau + dt;
    s.psi = seed.psi + dt * seed.dpsi - 0.5 * dt * dt * w * seed.psi;
    s.dpsi = seed.dpsi - dt * w * seed.psi - 0.5 * dt * dt * w * seed.dpsi;
    return s;
}

inline std::pair<complexd, complexd> split_on_out_basis(complexd lam0, complexd lam1,
                                                        double omega) {
    const complexd i{0.0, 1.0};
    const double rw = std::sqrt(omega);
    const complexd alpha = std::pow(2.0, -0.5) * (rw * lam0 - i * lam1 / rw);
    const complexd beta = std::pow(2.0, -0.5) * (rw * lam0 + i * lam1 / rw);
    return {alpha, beta};
}

} // namespace detail

// Evolves the in-vacuum of one mode across the chart and reads the
// positive/negative frequency mixture on the out basis.
inline bogoliubov_result bogoliubov_mode(const conformal_chart& chart, const coupling_spec& cp,
                                         double mu, bogoliubov_options opt = {}) {
    const side in_side = opt.reversed ? side::future : side::past;
    const side out_side = opt.reversed ? side::past : side::future;
    const auto in_basis = make_basis(chart, cp, in_side);
    const auto out_basis = make_basis(chart, cp, out_side);
    if (!(mu + out_basis.V_limit > 0.0) || !(mu + in_basis.V_limit > 0.0))
        throw negative_frequency("mode survives the infrared cutoff on neither basis");

    chart_mode_system sys(chart, cp, mu, opt.solver);
    const double sign_in = (in_side == side::past) ? -1.0 : 1.0;

    bogoliubov_result out;
    out.mu = mu;
    out.V_minus = in_basis.V_limit;
    out.V_plus = out_basis.V_limit;

    auto read_out = [&](mode_state st) -> std::pair<complexd, complexd> {
        const double omega_out = std::sqrt(mu + out_basis.V_limit);
        complexd lam0, lam1;
        if (out_basis.tau_finite) {
            const auto lim = extract_limit_data(sys, st, out_side, opt.probes);
            lam0 = lim.phi0;
            lam1 = lim.phi1;
        } else {
            const auto sc = scattering_data_infinite_tau(sys, st, out_side, out_basis.V_limit,
                                                         opt.horizons, opt.freeze_tol);
            auto pr = std::make_pair(sc.alpha, sc.beta);
            if (out_side == side::past) std::swap(pr.first, pr.second);
            return pr;
        }
        auto [a, b] = detail::split_on_out_basis(lam0, lam1, omega_out);
        // the reversed run reads the conjugate frame at the past end; the
        // coefficient of the conjugate in-mode is the forward alpha
        if (out_side == side::past) std::swap(a, b);
        return {a, b};
    };

    std::pair<complexd, complexd> ab;
    if (in_basis.tau_finite) {
        mode_state seed = in_vacuum_seed(in_basis, mu);
        if (opt.reversed) {
            // the reversed run seeds the conjugate (out-going) vacuum at tau_plus
            seed.psi = std::conj(seed.psi);
            seed.dpsi = std::conj(seed.dpsi);
        }
        ab = read_out(detail::nudge_off_endpoint(seed, in_side, opt.seed_sigma, in_basis.V_limit));
    } else {
        // pick the earliest horizon whose tail is already free to freeze_tol
        bool frozen = false;
        for (double h : opt.horizons) {
            const double tau_h = sign_in * h;
            const double dev = std::fabs(sys.V_at_tau(tau_h) - in_basis.V_limit);
            if (dev <= opt.freeze_tol * (mu + std::fabs(in_basis.V_limit))) {
                ab = read_out(in_vacuum_seed(in_basis, mu, tau_h));
                frozen = true;
                break;
            }
        }
        if (!frozen) {
            // slow (power) tail: Richardson over the in-horizon schedule
            std::vector<complexd> alphas, betas;
            for (double h : opt.horizons) {
                const auto r = read_out(in_vacuum_seed(in_basis, mu, sign_in * h));
                alphas.push_back(r.first);
                betas.push_back(r.second);
            }
            const std::size_t n = opt.horizons.size();
            auto extrap = [&](const std::vector<complexd>& v, std::size_t k) {
                const double h1 = opt.horizons[k - 1], h2 = opt.horizons[k];
                return (h2 * v[k] - h1 * v[k - 1]) / (h2 - h1);
            };
            ab = {extrap(alphas, n - 1), extrap(betas, n - 1)};
            if (n >= 3) {
                const complexd a_prev = extrap(alphas, n - 2), b_prev = extrap(betas, n - 2);
                if (std::abs(ab.first - a_prev) > 1e-6 * (1.0 + std::abs(ab.first)) ||
                    std::abs(ab.second - b_prev) > 1e-6 * (1.0 + std::abs(ab.second)))
                    throw no_convergence("in-horizon schedule did not stabilize the seed");
            }
        }
    }
    out.alpha = ab.first;
    out.beta = ab.second;
    out.wronskian_residual = std::fabs(std::norm(out.alpha) - std::norm(out.beta) - 1.0);
    return out;
}

// ---------------------------------------------------------------------------
// pair creation number and its decay certificate
// ---------------------------------------------------------------------------
struct pair_creation_result {
    double N_pairs = 0.0;
    double decay_slope = 0.0;    // least-squares slope of log |beta| vs log mu
    double zeta_tail = 0.0;      // estimated remainder of the mult |beta|^2 sum
    std::size_t fit_points = 0;
    double fit_mu_lo = 0.0, fit_mu_hi = 0.0;
};

struct fit_window {
    // top two decades of computed mu, excluding the largest half decade
    double lo_factor = 3.162277660168379e-3; // 10^{-2.5}
    double hi_factor = 3.162277660168379e-1; // 10^{-0.5}
};

inline pair_creation_result pair_creation_number(const shifted_spectrum& spec,
                                                 const std::vector<bogoliubov_result>& modes,
                                                 fit_window window = {}) {
    if (modes.empty()) throw insufficient_decades("no computed modes");
    double mu_min = std::numeric_limits<double>::infinity(), mu_max = 0.0;
    for (const auto& m : modes) {
        if (m.mu > 0) mu_min = std::fmin(mu_min, m.mu);
        mu_max = std::fmax(mu_max, m.mu);
    }
    if (!(mu_max >= 100.0 * mu_min))
        throw insufficient_decades("need at least two decades of mu for the decay fit");

    pair_creation_result out;
    // ordered deterministic accumulation of N = sum mult |beta|^2
    std::size_t i = 0;
    for (const auto& e : spec.mu_ladder) {
        if (i >= modes.size()) break;
        if (std::fabs(e.mu - modes[i].mu) > 1e-9 * (1.0 + e.mu))
            throw domain_error("mode list must follow the shifted ladder order");
        out.N_pairs += static_cast<double>(e.mult) * std::norm(modes[i].beta);
        ++i;
    }

    out.fit_mu_lo = mu_max * window.lo_factor;
    out.fit_mu_hi = mu_max * window.hi_factor;
    std::vector<double> xs, ys;
    for (const auto& m : modes) {
        if (m.mu < out.fit_mu_lo || m.mu > out.fit_mu_hi) continue;
        if (std::abs(m.beta) <= 0.0) continue;
        xs.push_back(std::log(m.mu));
        ys.push_back(std::log(std::abs(m.beta)));
    }
    out.fit_points = xs.size();
    if (out.N_pairs == 0.0 && xs.empty()) {
        // no mixing anywhere: nothing to fit, nothing in the tail
        out.decay_slope = -std::numeric_limits<double>::infinity();
        out.zeta_tail = 0.0;
        return out;
    }
    if (xs.size() < 8) throw insufficient_decades("too few modes inside the fit window");
    out.decay_slope = fit_line(xs.begin(), xs.end(), ys.begin()).slope;

    // tail of sum mult |beta|^2 assuming |beta|^2 <= C mu^{2 slope}:
    // calibrate C inside the window and integrate the Weyl density
    const double s_sum = -2.0 * out.decay_slope;
    double C = 0.0;
    for (const auto& m : modes)
        if (m.mu >= out.fit_mu_lo)
            C = std::fmax(C, std::norm(m.beta) * std::pow(m.mu, s_sum));
    const int d = spec.base.d;
    if (s_sum > 0.5 * d) {
        double count = 0.0;
        for (const auto& e : spec.base.ladder) count += static_cast<double>(e.mult);
        const double lam_top = spec.base.ladder.back().lambda;
        const double weyl_c = count / std::pow(lam_top, 0.5 * d);
        out.zeta_tail =
            C * weyl_c * (0.5 * d) / (s_sum - 0.5 * d) * std::pow(mu_max, 0.5 * d - s_sum);
    } else {
        out.zeta_tail = std::numeric_limits<double>::infinity();
    }
    return out;
}

struct hs_certificate {
    bool certified = false;
    double margin = 0.0; // (-2 slope) - d/2
};

// Sum mult mu^{2 slope} converges iff -2 slope > d/2.
inline hs_certificate hilbert_schmidt_certificate(int d, double slope) {
    hs_certificate c;
    c.margin = -2.0 * slope - 0.5 * d;
    c.certified = c.margin > 0.0;
    return c;
}

} // namespace kgflrw
