#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "kgflrw/dynamics.hpp"
#include "kgflrw/errors.hpp"
#include "kgflrw/quadrature.hpp"

namespace kgflrw {

enum class riccati_sign { positive_rhs, negative_rhs };

// A' - A^2 = +V (positive) or -V (negative) with A(tau0) = 0, solved by the
// monotone Picard iteration A_{n+1} = ±int V + int A_n^2 on a grid clustered
// toward tau_plus.
struct riccati_solution {
    riccati_sign sign = riccati_sign::positive_rhs;
    double M = 2.0;
    double tau0 = 0.0;
    double tau_plus = 1.0;
    int iterations_used = 0;
    bool monotone_iterates = true;
    std::vector<double> grid;     // tau values, grid.front() == tau0
    std::vector<double> A;        // converged A at the grid
    std::vector<double> int_V;    // int_{tau0}^{tau_i} V
    std::vector<double> int_absA; // int_{tau0}^{tau_i} |A|
    double residual = 0.0;        // sup |A - (±int V + int A^2)| after convergence

    double value(double tau) const {
        // piecewise-linear lookup is enough for reporting between nodes
        if (tau <= grid.front()) return A.front();
        auto it = std::upper_bound(grid.begin(), grid.end(), tau);
        if (it == grid.end()) return A.back();
        const std::size_t i = static_cast<std::size_t>(it - grid.begin());
        const double t0 = grid[i - 1], t1 = grid[i];
        const double w = (tau - t0) / (t1 - t0);
        return A[i - 1] * (1.0 - w) + A[i] * w;
    }
    double int_abs_A_total() const { return int_absA.back(); }
};

struct riccati_options {
    double sigma_min = 1e-6;       // innermost grid distance to tau_plus
    std::size_t per_decade = 32;
    double picard_tol = 1e-12;
    int max_iterations = 200;
};

namespace detail {

// cumulative integral of a Hermite-interpolated function on the grid:
// derivative values at the nodes come from the Riccati identity
inline std::vector<double> cumulative_hermite(const std::vector<double>& x,
                                              const std::vector<double>& f,
                                              const std::vector<double>& df) {
    std::vector<double> out(x.size(), 0.0);
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double h = x[i] - x[i - 1];
        // integral of the cubic Hermite interpolant
        out[i] = out[i - 1] + 0.5 * h * (f[i - 1] + f[i]) + h * h / 12.0 * (df[i - 1] - df[i]);
    }
    return out;
}

} // namespace detail

inline riccati_solution solve_riccati(const std::function<double(double)>& V, double tau1,
                                      double tau_plus, double M, riccati_sign sign,
                                      riccati_options opt = {}) {
    if (!(M > 1.0)) throw domain_error("riccati solve requires M > 1");
    if (!(tau1 < tau_plus)) throw domain_error("riccati domain is empty");

    // admissibility: double integral of V from tau0 must be small enough
    const double budget = (sign == riccati_sign::positive_rhs) ? 1.0 / (4.0 * M * M)
                                                               : 1.0 / (2.0 * M);
    auto double_integral = [&](double tau0) {
        // int_{tau0}^{tau_plus} (int_{tau0}^{tau} V) dtau on a geometric grid
        const double span = tau_plus - tau0;
        const double floor_sig =
            64.0 * std::numeric_limits<double>::epsilon() * (std::fabs(tau_plus) + span);
        auto nodes = geometric_nodes_toward(
            tau0, tau_plus, std::fmax(std::fmin(opt.sigma_min, 1e-8 * span), floor_sig),
            opt.per_decade);
        double iv = 0.0, total = 0.0;
        for (std::size_t i = 1; i < nodes.size(); ++i) {
            const double iv_next =
                iv + cumulative_integral::gl7(V, nodes[i - 1], nodes[i]);
            total += 0.5 * (iv + iv_next) * (nodes[i] - nodes[i - 1]);
            iv = iv_next;
        }
        return total;
    };

    double tau0 = tau1;
    if (double_integral(tau1) > budget) {
        // bisect in log-distance to tau_plus for the latest admissible start
        double lo = 1e-10 * (tau_plus - tau1), hi = tau_plus - tau1;
        if (double_integral(tau_plus - lo) > budget)
            throw no_admissible_tau0("double integral of V exceeds the budget arbitrarily close "
                                     "to tau_plus");
        for (int it = 0; it < 80; ++it) {
            const double mid = std::sqrt(lo * hi);
            if (double_integral(tau_plus - mid) > budget) hi = mid; else lo = mid;
        }
        tau0 = tau_plus - 0.99 * lo;
    }

    riccati_solution sol;
    sol.sign = sign;
    sol.M = M;
    sol.tau0 = tau0;
    sol.tau_plus = tau_plus;
    sol.grid = geometric_nodes_toward(tau0, tau_plus, opt.sigma_min, opt.per_decade);
    const std::size_t n = sol.grid.size();

    sol.int_V.assign(n, 0.0);
    for (std::size_t i = 1; i < n; ++i)
        sol.int_V[i] = sol.int_V[i - 1] + cumulative_integral::gl7(V, sol.grid[i - 1], sol.grid[i]);

    const double sgn = (sign == riccati_sign::positive_rhs) ? 1.0 : -1.0;
    std::vector<double> A(n, 0.0), A2(n, 0.0), dA2(n, 0.0);
    sol.iterations_used = opt.max_iterations;
    double change = 0.0;
    for (int it = 0; it < opt.max_iterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            A2[i] = A[i] * A[i];
            const double dA = sgn * V(sol.grid[i]) + A2[i]; // Riccati identity
            dA2[i] = 2.0 * A[i] * dA;
        }
        const auto IA2 = detail::cumulative_hermite(sol.grid, A2, dA2);
        change = 0.0;
        bool monotone = true;
        for (std::size_t i = 0; i < n; ++i) {
            const double next = sgn * sol.int_V[i] + IA2[i];
            change = std::fmax(change, std::fabs(next - A[i]));
            if (sign == riccati_sign::positive_rhs && next < A[i] - 1e-13) monotone = false;
            A[i] = next;
        }
        sol.monotone_iterates = sol.monotone_iterates && monotone;
        if (change <= opt.picard_tol) {
            sol.iterations_used = it + 1;
            break;
        }
    }
    if (change > 1e-8)
        throw no_convergence("riccati picard iteration did not reach the tolerance");
    sol.A = A;
    sol.residual = change;

    std::vector<double> absA(n), dabsA(n);
    for (std::size_t i = 0; i < n; ++i) {
        absA[i] = std::fabs(A[i]);
        const double dA = sgn * V(sol.grid[i]) + A[i] * A[i];
        dabsA[i] = (A[i] >= 0.0 ? 1.0 : -1.0) * dA;
    }
    sol.int_absA = detail::cumulative_hermite(sol.grid, absA, dabsA);
    return sol;
}

// Modified-energy Gronwall check along a mode trajectory:
//   E = (B^{2(1-theta)} |psi|^2 + B^{-2 theta} |psi' + A psi|^2)^{1/2}
//   E(tau) <= E(tau0) exp(int (|A| + G_bound)) with discretization slack.
struct energy_check_report {
    double max_ratio = 0.0;     // max over samples of E / bound
    double drift = 0.0;         // max |E/E0 - 1| (meaningful when A = G = 0)
    bool ok = false;
    std::vector<double> taus, energies, bounds;
};

template <class System>
energy_check_report modified_energy_check(const System& sys, mode_state s,
                                          const riccati_solution& A, double B2, double theta,
                                          double G_bound, double slack = 1.05) {
    if (!(B2 >= 1.0)) throw domain_error("modified energy requires B^2 >= 1");
    energy_check_report rep;
    auto energy = [&](const mode_state& st, double Aval) {
        const double b2a = std::pow(B2, 1.0 - theta);
        const double b2b = std::pow(B2, -theta);
        return std::sqrt(b2a * std::norm(st.psi) + b2b * std::norm(st.dpsi + Aval * st.psi));
    };
    // start the trajectory at tau0 of the Riccati solution
    if (s.tau != A.tau0) s = sys.evolve(s, A.tau0);
    const double E0 = energy(s, 0.0); // A(tau0) = 0
    rep.taus.push_back(s.tau);
    rep.energies.push_back(E0);
    rep.bounds.push_back(E0);
    rep.max_ratio = 1.0;
    for (std::size_t i = 1; i < A.grid.size(); ++i) {
        s = sys.evolve(s, A.grid[i]);
        const double E = energy(s, A.A[i]);
        const double bound = E0 * std::exp(A.int_absA[i] + G_bound * (A.grid[i] - A.tau0));
        rep.taus.push_back(s.tau);
        rep.energies.push_back(E);
        rep.bounds.push_back(bound);
        rep.max_ratio = std::fmax(rep.max_ratio, E / bound);
        rep.drift = std::fmax(rep.drift, std::fabs(E / E0 - 1.0));
    }
    rep.ok = rep.max_ratio <= slack;
    if (!rep.ok)
        throw bound_violated("modified energy exceeded the Gronwall bound by more than the slack");
    return rep;
}

} // namespace kgflrw
