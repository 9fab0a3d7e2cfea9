#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "kgflrw/errors.hpp"
#include "kgflrw/quadrature.hpp"

namespace kgflrw {

// A potential with the analytic derivatives the series construction needs;
// unneeded higher derivatives may be left empty.
struct smooth_potential {
    std::function<double(double)> V;
    std::function<double(double)> dV;
    std::function<double(double)> d2V;
    std::function<double(double)> d3V;
    double a = 0.0, b = 0.0; // tabulation span
};

// Recursive amplitude functions of the large-frequency series
//   w = e^{i sqrt(mu) tau} sum_k A_k(tau) / (i sqrt(mu))^k,
//   A_0 = 1, A_{k+1} = -(1/2) A_k' - (1/2) int_0^tau V A_k.
// Values use memoized cumulative integrals; derivatives come from the
// recursion itself, which consumes V-derivatives of increasing order.
class olver_series {
public:
    olver_series(smooth_potential V, int order, std::size_t cells = 2049)
        : pot_(std::move(V)), order_(order) {
        if (order_ < 0) throw domain_error("series order must be nonnegative");
        if (!pot_.V) throw domain_error("potential callable missing");
        // cumulative tables I[V A_k] for k = 0 .. order
        auto nodes = uniform_nodes(pot_.a, pot_.b, cells);
        // anchor the integrals at tau = 0 (inside the span)
        if (pot_.a > 0.0 || pot_.b < 0.0)
            throw domain_error("series span must contain tau = 0");
        for (int k = 0; k <= order_; ++k) {
            auto f = [this, k](double tau) { return pot_.V(tau) * A(k, tau); };
            tables_.emplace_back(f, nodes);
            offsets_.push_back(tables_.back()(0.0));
        }
        abs_dA_next_ = integrate(
            [this](double tau) { return std::fabs(dA(order_ + 1, tau)); }, pot_.a, pot_.b, 1e-10);
    }

    int order() const { return order_; }
    const smooth_potential& potential() const { return pot_; }

    double A(int k, double tau) const {
        if (k == 0) return 1.0;
        return -0.5 * dA(k - 1, tau) - 0.5 * intVA(k - 1, tau);
    }
    double dA(int k, double tau) const {
        if (k == 0) return 0.0;
        return -0.5 * ddA(k - 1, tau) - 0.5 * pot_.V(tau) * A(k - 1, tau);
    }
    double ddA(int k, double tau) const {
        if (k == 0) return 0.0;
        return -0.5 * dddA(k - 1, tau) -
               0.5 * (dV_req(tau) * A(k - 1, tau) + pot_.V(tau) * dA(k - 1, tau));
    }
    double dddA(int k, double tau) const {
        if (k == 0) return 0.0;
        if (k == 1) return -0.5 * d2V_req(tau);
        return -0.5 * ddddA(k - 1, tau) -
               0.5 * (d2V_req(tau) * A(k - 1, tau) + 2.0 * dV_req(tau) * dA(k - 1, tau) +
                      pot_.V(tau) * ddA(k - 1, tau));
    }

    // residual identity: psi'' + (mu + V) psi for psi = w equals
    // -2 e^{i sqrt(mu) tau} A'_{order+1} / (i sqrt(mu))^order
    std::complex<double> w(double mu, double tau) const {
        const double th = std::sqrt(mu);
        const std::complex<double> i{0.0, 1.0};
        std::complex<double> S{};
        std::complex<double> den{1.0, 0.0};
        for (int k = 0; k <= order_; ++k) {
            S += A(k, tau) / den;
            den *= i * th;
        }
        return std::exp(i * th * tau) * S;
    }
    std::complex<double> dw(double mu, double tau) const {
        const double th = std::sqrt(mu);
        const std::complex<double> i{0.0, 1.0};
        std::complex<double> S{}, dS{};
        std::complex<double> den{1.0, 0.0};
        for (int k = 0; k <= order_; ++k) {
            S += A(k, tau) / den;
            dS += dA(k, tau) / den;
            den *= i * th;
        }
        return std::exp(i * th * tau) * (i * th * S + dS);
    }
    std::complex<double> residual(double mu, double tau) const {
        const double th = std::sqrt(mu);
        const std::complex<double> i{0.0, 1.0};
        return -2.0 * std::exp(i * th * tau) * dA(order_ + 1, tau) / std::pow(i * th, order_);
    }

    double int_abs_dA_next() const { return abs_dA_next_; }
    // the neglected remainder obeys |eps| <= C mu^{-(order+1)/2} int |A'_{order+1}|
    double error_scale(double mu) const {
        return std::pow(mu, -0.5 * (order_ + 1)) * abs_dA_next_;
    }

private:
    double intVA(int k, double tau) const { return tables_[k](tau) - offsets_[k]; }
    double dV_req(double tau) const {
        if (!pot_.dV) throw insufficient_smoothness("V' required for this series order");
        return pot_.dV(tau);
    }
    double d2V_req(double tau) const {
        if (!pot_.d2V) throw insufficient_smoothness("V'' required for this series order");
        return pot_.d2V(tau);
    }
    double ddddA(int k, double tau) const {
        if (k == 0) return 0.0;
        if (k == 1) {
            if (!pot_.d3V) throw insufficient_smoothness("V''' required for this series order");
            return -0.5 * pot_.d3V(tau);
        }
        return -0.5 * dddddA(k - 1, tau) -
               0.5 * (d3V_req(tau) * A(k - 1, tau) + 3.0 * d2V_req(tau) * dA(k - 1, tau) +
                      3.0 * dV_req(tau) * ddA(k - 1, tau) + pot_.V(tau) * dddA(k - 1, tau));
    }
    double dddddA(int, double) const {
        throw insufficient_smoothness("series order beyond the provided V derivatives");
    }
    double d3V_req(double tau) const {
        if (!pot_.d3V) throw insufficient_smoothness("V''' required for this series order");
        return pot_.d3V(tau);
    }

    smooth_potential pot_;
    int order_;
    std::vector<cumulative_integral> tables_;
    std::vector<double> offsets_;
    double abs_dA_next_ = 0.0;
};

inline std::complex<double> wkb_solution(const olver_series& series, double mu, double tau) {
    return series.w(mu, tau);
}

// Amplitude-phase form w = 2^{-1/2} (mu+V)^{-1/4} exp(i int_0^tau sqrt(mu+V))
// with the total-variation error budget
//   int (mu+V)^{-1/4} |d^2/dtau^2 (mu+V)^{-1/4}| dtau;  |eps| <= e^{budget} - 1.
class phase_integral_form {
public:
    phase_integral_form(smooth_potential V, double mu, std::size_t cells = 2049)
        : pot_(std::move(V)), mu_(mu) {
        auto nodes = uniform_nodes(pot_.a, pot_.b, cells);
        for (double t : nodes)
            if (!(mu_ + pot_.V(t) >= 1.0))
                throw precondition_violated("phase-integral form needs mu + V >= 1 on the span");
        phase_ = cumulative_integral(
            [this](double t) { return std::sqrt(mu_ + pot_.V(t)); }, nodes);
        phase_offset_ = phase_(0.0);
        budget_ = integrate(
            [this](double t) {
                const double u = mu_ + pot_.V(t);
                const double d2 = -0.25 * std::pow(u, -1.25) * pot_.d2V(t) +
                                  (5.0 / 16.0) * std::pow(u, -2.25) * pot_.dV(t) * pot_.dV(t);
                return std::pow(u, -0.25) * std::fabs(d2);
            },
            pot_.a, pot_.b, 1e-10);
    }

    std::complex<double> w(double tau) const {
        const double u = mu_ + pot_.V(tau);
        const std::complex<double> i{0.0, 1.0};
        return std::pow(2.0, -0.5) * std::pow(u, -0.25) *
               std::exp(i * (phase_(tau) - phase_offset_));
    }
    std::complex<double> dw(double tau) const {
        const double u = mu_ + pot_.V(tau);
        const std::complex<double> i{0.0, 1.0};
        const double amp = std::pow(2.0, -0.5) * std::pow(u, -0.25);
        const double damp = std::pow(2.0, -0.5) * (-0.25) * std::pow(u, -1.25) * pot_.dV(tau);
        return (damp + amp * i * std::sqrt(u)) * std::exp(i * (phase_(tau) - phase_offset_));
    }

    double mu() const { return mu_; }
    double error_budget() const { return budget_; }
    double error_bound() const { return std::expm1(budget_); }

private:
    smooth_potential pot_;
    double mu_;
    cumulative_integral phase_;
    double phase_offset_ = 0.0;
    double budget_ = 0.0;
};

inline std::complex<double> phase_integral_solution(const smooth_potential& V, double mu,
                                                    double tau) {
    return phase_integral_form(V, mu).w(tau);
}

} // namespace kgflrw
