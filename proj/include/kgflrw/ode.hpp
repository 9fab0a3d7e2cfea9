#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "kgflrw/errors.hpp"

namespace kgflrw {

// Dormand-Prince 5(4) embedded pair with the classic quartic dense output.
// Integrates y' = f(t, y) for y in R^N; direction may be increasing or
// decreasing t. A per-step cap |h| <= max_step(t) supports approaching
// singular endpoints without stepping over them.

struct ode_options {
    double rtol = 1e-10;
    double atol = 1e-12;
    double initial_step = 0.0;                 // 0: automatic
    double max_step = std::numeric_limits<double>::infinity();
    std::function<double(double)> step_cap;    // optional, evaluated at current t
    std::size_t max_steps = 50'000'000;
};

template <std::size_t N>
struct dense_step {
    double t0 = 0, h = 0;
    std::array<double, N> r1{}, r2{}, r3{}, r4{}, r5{};

    std::array<double, N> eval(double t) const {
        const double th = (t - t0) / h, th1 = 1.0 - th;
        std::array<double, N> y;
        for (std::size_t i = 0; i < N; ++i)
            y[i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
        return y;
    }
    // interpolant: p(th) = r1 + r2*th + r3*th(1-th) + r4*th^2(1-th) + r5*th^2(1-th)^2
    std::array<double, N> eval_derivative(double t) const {
        const double th = (t - t0) / h;
        std::array<double, N> d;
        for (std::size_t i = 0; i < N; ++i)
            d[i] = (r2[i] + r3[i] * (1 - 2 * th) + r4[i] * th * (2 - 3 * th) +
                    r5[i] * 2 * th * (1 - th) * (1 - 2 * th)) / h;
        return d;
    }
};

template <std::size_t N, class RHS>
class dopri5 {
public:
    using state = std::array<double, N>;

    dopri5(RHS rhs, ode_options opt = {}) : f_(std::move(rhs)), opt_(opt) {}

    // Integrate from (t0,y0) to t1. `observer`, if provided, is called after
    // each accepted step as observer(t, y, dense_step). Returns y(t1).
    template <class Obs>
    state integrate(double t0, const state& y0, double t1, Obs&& observer) {
        double t = t0;
        state y = y0;
        const double dir = (t1 >= t0) ? 1.0 : -1.0;
        if (t1 == t0) return y;

        state k1;
        f_(t, y, k1);
        double h = opt_.initial_step != 0.0 ? std::fabs(opt_.initial_step) : initial_step(t, y, k1, dir);

        double err_old = 1e-4;
        for (std::size_t step = 0; step < opt_.max_steps; ++step) {
            h = std::fmin(h, opt_.max_step);
            if (opt_.step_cap) h = std::fmin(h, opt_.step_cap(t));
            bool last = false;
            if (h >= std::fabs(t1 - t)) { h = std::fabs(t1 - t); last = true; }
            if (h <= std::fabs(t) * 4.0 * std::numeric_limits<double>::epsilon() + 1e-300)
                throw tolerance_failure("ode step size underflow at t=" + std::to_string(t));

            const double hs = dir * h;
            state k2, k3, k4, k5, k6, k7, ytmp, ynew;
            auto stage = [&](const state& yy, double c, state& out) { f_(t + c * hs, yy, out); };

            for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + hs * a21 * k1[i];
            stage(ytmp, c2, k2);
            for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
            stage(ytmp, c3, k3);
            for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            stage(ytmp, c4, k4);
            for (std::size_t i = 0; i < N; ++i)
                ytmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            stage(ytmp, c5, k5);
            for (std::size_t i = 0; i < N; ++i)
                ytmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
            stage(ytmp, 1.0, k6);
            for (std::size_t i = 0; i < N; ++i)
                ynew[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
            stage(ynew, 1.0, k7);

            double err = 0.0;
            bool finite = true;
            for (std::size_t i = 0; i < N; ++i) {
                if (!std::isfinite(ynew[i])) { finite = false; break; }
                const double sk = opt_.atol + opt_.rtol * std::fmax(std::fabs(y[i]), std::fabs(ynew[i]));
                const double ei = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                err += (ei / sk) * (ei / sk);
            }
            err = std::sqrt(err / N);

            if (finite && err <= 1.0) {
                dense_step<N> ds;
                ds.t0 = t;
                ds.h = hs;
                for (std::size_t i = 0; i < N; ++i) {
                    const double ydiff = ynew[i] - y[i];
                    const double bspl = hs * k1[i] - ydiff;
                    ds.r1[i] = y[i];
                    ds.r2[i] = ydiff;
                    ds.r3[i] = bspl;
                    ds.r4[i] = ydiff - hs * k7[i] - bspl;
                    ds.r5[i] = hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
                }
                t = last ? t1 : t + hs;
                y = ynew;
                k1 = k7; // FSAL
                observer(t, y, ds);
                if (last) return y;
                const double fac = 0.9 * std::pow(err > 1e-30 ? err : 1e-30, -0.7 / 5.0) *
                                   std::pow(err_old, 0.4 / 5.0);
                h *= std::fmin(5.0, std::fmax(0.2, fac));
                err_old = std::fmax(err, 1e-4);
            } else {
                const double fac = finite ? std::fmax(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
                h *= fac;
            }
        }
        throw tolerance_failure("ode exceeded max step count");
    }

    state integrate(double t0, const state& y0, double t1) {
        return integrate(t0, y0, t1, [](double, const state&, const dense_step<N>&) {});
    }

private:
    double initial_step(double t, const state& y, const state& k1, double dir) const {
        double dnf = 0, dny = 0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sk = opt_.atol + opt_.rtol * std::fabs(y[i]);
            dnf += (k1[i] / sk) * (k1[i] / sk);
            dny += (y[i] / sk) * (y[i] / sk);
        }
        double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
        h = std::fmin(h, opt_.max_step);
        if (opt_.step_cap) h = std::fmin(h, 0.5 * opt_.step_cap(t));
        (void)dir;
        return std::fmax(h, 1e-300);
    }

    RHS f_;
    ode_options opt_;

    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                            a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

template <std::size_t N, class RHS, class Obs>
std::array<double, N> integrate_ode(RHS&& rhs, double t0, const std::array<double, N>& y0,
                                    double t1, const ode_options& opt, Obs&& obs) {
    dopri5<N, std::decay_t<RHS>> solver(std::forward<RHS>(rhs), opt);
    return solver.integrate(t0, y0, t1, std::forward<Obs>(obs));
}

template <std::size_t N, class RHS>
std::array<double, N> integrate_ode(RHS&& rhs, double t0, const std::array<double, N>& y0,
                                    double t1, const ode_options& opt = {}) {
    dopri5<N, std::decay_t<RHS>> solver(std::forward<RHS>(rhs), opt);
    return solver.integrate(t0, y0, t1);
}

} // namespace kgflrw
