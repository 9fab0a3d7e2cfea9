#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "kgflrw/dynamics.hpp"
#include "kgflrw/rootfind.hpp"
#include "kgflrw/wkb.hpp"

using namespace kgflrw;

namespace {

smooth_potential constant_potential(double c, double a, double b) {
    smooth_potential p;
    p.V = [c](double) { return c; };
    p.dV = [](double) { return 0.0; };
    p.d2V = [](double) { return 0.0; };
    p.d3V = [](double) { return 0.0; };
    p.a = a;
    p.b = b;
    return p;
}

smooth_potential gaussian_bump(double h, double a, double b) {
    smooth_potential p;
    p.V = [h](double t) { return h * std::exp(-t * t); };
    p.dV = [h](double t) { return -2.0 * t * h * std::exp(-t * t); };
    p.d2V = [h](double t) { return (4.0 * t * t - 2.0) * h * std::exp(-t * t); };
    p.d3V = [h](double t) { return (12.0 * t - 8.0 * t * t * t) * h * std::exp(-t * t); };
    p.a = a;
    p.b = b;
    return p;
}

} // namespace

TEST_CASE("series terms for a constant potential match the hand expansion") {
    const double c = 0.7;
    olver_series series(constant_potential(c, -1.0, 1.0), 3, 513);
    for (double tau : {-0.8, -0.3, 0.0, 0.4, 0.9}) {
        INFO("tau=" << tau);
        CHECK(series.A(0, tau) == 1.0);
        CHECK(std::fabs(series.A(1, tau) - (-c * tau / 2.0)) < 1e-12);
        CHECK(std::fabs(series.A(2, tau) - (c / 4.0 + c * c * tau * tau / 8.0)) < 1e-11);
        CHECK(std::fabs(series.A(3, tau) -
                        (-c * c * tau / 4.0 - c * c * c * tau * tau * tau / 48.0)) < 1e-10);
    }
}

TEST_CASE("zero potential collapses the series to a pure phase") {
    olver_series series(constant_potential(0.0, -5.0, 5.0), 3, 257);
    for (double mu : {1.0, 25.0}) {
        for (double tau : {-4.0, 0.0, 3.0}) {
            const std::complex<double> expect =
                std::exp(std::complex<double>{0.0, std::sqrt(mu) * tau});
            CHECK(std::abs(series.w(mu, tau) - expect) < 1e-12);
        }
    }
    CHECK(series.int_abs_dA_next() < 1e-12);
}

TEST_CASE("integrable potential gives finite limits of A_k") {
    olver_series series(gaussian_bump(1.0, -25.0, 25.0), 2, 2049);
    for (int k = 1; k <= 2; ++k) {
        const double lim1 = series.A(k, 15.0);
        const double lim2 = series.A(k, 24.0);
        INFO("k=" << k);
        CHECK(std::fabs(lim1 - lim2) < 1e-9 * (1.0 + std::fabs(lim2)));
        CHECK(std::isfinite(series.A(k, -24.0)));
    }
}

TEST_CASE("leading term dominates at large mu") {
    olver_series series(gaussian_bump(0.8, -10.0, 10.0), 2, 1025);
    const double tau = 1.3;
    for (double mu : {1e4, 1e6}) {
        const std::complex<double> lead =
            std::exp(std::complex<double>{0.0, std::sqrt(mu) * tau});
        CHECK(std::abs(series.w(mu, tau) - lead) < 2.0 / std::sqrt(mu));
    }
}

TEST_CASE("series residual obeys the analytic identity") {
    olver_series series(gaussian_bump(0.8, -10.0, 10.0), 2, 1025);
    const double mu = 50.0;
    // compare the closed-form residual against finite differences of dw
    for (double tau : {-2.0, 0.5, 1.7}) {
        const double h = 1e-5;
        const std::complex<double> d2w =
            (series.dw(mu, tau + h) - series.dw(mu, tau - h)) / (2.0 * h);
        const std::complex<double> res_fd =
            d2w + (mu + series.potential().V(tau)) * series.w(mu, tau);
        const std::complex<double> res = series.residual(mu, tau);
        INFO("tau=" << tau);
        CHECK(std::abs(res_fd - res) < 1e-6 * (1.0 + std::abs(res)));
    }
}

TEST_CASE("olver error decays like mu^{-(l+1)/2}") {
    const auto pot = gaussian_bump(0.8, -12.0, 12.0);
    const int l = 2; // l(3)
    olver_series series(pot, l, 2049);
    std::vector<double> xs, ys;
    for (double mu : {16.0, 32.0, 64.0, 128.0, 256.0, 512.0}) {
        synthetic_mode_system sys(pot.V, pot.a, pot.b, false, false, mu);
        mode_state s;
        s.mu = mu;
        s.tau = pot.a;
        s.psi = series.w(mu, pot.a);
        s.dpsi = series.dw(mu, pot.a);
        double err = 0.0;
        for (double tau = pot.a + 1.0; tau <= pot.b - 1.0; tau += 1.7) {
            s = sys.evolve(s, tau);
            err = std::fmax(err, std::abs(s.psi - series.w(mu, tau)));
        }
        xs.push_back(std::log(mu));
        ys.push_back(std::log(err));
    }
    const auto fit = fit_line(xs.begin(), xs.end(), ys.begin());
    INFO("slope=" << fit.slope);
    CHECK(fit.slope <= -0.5 * (l + 1) + 0.1);
}

TEST_CASE("phase integral form for zero potential") {
    phase_integral_form pif(constant_potential(0.0, -5.0, 5.0), 4.0, 257);
    for (double tau : {-3.0, 0.0, 2.0}) {
        const std::complex<double> expect =
            std::pow(2.0, -0.5) * std::pow(4.0, -0.25) *
            std::exp(std::complex<double>{0.0, 2.0 * tau});
        CHECK(std::abs(pif.w(tau) - expect) < 1e-12);
    }
    CHECK(pif.error_budget() < 1e-15);
}

TEST_CASE("phase integral precondition") {
    CHECK_THROWS_AS(phase_integral_form(constant_potential(-3.0, -1.0, 1.0), 2.0),
                    precondition_violated);
}

TEST_CASE("phase integral error decays like mu^{-3/2}") {
    const auto pot = gaussian_bump(0.8, -12.0, 12.0);
    std::vector<double> xs, ys;
    for (double mu : {16.0, 32.0, 64.0, 128.0, 256.0, 512.0}) {
        phase_integral_form pif(pot, mu, 4097);
        synthetic_mode_system sys(pot.V, pot.a, pot.b, false, false, mu);
        mode_state s;
        s.mu = mu;
        s.tau = pot.a;
        s.psi = pif.w(pot.a);
        s.dpsi = pif.dw(pot.a);
        double err = 0.0;
        for (double tau = pot.a + 1.0; tau <= pot.b - 1.0; tau += 1.7) {
            s = sys.evolve(s, tau);
            err = std::fmax(err, std::abs(s.psi / pif.w(tau) - 1.0));
        }
        xs.push_back(std::log(mu));
        ys.push_back(std::log(err));
    }
    const auto fit = fit_line(xs.begin(), xs.end(), ys.begin());
    INFO("slope=" << fit.slope);
    CHECK(fit.slope <= -1.5 + 0.1);
}

TEST_CASE("error budget decreases with mu") {
    const auto pot = gaussian_bump(0.8, -10.0, 10.0);
    double prev = std::numeric_limits<double>::infinity();
    for (double mu : {4.0, 16.0, 64.0, 256.0}) {
        phase_integral_form pif(pot, mu, 1025);
        CHECK(pif.error_budget() < prev);
        prev = pif.error_budget();
    }
}

TEST_CASE("phase integral wronskian normalization") {
    // with the 2^{-1/2}(mu+V)^{-1/4} amplitude, [w, w*] = w w*' - w' w* -> -i;
    // rescaling w to unit amplitude gives the -2i sqrt(mu+V) convention
    const auto pot = gaussian_bump(0.8, -10.0, 10.0);
    const double mu = 400.0;
    phase_integral_form pif(pot, mu, 1025);
    for (double tau : {-5.0, 0.0, 4.0}) {
        const auto w = pif.w(tau);
        const auto dw = pif.dw(tau);
        const std::complex<double> wr = w * std::conj(dw) - dw * std::conj(w);
        INFO("tau=" << tau);
        CHECK(std::abs(wr - std::complex<double>{0.0, -1.0}) < 1e-3);
    }
}

TEST_CASE("the two large-frequency forms agree") {
    const auto pot = gaussian_bump(0.8, -10.0, 10.0);
    olver_series series(pot, 2, 1025);
    for (double mu : {100.0, 400.0, 1600.0}) {
        phase_integral_form pif(pot, mu, 2049);
        const double scale = std::sqrt(2.0) * std::pow(mu, 0.25);
        for (double tau : {-4.0, -1.0, 0.7, 3.0}) {
            const auto w1 = series.w(mu, tau);
            const auto w2 = pif.w(tau) * scale * std::pow(1.0 + pot.V(tau) / mu, 0.25);
            INFO("mu=" << mu << " tau=" << tau);
            CHECK(std::abs(w1 - w2) <= 5.0 / std::sqrt(mu));
        }
    }
}
