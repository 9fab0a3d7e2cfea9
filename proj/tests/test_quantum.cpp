#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "kgflrw/bogoliubov.hpp"
#include "kgflrw/ode.hpp"

using namespace kgflrw;

namespace {

conformal_chart symmetric_crunch_chart() {
    return conformal_chart(scale_factor_model::two_sided_product(0.0, 2.0, 1.0, 0.5, 1.0, 0.5),
                           1.0);
}

} // namespace

TEST_CASE("in-vacuum seed normalization") {
    in_out_basis basis;
    basis.tau_finite = true;
    basis.tau_endpoint = -1.0;
    basis.V_limit = 0.0;
    SECTION("unit frequency values") {
        const auto s = in_vacuum_seed(basis, 1.0);
        CHECK(std::abs(s.psi - std::pow(2.0, -0.5)) < 1e-15);
        CHECK(std::abs(s.dpsi - complexd{0.0, std::pow(2.0, -0.5)}) < 1e-15);
    }
    SECTION("product of magnitudes is 1/2 for every mu") {
        for (double mu : {0.3, 1.0, 7.0, 300.0}) {
            const auto s = in_vacuum_seed(basis, mu);
            CHECK(std::fabs(std::abs(s.psi) * std::abs(s.dpsi) - 0.5) < 1e-14);
        }
    }
    SECTION("charge normalization is i") {
        for (double mu : {0.5, 4.0, 50.0}) {
            const auto s = in_vacuum_seed(basis, mu);
            CHECK(std::abs(charge(s) - complexd{0.0, 1.0}) < 1e-14);
        }
    }
    SECTION("infrared guard") {
        basis.V_limit = -2.0;
        CHECK_THROWS_AS(in_vacuum_seed(basis, 1.0), negative_frequency);
    }
}

TEST_CASE("static universe produces no mixing") {
    // a == 2 exactly: V is constant, so the in-vacuum stays a pure positive
    // frequency state and (alpha, beta) = (1, 0)
    conformal_chart chart(scale_factor_model::single_ended_future(0.0, 1.0, 2.0, 0.0), 0.5);
    const auto cp = coupling_spec::conformal_coupling(3, 1.0);
    for (double mu : {1.0, 5.0}) {
        const auto r = bogoliubov_mode(chart, cp, mu);
        INFO("mu=" << mu);
        // alpha carries the free propagation phase e^{i omega (tau_p - tau_m)}
        CHECK(std::fabs(std::abs(r.alpha) - 1.0) < 1e-7);
        CHECK(std::abs(r.beta) < 1e-7);
        CHECK(r.wronskian_residual < 1e-8);
    }
}

TEST_CASE("steep step against the exact matching formula") {
    // synthetic pipeline: positive-frequency seed, tanh ramp of width w;
    // the w -> 0 limit is beta = (omega_p - omega_m)/(2 sqrt(omega_p omega_m))
    const double Vm = 0.0, Vp = 3.0, mu = 1.0;
    const double om = std::sqrt(mu + Vm), op = std::sqrt(mu + Vp);
    const double beta_exact = (op - om) / (2.0 * std::sqrt(op * om));
    double prev_err = 1e300;
    for (double w : {0.04, 0.02, 0.01}) {
        auto V = [=](double tau) { return Vm + (Vp - Vm) * 0.5 * (1.0 + std::tanh(tau / w)); };
        synthetic_mode_system sys(V, -1e9, 1e9, false, false, mu);
        mode_state s;
        s.mu = mu;
        s.tau = -40.0;
        s.psi = std::pow(2.0 * om, -0.5) * std::exp(complexd{0.0, om * s.tau});
        s.dpsi = complexd{0.0, om} * s.psi;
        const auto sc = scattering_data_infinite_tau(sys, s, side::future, Vp, {60.0, 120.0, 240.0});
        const double err = std::abs(std::abs(sc.beta) - beta_exact);
        INFO("w=" << w << " beta=" << std::abs(sc.beta) << " exact=" << beta_exact);
        CHECK(err < prev_err * 1.000001);
        CHECK(std::fabs(std::norm(sc.alpha) - std::norm(sc.beta) - 1.0) < 1e-8);
        prev_err = err;
    }
    CHECK(prev_err < 5e-4);
}

TEST_CASE("bang-to-crunch modes preserve the normalization") {
    const auto chart = symmetric_crunch_chart();
    const auto cp = coupling_spec::conformal_coupling(3, 1.0);
    for (double mu : {1.0, 2.0, 5.0, 25.0, 100.0}) {
        const auto r = bogoliubov_mode(chart, cp, mu);
        INFO("mu=" << mu << " |beta|=" << std::abs(r.beta));
        CHECK(r.wronskian_residual < 1e-8);
    }
}

TEST_CASE("time reversal of a symmetric universe preserves |beta|") {
    const auto chart = symmetric_crunch_chart();
    const auto cp = coupling_spec::conformal_coupling(3, 1.0);
    for (double mu : {2.0, 10.0}) {
        bogoliubov_options fwd, rev;
        rev.reversed = true;
        const auto a = bogoliubov_mode(chart, cp, mu, fwd);
        const auto b = bogoliubov_mode(chart, cp, mu, rev);
        INFO("mu=" << mu);
        CHECK(std::fabs(std::abs(a.beta) - std::abs(b.beta)) < 1e-8);
    }
}

TEST_CASE("modes do not mix: joint integration equals solo integration") {
    // integrate two modes through one shared adaptive stepper; the absence of
    // cross terms must reproduce the solo trajectories
    const auto chart = symmetric_crunch_chart();
    const auto cp = coupling_spec::conformal_coupling(3, 1.0);
    const double mu1 = 2.0, mu2 = 13.0;
    auto V = [&](double tau) {
        const double t = chart.invert(tau);
        return potential_derivs_at_t(chart, cp, t).V;
    };
    std::array<double, 8> y{1.0, 0.0, 0.0, 0.5, 0.3, -0.2, 0.1, 0.9};
    ode_options oo;
    oo.rtol = 1e-11;
    oo.atol = 1e-13;
    auto rhs = [&](double tau, const std::array<double, 8>& yy, std::array<double, 8>& dy) {
        const double w1 = mu1 + V(tau), w2 = mu2 + V(tau);
        dy[0] = yy[2];
        dy[1] = yy[3];
        dy[2] = -w1 * yy[0];
        dy[3] = -w1 * yy[1];
        dy[4] = yy[6];
        dy[5] = yy[7];
        dy[6] = -w2 * yy[4];
        dy[7] = -w2 * yy[5];
    };
    const double tau0 = 0.0, tau1 = 1.2;
    const auto joint = integrate_ode<8>(rhs, tau0, y, tau1, oo);

    solver_options so;
    so.rtol = 1e-11;
    so.atol = 1e-13;
    chart_mode_system sys1(chart, cp, mu1, so), sys2(chart, cp, mu2, so);
    mode_state s1{mu1, tau0, {1.0, 0.0}, {0.0, 0.5}};
    mode_state s2{mu2, tau0, {0.3, -0.2}, {0.1, 0.9}};
    const auto r1 = sys1.evolve(s1, tau1);
    const auto r2 = sys2.evolve(s2, tau1);
    CHECK(std::abs(r1.psi - complexd{joint[0], joint[1]}) < 1e-10);
    CHECK(std::abs(r1.dpsi - complexd{joint[2], joint[3]}) < 1e-10);
    CHECK(std::abs(r2.psi - complexd{joint[4], joint[5]}) < 1e-10);
    CHECK(std::abs(r2.dpsi - complexd{joint[6], joint[7]}) < 1e-10);
}

TEST_CASE("pair creation bookkeeping") {
    SECTION("zero betas give zero pairs") {
        manifold_spectrum base;
        base.d = 3;
        std::vector<bogoliubov_result> modes;
        shifted_spectrum spec;
        spec.base = base;
        for (int k = 1; k <= 60; ++k) {
            const double mu = k * k * 0.5;
            spec.mu_ladder.push_back({mu, 2, mu});
            bogoliubov_result r;
            r.mu = mu;
            r.alpha = 1.0;
            r.beta = 0.0;
            modes.push_back(r);
        }
        const auto pc = pair_creation_number(spec, modes);
        CHECK(pc.N_pairs == 0.0);
    }
    SECTION("synthetic decay recovers the slope") {
        shifted_spectrum spec;
        spec.base.d = 3;
        std::vector<bogoliubov_result> modes;
        for (int k = 1; k <= 400; ++k) {
            const double mu = 0.5 * k * k;
            spec.base.ladder.push_back({mu, 4});
            spec.mu_ladder.push_back({mu, 4, mu});
            bogoliubov_result r;
            r.mu = mu;
            r.beta = 0.3 * std::pow(mu, -1.5);
            r.alpha = std::sqrt(1.0 + std::norm(r.beta));
            modes.push_back(r);
        }
        const auto pc = pair_creation_number(spec, modes);
        CHECK(std::fabs(pc.decay_slope + 1.5) < 1e-6);
        CHECK(pc.zeta_tail > 0.0);
        // partial sums converge: the increment beyond mu_max is below the tail
        double full = 0.0, partial = 0.0;
        for (std::size_t i = 0; i < modes.size(); ++i) {
            const double term = 4.0 * std::norm(modes[i].beta);
            full += term;
            if (i < modes.size() / 2) partial += term;
        }
        CHECK(full - partial <= pc.zeta_tail * 10.0);
    }
    SECTION("insufficient decades is rejected") {
        shifted_spectrum spec;
        spec.base.d = 3;
        std::vector<bogoliubov_result> modes;
        for (int k = 1; k <= 5; ++k) {
            const double mu = 1.0 + k;
            spec.mu_ladder.push_back({mu, 1, mu});
            bogoliubov_result r;
            r.mu = mu;
            r.beta = 0.1;
            modes.push_back(r);
        }
        CHECK_THROWS_AS(pair_creation_number(spec, modes), insufficient_decades);
    }
}

TEST_CASE("hilbert-schmidt certificate arithmetic") {
    CHECK(hilbert_schmidt_certificate(3, -1.5).certified);
    CHECK(std::fabs(hilbert_schmidt_certificate(3, -1.5).margin - 1.5) < 1e-14);
    CHECK(hilbert_schmidt_certificate(4, -1.5).certified);
    CHECK(hilbert_schmidt_certificate(5, -1.5).certified);
    CHECK(std::fabs(hilbert_schmidt_certificate(5, -1.5).margin - 0.5) < 1e-14);
    CHECK_FALSE(hilbert_schmidt_certificate(7, -1.5).certified);
    CHECK(std::fabs(hilbert_schmidt_certificate(7, -1.5).margin + 0.5) < 1e-14);
}
