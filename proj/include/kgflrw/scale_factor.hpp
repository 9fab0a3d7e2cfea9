#pragma once

#include <cmath>
#include <string>

#include "kgflrw/errors.hpp"

namespace kgflrw {

enum class model_kind {
    single_ended_future,
    single_ended_past,
    two_sided_product,
    explicit_big_rip1,
    explicit_big_rip2,
    explicit_big_rip3,
};

enum class side { past, future };

// Two-term power data c0*x^eta0 + c1*x^eta1 describing one side, where x is
// the distance to that side's endpoint.
struct power_pair {
    double c0 = 0.0;
    double eta0 = 0.0;
    double c1 = 0.0;
    double eta1 = 0.0;
};

namespace detail {

// k-th derivative of c*x^eta with respect to x
inline double pow_deriv(double c, double eta, double x, int k) {
    double f = c;
    for (int j = 0; j < k; ++j) f *= (eta - j);
    if (f == 0.0) return 0.0;
    return f * std::pow(x, eta - k);
}

inline double pair_deriv(const power_pair& p, double x, int k) {
    double v = pow_deriv(p.c0, p.eta0, x, k);
    if (p.c1 != 0.0) v += pow_deriv(p.c1, p.eta1, x, k);
    return v;
}

// all derivatives 0..4 of c x^eta from a single pow via the factor recurrence
inline void pow_derivs4(double c, double eta, double x, double out[5]) {
    double t = c * std::pow(x, eta);
    out[0] = t;
    for (int k = 1; k <= 4; ++k) {
        const double fac = eta - (k - 1);
        if (fac == 0.0 || t == 0.0) {
            for (int j = k; j <= 4; ++j) out[j] = 0.0;
            return;
        }
        t *= fac / x;
        out[k] = t;
    }
}

inline void pair_derivs4(const power_pair& p, double x, double out[5]) {
    pow_derivs4(p.c0, p.eta0, x, out);
    if (p.c1 != 0.0) {
        double o1[5];
        pow_derivs4(p.c1, p.eta1, x, o1);
        for (int k = 0; k <= 4; ++k) out[k] += o1[k];
    }
}

} // namespace detail

// Exact global closed forms for a(t): every derivative used downstream is
// analytic, and evaluations near an endpoint are done in the distance
// variable (t_plus - t or t - t_minus) to avoid cancellation.
class scale_factor_model {
public:
    static scale_factor_model single_ended_future(double t_minus, double t_plus,
                                                  double c0, double eta0,
                                                  double c1 = 0.0, double eta1 = 0.0) {
        scale_factor_model m;
        m.kind_ = model_kind::single_ended_future;
        m.t_minus_ = t_minus;
        m.t_plus_ = t_plus;
        m.plus_ = {c0, eta0, c1, c1 != 0.0 ? eta1 : eta0 + 1.0};
        m.validate();
        return m;
    }

    static scale_factor_model single_ended_past(double t_minus, double t_plus,
                                                double c0, double eta0,
                                                double c1 = 0.0, double eta1 = 0.0) {
        scale_factor_model m;
        m.kind_ = model_kind::single_ended_past;
        m.t_minus_ = t_minus;
        m.t_plus_ = t_plus;
        m.minus_ = {c0, eta0, c1, c1 != 0.0 ? eta1 : eta0 + 1.0};
        m.validate();
        return m;
    }

    static scale_factor_model two_sided_product(double t_minus, double t_plus,
                                                double c0_minus, double eta0_minus,
                                                double c0_plus, double eta0_plus) {
        scale_factor_model m;
        m.kind_ = model_kind::two_sided_product;
        m.t_minus_ = t_minus;
        m.t_plus_ = t_plus;
        m.minus_ = {c0_minus, eta0_minus, 0.0, eta0_minus + 1.0};
        m.plus_ = {c0_plus, eta0_plus, 0.0, eta0_plus + 1.0};
        m.validate();
        return m;
    }

    // a(t) = 2/(t+-t), 9/(t+-t)^2, 64/(t+-t)^3
    static scale_factor_model explicit_big_rip(int which, double t_minus, double t_plus) {
        scale_factor_model m;
        switch (which) {
            case 1: m.kind_ = model_kind::explicit_big_rip1; m.plus_ = {2.0, -1.0, 0.0, 0.0}; break;
            case 2: m.kind_ = model_kind::explicit_big_rip2; m.plus_ = {9.0, -2.0, 0.0, -1.0}; break;
            case 3: m.kind_ = model_kind::explicit_big_rip3; m.plus_ = {64.0, -3.0, 0.0, -2.0}; break;
            default: throw domain_error("explicit_big_rip: which must be 1, 2 or 3");
        }
        m.t_minus_ = t_minus;
        m.t_plus_ = t_plus;
        m.validate();
        return m;
    }

    model_kind kind() const { return kind_; }
    double t_minus() const { return t_minus_; }
    double t_plus() const { return t_plus_; }
    double span() const { return t_plus_ - t_minus_; }

    // d^k a / dt^k, k <= 4, from the closed form
    double derivative(double t, int k) const {
        switch (kind_) {
            case model_kind::single_ended_future:
            case model_kind::explicit_big_rip1:
            case model_kind::explicit_big_rip2:
            case model_kind::explicit_big_rip3:
                return derivative_from_plus(t_plus_ - t, k);
            case model_kind::single_ended_past:
                return derivative_from_minus(t - t_minus_, k);
            case model_kind::two_sided_product:
                return product_derivative(t - t_minus_, t_plus_ - t, k);
        }
        return 0.0;
    }

    double value(double t) const { return derivative(t, 0); }

    // evaluation with the distance to t_plus (v > 0) given exactly
    double derivative_from_plus(double v, int k) const {
        const double sgn = (k % 2 == 0) ? 1.0 : -1.0; // d/dt = -d/dv
        switch (kind_) {
            case model_kind::single_ended_future:
            case model_kind::explicit_big_rip1:
            case model_kind::explicit_big_rip2:
            case model_kind::explicit_big_rip3:
                return sgn * detail::pair_deriv(plus_, v, k);
            case model_kind::single_ended_past:
                return derivative_from_minus(span() - v, k);
            case model_kind::two_sided_product:
                return product_derivative(span() - v, v, k);
        }
        return 0.0;
    }

    double derivative_from_minus(double w, int k) const {
        switch (kind_) {
            case model_kind::single_ended_past:
                return detail::pair_deriv(minus_, w, k);
            case model_kind::single_ended_future:
            case model_kind::explicit_big_rip1:
            case model_kind::explicit_big_rip2:
            case model_kind::explicit_big_rip3:
                return derivative_from_plus(span() - w, k);
            case model_kind::two_sided_product:
                return product_derivative(w, span() - w, k);
        }
        return 0.0;
    }

    // d^k a/dt^k for k = 0..4 in one call (hot path of the mode equations)
    void derivative_block_from_plus(double v, double out[5]) const {
        switch (kind_) {
            case model_kind::single_ended_future:
            case model_kind::explicit_big_rip1:
            case model_kind::explicit_big_rip2:
            case model_kind::explicit_big_rip3:
                detail::pair_derivs4(plus_, v, out);
                out[1] = -out[1];
                out[3] = -out[3];
                return;
            case model_kind::single_ended_past:
                derivative_block_from_minus(span() - v, out);
                return;
            case model_kind::two_sided_product:
                product_block(span() - v, v, out);
                return;
        }
    }

    void derivative_block_from_minus(double w, double out[5]) const {
        switch (kind_) {
            case model_kind::single_ended_past:
                detail::pair_derivs4(minus_, w, out);
                return;
            case model_kind::single_ended_future:
            case model_kind::explicit_big_rip1:
            case model_kind::explicit_big_rip2:
            case model_kind::explicit_big_rip3:
                derivative_block_from_plus(span() - w, out);
                return;
            case model_kind::two_sided_product:
                product_block(w, span() - w, out);
                return;
        }
    }

    void derivative_block(double t, double out[5]) const {
        switch (kind_) {
            case model_kind::single_ended_future:
            case model_kind::explicit_big_rip1:
            case model_kind::explicit_big_rip2:
            case model_kind::explicit_big_rip3:
                derivative_block_from_plus(t_plus_ - t, out);
                return;
            case model_kind::single_ended_past:
                derivative_block_from_minus(t - t_minus_, out);
                return;
            case model_kind::two_sided_product:
                product_block(t - t_minus_, t_plus_ - t, out);
                return;
        }
    }

    bool side_singular(side s) const {
        switch (kind_) {
            case model_kind::single_ended_future:
            case model_kind::explicit_big_rip1:
            case model_kind::explicit_big_rip2:
            case model_kind::explicit_big_rip3:
                return s == side::future;
            case model_kind::single_ended_past:
                return s == side::past;
            case model_kind::two_sided_product:
                return true;
        }
        return false;
    }

    // The (c0, eta0, c1, eta1) pair describing a(t) near the side's endpoint.
    // For the product model the raw parameters are re-derived into an
    // effective one-sided expansion: with L = t_plus - t_minus and
    // v = t_plus - t,
    //   a(t) = c0m (L-v)^e0m * c0p v^e0p
    //        = [c0m c0p L^e0m] v^e0p - [e0m c0m c0p L^(e0m-1)] v^(e0p+1) + ...
    // so c0_eff = c0m c0p L^e0m, eta1_eff = eta0 + 1, and symmetrically at
    // t_minus.
    power_pair effective(side s) const {
        if (!side_singular(s)) throw no_singularity_on_side("model is regular at this endpoint");
        const double L = span();
        switch (kind_) {
            case model_kind::single_ended_future:
            case model_kind::explicit_big_rip1:
            case model_kind::explicit_big_rip2:
            case model_kind::explicit_big_rip3:
                return plus_;
            case model_kind::single_ended_past:
                return minus_;
            case model_kind::two_sided_product: {
                const power_pair& near = (s == side::future) ? plus_ : minus_;
                const power_pair& far = (s == side::future) ? minus_ : plus_;
                power_pair eff;
                eff.c0 = near.c0 * far.c0 * std::pow(L, far.eta0);
                eff.eta0 = near.eta0;
                eff.c1 = -far.eta0 * near.c0 * far.c0 * std::pow(L, far.eta0 - 1.0);
                eff.eta1 = near.eta0 + 1.0;
                return eff;
            }
        }
        return {};
    }

    const power_pair& raw_plus() const { return plus_; }
    const power_pair& raw_minus() const { return minus_; }

private:
    void validate() const {
        if (!(t_minus_ < t_plus_)) throw domain_error("scale factor requires t_minus < t_plus");
        auto check_pair = [](const power_pair& p) {
            if (p.c0 <= 0.0) throw domain_error("c0 must be positive");
            if (p.c1 != 0.0 && !(p.eta1 > p.eta0)) throw domain_error("eta1 must exceed eta0");
        };
        if (kind_ == model_kind::single_ended_future) check_pair(plus_);
        if (kind_ == model_kind::single_ended_past) check_pair(minus_);
        if (kind_ == model_kind::two_sided_product) {
            check_pair(minus_);
            check_pair(plus_);
        }
        // positivity of a on the open interval
        const int n = 1024;
        for (int i = 1; i < n; ++i) {
            const double t = t_minus_ + span() * i / n;
            if (!(value(t) > 0.0))
                throw domain_error("a(t) must be positive on (t_minus, t_plus); violated near t=" +
                                   std::to_string(t));
        }
    }

    // d^k/dt^k [ A(w) * B(v) ], w = t - t_minus, v = t_plus - t
    double product_derivative(double w, double v, int k) const {
        static const int binom[5][5] = {
            {1, 0, 0, 0, 0}, {1, 1, 0, 0, 0}, {1, 2, 1, 0, 0}, {1, 3, 3, 1, 0}, {1, 4, 6, 4, 1}};
        double sum = 0.0;
        for (int j = 0; j <= k; ++j) {
            const double Aj = detail::pair_deriv(minus_, w, j);           // d^j A/dw^j
            const double Bkj = detail::pair_deriv(plus_, v, k - j);       // d^(k-j) B/dv^(k-j)
            const double sgn = ((k - j) % 2 == 0) ? 1.0 : -1.0;           // dv/dt = -1
            sum += binom[k][j] * Aj * sgn * Bkj;
        }
        return sum;
    }

    void product_block(double w, double v, double out[5]) const {
        static const int binom[5][5] = {
            {1, 0, 0, 0, 0}, {1, 1, 0, 0, 0}, {1, 2, 1, 0, 0}, {1, 3, 3, 1, 0}, {1, 4, 6, 4, 1}};
        double A[5], B[5];
        detail::pair_derivs4(minus_, w, A);
        detail::pair_derivs4(plus_, v, B);
        for (int k = 1; k <= 4; k += 2) B[k] = -B[k]; // dv/dt = -1
        for (int k = 0; k <= 4; ++k) {
            double sum = 0.0;
            for (int j = 0; j <= k; ++j) sum += binom[k][j] * A[j] * B[k - j];
            out[k] = sum;
        }
    }

    model_kind kind_ = model_kind::single_ended_future;
    double t_minus_ = 0.0, t_plus_ = 1.0;
    power_pair minus_{}, plus_{};
};

} // namespace kgflrw
