#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <functional>
#include <vector>

#include "kgflrw/errors.hpp"

namespace kgflrw {

// Adaptive Gauss-Kronrod for smooth integrands. The depth cap matters: the
// G7/K15 error estimate has a roundoff floor above tight tolerances, and
// without the cap the recursion burns 2^15 panels on integrands that were
// machine-exact three levels up.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-12, unsigned max_depth = 8) {
    if (a == b) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        std::forward<F>(f), a, b, max_depth, rel_tol);
}

// Double-exponential rule; tolerates integrable algebraic singularities at
// either endpoint (the integrand is never evaluated at a or b).
template <class F>
double integrate_endpoint_singular(F&& f, double a, double b, double tol = 1e-13) {
    if (a == b) return 0.0;
    boost::math::quadrature::tanh_sinh<double> rule;
    return rule.integrate(std::forward<F>(f), a, b, tol);
}

// Cumulative integral table: F(x) = \int_a^x f, built once on a fixed grid and
// queried at arbitrary points with a Gauss-Legendre finish from the nearest
// node. Grid nodes are caller-supplied (monotone increasing).
class cumulative_integral {
public:
    cumulative_integral() = default;

    template <class F>
    cumulative_integral(F f, std::vector<double> nodes)
        : nodes_(std::move(nodes)), f_(std::move(f)) {
        table_.resize(nodes_.size(), 0.0);
        for (std::size_t i = 1; i < nodes_.size(); ++i)
            table_[i] = table_[i - 1] + gl7(f_, nodes_[i - 1], nodes_[i]);
    }

    double operator()(double x) const {
        if (nodes_.empty()) return 0.0;
        if (x <= nodes_.front()) return gl7(f_, nodes_.front(), x);
        auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
        std::size_t i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
        if (i >= nodes_.size() - 1) i = nodes_.size() - 2;
        if (x == nodes_[i]) return table_[i];
        return table_[i] + gl7(f_, nodes_[i], x);
    }

    double total() const { return table_.empty() ? 0.0 : table_.back(); }
    const std::vector<double>& nodes() const { return nodes_; }

    template <class F>
    static double gl7(const F& f, double a, double b) {
        // 7-point Gauss-Legendre on [a,b]
        static const double xg[7] = {
            -0.9491079123427585245262, -0.7415311855993944398639,
            -0.4058451513773971669066, 0.0,
            0.4058451513773971669066,  0.7415311855993944398639,
            0.9491079123427585245262};
        static const double wg[7] = {
            0.1294849661688696932706, 0.2797053914892766679015,
            0.3818300505051189449504, 0.4179591836734693877551,
            0.3818300505051189449504, 0.2797053914892766679015,
            0.1294849661688696932706};
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        double s = 0.0;
        for (int k = 0; k < 7; ++k) s += wg[k] * f(c + h * xg[k]);
        return s * h;
    }

private:
    std::vector<double> nodes_;
    std::vector<double> table_;
    std::function<double(double)> f_;
};

inline std::vector<double> uniform_nodes(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    v.back() = b;
    return v;
}

// Geometric grid accumulating toward b: distances to b shrink by a constant
// ratio from (b-a) down to sigma_min. Nodes that round onto b or onto their
// predecessor are dropped.
inline std::vector<double> geometric_nodes_toward(double a, double b, double sigma_min,
                                                  std::size_t per_decade = 32) {
    std::vector<double> v;
    const double span = b - a;
    const double decades = std::log10(span / sigma_min);
    const std::size_t n = static_cast<std::size_t>(std::ceil(std::fmax(decades, 0.1) * per_decade)) + 1;
    v.reserve(n + 1);
    v.push_back(a);
    for (std::size_t i = 1; i <= n; ++i) {
        double sigma = span * std::pow(sigma_min / span, static_cast<double>(i) / n);
        const double node = b - sigma;
        if (node > v.back() && node < b) v.push_back(node);
    }
    return v;
}

} // namespace kgflrw
