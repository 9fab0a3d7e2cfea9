#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

#include "kgflrw/errors.hpp"

namespace kgflrw {

enum class manifold_kind { sphere, flat_torus };

struct spectrum_entry {
    double lambda = 0.0;
    std::int64_t mult = 0;
};

// Eigenvalue ladder of -Laplace on a round sphere S^d or a flat torus T^d,
// sorted ascending with equal eigenvalues merged.
struct manifold_spectrum {
    manifold_kind kind = manifold_kind::sphere;
    int d = 3;
    double radius = 1.0;               // sphere
    std::vector<double> lengths;       // torus
    double R_gamma = 0.0;
    std::vector<spectrum_entry> ladder;

    // cumulative count N(Lambda) including multiplicities
    double counting(double Lambda) const {
        double n = 0;
        for (const auto& e : ladder) {
            if (e.lambda > Lambda) break;
            n += static_cast<double>(e.mult);
        }
        return n;
    }
};

inline int l_of_d(int d) {
    if (d < 3) throw domain_error("l_of_d requires d >= 3");
    return std::max(2, d / 2);
}

// lambda_k = k(k+d-1)/r^2 with mult (2k+d-1) (k+d-2)! / (k! (d-1)!)
inline manifold_spectrum build_sphere(int d, double radius, double cutoff,
                                      std::size_t budget = 1'000'000) {
    if (d < 3) throw domain_error("sphere dimension must be >= 3");
    if (!(radius > 0.0)) throw domain_error("sphere radius must be positive");
    if (!(cutoff > 0.0)) throw domain_error("cutoff must be positive");
    manifold_spectrum sp;
    sp.kind = manifold_kind::sphere;
    sp.d = d;
    sp.radius = radius;
    sp.R_gamma = d * (d - 1.0) / (radius * radius);
    long double mult = 1.0L; // k = 0
    for (std::int64_t k = 0;; ++k) {
        const double lam = static_cast<double>(k) * (k + d - 1.0) / (radius * radius);
        if (lam > cutoff) break;
        if (sp.ladder.size() >= budget)
            throw cutoff_too_large("sphere ladder would exceed the entry budget");
        if (k > 0) mult *= (2.0L * k + d - 1.0L) / (2.0L * k + d - 3.0L) * (k + d - 2.0L) / k;
        sp.ladder.push_back({lam, static_cast<std::int64_t>(std::llroundl(mult))});
    }
    return sp;
}

// eigenvalues sum_i (2 pi n_i / L_i)^2 over integer vectors n; multiplicities
// by lattice count. Equal eigenvalues are merged exactly when the squared
// frequencies are commensurate (rational ratios, denominator <= 4096),
// otherwise with absolute tolerance 1e-12.
inline manifold_spectrum build_torus(std::vector<double> lengths, double cutoff,
                                     std::size_t budget = 1'000'000) {
    const int d = static_cast<int>(lengths.size());
    if (d < 3) throw domain_error("torus dimension must be >= 3");
    for (double L : lengths)
        if (!(L > 0.0)) throw domain_error("torus lengths must be positive");
    if (!(cutoff > 0.0)) throw domain_error("cutoff must be positive");

    manifold_spectrum sp;
    sp.kind = manifold_kind::flat_torus;
    sp.d = d;
    sp.lengths = lengths;
    sp.R_gamma = 0.0;

    const double two_pi = 6.28318530717958647692529;
    std::vector<double> c(d);      // c_i = (2 pi / L_i)^2
    std::vector<std::int64_t> n_max(d);
    double count_est = 1.0;
    for (int i = 0; i < d; ++i) {
        c[i] = (two_pi / lengths[i]) * (two_pi / lengths[i]);
        n_max[i] = static_cast<std::int64_t>(std::floor(std::sqrt(cutoff / c[i])));
        count_est *= static_cast<double>(2 * n_max[i] + 1);
    }
    if (count_est > static_cast<double>(budget) * 64.0)
        throw cutoff_too_large("torus lattice enumeration would exceed the entry budget");

    // rational keys: c_i / c_0 = p_i / q_i
    bool commensurate = true;
    std::vector<std::int64_t> p(d), q(d);
    for (int i = 0; i < d; ++i) {
        const double ratio = c[i] / c[0];
        bool found = false;
        for (std::int64_t den = 1; den <= 4096 && !found; ++den) {
            const double num = ratio * static_cast<double>(den);
            const double rn = std::round(num);
            if (std::fabs(num - rn) < 1e-12 * den && rn >= 1.0) {
                p[i] = static_cast<std::int64_t>(rn);
                q[i] = den;
                found = true;
            }
        }
        if (!found) { commensurate = false; break; }
    }

    std::vector<std::int64_t> n(d, 0);
    if (commensurate) {
        std::int64_t Q = 1;
        for (int i = 0; i < d; ++i) Q = std::lcm(Q, q[i]);
        std::vector<std::int64_t> w(d);
        for (int i = 0; i < d; ++i) w[i] = p[i] * (Q / q[i]); // lambda * Q / c_0 weights
        std::map<std::int64_t, std::int64_t> acc;
        std::int64_t key_cut = static_cast<std::int64_t>(std::floor(cutoff * Q / c[0] + 0.5));
        // recursive odometer over the box
        std::vector<std::int64_t> idx(d, 0);
        for (int i = 0; i < d; ++i) n[i] = -n_max[i];
        while (true) {
            std::int64_t key = 0;
            for (int i = 0; i < d; ++i) key += n[i] * n[i] * w[i];
            if (key <= key_cut) acc[key] += 1;
            int i = 0;
            for (; i < d; ++i) {
                if (n[i] < n_max[i]) { ++n[i]; break; }
                n[i] = -n_max[i];
            }
            if (i == d) break;
        }
        for (const auto& [key, mult] : acc) {
            const double lam = static_cast<double>(key) * c[0] / static_cast<double>(Q);
            if (lam <= cutoff) sp.ladder.push_back({lam, mult});
        }
    } else {
        std::vector<double> vals;
        for (int i = 0; i < d; ++i) n[i] = -n_max[i];
        while (true) {
            double lam = 0;
            for (int i = 0; i < d; ++i) lam += c[i] * static_cast<double>(n[i] * n[i]);
            if (lam <= cutoff) vals.push_back(lam);
            int i = 0;
            for (; i < d; ++i) {
                if (n[i] < n_max[i]) { ++n[i]; break; }
                n[i] = -n_max[i];
            }
            if (i == d) break;
        }
        std::sort(vals.begin(), vals.end());
        for (double lam : vals) {
            if (!sp.ladder.empty() && lam - sp.ladder.back().lambda <= 1e-12)
                sp.ladder.back().mult += 1;
            else
                sp.ladder.push_back({lam, 1});
        }
    }
    if (sp.ladder.size() > budget)
        throw cutoff_too_large("torus ladder exceeds the entry budget");
    return sp;
}

struct shifted_entry {
    double mu = 0.0;
    std::int64_t mult = 0;
    double lambda = 0.0;
};

// mu_n = lambda_n + xi R_gamma with entries mu < delta removed
struct shifted_spectrum {
    manifold_spectrum base;
    double xi = 0.0;
    double delta = 0.0;
    std::vector<shifted_entry> mu_ladder;
};

inline shifted_spectrum shift_and_cut(const manifold_spectrum& base, double xi, double delta) {
    shifted_spectrum out;
    out.base = base;
    out.xi = xi;
    out.delta = delta;
    for (const auto& e : base.ladder) {
        const double mu = e.lambda + xi * base.R_gamma;
        if (mu >= delta) out.mu_ladder.push_back({mu, e.mult, e.lambda});
    }
    if (out.mu_ladder.empty()) throw empty_spectrum("infrared cutoff removed every mode");
    return out;
}

struct zeta_result {
    double partial_sum = 0.0;
    double tail_bound = 0.0;
    std::size_t terms_used = 0;
};

// partial sum of sum_n mult_n lambda_n^{-s} over positive eigenvalues with a
// Weyl-law tail estimate N(Lambda) ~ C Lambda^{d/2}
inline zeta_result zeta_partial(const manifold_spectrum& base, double s, std::size_t n_terms) {
    if (!(s > 0.5 * base.d))
        throw divergent_series("zeta series requires s > d/2");
    zeta_result out;
    double lam_last = 0.0;
    double count = 0.0;
    for (const auto& e : base.ladder) {
        if (e.lambda <= 0.0) continue;
        if (out.terms_used >= n_terms) break;
        out.partial_sum += static_cast<double>(e.mult) * std::pow(e.lambda, -s);
        lam_last = e.lambda;
        count += static_cast<double>(e.mult);
        ++out.terms_used;
    }
    if (lam_last > 0.0 && count > 0.0) {
        const double weyl_c = count / std::pow(lam_last, 0.5 * base.d);
        out.tail_bound = weyl_c * (0.5 * base.d) / (s - 0.5 * base.d) *
                         std::pow(lam_last, 0.5 * base.d - s);
    }
    return out;
}

} // namespace kgflrw
