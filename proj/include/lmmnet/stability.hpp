#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

#include "types.hpp"

namespace lmmnet {

// rho[i], sigma[i] hold the coefficient of chi^i.
struct GeneratingPolynomials {
    std::vector<double> rho;
    std::vector<double> sigma;
};

struct ReducedQuadratic {
    double p = 0.0;
    double q = 0.0;
};

inline GeneratingPolynomials generating_polynomials(const SchemeCoefficients& s) {
    const std::size_t k = s.k();
    GeneratingPolynomials g{std::vector<double>(k + 1, 0.0), std::vector<double>(k + 1, 0.0)};
    for (std::size_t i = 0; i < k; ++i) {
        g.rho[i] = s.alpha[i];
        g.sigma[i] = s.beta[i];
    }
    g.rho[k] = 1.0;
    return g;
}

inline double poly_eval(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
}

inline double poly_derivative_at_one(const std::vector<double>& c) {
    double acc = 0.0;
    for (std::size_t i = 1; i < c.size(); ++i) acc += static_cast<double>(i) * c[i];
    return acc;
}

inline bool check_consistency(const SchemeCoefficients& s, double tol) {
    const auto g = generating_polynomials(s);
    const double r1 = poly_eval(g.rho, 1.0);
    const double d1 = poly_derivative_at_one(g.rho) - poly_eval(g.sigma, 1.0);
    return std::abs(r1) <= tol && std::abs(d1) <= tol;
}

// psi(z) = (1-z)^k rho((1+z)/(1-z)) for k = 2, 3. Input alpha ascending
// (alpha_0, ..., alpha_{k-1}); output highest degree first.
inline std::vector<double> hurwitz_transform(const std::vector<double>& alpha) {
    if (alpha.size() == 2) {
        const double a0 = alpha[0], a1 = alpha[1];
        return {1.0 - a1 + a0, 2.0 * (1.0 - a0), 1.0 + a1 + a0};
    }
    if (alpha.size() == 3) {
        const double a0 = alpha[0], a1 = alpha[1], a2 = alpha[2];
        return {1.0 - a2 + a1 - a0, 3.0 - a2 - a1 + 3.0 * a0, 3.0 + a2 - a1 - 3.0 * a0,
                1.0 + a2 + a1 + a0};
    }
    throw std::invalid_argument("hurwitz_transform: alpha must have length 2 or 3");
}

// Margins g_i > 0 of the Routh-Hurwitz inequalities.
inline std::array<double, 3> quadratic_margins(double p, double q) {
    return {1.0 - p + q, 1.0 - q, 1.0 + p + q};
}

// alpha = (alpha_0, alpha_1, alpha_2)
inline std::array<double, 5> cubic_margins(const double* alpha) {
    const double a0 = alpha[0], a1 = alpha[1], a2 = alpha[2];
    return {1.0 - a2 + a1 - a0, 1.0 + a2 + a1 + a0, 1.0 - a1 + a2 * a0 - a0 * a0, 1.0 - a0,
            1.0 + a0};
}

inline bool satisfies_root_condition_quadratic(double p, double q) {
    const auto g = quadratic_margins(p, q);
    return std::all_of(g.begin(), g.end(), [](double v) { return v > 0.0; });
}

inline bool satisfies_root_condition_cubic(const std::vector<double>& alpha) {
    if (alpha.size() != 3) throw std::invalid_argument("cubic root condition needs 3 alphas");
    const auto g = cubic_margins(alpha.data());
    return std::all_of(g.begin(), g.end(), [](double v) { return v > 0.0; });
}

// Roots via companion-matrix eigenvalues; coefficients ascending, any leading term.
inline std::vector<std::complex<double>> polynomial_roots(const std::vector<double>& c) {
    std::size_t n = c.size();
    while (n > 1 && c[n - 1] == 0.0) --n;
    const std::size_t deg = n - 1;
    if (deg == 0) return {};
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(deg),
                                                 static_cast<Eigen::Index>(deg));
    const double lead = c[deg];
    for (std::size_t i = 1; i < deg; ++i)
        comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    for (std::size_t i = 0; i < deg; ++i)
        comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(deg - 1)) = -c[i] / lead;
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    std::vector<std::complex<double>> roots;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) roots.push_back(es.eigenvalues()[i]);
    return roots;
}

inline void require_monic(const std::vector<double>& rho) {
    if (rho.size() < 3 || rho.size() > 4) throw std::invalid_argument("root oracle: degree must be 2 or 3");
    if (rho.back() != 1.0) throw std::invalid_argument("root oracle: polynomial must be monic");
}

// Distance of the closest root modulus from the unit circle.
inline double unit_circle_distance(const std::vector<double>& rho) {
    double d = INFINITY;
    for (auto r : polynomial_roots(rho)) d = std::min(d, std::abs(std::abs(r) - 1.0));
    return d;
}

// All roots strictly inside the disc |chi| < 1 - tol_strict.
inline bool root_condition_oracle_strict(const std::vector<double>& rho, double tol_strict = 0.0) {
    require_monic(rho);
    for (auto r : polynomial_roots(rho))
        if (!(std::abs(r) < 1.0 - tol_strict)) return false;
    return true;
}

// Classical root condition: |chi| <= 1, roots on the circle simple. Roots
// within `tol` of each other count as repeated.
inline bool root_condition_oracle_lenient(const std::vector<double>& rho, double tol = 1e-6) {
    require_monic(rho);
    const auto roots = polynomial_roots(rho);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        const double m = std::abs(roots[i]);
        if (m > 1.0 + tol) return false;
        if (std::abs(m - 1.0) <= tol)
            for (std::size_t j = 0; j < roots.size(); ++j)
                if (j != i && std::abs(roots[j] - roots[i]) <= std::sqrt(tol)) return false;
    }
    return true;
}

// Hurwitz oracle: psi given highest degree first; true iff its degree is full
// and every root lies in the open left half-plane.
inline bool hurwitz_oracle(const std::vector<double>& psi_desc) {
    if (psi_desc.empty() || psi_desc.front() == 0.0) return false;
    std::vector<double> asc(psi_desc.rbegin(), psi_desc.rend());
    for (auto r : polynomial_roots(asc))
        if (!(r.real() < 0.0)) return false;
    return true;
}

// rho_3 = (chi - 1)(chi^2 + p chi + q); beta_2 closes rho'(1) = sigma(1).
inline SchemeCoefficients coefficients_from_pq(ReducedQuadratic pq, std::array<double, 2> beta01) {
    const double p = pq.p, q = pq.q;
    SchemeCoefficients s;
    s.alpha = {-q, q - p, p - 1.0};
    s.beta = {beta01[0], beta01[1], (1.0 + p + q) - beta01[0] - beta01[1]};
    return s;
}

}  // namespace lmmnet
