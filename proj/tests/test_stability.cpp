#include <random>

#include <gtest/gtest.h>

#include "lmmnet/integrate.hpp"
#include "lmmnet/stability.hpp"
#include "oracles.hpp"

using namespace lmmnet;

TEST(Consistency, AdamsFamily) {
    for (int k = 3; k <= 5; ++k) EXPECT_TRUE(check_consistency(adams_bashforth(k), 1e-14)) << k;
    auto s = adams_bashforth(3);
    s.beta[2] += 1e-3;
    EXPECT_FALSE(check_consistency(s, 1e-6));
}

TEST(Consistency, PolynomialsAreAscending) {
    const auto g = generating_polynomials(adams_bashforth(3));
    EXPECT_EQ(g.rho, (std::vector<double>{0, 0, -1, 1}));
    EXPECT_DOUBLE_EQ(poly_eval(g.sigma, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(poly_derivative_at_one(g.rho), 1.0);
}

TEST(Hurwitz, AdamsThree) {
    // (1-z)^3 rho((1+z)/(1-z)) for rho = chi^2 (chi - 1)
    EXPECT_EQ(hurwitz_transform({0, 0, -1}), (std::vector<double>{2, 4, 2, 0}));
    EXPECT_EQ(hurwitz_transform({0, -1}), (std::vector<double>{2, 2, 0}));
    EXPECT_THROW(hurwitz_transform({0, 0, 0, -1}), std::invalid_argument);
}

TEST(Hurwitz, TransformMatchesDirectExpansion) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int n = 0; n < 50; ++n) {
        const std::vector<double> a{u(rng), u(rng), u(rng)};
        const auto psi = hurwitz_transform(a);
        for (double z : {-0.7, -0.2, 0.3, 0.55}) {
            const double chi = (1 + z) / (1 - z);
            const double rho = a[0] + a[1] * chi + a[2] * chi * chi + chi * chi * chi;
            const double lhs = std::pow(1 - z, 3) * rho;
            const double rhs = ((psi[0] * z + psi[1]) * z + psi[2]) * z + psi[3];
            EXPECT_NEAR(lhs, rhs, 1e-10);
        }
    }
}

TEST(Margins, KnownPoints) {
    const double a3[3] = {0, 0, -1};
    const auto g = cubic_margins(a3);
    EXPECT_EQ(g, (std::array<double, 5>{2, 0, 1, 1, 1}));
    EXPECT_FALSE(satisfies_root_condition_cubic({0, 0, -1}));  // strict: consistency root on the circle
    EXPECT_TRUE(satisfies_root_condition_quadratic(0, 0));
    EXPECT_EQ(quadratic_margins(0.5, 0.25), (std::array<double, 3>{0.75, 0.75, 1.75}));
    EXPECT_FALSE(satisfies_root_condition_quadratic(0, 1));
    EXPECT_THROW(satisfies_root_condition_cubic({0, 1}), std::invalid_argument);
}

TEST(RootOracle, StrictAndLenient) {
    EXPECT_TRUE(root_condition_oracle_strict({0.1, 0.2, 0.3, 1.0}) ==
                satisfies_root_condition_cubic({0.1, 0.2, 0.3}));
    // the consistency root sits on the circle: inside the band where the strict oracle is not decisive
    EXPECT_LT(unit_circle_distance({0, 0, -1, 1}), 1e-12);
    EXPECT_TRUE(root_condition_oracle_lenient({0, 0, -1, 1}));
    EXPECT_FALSE(root_condition_oracle_lenient({0, 1, 2, 1}));   // chi (chi + 1)^2
    EXPECT_FALSE(root_condition_oracle_lenient({1, -2, 1}));     // double root at 1
    EXPECT_THROW(root_condition_oracle_strict({0, 0, 2}), std::invalid_argument);
    EXPECT_THROW(root_condition_oracle_strict({1, 1, 1, 1, 1}), std::invalid_argument);
    EXPECT_NEAR(unit_circle_distance({-0.25, 0, 1}), 0.5, 1e-14);
}

TEST(RootOracle, MarginsAgreeAwayFromBoundary) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3, 3);
    int disagreements = 0, checked = 0;
    for (int n = 0; n < 2000; ++n) {
        const std::vector<double> a{u(rng), u(rng), u(rng)};
        const std::vector<double> rho{a[0], a[1], a[2], 1.0};
        if (unit_circle_distance(rho) < 1e-9) continue;
        ++checked;
        disagreements += satisfies_root_condition_cubic(a) != root_condition_oracle_strict(rho);
        EXPECT_EQ(satisfies_root_condition_cubic(a), hurwitz_oracle(hurwitz_transform(a)));
    }
    EXPECT_EQ(disagreements, 0);
    EXPECT_GT(checked, 1900);
}

TEST(RootOracle, QuadraticMarginsAgree) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-2.5, 2.5);
    for (int n = 0; n < 2000; ++n) {
        const double p = u(rng), q = u(rng);
        const std::vector<double> rho{q, p, 1.0};
        if (unit_circle_distance(rho) < 1e-9) continue;
        EXPECT_EQ(satisfies_root_condition_quadratic(p, q), root_condition_oracle_strict(rho));
    }
}

TEST(FromPq, ConsistentAndFactorised) {
    const auto s = coefficients_from_pq({0.3, -0.2}, {0.1, 0.4});
    EXPECT_TRUE(check_consistency(s, 1e-14));
    const auto roots = polynomial_roots(generating_polynomials(s).rho);
    double best = 1e9;
    for (auto r : roots) best = std::min(best, std::abs(r - 1.0));
    EXPECT_LT(best, 1e-12);
    const auto a3 = coefficients_from_pq({0, 0}, {5.0 / 12, -4.0 / 3});
    EXPECT_EQ(a3.alpha, (std::vector<double>{-0.0, 0.0, -1.0}));
    EXPECT_NEAR(a3.beta[2], 23.0 / 12, 1e-15);
}

TEST(Oracle, RandomStableSchemesAreStable) {
    std::mt19937_64 rng(3);
    for (int n = 0; n < 100; ++n) {
        const auto s = oracle::random_stable_scheme(rng);
        EXPECT_TRUE(root_condition_oracle_strict(generating_polynomials(s).rho));
    }
}
